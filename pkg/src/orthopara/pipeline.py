"""Two-stage enhancement: rotational filtering by desorption energy, then
orientation-dependent conversion on a catalyst.

A population is a list of weighted bins ``(j, m_j, E_t)``. Rotational
character (CLR / HLR / isotropic) is a property of the m_j distribution, so
the conversion stage classifies each ``(j, E_t)`` group by its quadrupole
alignment and applies one rate to all of its bins.
"""

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import NamedTuple

from orthopara.alignment import (
    FilterParams,
    Rotation,
    alignment_bounds,
    alignment_from_weights,
    classify,
    dqf_alignment_model,
)

MODES = ("slow", "fast", "none")


class Bin(NamedTuple):
    j: int
    mj: int
    et: float
    weight: float


@dataclass(frozen=True)
class MoleculePopulation:
    bins: tuple

    def __post_init__(self):
        bins = tuple(b if isinstance(b, Bin) else Bin(*b) for b in self.bins)
        for b in bins:
            if b.j < 1 or abs(b.mj) > b.j:
                raise ValueError(f"need j >= 1 and |m_j| <= j, got {b}")
            if not b.et >= 0 or not b.weight >= 0:
                raise ValueError(f"translational energy and weight must be non-negative: {b}")
        object.__setattr__(self, "bins", bins)

    @property
    def total_weight(self):
        return math.fsum(b.weight for b in self.bins)

    def groups(self):
        """``{(j, E_t): {m_j: weight}}`` in sorted key order."""
        out = defaultdict(lambda: defaultdict(float))
        for b in self.bins:
            out[(b.j, b.et)][b.mj] += b.weight
        return {key: dict(out[key]) for key in sorted(out)}

    def mean_alignment(self):
        """Population-weighted quadrupole alignment over all bins."""
        num = math.fsum(b.weight * (3 * b.mj**2 - b.j * (b.j + 1)) for b in self.bins)
        den = math.fsum(b.weight * b.j * (b.j + 1) for b in self.bins)
        if not den > 0:
            raise ValueError("population has zero total weight")
        return num / den

    @classmethod
    def from_csv(cls, text):
        rows = [r for r in csv.reader(io.StringIO(text)) if r and any(f.strip() for f in r)]
        if not rows or [f.strip() for f in rows[0]] != ["j", "mj", "et_ev", "weight"]:
            raise ValueError("population CSV must start with header j,mj,et_ev,weight")
        bins = []
        for lineno, (j, mj, et, w) in enumerate(rows[1:], start=2):
            try:
                bins.append(Bin(int(j), int(mj), float(et), float(w)))
            except ValueError as exc:
                raise ValueError(f"row {lineno}: {exc}") from None
        return cls(tuple(bins))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "mj", "et_ev", "weight"])
        for b in self.bins:
            w.writerow([b.j, b.mj, repr(b.et), repr(b.weight)])
        return buf.getvalue()


@dataclass(frozen=True)
class StageReport:
    input_weight: float
    output_weight: float
    converted_weight: float
    unconverted_weight: float
    mean_alignment: float
    conversion_probability: float
    enhancement: float

    def to_json(self):
        return json.dumps(asdict(self))


def _reskew(j, total, target):
    lo, hi = alignment_bounds(j)
    target = min(max(target, lo), hi)
    frac_edge = (target - lo) / (hi - lo)
    return [
        (-j, 0.5 * frac_edge * total),
        (0, (1.0 - frac_edge) * total),
        (j, 0.5 * frac_edge * total),
    ]


def dqf_filter(pop, mode, params=FilterParams()):
    """Keep slow (E_t < V_min) or fast (E_t > V_min) desorbers and align them.

    Inside each surviving ``(j, E_t)`` group the weight is moved onto
    ``m_j = 0`` and ``m_j = +-j`` in the proportion that gives the alignment
    predicted by :func:`dqf_alignment_model`.
    """
    if mode == "none":
        return pop
    if mode == "slow":
        kept = [b for b in pop.bins if b.et < params.v_min]
    elif mode == "fast":
        kept = [b for b in pop.bins if b.et > params.v_min]
    else:
        raise ValueError(f"filter mode must be one of {MODES}, got {mode!r}")
    if not kept or not math.fsum(b.weight for b in kept) > 0:
        raise ValueError("empty selection")
    out = []
    for (j, et), weights in MoleculePopulation(tuple(kept)).groups().items():
        total = math.fsum(weights.values())
        target = dqf_alignment_model(et, params)
        out.extend(Bin(j, mj, et, w) for mj, w in _reskew(j, total, target))
    return MoleculePopulation(tuple(out))


def _check_rates(steric_ratio, base_rate, dwell):
    if not steric_ratio > 0:
        raise ValueError(f"steric ratio must be positive, got {steric_ratio}")
    if not base_rate > 0:
        raise ValueError(f"base rate must be positive, got {base_rate}")
    if not dwell > 0:
        raise ValueError(f"dwell time must be positive, got {dwell}")


def group_rate(j, weights, steric_ratio, base_rate):
    """Conversion rate (1/h) for one ``(j, E_t)`` group of bins."""
    kind = classify(alignment_from_weights(j, weights))
    if kind is Rotation.CLR:
        return base_rate * steric_ratio
    if kind is Rotation.HLR:
        return base_rate
    return base_rate * 0.5 * (1.0 + steric_ratio)


def se_convert(pop, steric_ratio, base_rate, dwell, baseline=None):
    """Convert the population on the catalyst for ``dwell`` hours.

    ``baseline`` is the conversion probability to compare against; by
    default it is the orientation-blind value ``1 - exp(-base_rate*dwell)``.
    """
    _check_rates(steric_ratio, base_rate, dwell)
    total = pop.total_weight
    if not total > 0:
        raise ValueError("population has zero total weight")
    converted = []
    for (j, _), weights in pop.groups().items():
        gw = math.fsum(weights.values())
        if gw == 0:
            continue
        rate = group_rate(j, weights, steric_ratio, base_rate)
        converted.append(gw * -math.expm1(-rate * dwell))
    conv = math.fsum(converted)
    prob = conv / total
    if baseline is None:
        baseline = -math.expm1(-base_rate * dwell)
    return StageReport(
        input_weight=total,
        output_weight=total,
        converted_weight=conv,
        unconverted_weight=total - conv,
        mean_alignment=pop.mean_alignment(),
        conversion_probability=prob,
        enhancement=prob / baseline,
    )


def run_pipeline(pop, mode, params, steric_ratio, base_rate, dwell):
    """Filter then convert; enhancement is relative to the unfiltered stream."""
    unfiltered = se_convert(pop, steric_ratio, base_rate, dwell)
    filtered = dqf_filter(pop, mode, params)
    report = se_convert(filtered, steric_ratio, base_rate, dwell,
                        baseline=unfiltered.conversion_probability)
    return StageReport(**{**asdict(report), "input_weight": pop.total_weight})


def enhancement(pop, params, steric_ratio, base_rate, dwell):
    """Conversion probability of the slow-filtered stream over the unfiltered one."""
    return run_pipeline(pop, "slow", params, steric_ratio, base_rate, dwell).enhancement
