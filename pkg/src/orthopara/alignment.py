"""Quadrupole rotational alignment of desorbing H2.

Desorption tables hold weights ``D`` already summed over the
surface-parallel translational channels, one row per ``(j, m_j, E_tot)``.
"""

import csv
import enum
import io
import math
from collections import defaultdict
from dataclasses import dataclass

CLASSIFY_EPS = 1e-9
ENERGY_ATOL = 1e-12


class Rotation(str, enum.Enum):
    CLR = "CLR"
    HLR = "HLR"
    ISOTROPIC = "isotropic"


@dataclass(frozen=True)
class AlignmentRow:
    j: int
    mj: int
    etot: float
    d: float

    def __post_init__(self):
        if self.j < 0 or abs(self.mj) > self.j:
            raise ValueError(f"need 0 <= |m_j| <= j, got j={self.j}, m_j={self.mj}")
        if not self.d >= 0:
            raise ValueError(f"desorption weight must be non-negative, got {self.d}")


class AlignmentTable:
    """Desorption weights keyed by ``(j, m_j, E_tot)``. Duplicate keys are summed."""

    def __init__(self, rows=()):
        merged = defaultdict(float)
        for row in rows:
            if not isinstance(row, AlignmentRow):
                row = AlignmentRow(*row)
            merged[(row.j, row.mj, row.etot)] += row.d
        self.rows = tuple(AlignmentRow(j, mj, e, d) for (j, mj, e), d in sorted(merged.items()))

    def __len__(self):
        return len(self.rows)

    def group(self, j, etot):
        return [r for r in self.rows if r.j == j and abs(r.etot - etot) <= ENERGY_ATOL]

    def scaled(self, factor):
        return AlignmentTable(AlignmentRow(r.j, r.mj, r.etot, r.d * factor) for r in self.rows)

    @classmethod
    def from_csv(cls, text):
        reader = csv.reader(io.StringIO(text))
        header = None
        rows = []
        for lineno, rec in enumerate(reader, start=1):
            if not rec or all(not f.strip() for f in rec):
                continue
            if header is None:
                header = [f.strip() for f in rec]
                if header != ["j", "mj", "etot_ev", "d"]:
                    raise ValueError(f"line {lineno}: expected header j,mj,etot_ev,d, got {rec}")
                continue
            try:
                j, mj, etot, d = rec
                rows.append(AlignmentRow(int(j), int(mj), float(etot), float(d)))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        if header is None:
            raise ValueError("empty alignment table")
        return cls(rows)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "mj", "etot_ev", "d"])
        for r in self.rows:
            w.writerow([r.j, r.mj, repr(r.etot), repr(r.d)])
        return buf.getvalue()


def alignment_from_weights(j, weights):
    """Alignment of an ``{m_j: weight}`` distribution within one ``j`` level."""
    if j == 0:
        raise ValueError("alignment undefined for j=0")
    jj = j * (j + 1)
    total = sum(weights.values())
    if not total > 0:
        raise ValueError(f"zero total desorption weight for j={j}")
    return sum((3 * m * m - jj) * w for m, w in weights.items()) / (jj * total)


def quadrupole_alignment(table, j, etot):
    if j == 0:
        raise ValueError("alignment undefined for j=0")
    weights = defaultdict(float)
    for r in table.group(j, etot):
        weights[r.mj] += r.d
    if not sum(weights.values()) > 0:
        raise ValueError(f"zero total desorption weight for j={j}, E_tot={etot}")
    return alignment_from_weights(j, weights)


def alignment_bounds(j):
    if j < 1:
        raise ValueError("alignment undefined for j=0")
    return -1.0, 3 * j / (j + 1) - 1


def classify(a):
    if a < -CLASSIFY_EPS:
        return Rotation.CLR
    if a > CLASSIFY_EPS:
        return Rotation.HLR
    return Rotation.ISOTROPIC


@dataclass(frozen=True)
class FilterParams:
    """Parameters of the translational-energy alignment model.

    The logistic shape and the slow/fast plateaus are a modeling choice;
    only ``v_min`` (the parallel-bond dissociation barrier, eV) carries a
    measured value.
    """

    v_min: float = 0.5
    a_slow: float = -0.5
    a_fast: float = 0.5
    width: float = 0.1

    def __post_init__(self):
        if not self.v_min > 0:
            raise ValueError("v_min must be positive")
        if not self.width > 0:
            raise ValueError("crossover width must be positive")
        if not self.a_slow < 0 < self.a_fast:
            raise ValueError("need a_slow < 0 < a_fast")


def dqf_alignment_model(et, params=FilterParams()):
    """Alignment of molecules desorbing with final translational energy ``et`` (eV)."""
    if et < 0:
        raise ValueError(f"translational energy must be non-negative, got {et}")
    x = (et - params.v_min) / params.width
    span = params.a_fast - params.a_slow
    # approach each plateau from its own side so saturation cannot overshoot
    tail = math.exp(-abs(x))
    if x <= 0:
        return params.a_slow + span * tail / (1.0 + tail)
    return params.a_fast - span * tail / (1.0 + tail)
