"""Hyperfine-contact conversion matrix element and relative yield.

The contact term puts Dirac deltas at the proton positions, so the electron
side of the matrix element reduces to the net spin density sampled at the
two protons::

    xi(Z, theta) = lambda_C * kappa * (rho_s(r_a) - rho_s(r_b))
    W(Z, theta)  = |xi(Z, theta)|**2

``kappa`` is the magnitude of the nuclear ortho -> para transition vector,
which is 1 for every ortho sublevel.
"""

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from orthopara import spin
from orthopara.density import probe_pair

MIN_HLR_YIELD = 1e-30


@dataclass(frozen=True)
class HyperfineParams:
    """Contact constant and ortho sublevel policy.

    ``sublevel`` is ``None`` for an unpolarized ortho ensemble, otherwise one
    of ``+1, 0, -1``.
    """

    lambda_c: float = 1.0
    sublevel: int | None = None

    def __post_init__(self):
        if not math.isfinite(self.lambda_c) or self.lambda_c == 0:
            raise ValueError(f"lambda_c must be finite and nonzero, got {self.lambda_c}")
        if self.sublevel not in (None, 1, 0, -1):
            raise ValueError(f"sublevel must be None, +1, 0 or -1, got {self.sublevel}")

    @property
    def kappa(self):
        if self.sublevel is None:
            return math.sqrt(spin.ensemble_coupling_strength())
        return math.sqrt(spin.coupling_norm(self.sublevel))


def xi(field, geom, params, Z, theta):
    return params.lambda_c * params.kappa * probe_pair(field, geom, Z, theta).delta


def yield_w(field, geom, params, Z, theta):
    return abs(xi(field, geom, params, Z, theta)) ** 2


@dataclass(frozen=True, eq=False)
class YieldCurve:
    """Dense (Z, theta) table of xi and W.

    ``xi`` and ``w`` have shape ``(len(thetas), len(z))``.
    """

    z: np.ndarray
    thetas: tuple
    xi: np.ndarray
    w: np.ndarray

    def row(self, theta):
        try:
            return self.thetas.index(theta)
        except ValueError:
            raise KeyError(f"theta {theta} not in curve (have {self.thetas})") from None

    def to_rows(self):
        for n, z in enumerate(self.z):
            out = [float(z)]
            for t in range(len(self.thetas)):
                out += [float(self.xi[t, n]), float(self.w[t, n])]
            yield out

    def header(self):
        cols = ["z_angstrom"]
        for theta in self.thetas:
            cols += [f"xi_{theta:g}", f"w_{theta:g}"]
        return cols

    def to_csv(self, fmt="{:.6g}".format):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header())
        for r in self.to_rows():
            writer.writerow([fmt(v) for v in r])
        return buf.getvalue()

    def to_dict(self):
        return {
            "z": self.z.tolist(),
            "thetas": list(self.thetas),
            "xi": self.xi.tolist(),
            "w": self.w.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def sweep(field, geom, params, z_values, thetas):
    """Evaluate xi and W on every (theta, Z) pair."""
    z = np.asarray(z_values, dtype=float)
    if z.ndim != 1 or z.size < 2:
        raise ValueError("Z range needs at least 2 samples")
    if np.any(np.diff(z) <= 0):
        raise ValueError("Z samples must be strictly increasing")
    thetas = tuple(float(t) for t in thetas)
    if not thetas:
        raise ValueError("theta list is empty")
    xis = np.array([[xi(field, geom, params, zz, t) for zz in z] for t in thetas])
    return YieldCurve(z=z, thetas=thetas, xi=xis, w=np.abs(xis) ** 2)


def find_extrema(curve, theta):
    """Interior extrema of xi(Z) at fixed theta.

    Uses sign changes of the first differences. A flat top or bottom is
    reported at its leftmost sample; endpoints never count.
    Returns a list of ``(Z, xi, "max" | "min")``.
    """
    values = curve.xi[curve.row(float(theta))]
    signs = np.sign(np.diff(values))
    found = []
    prev_sign, last_move = 0, -1
    for i, s in enumerate(signs):
        if s == 0:
            continue
        if prev_sign and s != prev_sign:
            k = last_move + 1
            found.append((float(curve.z[k]), float(values[k]), "max" if prev_sign > 0 else "min"))
        prev_sign, last_move = s, i
    return found


def steric_ratio(field, geom, params, Z, theta_clr=10.0, theta_hlr=70.0):
    """Yield advantage W(theta_clr) / W(theta_hlr) of cartwheel over helicopter rotors."""
    denom = yield_w(field, geom, params, Z, theta_hlr)
    if denom < MIN_HLR_YIELD:
        raise ValueError("HLR yield vanishes")
    return yield_w(field, geom, params, Z, theta_clr) / denom
