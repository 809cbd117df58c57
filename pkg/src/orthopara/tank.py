"""Boil-off of a liquid hydrogen tank driven by ortho -> para conversion heat.

State is the liquid amount ``n`` (mol), the ortho fraction ``x`` and time
``t`` (h). With an effective rate ``g = gamma * k``::

    dx/dt = -g * x**order
    dn/dt = -(n * g * x**order * dE + Qdot) / L

Vapor leaves with the liquid's composition, so ``x`` does not depend on
``n``. With ``Qdot = 0`` this gives ``n(t) = n0 * exp(-(dE/L) * (x0 - x(t)))``.
"""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, replace
from typing import NamedTuple

from scipy import optimize

from orthopara import thermo

# order-2 rate reproducing 40 % boil-off of normal hydrogen in 100 h at the
# default latent and conversion heats
CALIBRATED_RATE = 9.688190746e-3

FULL_CONVERSION_HEAT = thermo.conversion_heat(thermo.RotationalModel(), 1.0, 0.0)

# RK4 on dx/dt = -c x is stable for c*dt below ~2.78
_MAX_STIFFNESS = 2.0


class TankState(NamedTuple):
    n: float
    x: float
    t: float = 0.0


@dataclass(frozen=True)
class TankParams:
    """Kinetic and thermal parameters.

    ``rate`` is in 1/h (per unit fraction for order 2), heats in kJ/mol,
    ``heat_leak`` in kJ/h. ``latent`` defaults to a literature value for
    the heat of vaporization of liquid H2.
    """

    order: int = 2
    rate: float = CALIBRATED_RATE
    latent: float = 0.899
    conversion_heat: float = FULL_CONVERSION_HEAT
    heat_leak: float = 0.0
    catalyst_gamma: float = 1.0

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError(f"kinetic order must be 1 or 2, got {self.order}")
        if not self.rate >= 0:
            raise ValueError("rate constant must be non-negative")
        if not self.latent > 0:
            raise ValueError("latent heat must be positive")
        if not self.conversion_heat >= 0:
            raise ValueError("conversion heat must be non-negative")
        if not self.heat_leak >= 0:
            raise ValueError("heat leak must be non-negative")
        if not self.catalyst_gamma >= 0:
            raise ValueError("catalyst multiplier must be non-negative")


def _check_state(state):
    if not 0 <= state.x <= 1:
        raise ValueError(f"ortho fraction must be in [0,1], got {state.x}")
    if not state.n >= 0:
        raise ValueError(f"liquid amount must be non-negative, got {state.n}")


def _rhs(n, x, p):
    conv = p.catalyst_gamma * p.rate * x**p.order
    leak = p.heat_leak if n > 0 else 0.0
    return -(n * conv * p.conversion_heat + leak) / p.latent, -conv


def step(state, params, dt):
    """One classical RK4 step, clamped back into the physical range."""
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    _check_state(state)
    n, x = state.n, state.x
    k1n, k1x = _rhs(n, x, params)
    k2n, k2x = _rhs(n + 0.5 * dt * k1n, x + 0.5 * dt * k1x, params)
    k3n, k3x = _rhs(n + 0.5 * dt * k2n, x + 0.5 * dt * k2x, params)
    k4n, k4x = _rhs(n + dt * k3n, x + dt * k3x, params)
    n += dt * (k1n + 2 * k2n + 2 * k3n + k4n) / 6
    x += dt * (k1x + 2 * k2x + 2 * k3x + k4x) / 6
    return TankState(max(n, 0.0), min(max(x, 0.0), 1.0), state.t + dt)


def simulate(state0, params, horizon, dt):
    """Integrate to ``horizon`` hours; the last step is shortened to land on it."""
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    _check_state(state0)
    nsteps = max(1, math.ceil(horizon / dt - 1e-9))
    traj = [state0]
    state = state0
    for i in range(1, nsteps + 1):
        t_next = state0.t + min(i * dt, horizon)
        state = step(state, params, t_next - state.t)._replace(t=t_next)
        traj.append(state)
    return traj


def boiloff_fraction(trajectory):
    if not trajectory:
        raise ValueError("empty trajectory")
    n0 = trajectory[0].n
    if n0 == 0:
        return 0.0
    return 1.0 - trajectory[-1].n / n0


def time_to_fraction(trajectory, x_threshold):
    """First sampled time at which the ortho fraction is at or below ``x_threshold``."""
    for s in trajectory:
        if s.x <= x_threshold:
            return s.t
    return math.inf


def max_boiloff(x0, params):
    """Boil-off after complete conversion, without heat leak."""
    return 1.0 - math.exp(-(params.conversion_heat / params.latent) * x0)


def calibrate_rate(x0, target_boiloff, at_hours, params=TankParams(), dt=0.1, n0=1.0):
    """Rate constant giving ``target_boiloff`` after ``at_hours``, by bisection.

    All fields of ``params`` except ``rate`` are honored.
    """
    if not 0 <= x0 <= 1:
        raise ValueError(f"x0 must be in [0,1], got {x0}")
    if target_boiloff < 0 or target_boiloff >= 1:
        raise ValueError(f"target boil-off must be in [0,1), got {target_boiloff}")

    def boiloff(k):
        traj = simulate(TankState(n0, x0), replace(params, rate=k), at_hours, dt)
        return boiloff_fraction(traj)

    base = boiloff(0.0)
    if abs(base - target_boiloff) <= 1e-12:
        return 0.0
    if target_boiloff < base:
        raise ValueError(
            f"target {target_boiloff} unreachable: heat leak alone gives {base:.6g}"
        )
    if x0 == 0 or params.catalyst_gamma == 0:
        raise ValueError(f"target {target_boiloff} unreachable: no ortho hydrogen converts")
    if params.heat_leak == 0 and target_boiloff >= max_boiloff(x0, params):
        raise ValueError(
            f"target {target_boiloff} unreachable: complete conversion of x0={x0} "
            f"gives at most {max_boiloff(x0, params):.6g}"
        )

    k_cap = _MAX_STIFFNESS / (params.catalyst_gamma * dt * x0 ** (params.order - 1))
    hi = min(1e-3, k_cap)
    while boiloff(hi) < target_boiloff:
        if hi >= k_cap:
            raise ValueError(
                f"target {target_boiloff} unreachable within {at_hours} h at dt={dt}"
            )
        hi = min(2 * hi, k_cap)
    return optimize.bisect(lambda k: boiloff(k) - target_boiloff, 0.0, hi,
                           xtol=1e-14, rtol=1e-12, maxiter=200)


def trajectory_to_csv(trajectory, fmt="{:.6g}".format):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t_h", "n_mol", "x_ortho"])
    for s in trajectory:
        w.writerow([fmt(s.t), fmt(s.n), fmt(s.x)])
    return buf.getvalue()


def trajectory_to_json(trajectory, params=None):
    doc = {"trajectory": [s._asdict() for s in trajectory]}
    if params is not None:
        doc["params"] = asdict(params)
    return json.dumps(doc)
