"""Rigid-rotor rotational thermodynamics of ortho and para H2.

Energies are in meV, temperatures in K, heat capacities per molecule in
units of k_B. Para levels are even j (nuclear spin weight 1), ortho levels
odd j (weight 3).
"""

from dataclasses import dataclass

import numpy as np

K_B = 0.0861733  # meV/K
MEV_TO_KJ_PER_MOL = 0.0964853  # 1 meV per molecule times N_A
CONVERGENCE_TOL = 1e-12

SPECIES = ("para", "ortho", "normal", "equilibrium")


class TruncationError(ValueError):
    pass


@dataclass(frozen=True)
class RotationalModel:
    """Rotor constant ``b`` (meV) and level cutoff ``j_max``.

    ``b = 7.54`` meV places j=1 at 15.08 meV above j=0. The default cutoff
    is converged up to roughly 1200 K; raise ``j_max`` for hotter gas.
    """

    b: float = 7.54
    j_max: int = 20

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("rotational constant must be positive")
        if self.j_max < 5:
            raise ValueError("j_max must be at least 5")

    def levels(self):
        j = np.arange(self.j_max + 1)
        return j, self.b * j * (j + 1)

    def _boltzmann(self, T):
        if not T > 0:
            raise ValueError(f"temperature must be positive, got {T}")
        j, e = self.levels()
        w = (2 * j + 1) * np.exp(-e / (K_B * T))
        # j_max and j_max - 1 are the last members of each parity series
        for tail, series in ((w[-1], w[j % 2 == j[-1] % 2]), (w[-2], w[j % 2 != j[-1] % 2])):
            if tail > CONVERGENCE_TOL * series.sum():
                raise TruncationError(
                    f"rotational sums not converged at T={T} K with "
                    f"j_max={self.j_max}; increase j_max"
                )
        return j, e, w


def rot_energy(model, j):
    if j < 0:
        raise ValueError(f"j must be non-negative, got {j}")
    return model.b * j * (j + 1)


def equilibrium_ortho_fraction(model, T):
    j, _, w = model._boltzmann(T)
    z_even = w[j % 2 == 0].sum()
    z_odd = w[j % 2 == 1].sum()
    return float(3 * z_odd / (z_even + 3 * z_odd))


def _species_stats(model, T, parity):
    j, e, w = model._boltzmann(T)
    mask = j % 2 == parity
    p = w[mask] / w[mask].sum()
    mean = (p * e[mask]).sum()
    var = (p * (e[mask] - mean) ** 2).sum()
    return mean, var


def mean_energy_equilibrium(model, T):
    """Mean rotational energy (meV) of gas in ortho/para equilibrium."""
    j, e, w = model._boltzmann(T)
    g = np.where(j % 2 == 1, 3.0, 1.0) * w
    return float((g * e).sum() / g.sum())


def rotational_heat_capacity(model, species, T):
    """Rotational heat capacity per molecule in units of k_B.

    ``normal`` is the frozen 3:1 ortho:para mixture. ``equilibrium`` lets
    the ortho fraction follow T, so it includes the conversion heat; it is
    evaluated as a central difference of the mean energy.
    """
    kt = K_B * T
    if species == "para":
        return float(_species_stats(model, T, 0)[1] / kt**2)
    if species == "ortho":
        return float(_species_stats(model, T, 1)[1] / kt**2)
    if species == "normal":
        return (0.75 * rotational_heat_capacity(model, "ortho", T)
                + 0.25 * rotational_heat_capacity(model, "para", T))
    if species == "equilibrium":
        h = 1e-4 * T
        de = mean_energy_equilibrium(model, T + h) - mean_energy_equilibrium(model, T - h)
        return de / (2 * h) / K_B
    raise ValueError(f"species must be one of {SPECIES}, got {species!r}")


def conversion_heat(model, x_from, x_to):
    """Heat (kJ/mol) released when the ortho fraction drops from ``x_from`` to ``x_to``.

    Only the j=1 -> j=0 release is counted.
    """
    if not 0 <= x_to <= x_from <= 1:
        raise ValueError(f"need 0 <= x_to <= x_from <= 1, got x_from={x_from}, x_to={x_to}")
    return (x_from - x_to) * rot_energy(model, 1) * MEV_TO_KJ_PER_MOL
