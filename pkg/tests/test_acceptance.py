"""Acceptance gate. Each test carries the number of the criterion it covers;
conftest.py prints the PASS/FAIL summary."""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from orthopara import cli, density, spin, tank, thermo
from orthopara.alignment import AlignmentTable, alignment_bounds, quadrupole_alignment
from orthopara.density import CubeFormatError, ProbeGeometry, parse_cube, serialize_cube
from orthopara.hyperfine import HyperfineParams, xi, yield_w
from orthopara.pipeline import Bin, MoleculePopulation, enhancement, run_pipeline, se_convert

HERE = Path(__file__).parent
criterion = pytest.mark.criterion


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.2f} s"


# ------------------------------------------------------------------ 1

@criterion(1)
def test_spin_oracle_equivalence():
    with Budget(1.0):
        sx = np.array([[0, 1], [1, 0]]) / 2
        sy = np.array([[0, -1j], [1j, 0]]) / 2
        sz = np.array([[1, 0], [0, -1]]) / 2
        up, dn = np.array([1, 0]), np.array([0, 1])
        para = (np.kron(up, dn) - np.kron(dn, up)) / math.sqrt(2)
        ortho = {1: np.kron(up, up), 0: (np.kron(up, dn) + np.kron(dn, up)) / math.sqrt(2),
                 -1: np.kron(dn, dn)}
        for m, state in ortho.items():
            anti = [para.conj() @ (np.kron(s, np.eye(2)) - np.kron(np.eye(2), s)) @ state
                    for s in (sx, sy, sz)]
            sym = [para.conj() @ (np.kron(s, np.eye(2)) + np.kron(np.eye(2), s)) @ state
                   for s in (sx, sy, sz)]
            got = spin.transition_vector(m)
            assert np.max(np.abs(got - np.array(anti))) <= 1e-12
            assert all(v == 0 for v in sym)
        assert spin.ensemble_coupling_strength() == pytest.approx(1.0, abs=1e-12)


# ------------------------------------------------------------------ 2

def _boltzmann_fraction(T, b=7.54, kb=0.0861733, jmax=200):
    zo = ze = 0.0
    for j in range(jmax + 1):
        w = (2 * j + 1) * math.exp(-b * j * (j + 1) / (kb * T))
        if j % 2:
            zo += 3 * w
        else:
            ze += w
    return zo / (zo + ze)


@criterion(2)
def test_equilibrium_statistics():
    with Budget(1.0):
        model = thermo.RotationalModel()
        x300 = thermo.equilibrium_ortho_fraction(model, 300.0)
        x20 = thermo.equilibrium_ortho_fraction(model, 20.4)
        assert x300 == pytest.approx(0.749, abs=0.002)
        assert x20 == pytest.approx(1.7e-3, abs=3e-4)
        assert x20 == pytest.approx(_boltzmann_fraction(20.4), rel=1e-12)
        temps = np.linspace(1.0, 1000.0, 400)
        xs = [thermo.equilibrium_ortho_fraction(model, t) for t in temps]
        assert all(b >= a for a, b in zip(xs, xs[1:]))
        assert thermo.equilibrium_ortho_fraction(model, 1.0) < 1e-30


# ------------------------------------------------------------------ 3

@criterion(3)
def test_rotational_spacing():
    model = thermo.RotationalModel()
    assert thermo.rot_energy(model, 1) - thermo.rot_energy(model, 0) == 15.08


# ------------------------------------------------------------------ 4

@criterion(4)
def test_tank_calibration():
    with Budget(5.0):
        params = tank.TankParams()
        k = tank.calibrate_rate(0.75, 0.40, 100.0, params)
        traj = tank.simulate(tank.TankState(1.0, 0.75), tank.TankParams(rate=k), 100.0, 0.1)
        assert tank.boiloff_fraction(traj) == pytest.approx(0.40, abs=0.005)
        # closed form for second order with no heat leak
        ratio = params.conversion_heat / params.latent
        x_end = 0.75 - math.log(1 / 0.6) / ratio
        k_closed = (0.75 / x_end - 1) / (0.75 * 100.0)
        assert k == pytest.approx(k_closed, rel=0.02)
        for s in traj:
            expected = math.exp(-ratio * (0.75 - s.x))
            assert abs(s.n - expected) <= 1e-6 * expected


# ------------------------------------------------------------------ 5

def _table(j, weights):
    return AlignmentTable([(j, m, 0.1, w) for m, w in weights.items()])


@criterion(5)
def test_alignment_factor():
    with Budget(2.0):
        assert quadrupole_alignment(_table(1, {0: 1.0}), 1, 0.1) == -1.0
        assert quadrupole_alignment(_table(1, {-1: 1, 0: 1, 1: 1}), 1, 0.1) == pytest.approx(
            0.0, abs=1e-15)
        assert quadrupole_alignment(_table(2, {-2: 1, 2: 1}), 2, 0.1) == pytest.approx(
            1.0, abs=1e-15)
        rng = np.random.default_rng(1000)
        for _ in range(1000):
            j = int(rng.integers(1, 11))
            weights = {m: float(rng.random()) for m in range(-j, j + 1)}
            t = _table(j, weights)
            a = quadrupole_alignment(t, j, 0.1)
            lo, hi = alignment_bounds(j)
            assert lo - 1e-12 <= a <= hi + 1e-12
            scale = float(10 ** rng.uniform(-6, 6))
            assert abs(quadrupole_alignment(t.scaled(scale), j, 0.1) - a) <= 1e-12


# ------------------------------------------------------------------ 6

@criterion(6)
def test_hyperfine_properties():
    with Budget(2.0):
        geom = ProbeGeometry()
        unit = HyperfineParams()
        zs = np.linspace(0.0, 3.0, 31)
        for field in (density.synthetic_field("exponential", 1.0, 0.5),
                      density.synthetic_field("gaussian", 1.0, 0.8)):
            for z in zs:
                assert xi(field, geom, unit, z, 90.0) == 0.0
                assert yield_w(field, geom, unit, z, 10.0) >= yield_w(field, geom, unit, z, 70.0)
                for theta in (0.0, 10.0, 35.0, 70.0):
                    a = xi(field, geom, unit, z, theta)
                    assert abs(xi(field, geom, unit, z, 180.0 - theta) + a) <= 1e-14
                    for lam in (-2.0, 0.3, 4.0):
                        p = HyperfineParams(lam)
                        assert xi(field, geom, p, z, theta) == pytest.approx(lam * a, rel=1e-14,
                                                                             abs=1e-300)
                        assert yield_w(field, geom, p, z, theta) == pytest.approx(
                            lam**2 * a**2, rel=1e-14, abs=1e-300)


# ------------------------------------------------------------------ 7

@criterion(7)
def test_probe_regression():
    mn = density.SANDWICH_PROBES["Mn"]
    geom, field = mn.field()
    got = density.probe_pair(field, geom, mn.Z, mn.theta)
    assert got.rho_a == pytest.approx(-0.0688, abs=1e-12)
    assert got.rho_b == pytest.approx(0.0225, abs=1e-12)
    assert abs(got.delta) == pytest.approx(0.0913, abs=1e-12)
    assert abs(abs(got.delta) - abs(mn.reported_net)) <= 2e-4
    assert mn.is_consistent()
    assert not density.SANDWICH_PROBES["Fe"].is_consistent()


# ------------------------------------------------------------------ 8

def _random_population(rng):
    bins = []
    for g in range(int(rng.integers(2, 6))):
        j = int(rng.integers(1, 5))
        et = float(rng.uniform(0.0, 0.45) if g % 2 == 0 else rng.uniform(0.55, 2.0))
        for m in range(-j, j + 1):
            bins.append(Bin(j, m, et, float(rng.uniform(0, 2))))
    return MoleculePopulation(tuple(bins))


@criterion(8)
def test_pipeline_enhancement_and_ordering():
    with Budget(5.0):
        mixed = MoleculePopulation((Bin(1, 0, 0.1, 1.0), Bin(1, -1, 0.2, 0.5),
                                    Bin(1, 1, 0.2, 0.5)))
        assert enhancement(mixed, cli.alignment.FilterParams(), 2.0, 1e-4, 1.0) == pytest.approx(
            4 / 3, abs=1e-3)
        params = cli.alignment.FilterParams()
        rng = np.random.default_rng(500)
        for _ in range(500):
            pop = _random_population(rng)
            rho = float(rng.uniform(1.0001, 10))
            r, tau = float(rng.uniform(1e-4, 3)), float(rng.uniform(1e-3, 5))
            none = se_convert(pop, rho, r, tau).conversion_probability
            slow = run_pipeline(pop, "slow", params, rho, r, tau).conversion_probability
            fast = run_pipeline(pop, "fast", params, rho, r, tau).conversion_probability
            assert slow >= none - 1e-12 and none >= fast - 1e-12


# ------------------------------------------------------------------ 9

@criterion(9)
def test_cube_parser():
    text = (HERE / "data" / "cube_2x2x2.cube").read_text()
    f = parse_cube(text)
    g = parse_cube(serialize_cube(f))
    for a, b in [(f.origin, g.origin), (f.steps, g.steps), (f.values, g.values)]:
        assert np.max(np.abs(np.asarray(a) - np.asarray(b))) <= 1e-10

    lines = text.splitlines()
    malformed = [
        "\n".join(lines[:2] + ["3 0 0 0"] + lines[3:]),      # atoms declared but missing
        "\n".join(lines[:-1]),                               # values cut short
        "\n".join(lines[:7] + [lines[7].replace("6.0", "six")]),
    ]
    for bad in malformed:
        with pytest.raises(CubeFormatError) as info:
            parse_cube(bad)
        assert isinstance(info.value.lineno, int) and info.value.lineno >= 1
        assert f"line {info.value.lineno}" in str(info.value)

    rng = np.random.default_rng(9)
    for _ in range(300):
        chars = list(text)
        for pos in rng.integers(0, len(chars), size=int(rng.integers(1, 4))):
            chars[pos] = rng.choice(list("x-9. \n"))
        try:
            parse_cube("".join(chars))
        except CubeFormatError:
            pass


# ------------------------------------------------------------------ 10

@criterion(10)
def test_every_subcommand_has_golden_files():
    from test_cli import CASES
    parser = cli.build_parser()
    subs = next(a for a in parser._actions if a.dest == "command").choices
    covered = {argv[0] for argv in CASES.values()}
    assert covered == set(subs)
    for name in CASES:
        for fmt in ("csv", "json"):
            assert (HERE / "golden" / f"{name}.{fmt}").is_file()
