"""Electron spin-density fields and the two-proton probe.

Two kinds of field are supported: a volumetric grid (normally read from a
Gaussian-style cube file) sampled by trilinear interpolation, and analytic
radial profiles used as synthetic stand-ins. All lengths are Angstrom.

Cube layout handled by :func:`parse_cube`::

    comment line
    comment line
    natoms  ox oy oz            (Bohr)
    n1  ax ay az                (voxel step along axis 1, Bohr)
    n2  bx by bz
    n3  cx cy cz
    Z  charge  x y z            (natoms lines, Bohr)
    v v v v v v ...             (n1*n2*n3 values, third index fastest)
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

BOHR_TO_ANGSTROM = 0.529177

_HULL_TOL = 1e-9
_AXES = {
    "x": (1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
    "z": (0.0, 0.0, 1.0),
}


class CubeFormatError(ValueError):
    """Malformed cube input. ``lineno`` is 1-based."""

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class OutOfGridError(ValueError):
    pass


def _frozen(arr, dtype=float):
    arr = np.array(arr, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GridField:
    """Spin density on a (possibly skewed) regular grid.

    ``steps`` holds the three voxel step vectors as rows; node ``(i, j, k)``
    sits at ``origin + i*steps[0] + j*steps[1] + k*steps[2]``.
    """

    origin: np.ndarray
    steps: np.ndarray
    values: np.ndarray
    atoms: tuple = ()
    kind = "grid"

    def __post_init__(self):
        origin = _frozen(self.origin)
        steps = _frozen(self.steps)
        values = _frozen(self.values)
        if origin.shape != (3,) or steps.shape != (3, 3):
            raise ValueError("origin must be a 3-vector and steps a 3x3 array")
        if values.ndim != 3 or min(values.shape) < 2:
            raise ValueError(f"grid needs >= 2 nodes along each axis, got {values.shape}")
        if abs(np.linalg.det(steps)) < 1e-12:
            raise ValueError("voxel step vectors are linearly dependent")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "atoms", tuple(self.atoms))

    @property
    def shape(self):
        return self.values.shape

    def node_position(self, i, j, k):
        return self.origin + np.array([i, j, k], dtype=float) @ self.steps

    def fractional_index(self, point):
        """Continuous grid index of ``point``."""
        return np.linalg.solve(self.steps.T, np.asarray(point, dtype=float) - self.origin)

    def sample(self, point):
        frac = self.fractional_index(point)
        upper = np.array(self.values.shape) - 1
        if np.any(frac < -_HULL_TOL) or np.any(frac > upper + _HULL_TOL):
            raise OutOfGridError(f"point {tuple(np.asarray(point))} lies outside the grid")
        frac = np.clip(frac, 0, upper)
        base = np.minimum(np.floor(frac).astype(int), upper - 1)
        tx, ty, tz = frac - base
        i, j, k = base
        c = self.values[i:i + 2, j:j + 2, k:k + 2]
        # collapse one axis at a time
        c = c[0] * (1 - tx) + c[1] * tx
        c = c[0] * (1 - ty) + c[1] * ty
        return float(c[0] * (1 - tz) + c[1] * tz)


@dataclass(frozen=True, eq=False)
class AnalyticField:
    """Radially symmetric profile ``A*exp(-r/r0)`` or ``A*exp(-(r/r0)**2)``."""

    profile: str
    amplitude: float
    decay_length: float
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    kind = "analytic"

    def __post_init__(self):
        if self.profile not in ("exponential", "gaussian"):
            raise ValueError(f"unknown profile {self.profile!r}")
        if not self.decay_length > 0:
            raise ValueError(f"decay length must be positive, got {self.decay_length}")
        center = _frozen(self.center)
        if center.shape != (3,):
            raise ValueError("center must be a 3-vector")
        object.__setattr__(self, "center", center)

    def sample(self, point):
        r = float(np.linalg.norm(np.asarray(point, dtype=float) - self.center))
        if self.profile == "exponential":
            return self.amplitude * math.exp(-r / self.decay_length)
        return self.amplitude * math.exp(-(r / self.decay_length) ** 2)


def synthetic_field(kind, amplitude, r0, center=(0.0, 0.0, 0.0)):
    return AnalyticField(kind, float(amplitude), float(r0), np.asarray(center, dtype=float))


def sample(field, point):
    """Spin density of ``field`` at ``point`` (Angstrom)."""
    return field.sample(point)


# --------------------------------------------------------------------------
# cube I/O


def _numbers(tokens, types, lineno, what):
    if len(tokens) < len(types):
        raise CubeFormatError(lineno, f"{what}: expected {len(types)} fields, got {len(tokens)}")
    out = []
    for tok, typ in zip(tokens, types):
        try:
            out.append(typ(tok))
        except ValueError:
            raise CubeFormatError(lineno, f"{what}: bad {typ.__name__} token {tok!r}") from None
    return out


def parse_cube(data):
    """Parse cube text (``bytes`` or ``str``) into a :class:`GridField`.

    Positions are converted from Bohr to Angstrom; values are kept as stored.
    """
    if isinstance(data, bytes):
        data = data.decode("ascii", errors="replace")
    lines = data.splitlines()
    if len(lines) < 6:
        raise CubeFormatError(len(lines) + 1, "truncated header")

    tokens = lines[2].split()
    if len(tokens) not in (4, 5):
        raise CubeFormatError(3, "atom count / origin: expected natoms and 3 floats")
    natoms, *origin = _numbers(tokens, (int, float, float, float), 3, "atom count / origin")
    if natoms < 0:
        raise CubeFormatError(3, "negative atom count (orbital cube files) is not supported")

    dims, steps = [], []
    for n in range(3):
        lineno = 4 + n
        size, *vec = _numbers(lines[3 + n].split(), (int, float, float, float), lineno,
                              f"grid axis {n + 1}")
        if size < 0:
            raise CubeFormatError(lineno, "negative grid size (Angstrom-unit cube) is not supported")
        if size < 2:
            raise CubeFormatError(lineno, f"grid axis {n + 1} needs at least 2 points, got {size}")
        dims.append(size)
        steps.append(vec)

    atoms = []
    for n in range(natoms):
        lineno = 7 + n
        toks = lines[lineno - 1].split() if lineno <= len(lines) else []
        try:
            if len(toks) != 5:
                raise ValueError
            z = int(toks[0])
            rest = [float(t) for t in toks[1:]]
        except ValueError:
            raise CubeFormatError(
                lineno, f"atom count mismatch: header declares {natoms} atoms, found {n}"
            ) from None
        atoms.append((z, rest[0], tuple(BOHR_TO_ANGSTROM * np.array(rest[1:]))))

    expected = dims[0] * dims[1] * dims[2]
    values = []
    last_line = 6 + natoms
    for lineno in range(7 + natoms, len(lines) + 1):
        for tok in lines[lineno - 1].split():
            try:
                values.append(float(tok))
            except ValueError:
                raise CubeFormatError(lineno, f"non-numeric value {tok!r}") from None
            last_line = lineno
    if len(values) != expected:
        raise CubeFormatError(
            last_line, f"value count mismatch: expected {expected} values, found {len(values)}"
        )

    try:
        return GridField(
            origin=BOHR_TO_ANGSTROM * np.array(origin),
            steps=BOHR_TO_ANGSTROM * np.array(steps),
            values=np.array(values).reshape(dims),
            atoms=atoms,
        )
    except ValueError as exc:
        raise CubeFormatError(4, str(exc)) from None


def read_cube(path):
    with open(path, "rb") as fh:
        return parse_cube(fh.read())


def serialize_cube(field, comment="spin density"):
    """Write a :class:`GridField` back to cube text (Bohr units)."""
    scale = 1.0 / BOHR_TO_ANGSTROM

    def row(vals):
        return " ".join(f"{v: .16e}" for v in vals)

    out = [comment, "written by orthopara"]
    out.append(f"{len(field.atoms):5d} " + row(field.origin * scale))
    for n, step in zip(field.values.shape, field.steps):
        out.append(f"{n:5d} " + row(step * scale))
    for z, charge, pos in field.atoms:
        out.append(f"{z:5d} " + row([charge, *(np.asarray(pos) * scale)]))
    flat = field.values.ravel()
    for start in range(0, flat.size, 6):
        out.append(row(flat[start:start + 6]))
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# probe geometry


def _perpendicular(axis):
    ref = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 0.0, 1.0])
    e1 = ref - (ref @ axis) * axis
    return e1 / np.linalg.norm(e1)


@dataclass(frozen=True, eq=False)
class ProbeGeometry:
    """Frame in which an H2 molecule approaches a magnetic center.

    ``axis`` is the approach direction (``"x"``, ``"y"``, ``"z"`` or a unit
    3-vector) and ``center`` the ion position. The bond direction at polar
    angle ``theta`` from the axis is tilted toward a fixed perpendicular
    ``e1``; for the named axes ``e1`` is +x, except for the x axis where it
    is +z. ``phi`` rotates the tilt about the axis.
    """

    axis: object = "z"
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    bond_length: float = 0.74
    phi: float = 0.0

    def __post_init__(self):
        axis = _AXES.get(self.axis, self.axis) if isinstance(self.axis, str) else self.axis
        if isinstance(axis, str):
            raise ValueError(f"unknown axis {self.axis!r}")
        axis = np.asarray(axis, dtype=float)
        if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise ValueError("axis must be a unit 3-vector")
        if not self.bond_length > 0:
            raise ValueError("bond length must be positive")
        object.__setattr__(self, "axis", _frozen(axis))
        object.__setattr__(self, "center", _frozen(self.center))

    def bond_direction(self, theta):
        e1 = _perpendicular(self.axis)
        e2 = np.cross(self.axis, e1)
        # measured from the perpendicular so theta=90 and the 180-theta flip are exact
        off, ph = math.radians(90.0 - theta), math.radians(self.phi)
        tilt = math.cos(ph) * e1 + math.sin(ph) * e2
        return math.sin(off) * self.axis + math.cos(off) * tilt

    def proton_positions(self, Z, theta):
        if Z < 0:
            raise ValueError(f"Z must be non-negative, got {Z}")
        if not 0 <= theta <= 180:
            raise ValueError(f"theta must lie in [0, 180] degrees, got {theta}")
        mid = self.center + Z * self.axis
        half = 0.5 * self.bond_length * self.bond_direction(theta)
        return mid + half, mid - half


class ProbeResult(NamedTuple):
    rho_a: float
    rho_b: float
    delta: float


def probe_pair(field, geom, Z, theta):
    """Spin density at both protons and their difference ``rho_a - rho_b``."""
    ra, rb = geom.proton_positions(Z, theta)
    rho_a = field.sample(ra)
    rho_b = field.sample(rb)
    return ProbeResult(rho_a, rho_b, rho_a - rho_b)


def two_point_field(geom, Z, theta, rho_a, rho_b):
    """Smallest grid field whose probe at ``(Z, theta)`` returns ``(rho_a, rho_b)``.

    The first grid axis runs from proton b to proton a, so both protons sit
    exactly on grid nodes.
    """
    ra, rb = geom.proton_positions(Z, theta)
    s1 = ra - rb
    u = s1 / np.linalg.norm(s1)
    s2 = _perpendicular(u)
    s3 = np.cross(u, s2)
    values = np.empty((2, 2, 2))
    values[0] = rho_b
    values[1] = rho_a
    return GridField(origin=rb, steps=np.array([s1, s2, s3]), values=values)


# --------------------------------------------------------------------------
# reported probe values for H2 on M(C6H6)2 at Y = 1.8 A, theta = 10 deg


@dataclass(frozen=True)
class ProbeFixture:
    system: str
    rho_a: float
    rho_b: float
    reported_net: float
    reported_label: str
    Z: float = 1.8
    theta: float = 10.0
    axis: str = "y"

    @property
    def delta(self):
        return self.rho_a - self.rho_b

    def is_consistent(self, tol=2e-4):
        """Whether the reported net magnitude equals ``|rho_a - rho_b|``."""
        return abs(abs(self.delta) - abs(self.reported_net)) <= tol

    def field(self, bond_length=0.74):
        geom = ProbeGeometry(axis=self.axis, bond_length=bond_length)
        return geom, two_point_field(geom, self.Z, self.theta, self.rho_a, self.rho_b)


SANDWICH_PROBES = {
    "Mn": ProbeFixture("Mn", -0.0688, 0.0225, -0.0912, "beta"),
    # reported net does not equal rho_a - rho_b; kept verbatim
    "Fe": ProbeFixture("Fe", -0.01466, -0.0008, 0.0155, "alpha"),
    "Co": ProbeFixture("Co", -0.00954, -0.00032, 0.0092, "alpha"),
}
