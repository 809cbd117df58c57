"""Nuclear spin algebra of the two protons in H2.

Basis ordering is fixed as ``(|uu>, |ud>, |du>, |dd>)`` where the first
arrow is proton a and the second proton b. Spin operators are returned in
units of hbar (hbar = 1).
"""

import math

import numpy as np

SQRT_HALF = 1.0 / math.sqrt(2.0)

STATE_LABELS = ("ortho+1", "ortho0", "ortho-1", "para")
ORTHO_SUBLEVELS = (1, 0, -1)

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_ID2 = np.eye(2, dtype=complex)

# Proton exchange P|s_a s_b> = |s_b s_a>
EXCHANGE = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def spin_state(label):
    """Return the normalized nuclear spin state for ``label``.

    ``label`` is one of ``"ortho+1"``, ``"ortho0"``, ``"ortho-1"``, ``"para"``.
    The integer sublevels ``1, 0, -1`` are accepted as aliases for the
    ortho states.
    """
    if label in ORTHO_SUBLEVELS and not isinstance(label, bool):
        label = {1: "ortho+1", 0: "ortho0", -1: "ortho-1"}[label]
    vec = np.zeros(4, dtype=complex)
    if label == "ortho+1":
        vec[0] = 1.0
    elif label == "ortho0":
        vec[1] = vec[2] = SQRT_HALF
    elif label == "ortho-1":
        vec[3] = 1.0
    elif label == "para":
        vec[1] = SQRT_HALF
        vec[2] = -SQRT_HALF
    else:
        raise ValueError(f"unknown spin state label {label!r}")
    return vec


def spin_operator(proton, axis):
    """Single-proton spin operator embedded in the 4-dim two-proton space."""
    try:
        half_pauli = 0.5 * _PAULI[axis]
    except KeyError:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}") from None
    if proton == "a":
        return np.kron(half_pauli, _ID2)
    if proton == "b":
        return np.kron(_ID2, half_pauli)
    raise ValueError(f"proton must be 'a' or 'b', got {proton!r}")


def exchange_parity(state, atol=1e-12):
    """Eigenvalue (+1 or -1) of proton exchange for ``state``.

    Raises ValueError if the state is not an exchange eigenstate.
    """
    state = np.asarray(state, dtype=complex)
    swapped = EXCHANGE @ state
    if np.allclose(swapped, state, atol=atol):
        return 1
    if np.allclose(swapped, -state, atol=atol):
        return -1
    raise ValueError("state has no definite exchange symmetry")


# <para| (I_a - I_b) |ortho, m> worked out by hand, components (x, y, z)
_TRANSITION = {
    1: (-SQRT_HALF, -1j * SQRT_HALF, 0.0),
    0: (0.0, 0.0, 1.0),
    -1: (SQRT_HALF, -1j * SQRT_HALF, 0.0),
}


def transition_vector(m_o):
    """Return <chi_p|(I_a - I_b)|chi_o, m_o> as a complex 3-vector (x, y, z)."""
    try:
        return np.array(_TRANSITION[m_o], dtype=complex)
    except KeyError:
        raise ValueError(f"ortho sublevel must be +1, 0 or -1, got {m_o!r}") from None


def coupling_norm(m_o):
    """Squared norm |<chi_p|(I_a - I_b)|chi_o, m_o>|^2 in hbar^2 units."""
    v = transition_vector(m_o)
    return float(np.vdot(v, v).real)


def ensemble_coupling_strength():
    """Unpolarized average of :func:`coupling_norm` over the three ortho sublevels."""
    return sum(coupling_norm(m) for m in ORTHO_SUBLEVELS) / 3.0
