"""Exact 2x2 algebra for spin-1/2 states and observables.

States are complex arrays of shape ``(2,)`` in the sigma_z basis and operators
are complex ``(2, 2)`` arrays, so everything here composes with plain numpy.
Units: hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import OrthogonalSelectionError, ValidationError

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

UNIT_TOL = 1e-12
ORTHOGONAL_TOL = 1e-12


@dataclass(frozen=True)
class BlochAxis:
    """Unit vector on the Bloch sphere."""

    nx: float
    ny: float
    nz: float

    def __post_init__(self):
        norm2 = self.nx**2 + self.ny**2 + self.nz**2
        if abs(norm2 - 1.0) > UNIT_TOL:
            raise ValidationError(f"axis ({self.nx}, {self.ny}, {self.nz}) is not unit norm (|n|^2 = {norm2!r})")

    @classmethod
    def normalized(cls, nx: float, ny: float, nz: float) -> "BlochAxis":
        v = np.array([nx, ny, nz], dtype=float)
        r = np.linalg.norm(v)
        if r == 0:
            raise ValidationError("zero vector has no direction")
        v = v / r
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @classmethod
    def in_xy_plane(cls, degrees: float) -> "BlochAxis":
        """Axis at ``degrees`` from x towards y."""
        t = np.deg2rad(degrees)
        return cls(float(np.cos(t)), float(np.sin(t)), 0.0)

    def __neg__(self) -> "BlochAxis":
        return BlochAxis(-self.nx, -self.ny, -self.nz)

    def as_array(self) -> np.ndarray:
        return np.array([self.nx, self.ny, self.nz])


X_AXIS = BlochAxis(1.0, 0.0, 0.0)
Y_AXIS = BlochAxis(0.0, 1.0, 0.0)
Z_AXIS = BlochAxis(0.0, 0.0, 1.0)
XI_45 = BlochAxis.in_xy_plane(45.0)

AxisLike = Union[BlochAxis, Sequence[float]]


def _as_axis(axis: AxisLike) -> BlochAxis:
    if isinstance(axis, BlochAxis):
        return axis
    return BlochAxis(*(float(c) for c in axis))


class PrePostSelection(NamedTuple):
    pre: np.ndarray
    post: np.ndarray


def pauli(axis: str) -> np.ndarray:
    """Pauli matrix for ``axis`` in ``{'x', 'y', 'z'}`` (case-insensitive)."""
    try:
        return PAULI[axis.lower()].copy()
    except (KeyError, AttributeError):
        raise ValidationError(f"unknown Pauli axis {axis!r}") from None


def spin_along(axis: AxisLike) -> np.ndarray:
    """Return n . sigma for a unit axis n."""
    n = _as_axis(axis)
    return n.nx * SIGMA_X + n.ny * SIGMA_Y + n.nz * SIGMA_Z


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # first component with non-negligible weight made real positive
    k = 0 if abs(v[0]) > 1e-12 else 1
    out = v * (abs(v[k]) / v[k])
    out[k] = abs(v[k])
    return out


def spin_state(a0: complex, a1: complex) -> np.ndarray:
    """Normalized state a0|up_z> + a1|down_z>; the global phase is left as given."""
    v = np.array([a0, a1], dtype=complex)
    r = np.linalg.norm(v)
    if r == 0:
        raise ValidationError("zero vector is not a state")
    return v / r


def eigenstate(axis: AxisLike, sign: int = +1) -> np.ndarray:
    """Eigenvector of n . sigma with eigenvalue ``sign``.

    Uses the closed form on the Bloch sphere; the first nonzero component is
    real and positive.
    """
    if sign not in (1, -1):
        raise ValidationError(f"sign must be +1 or -1, got {sign!r}")
    n = _as_axis(axis)
    if sign < 0:
        n = -n
    # |n> = (1 + nz, nx + i ny) / norm; degenerate at the south pole
    if n.nz > -0.5:
        v = np.array([1.0 + n.nz, n.nx + 1j * n.ny])
    else:
        v = np.array([n.nx - 1j * n.ny, 1.0 - n.nz])
    v = v / np.linalg.norm(v)
    return _fix_phase(v)


UP_X = eigenstate(X_AXIS, +1)
DOWN_X = eigenstate(X_AXIS, -1)
UP_Y = eigenstate(Y_AXIS, +1)
DOWN_Y = eigenstate(Y_AXIS, -1)
UP_Z = eigenstate(Z_AXIS, +1)
DOWN_Z = eigenstate(Z_AXIS, -1)
SIGMA_45 = spin_along(XI_45)


def overlap(bra: np.ndarray, ket: np.ndarray) -> complex:
    """<bra|ket>."""
    return complex(np.vdot(bra, ket))


def is_hermitian(op: np.ndarray, tol: float = 1e-12) -> bool:
    op = np.asarray(op)
    return op.shape == (2, 2) and bool(np.allclose(op, op.conj().T, atol=tol, rtol=0))


def _require_hermitian(op: np.ndarray) -> None:
    if not is_hermitian(op):
        raise ValidationError("operator is not Hermitian")


def weak_value_moment(sel: PrePostSelection, op: np.ndarray, n: int) -> complex:
    """(A^n)_w = <fin|A^n|in> / <fin|in>."""
    if n < 0:
        raise ValidationError("moment order must be >= 0")
    pre, post = sel
    amp = overlap(post, pre)
    if abs(amp) <= ORTHOGONAL_TOL:
        raise OrthogonalSelectionError(f"orthogonal selection: |<fin|in>| = {abs(amp):.3g}")
    return overlap(post, np.linalg.matrix_power(np.asarray(op, dtype=complex), n) @ pre) / amp


def weak_value(sel: PrePostSelection, op: np.ndarray) -> complex:
    """Weak value <fin|A|in> / <fin|in>; complex in general and unbounded by the spectrum.

    Raises
    ------
    OrthogonalSelectionError
        If ``|<fin|in>| <= 1e-12``.
    """
    return weak_value_moment(sel, op, 1)


def expectation(state: np.ndarray, op: np.ndarray) -> float:
    _require_hermitian(op)
    return float(np.vdot(state, op @ state).real)


def orthogonal_decomposition(state: np.ndarray, op: np.ndarray):
    """Split A|psi> = mean |psi> + spread |psi_perp>.

    Returns ``(mean, spread, perp)`` where ``perp`` is None when the state is
    (numerically) an eigenstate, i.e. spread < 1e-12.
    """
    _require_hermitian(op)
    mean = expectation(state, op)
    residual = op @ state - mean * state
    spread = float(np.linalg.norm(residual))
    if spread < 1e-12:
        return mean, 0.0, None
    return mean, spread, residual / spread


def _pauli_components(op: np.ndarray):
    """Hermitian op = c0 I + c . sigma  ->  (c0, c)."""
    c0 = np.trace(op).real / 2
    c = np.array([np.trace(op @ s).real / 2 for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)])
    return c0, c


def rotation_about(axis: AxisLike, angle: float) -> np.ndarray:
    """exp{i angle (n . sigma)} = cos(angle) I + i sin(angle) n . sigma."""
    return np.cos(angle) * I2 + 1j * np.sin(angle) * spin_along(axis)


def unitary_exp(op: np.ndarray, angles) -> np.ndarray:
    """exp{i angle A} for Hermitian 2x2 ``op`` and an array of angles.

    Returns an array of shape ``angles.shape + (2, 2)``. Closed form through the
    Pauli decomposition A = c0 + |c| n . sigma.
    """
    _require_hermitian(op)
    angles = np.asarray(angles, dtype=float)
    c0, c = _pauli_components(np.asarray(op, dtype=complex))
    r = float(np.linalg.norm(c))
    phase = np.exp(1j * c0 * angles)[..., None, None]
    if r == 0:
        return phase * I2
    n_sigma = (c[0] * SIGMA_X + c[1] * SIGMA_Y + c[2] * SIGMA_Z) / r
    t = (r * angles)[..., None, None]
    return phase * (np.cos(t) * I2 + 1j * np.sin(t) * n_sigma)


class Branch(NamedTuple):
    probability: float
    weak_value: complex | None  # None when the branch is orthogonal to pre


def post_selected_decomposition(pre: np.ndarray, op: np.ndarray, basis) -> list[Branch]:
    """Resolve <A> over an orthonormal post-selection basis.

    Each branch carries P(j) = |<fin_j|in>|^2 and the weak value A_w(j), so that
    sum_j P(j) Re A_w(j) = <in|A|in>.
    """
    basis = [np.asarray(b, dtype=complex) for b in basis]
    gram = np.array([[np.vdot(a, b) for b in basis] for a in basis])
    if len(basis) != 2 or not np.allclose(gram, np.eye(2), atol=1e-10, rtol=0):
        raise ValidationError("post-selection basis must be an orthonormal pair")
    _require_hermitian(op)
    out = []
    for b in basis:
        amp = overlap(b, pre)
        if abs(amp) <= ORTHOGONAL_TOL:
            out.append(Branch(0.0, None))
        else:
            out.append(Branch(abs(amp) ** 2, weak_value(PrePostSelection(pre, b), op)))
    return out
