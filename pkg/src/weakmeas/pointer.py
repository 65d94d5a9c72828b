"""Gaussian pointer wavefunctions on a uniform 1-D grid.

Conventions
-----------
* Position samples live at ``x_k = origin + k * step``, ``k = 0..count-1``.
* Momentum samples live at ``p_m = (m - count/2) * 2*pi/(count*step)``.
* psi(p) = (2 pi)^(-1/2) sum_k psi(x_k) exp(-i p x_k) step, which is unitary
  for the discrete norms sum |psi|^2 dx and sum |psi|^2 dp.
* The coupling is exp{+i lambda Q A}; an eigenvalue ``a`` moves the pointer
  momentum by ``+lambda * a``.

A wavefunction always carries its *position* GridSpec; the momentum axis is
derived from it.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from . import spin
from .errors import EmptyStateError, NullPostSelectionError, ValidationError


class Representation(str, enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"


POSITION = Representation.POSITION
MOMENTUM = Representation.MOMENTUM


@dataclass(frozen=True)
class GaussianSpec:
    center: float = 0.0
    spread: float = 1.0

    def __post_init__(self):
        if not self.spread > 0:
            raise ValidationError(f"pointer spread must be > 0, got {self.spread!r}")

    @property
    def momentum_spread(self) -> float:
        return 1.0 / (2.0 * self.spread)


@dataclass(frozen=True)
class GridSpec:
    origin: float
    step: float
    count: int

    def __post_init__(self):
        if not self.step > 0:
            raise ValidationError(f"grid step must be > 0, got {self.step!r}")
        n = self.count
        if n < 64 or n & (n - 1):
            raise ValidationError(f"grid count must be a power of two >= 64, got {n!r}")

    @classmethod
    def centered(cls, step: float, count: int) -> "GridSpec":
        return cls(-0.5 * count * step, step, count)

    @property
    def positions(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.count)

    @property
    def momentum_step(self) -> float:
        return 2 * np.pi / (self.count * self.step)

    @property
    def momenta(self) -> np.ndarray:
        return (np.arange(self.count) - self.count // 2) * self.momentum_step

    @property
    def position_range(self) -> tuple[float, float]:
        return self.origin, self.origin + (self.count - 1) * self.step

    @property
    def momentum_range(self) -> tuple[float, float]:
        m = self.momenta
        return float(m[0]), float(m[-1])


def default_grid(spread: float = 1.0, max_shift: float = 0.0, count: int = 1024, center: float = 0.0) -> GridSpec:
    """Centered grid wide enough for a pointer of the given spread and shift.

    Position extent is 16 spreads plus 4 |max_shift|; ``count`` is doubled
    until the momentum half-range covers |max_shift| + 8 momentum spreads.
    """
    if count < 512:
        count = 512
    count = 1 << (count - 1).bit_length()
    extent = 16.0 * spread + 4.0 * abs(max_shift)
    dp = 1.0 / (2.0 * spread)
    p_needed = abs(max_shift) + 8.0 * dp
    while np.pi / (extent / count) < p_needed:
        count *= 2
    step = extent / count
    return GridSpec(center - 0.5 * count * step, step, count)


@dataclass(frozen=True, eq=False)
class GridWavefunction:
    grid: GridSpec
    representation: Representation
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.grid.count,):
            raise ValidationError(f"expected {self.grid.count} samples, got shape {s.shape}")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "representation", Representation(self.representation))

    @property
    def axis(self) -> np.ndarray:
        return self.grid.positions if self.representation is POSITION else self.grid.momenta

    @property
    def measure(self) -> float:
        return self.grid.step if self.representation is POSITION else self.grid.momentum_step

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.measure)

    def normalized(self) -> "GridWavefunction":
        n2 = self.norm2()
        if n2 < 1e-300:
            raise EmptyStateError("cannot normalize a zero wavefunction")
        return GridWavefunction(self.grid, self.representation, self.samples / math.sqrt(n2))

    def scaled(self, factor: complex) -> "GridWavefunction":
        return GridWavefunction(self.grid, self.representation, self.samples * factor)

    def to_csv(self) -> str:
        return wavefunction_to_csv(self)


@dataclass(frozen=True, eq=False)
class JointState:
    """Spinor-valued pointer wavefunction: ``up`` and ``down`` are sigma_z components."""

    grid: GridSpec
    representation: Representation
    up: np.ndarray
    down: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "up", np.asarray(self.up, dtype=complex))
        object.__setattr__(self, "down", np.asarray(self.down, dtype=complex))
        object.__setattr__(self, "representation", Representation(self.representation))

    @classmethod
    def product(cls, spin_state: np.ndarray, pointer: GridWavefunction) -> "JointState":
        return cls(pointer.grid, pointer.representation, spin_state[0] * pointer.samples, spin_state[1] * pointer.samples)

    @property
    def spinors(self) -> np.ndarray:
        return np.stack([self.up, self.down], axis=-1)

    def norm2(self) -> float:
        w = GridWavefunction(self.grid, self.representation, self.up)
        return float((np.sum(np.abs(self.up) ** 2) + np.sum(np.abs(self.down) ** 2)) * w.measure)


# -- construction ---------------------------------------------------------------


def _gaussian_samples(spec: GaussianSpec, grid: GridSpec, representation: Representation) -> np.ndarray:
    d = spec.spread
    pref = (2 * np.pi * d * d) ** -0.25
    if representation is POSITION:
        x = grid.positions
        return pref * np.exp(-((x - spec.center) ** 2) / (4 * d * d)).astype(complex)
    p = grid.momenta
    # analytic Fourier pair of the position Gaussian
    return pref * d * np.sqrt(2.0) * np.exp(-(d * p) ** 2 - 1j * p * spec.center)


def gaussian_on_grid(spec: GaussianSpec, grid: GridSpec, representation=POSITION) -> GridWavefunction:
    """Normalized Gaussian pointer exp{-(x - c)^2 / (4 spread^2)} sampled on ``grid``.

    In the momentum representation the analytic transform is sampled, with
    momentum spread 1/(2 spread).

    Raises
    ------
    ValidationError
        If the grid does not reach 8 spreads on either side of the center.
    """
    representation = Representation(representation)
    if representation is POSITION:
        lo, hi = grid.position_range
        hi += grid.step  # periodic grid: the last cell ends one step past the last sample
        need_lo, need_hi = spec.center - 8 * spec.spread, spec.center + 8 * spec.spread
        width = "spreads"
    else:
        lo, hi = grid.momentum_range
        hi += grid.momentum_step
        need_lo, need_hi = -8 * spec.momentum_spread, 8 * spec.momentum_spread
        width = "momentum spreads"
    slack = 1e-9 * (need_hi - need_lo)
    if lo > need_lo + slack or hi < need_hi - slack:
        raise ValidationError(
            f"grid {representation.value} range [{lo:.6g}, {hi:.6g}] does not cover "
            f"8 {width} around the center; required extent [{need_lo:.6g}, {need_hi:.6g}]"
        )
    return GridWavefunction(grid, representation, _gaussian_samples(spec, grid, representation))


# -- Fourier transforms -----------------------------------------------------------


def _sign_alternation(n: int) -> np.ndarray:
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def _fft_forward(samples: np.ndarray, grid: GridSpec) -> np.ndarray:
    n = grid.count
    alt = _sign_alternation(n)
    phase = np.exp(-1j * grid.momenta * grid.origin)
    return grid.step / np.sqrt(2 * np.pi) * phase * np.fft.fft(samples * alt, axis=-1)


def _fft_inverse(samples: np.ndarray, grid: GridSpec) -> np.ndarray:
    n = grid.count
    alt = _sign_alternation(n)
    phase = np.exp(1j * grid.momenta * grid.origin)
    return grid.momentum_step / np.sqrt(2 * np.pi) * n * alt * np.fft.ifft(samples * phase, axis=-1)


def to_momentum(w: GridWavefunction) -> GridWavefunction:
    if w.representation is not POSITION:
        raise ValidationError("to_momentum expects a position-representation wavefunction")
    return GridWavefunction(w.grid, MOMENTUM, _fft_forward(w.samples, w.grid))


def to_position(w: GridWavefunction) -> GridWavefunction:
    if w.representation is not MOMENTUM:
        raise ValidationError("to_position expects a momentum-representation wavefunction")
    return GridWavefunction(w.grid, POSITION, _fft_inverse(w.samples, w.grid))


def joint_to_momentum(joint: JointState) -> JointState:
    if joint.representation is not POSITION:
        raise ValidationError("joint state is already in the momentum representation")
    return JointState(joint.grid, MOMENTUM, _fft_forward(joint.up, joint.grid), _fft_forward(joint.down, joint.grid))


# -- observables ------------------------------------------------------------------


def moments(w: GridWavefunction) -> tuple[float, float, float]:
    """(norm2, mean, variance) of |samples|^2 on the wavefunction's own axis.

    Mean and variance are those of the normalized density; norm2 is raw.
    """
    dens = np.abs(w.samples) ** 2
    norm2 = float(dens.sum() * w.measure)
    if norm2 < 1e-12:
        raise EmptyStateError(f"empty state: norm^2 = {norm2:.3g}")
    x = w.axis
    weights = dens / dens.sum()
    mean = float(np.dot(weights, x))
    var = float(np.dot(weights, (x - mean) ** 2))
    return norm2, mean, var


def fidelity(a: GridWavefunction, b: GridWavefunction) -> float:
    """|<a|b>| of the normalized states."""
    _check_same_grid(a, b)
    na, nb = np.linalg.norm(a.samples), np.linalg.norm(b.samples)
    if na == 0 or nb == 0:
        raise EmptyStateError("fidelity of an empty state")
    return float(abs(np.vdot(a.samples, b.samples)) / (na * nb))


def l2_error(a: GridWavefunction, b: GridWavefunction) -> float:
    """Relative distance ||a - b|| / ||b|| on the raw samples."""
    _check_same_grid(a, b)
    nb = np.linalg.norm(b.samples)
    if nb == 0:
        raise EmptyStateError("reference state is empty")
    return float(np.linalg.norm(a.samples - b.samples) / nb)


def _check_same_grid(a: GridWavefunction, b: GridWavefunction) -> None:
    if a.grid != b.grid or a.representation is not b.representation:
        raise ValidationError("wavefunctions live on different grids or representations")


# -- coupling and post-selection --------------------------------------------------


def couple(joint: JointState, op: np.ndarray, lam: float) -> JointState:
    """Apply exp{i lam Q A} pointwise in Q.

    At each grid point the spinor is multiplied by the 2x2 unitary
    exp{i lam q A}, evaluated in closed form.
    """
    if joint.representation is not POSITION:
        raise ValidationError("couple acts in the position representation")
    u = spin.unitary_exp(op, lam * joint.grid.positions)
    out = np.einsum("kij,kj->ki", u, joint.spinors)
    return JointState(joint.grid, POSITION, out[:, 0], out[:, 1])


def conditional_amplitude(joint: JointState, post: np.ndarray) -> GridWavefunction:
    """Unnormalized pointer amplitude <post|spinor(q)>."""
    post = np.asarray(post, dtype=complex)
    samples = np.conj(post[0]) * joint.up + np.conj(post[1]) * joint.down
    return GridWavefunction(joint.grid, joint.representation, samples)


def postselect(joint: JointState, post: np.ndarray):
    """Project the spin onto ``post``.

    Returns ``(conditional, probability)`` where ``conditional`` is the
    renormalized pointer state and ``probability`` its pre-normalization norm^2.

    Raises
    ------
    NullPostSelectionError
        If the probability is below 1e-14.
    """
    amp = conditional_amplitude(joint, post)
    prob = amp.norm2()
    if prob < 1e-14:
        raise NullPostSelectionError(f"null post-selection: probability {prob:.3g}")
    return amp.scaled(1 / math.sqrt(prob)), prob


def exact_pointer(sel: spin.PrePostSelection, op: np.ndarray, lam: float, spec: GaussianSpec, grid: GridSpec) -> GridWavefunction:
    """Unnormalized post-selected pointer, by grid evolution, in the momentum representation."""
    joint = JointState.product(sel.pre, gaussian_on_grid(spec, grid, POSITION))
    amp = conditional_amplitude(couple(joint, op, lam), sel.post)
    return to_momentum(amp)


def weak_approx_pointer(sel: spin.PrePostSelection, op: np.ndarray, lam: float, spec: GaussianSpec, grid: GridSpec) -> GridWavefunction:
    """<fin|in> exp{i lam Q A_w} applied to the initial Gaussian, in closed form.

    Returned in the momentum representation: a Gaussian centered at
    lam * A_w analytically continued to complex A_w. Re(A_w) moves the
    momentum mean, Im(A_w) moves the position mean and rescales the norm.
    """
    a_w = spin.weak_value(sel, op)
    amp = spin.overlap(sel.post, sel.pre)
    d, c = spec.spread, spec.center
    k = lam * a_w
    p = grid.momenta
    pref = (2 * np.pi * d * d) ** -0.25 * d * np.sqrt(2.0)
    samples = amp * pref * np.exp(-(d * (p - k)) ** 2 - 1j * (p - k) * c)
    return GridWavefunction(grid, MOMENTUM, samples)


# -- serialization ----------------------------------------------------------------


def wavefunction_to_csv(w: GridWavefunction) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "re", "im"])
    for x, s in zip(w.axis, w.samples):
        writer.writerow([f"{x:.17g}", f"{s.real:.17g}", f"{s.imag:.17g}"])
    return buf.getvalue()


def wavefunction_from_csv(text: str, grid: GridSpec, representation=POSITION) -> GridWavefunction:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["x", "re", "im"]:
        raise ValidationError("expected header x,re,im")
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    w = GridWavefunction(grid, representation, data[:, 1] + 1j * data[:, 2])
    if not np.allclose(data[:, 0], w.axis, rtol=0, atol=1e-9 * max(1.0, float(np.max(np.abs(w.axis))))):
        raise ValidationError("CSV abscissae do not match the grid")
    return w
