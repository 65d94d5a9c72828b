"""Measurement protocols.

* ``run_ideal``: strong von Neumann measurement, peaks per eigenvalue.
* ``run_swm``: statistical weak measurement, Monte Carlo over independent
  particles each with its own pointer.
* ``stwm_pointer_state``: one pointer coupled to the collective observable
  (1/N) sum_i A_i, with coupling lambda/N per particle.
* ``nswm_*``: non-statistical weak measurement. One readout of the
  centre-of-mass momentum P = sum_j P_j / sqrt(N) plus the relative positions
  x_j = Q_j - mean(Q), which rotate each particle's pre-selection.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import spin
from .errors import NoPostSelectionsError, OrthogonalSelectionError, ValidationError
from .pointer import (
    MOMENTUM,
    POSITION,
    GaussianSpec,
    GridSpec,
    GridWavefunction,
    JointState,
    couple,
    default_grid,
    gaussian_on_grid,
    joint_to_momentum,
    l2_error,
    fidelity,
    moments,
    postselect,
    to_momentum,
)

PROTOCOLS = ("ideal", "swm", "stwm", "nswm", "validity")

# trials per independent random stream in run_swm
SWM_BLOCK = 4096


@dataclass(frozen=True)
class Scenario:
    """Everything needed to run one protocol.

    ``lam`` is the integrated coupling. ``grid_step=None`` picks a grid
    from the spread and the largest expected pointer shift.
    """

    protocol: str | None = None
    pre_axis: spin.BlochAxis = spin.X_AXIS
    pre_sign: int = +1
    post_axis: spin.BlochAxis = spin.Y_AXIS
    post_sign: int = +1
    observable_axis: spin.BlochAxis = spin.XI_45
    lam: float = 0.1
    pointer_spread: float = 1.0
    particle_count: int = 20
    trial_count: int = 100_000
    seed: int = 42
    grid_count: int = 1024
    grid_step: float | None = None
    output_dir: str = "out"

    def __post_init__(self):
        if self.protocol is not None and self.protocol not in PROTOCOLS:
            raise ValidationError(f"unknown protocol {self.protocol!r}")
        if not self.lam >= 0:
            raise ValidationError(f"lambda must be >= 0, got {self.lam!r}")
        if not self.pointer_spread > 0:
            raise ValidationError(f"delta must be > 0, got {self.pointer_spread!r}")
        if self.particle_count < 1:
            raise ValidationError(f"n_particles must be >= 1, got {self.particle_count!r}")
        if self.trial_count < 1:
            raise ValidationError(f"n_trials must be >= 1, got {self.trial_count!r}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

    @property
    def pre(self) -> np.ndarray:
        return spin.eigenstate(self.pre_axis, self.pre_sign)

    @property
    def post(self) -> np.ndarray:
        return spin.eigenstate(self.post_axis, self.post_sign)

    @property
    def selection(self) -> spin.PrePostSelection:
        return spin.PrePostSelection(self.pre, self.post)

    @property
    def observable(self) -> np.ndarray:
        return spin.spin_along(self.observable_axis)

    @property
    def pointer(self) -> GaussianSpec:
        return GaussianSpec(0.0, self.pointer_spread)

    def expected_shift(self) -> float:
        """Largest pointer momentum shift this scenario should produce."""
        try:
            a = abs(spin.weak_value(self.selection, self.observable))
        except OrthogonalSelectionError:
            a = 1.0
        a = max(a, 1.0)
        if self.protocol == "nswm":
            return self.lam * math.sqrt(self.particle_count) * a
        if self.protocol == "validity":
            return self.lam * math.sqrt(self.particle_count) * a
        return self.lam * a

    @property
    def grid(self) -> GridSpec:
        if self.grid_step is None:
            return default_grid(self.pointer_spread, self.expected_shift(), self.grid_count)
        return GridSpec.centered(self.grid_step, self.grid_count)


# -- ideal (strong) measurement ---------------------------------------------------


class IdealPeak(NamedTuple):
    eigenvalue: float
    center: float
    weight: float


@dataclass
class IdealResult:
    peaks: list[IdealPeak]
    distribution: GridWavefunction  # sqrt of the unconditioned momentum density
    resolved: bool
    warning: str | None = None


def run_ideal(scenario: Scenario, min_weight: float = 1e-9) -> IdealResult:
    """Unconditioned pointer momentum distribution after a strong coupling.

    Momentum space is split at the midpoints between the shifted eigenvalues
    lam * a_i; each region gives one peak (argmax) and its integrated weight.
    A regime warning is attached (and issued) when the peaks overlap.
    """
    op = scenario.observable
    grid = scenario.grid
    joint = JointState.product(scenario.pre, gaussian_on_grid(scenario.pointer, grid, POSITION))
    evolved = joint_to_momentum(couple(joint, op, scenario.lam))
    dens = np.abs(evolved.up) ** 2 + np.abs(evolved.down) ** 2
    p = grid.momenta
    dp = grid.momentum_step

    evals = np.linalg.eigvalsh(op)
    centers = scenario.lam * evals
    gap = float(np.min(np.diff(evals))) if len(evals) > 1 else np.inf
    resolved = scenario.lam * gap > 4 * scenario.pointer.momentum_spread
    cuts = np.concatenate([[-np.inf], 0.5 * (centers[1:] + centers[:-1]), [np.inf]])
    peaks = []
    for a, lo, hi in zip(evals, cuts[:-1], cuts[1:]):
        mask = (p >= lo) & (p < hi)
        weight = float(dens[mask].sum() * dp)
        if weight < min_weight:
            continue
        idx = np.flatnonzero(mask)
        peaks.append(IdealPeak(float(a), float(p[idx[np.argmax(dens[idx])]]), weight))
    warning = None
    if not resolved:
        warning = (
            f"not in the ideal regime: lambda*gap = {scenario.lam * gap:.4g} "
            f"<= 4*dP = {4 * scenario.pointer.momentum_spread:.4g}"
        )
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
    return IdealResult(peaks, GridWavefunction(grid, MOMENTUM, np.sqrt(dens)), resolved, warning)


# -- statistical weak measurement -------------------------------------------------


@dataclass
class SwmResult:
    accepted_readings: np.ndarray
    trial_count: int
    acceptance_rate: float
    mean_shift: float
    standard_error: float
    estimated_weak_value: float
    acceptance_probability: float  # exact, from the grid evolution


def _inverse_cdf_sampler(w: GridWavefunction):
    dens = np.abs(w.samples) ** 2
    cdf = np.concatenate([[0.0], np.cumsum(dens)])
    cdf /= cdf[-1]
    x = w.axis
    h = w.measure
    # cell k spans [x_k - h/2, x_k + h/2]; linear interpolation of the CDF inside it
    edges = np.concatenate([x - 0.5 * h, [x[-1] + 0.5 * h]])

    def sample(u: np.ndarray) -> np.ndarray:
        return np.interp(u, cdf, edges)

    return sample


def _swm_block(seed: int, block: int, size: int, p_accept: float, sampler):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    u = rng.random((size, 2))
    accepted = u[:, 0] < p_accept
    return sampler(u[accepted, 1])


def run_swm(scenario: Scenario, workers: int = 1) -> SwmResult:
    """Monte Carlo statistical weak measurement.

    Each trial couples one particle to its own pointer, accepts the trial
    with the exact post-selection probability, and for accepted trials draws
    one momentum reading from the conditional pointer density (inverse CDF on
    the grid). Trials are grouped in fixed blocks of ``SWM_BLOCK``; block ``b``
    uses the stream ``SeedSequence(seed, spawn_key=(b,))`` and blocks are
    reduced in ascending order, so results do not depend on ``workers``.
    """
    grid = scenario.grid
    joint = JointState.product(scenario.pre, gaussian_on_grid(scenario.pointer, grid, POSITION))
    evolved = couple(joint, scenario.observable, scenario.lam)
    conditional, p_accept = postselect(evolved, scenario.post)
    sampler = _inverse_cdf_sampler(to_momentum(conditional))

    n = scenario.trial_count
    sizes = [min(SWM_BLOCK, n - start) for start in range(0, n, SWM_BLOCK)]
    args = [(scenario.seed, b, s, p_accept, sampler) for b, s in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda a: _swm_block(*a), args))
    else:
        chunks = [_swm_block(*a) for a in args]
    readings = np.concatenate(chunks)
    if readings.size == 0:
        raise NoPostSelectionsError(f"no post-selections in {n} trials")
    mean = float(readings.mean())
    se = float(readings.std(ddof=1) / math.sqrt(readings.size)) if readings.size > 1 else float("inf")
    est = mean / scenario.lam if scenario.lam > 0 else float("nan")
    return SwmResult(readings, n, readings.size / n, mean, se, est, p_accept)


# -- single-trial weak measurement -------------------------------------------------


@dataclass
class StwmResult:
    pointer_state: GridWavefunction
    shift: float
    uncertainty: float
    success_probability: float
    weak_value_reference: float


def _amplitude_ratio(post: np.ndarray, ket: np.ndarray, op: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """<post| exp{i angle A} |ket> / <post|ket> over an array of angles."""
    u = spin.unitary_exp(op, angles)
    amps = np.einsum("i,...ij,j->...", np.conj(post), u, ket)
    return amps / spin.overlap(post, ket)


def selection_probability(scenario: Scenario) -> float:
    """|<fin|in>|^2 = (1 + m . n) / 2 from the signed Bloch vectors; exact for orthogonal axes."""
    m = scenario.pre_sign * scenario.pre_axis.as_array()
    n = scenario.post_sign * scenario.post_axis.as_array()
    return float((1.0 + m @ n) / 2.0)


def stwm_pointer_state(scenario: Scenario) -> StwmResult:
    """Pointer coupled to the collective observable of N identical particles.

    Each particle sees exp{i (lam/N) Q A}; the post-selected pointer is
    [<fin|exp{i (lam/N) Q A}|in>]^N times the Gaussian, normalized and
    returned in the momentum representation. The success probability is the
    closed form |<fin|in>|^(2N).
    """
    sel = scenario.selection
    amp = spin.overlap(sel.post, sel.pre)
    if abs(amp) <= spin.ORTHOGONAL_TOL:
        raise OrthogonalSelectionError("orthogonal selection")
    n = scenario.particle_count
    grid = scenario.grid
    g = gaussian_on_grid(scenario.pointer, grid, POSITION)
    ratio = _amplitude_ratio(sel.post, sel.pre, scenario.observable, scenario.lam / n * grid.positions)
    phase = (amp / abs(amp)) ** n
    state = to_momentum(GridWavefunction(grid, POSITION, phase * ratio**n * g.samples)).normalized()
    _, mean, var = moments(state)
    return StwmResult(
        pointer_state=state,
        shift=mean,
        uncertainty=math.sqrt(var),
        success_probability=selection_probability(scenario) ** n,
        weak_value_reference=spin.weak_value(sel, scenario.observable).real,
    )


# -- non-statistical weak measurement ---------------------------------------------


class NswmSample(NamedTuple):
    coordinates: np.ndarray
    cm_coordinate: float
    relative_positions: np.ndarray


def nswm_sample(scenario: Scenario, rng: np.random.Generator) -> NswmSample:
    """Draw pointer coordinates Q_j from |Phi_in(Q)|^2 and split off the centre of mass."""
    q = rng.normal(0.0, scenario.pointer_spread, scenario.particle_count)
    n = q.size
    x = q - q.mean()
    x -= x.mean()
    return NswmSample(q, float(q.sum() / math.sqrt(n)), x)


def nswm_correct(scenario: Scenario, relative_positions):
    """Rotate each particle's pre-selection by exp{i lam x_j A} and take its weak value.

    Returns ``(rotated_states, weak_values)`` with shapes ``(N, 2)`` and ``(N,)``.
    """
    x = np.asarray(relative_positions, dtype=float)
    u = spin.unitary_exp(scenario.observable, scenario.lam * x)
    rotated = u @ scenario.pre
    post = scenario.post
    op = scenario.observable
    wv = np.empty(x.size, dtype=complex)
    for j, psi in enumerate(rotated):
        try:
            wv[j] = spin.weak_value(spin.PrePostSelection(psi, post), op)
        except OrthogonalSelectionError:
            raise OrthogonalSelectionError(f"particle {j}: rotated pre-selection is orthogonal to the post-selection") from None
    return rotated, wv


def _cm_gaussian(scenario: Scenario, grid: GridSpec) -> np.ndarray:
    return gaussian_on_grid(scenario.pointer, grid, POSITION).samples


def nswm_particle_factors(scenario: Scenario, rotated_states, grid: GridSpec | None = None) -> np.ndarray:
    """<fin| exp{i (lam/sqrt N) Q A} |psi_j>, shape (grid.count, N)."""
    grid = grid or scenario.grid
    rotated = np.asarray(rotated_states, dtype=complex)
    kappa = scenario.lam / math.sqrt(len(rotated))
    u = spin.unitary_exp(scenario.observable, kappa * grid.positions)
    return np.einsum("i,kij,nj->kn", np.conj(scenario.post), u, rotated)


def selection_amplitude(scenario: Scenario, rotated_states) -> complex:
    """prod_j <fin|psi_j>: the N-particle post-selection amplitude at Q = 0."""
    return complex(np.prod(np.conj(scenario.post) @ np.asarray(rotated_states, dtype=complex).T))


def nswm_exact_cm_state(scenario: Scenario, relative_positions, grid: GridSpec | None = None, order=None) -> GridWavefunction:
    """Exact post-selected CM pointer, position representation, unnormalized.

    Phi(Q) = prod_j <fin| exp{i (lam/sqrt N) Q A} |psi_j> * Gaussian(Q), with
    |psi_j> the relative-position-rotated pre-selections and a normalized
    Gaussian, so that at lam = 0 the norm^2 is |<fin|in>|^(2N). ``order``
    permutes the particle product.
    """
    grid = grid or scenario.grid
    rotated, _ = nswm_correct(scenario, relative_positions)
    factors = nswm_particle_factors(scenario, rotated, grid)
    if order is not None:
        factors = factors[:, np.asarray(order)]
    prod = np.ones(grid.count, dtype=complex)
    for j in range(factors.shape[1]):
        prod = prod * factors[:, j]
    return GridWavefunction(grid, POSITION, prod * _cm_gaussian(scenario, grid))


def nswm_approx_cm_state(scenario: Scenario, weak_values, grid: GridSpec | None = None) -> GridWavefunction:
    """Weak-value approximation exp{i (lam/sqrt N) Q sum_j w_j} * Gaussian(Q)."""
    grid = grid or scenario.grid
    w = np.asarray(weak_values, dtype=complex)
    kappa = scenario.lam / math.sqrt(w.size)
    q = grid.positions
    return GridWavefunction(grid, POSITION, np.exp(1j * kappa * q * w.sum()) * _cm_gaussian(scenario, grid))


def nswm_momentum_shift(exact_cm_state: GridWavefunction) -> float:
    """Momentum mean of the normalized CM state."""
    w = exact_cm_state if exact_cm_state.representation is MOMENTUM else to_momentum(exact_cm_state)
    return moments(w)[1]


def nswm_shift_formula(weak_values, lam: float, n: int) -> float:
    """(lam / sqrt N) * sum_j Re w_j."""
    return lam / math.sqrt(n) * float(np.sum(np.real(weak_values)))


@dataclass
class NswmRun:
    coordinates: np.ndarray
    cm_coordinate: float
    relative_positions: np.ndarray
    rotated_states: np.ndarray
    per_particle_weak_values: np.ndarray
    selection_amplitude: complex
    exact_cm_state: GridWavefunction  # unnormalized, includes selection_amplitude
    approx_cm_state: GridWavefunction
    momentum_shift_exact: float
    momentum_shift_formula: float
    l2_error: float = field(default=float("nan"))
    fidelity: float = field(default=float("nan"))

    @property
    def reduced_exact_cm_state(self) -> GridWavefunction:
        """Exact state with the selection amplitude divided out; compare this with the approximation."""
        return self.exact_cm_state.scaled(1 / self.selection_amplitude)


def nswm_run(scenario: Scenario, rng: np.random.Generator | None = None, relative_positions=None) -> NswmRun:
    """Sample (or take) relative positions and evaluate both CM pointer states.

    Either ``rng`` or explicit ``relative_positions`` must be given; with the
    latter, ``coordinates`` equal the relative positions and the CM coordinate
    is 0.
    """
    if relative_positions is None:
        if rng is None:
            rng = np.random.default_rng(scenario.seed)
        coords, cm, x = nswm_sample(scenario, rng)
    else:
        x = np.asarray(relative_positions, dtype=float)
        if x.size != scenario.particle_count:
            raise ValidationError(f"expected {scenario.particle_count} relative positions, got {x.size}")
        coords, cm = x.copy(), 0.0
    grid = scenario.grid
    rotated, wv = nswm_correct(scenario, x)
    exact = nswm_exact_cm_state(scenario, x, grid)
    approx = nswm_approx_cm_state(scenario, wv, grid)
    sel_amp = selection_amplitude(scenario, rotated)
    reduced = exact.scaled(1 / sel_amp)
    return NswmRun(
        coordinates=coords,
        cm_coordinate=cm,
        relative_positions=x,
        rotated_states=rotated,
        per_particle_weak_values=wv,
        selection_amplitude=sel_amp,
        exact_cm_state=exact,
        approx_cm_state=approx,
        momentum_shift_exact=nswm_momentum_shift(exact),
        momentum_shift_formula=nswm_shift_formula(wv, scenario.lam, x.size),
        l2_error=l2_error(approx, reduced),
        fidelity=fidelity(approx, reduced),
    )


# -- grouping of rotated weak values ----------------------------------------------


class WeakValueGroup(NamedTuple):
    count: int
    rotated_state: np.ndarray
    weak_value: complex


def group_weak_values(rotated_states, weak_values, angle_tolerance: float) -> list[WeakValueGroup]:
    """Cluster particles whose rotated pre-selections agree to fidelity >= 1 - tolerance.

    Greedy, in particle order; each group is represented by its first member
    and carries that member's weak value.
    """
    reps: list[np.ndarray] = []
    wvs: list[complex] = []
    counts: list[int] = []
    for psi, w in zip(np.asarray(rotated_states, dtype=complex), np.asarray(weak_values)):
        for i, r in enumerate(reps):
            if abs(np.vdot(r, psi)) >= 1 - angle_tolerance:
                counts[i] += 1
                break
        else:
            reps.append(psi)
            wvs.append(complex(w))
            counts.append(1)
    return [WeakValueGroup(c, r, w) for c, r, w in zip(counts, reps, wvs)]


def grouped_cm_state(scenario: Scenario, groups, grid: GridSpec | None = None) -> GridWavefunction:
    """prod_i exp{i lam Q n_i w_i / sqrt N} * Gaussian(Q) over weak-value groups."""
    grid = grid or scenario.grid
    n = sum(g.count for g in groups)
    q = grid.positions
    phase = np.ones(grid.count, dtype=complex)
    for g in groups:
        phase = phase * np.exp(1j * scenario.lam * q * g.count * g.weak_value / math.sqrt(n))
    return GridWavefunction(grid, POSITION, phase * _cm_gaussian(scenario, grid))


def with_protocol(scenario: Scenario, protocol: str, **changes) -> Scenario:
    return replace(scenario, protocol=protocol, **changes)
