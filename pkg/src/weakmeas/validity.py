"""Regime diagnostics for the weak-value approximation of the CM pointer.

With every particle contributing the same weak value alpha, the CM pointer is

    {cos(lam Q/sqrt N) + i alpha sin(lam Q/sqrt N)}^N exp{-Q^2/(4 Delta^2)}

and whether it stays concentrated at Q = 0 is decided by the competition
between the growing product term and the decaying Gaussian, summarised by
(alpha^2 - 1) lam^2 < 1.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .pointer import POSITION, GaussianSpec, GridSpec, GridWavefunction, default_grid, moments, to_momentum

PEAK_STEPS = 2


def uniform_wv_state(alpha_w: complex, lam: float, n: int, spec: GaussianSpec, grid: GridSpec) -> GridWavefunction:
    """CM pointer for N particles sharing the weak value ``alpha_w`` (unnormalized Gaussian)."""
    q = grid.positions
    t = lam * (q - spec.center) / math.sqrt(n)
    base = np.cos(t) + 1j * alpha_w * np.sin(t)
    # log space: base**n alone overflows on wide grids where the Gaussian has long vanished
    with np.errstate(divide="ignore"):
        log = n * np.log(base) - (q - spec.center) ** 2 / (4 * spec.spread**2)
    return GridWavefunction(grid, POSITION, np.exp(log))


def magnitude_profile(alpha_w: float, lam: float, n: int, spec: GaussianSpec, grid: GridSpec) -> np.ndarray:
    """{1 + (alpha^2 - 1) sin^2(lam Q/sqrt N)}^(N/2) * exp{-Q^2/(2 Delta^2)}.

    The first factor is |cos + i alpha sin|^N. The second is the squared
    pointer envelope, which is what makes (alpha^2 - 1) lam^2 < 1 the
    condition for a maximum at Q = 0; note it is therefore *not* the modulus
    of ``uniform_wv_state`` (that carries exp{-Q^2/(4 Delta^2)}).
    """
    q = grid.positions - spec.center
    t = lam * q / math.sqrt(n)
    with np.errstate(divide="ignore"):
        log_a = 0.5 * n * np.log1p((alpha_w**2 - 1.0) * np.sin(t) ** 2)
    return np.exp(log_a - q**2 / (2 * spec.spread**2))


@dataclass
class ValidityReport:
    alpha_w: float
    lam: float
    n: int
    regime_lhs: float
    regime_ok: bool
    peak_location: float
    peak_at_origin: bool
    finite_n_correction: float  # N lam^3
    sqrt_n_lambda_cubed: float
    lambda_sqrt_n: float
    shift: float
    uncertainty: float
    amplification: float
    eccentric: bool

    def summary(self) -> dict:
        return asdict(self)


def regime_check(alpha_w: float, lam: float, n: int, spec: GaussianSpec | None = None, grid: GridSpec | None = None) -> ValidityReport:
    """Fill a ValidityReport for a uniform weak value ``alpha_w``.

    The peak is the argmax of ``magnitude_profile`` and counts as "at the
    origin" within two grid steps. Shift and uncertainty are the momentum mean
    and standard deviation of ``uniform_wv_state``.
    """
    spec = spec or GaussianSpec()
    if grid is None:
        grid = default_grid(spec.spread, lam * math.sqrt(n) * max(abs(alpha_w), 1.0))
    lhs = (alpha_w**2 - 1.0) * lam**2
    prof = magnitude_profile(alpha_w, lam, n, spec, grid)
    peak = float(grid.positions[int(np.argmax(prof))])
    _, mean, var = moments(to_momentum(uniform_wv_state(alpha_w, lam, n, spec, grid)))
    sd = math.sqrt(var)
    return ValidityReport(
        alpha_w=float(alpha_w),
        lam=float(lam),
        n=int(n),
        regime_lhs=float(lhs),
        regime_ok=bool(lhs < 1),
        peak_location=peak,
        peak_at_origin=bool(abs(peak - spec.center) <= PEAK_STEPS * grid.step),
        finite_n_correction=n * lam**3,
        sqrt_n_lambda_cubed=math.sqrt(n) * lam**3,
        lambda_sqrt_n=lam * math.sqrt(n),
        shift=mean,
        uncertainty=sd,
        amplification=mean / sd if sd > 0 else float("inf"),
        eccentric=bool(abs(alpha_w) > 1.0),
    )


def eccentric_run(weak_values) -> bool:
    """True when every per-particle weak value lies outside [-1, 1]."""
    w = np.asarray(weak_values)
    return bool(w.size > 0 and np.all(np.abs(w) > 1.0))
