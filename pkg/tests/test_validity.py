import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakmeas import pointer, validity
from weakmeas.pointer import POSITION, GaussianSpec, GridWavefunction

SQRT2 = math.sqrt(2)
SPEC = GaussianSpec()


def grid_for(alpha, lam, n):
    return pointer.default_grid(1.0, lam * math.sqrt(n) * max(abs(alpha), 1.0))


# -- uniform_wv_state ----------------------------------------------------------------


@given(st.floats(0.0, 2.0), st.integers(1, 200))
def test_uniform_alpha_one_is_phase(lam, n):
    g = grid_for(1.0, lam, n)
    u = validity.uniform_wv_state(1.0, lam, n, SPEC, g)
    q = g.positions
    np.testing.assert_allclose(np.abs(u.samples), np.exp(-(q**2) / 4), atol=1e-12)


def test_uniform_zero_coupling():
    g = grid_for(SQRT2, 0.0, 10)
    np.testing.assert_allclose(validity.uniform_wv_state(SQRT2, 0.0, 10, SPEC, g).samples, np.exp(-(g.positions**2) / 4))


def _large_n_gap(n):
    g = grid_for(SQRT2, 0.5, n)
    inside = np.abs(g.positions) <= 3
    q = g.positions[inside]
    u = np.abs(validity.uniform_wv_state(SQRT2, 0.5, n, SPEC, g).samples[inside])
    limit = np.exp((2 - 1) * 0.25 * q**2 / 2) * np.exp(-(q**2) / 4)
    return np.max(np.abs(u - limit))


def test_uniform_large_n_limit():
    assert _large_n_gap(400) <= 1e-3


def test_uniform_large_n_convergence():
    # the leading finite-N term is O(lam^4 Q^4 / N): ten times more particles, ten times smaller gap
    gaps = [_large_n_gap(n) for n in (400, 4000)]
    assert gaps[0] / gaps[1] == pytest.approx(10, rel=0.05)
    assert gaps[1] <= 1e-3


# -- magnitude_profile -----------------------------------------------------------------


def test_profile_alpha_one():
    g = grid_for(1.0, 0.7, 30)
    np.testing.assert_allclose(validity.magnitude_profile(1.0, 0.7, 30, SPEC, g), np.exp(-(g.positions**2) / 2), atol=1e-15)


def test_profile_peak_in_regime():
    g = grid_for(SQRT2, 0.5, 100)
    prof = validity.magnitude_profile(SQRT2, 0.5, 100, SPEC, g)
    assert abs(g.positions[np.argmax(prof)]) <= 2 * g.step


def test_profile_secondary_growth():
    g = grid_for(SQRT2, 1.5, 100)
    prof = validity.magnitude_profile(SQRT2, 1.5, 100, SPEC, g)
    q = g.positions
    assert prof[np.abs(q) > 3].max() > prof[np.argmin(np.abs(q))]


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(0.0, 1.5), st.integers(1, 400))
def test_modulus_matches_profile(alpha, lam, n):
    g = grid_for(alpha, lam, n)
    u = np.abs(validity.uniform_wv_state(alpha, lam, n, SPEC, g).samples)
    np.testing.assert_allclose(u, validity.magnitude_profile(alpha, lam, n, SPEC, g), atol=1e-12, rtol=0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(0.0, 1.5), st.integers(1, 400))
def test_modulus_times_envelope_matches_profile(alpha, lam, n):
    # the profile carries the squared envelope exp(-Q^2/2), the state exp(-Q^2/4)
    g = grid_for(alpha, lam, n)
    u = np.abs(validity.uniform_wv_state(alpha, lam, n, SPEC, g).samples)
    prof = validity.magnitude_profile(alpha, lam, n, SPEC, g)
    np.testing.assert_allclose(u * np.exp(-(g.positions**2) / 4), prof, rtol=1e-10, atol=1e-12 * prof.max())


# -- regime_check ------------------------------------------------------------------------


def test_regime_examples():
    ok = validity.regime_check(SQRT2, 0.5, 100)
    assert ok.regime_lhs == pytest.approx(0.25) and ok.regime_ok and ok.peak_at_origin
    bad = validity.regime_check(SQRT2, 1.5, 100)
    assert bad.regime_lhs == pytest.approx(2.25) and not bad.regime_ok and not bad.peak_at_origin
    assert ok.eccentric
    assert ok.finite_n_correction == pytest.approx(100 * 0.125)
    assert ok.sqrt_n_lambda_cubed == pytest.approx(10 * 0.125)
    assert ok.lambda_sqrt_n == pytest.approx(5)
    assert set(ok.summary()) >= {"regime_lhs", "regime_ok", "peak_location", "amplification", "eccentric"}


def test_amplification_scales_with_sqrt_n():
    amps = [validity.regime_check(SQRT2, 0.5, n).amplification / math.sqrt(n) for n in (25, 100, 400)]
    assert max(amps) / min(amps) - 1 <= 0.2


@given(st.floats(0.0, 3.0), st.floats(0.0, 2.0))
def test_regime_ok_iff_lhs_below_one(alpha, lam):
    r = validity.regime_check(alpha, lam, 4)
    assert r.regime_ok == (r.regime_lhs < 1)
    assert r.eccentric == (abs(alpha) > 1)


def test_peak_at_origin_sweep():
    for lam in np.linspace(0.1, 2.0, 39):
        r = validity.regime_check(SQRT2, float(lam), 100)
        if r.regime_lhs <= 0.9:
            assert r.peak_at_origin, lam
        elif r.regime_lhs >= 1.5:
            assert not r.peak_at_origin, lam


@pytest.mark.parametrize("lam_sqrt_n", [1.0, 2.0, 3.0])
def test_uniform_momentum_mean(lam_sqrt_n):
    n = 100
    lam = lam_sqrt_n / math.sqrt(n)
    g = grid_for(SQRT2, lam, n)
    _, mean, _ = pointer.moments(pointer.to_momentum(validity.uniform_wv_state(SQRT2, lam, n, SPEC, g)))
    assert mean == pytest.approx(lam_sqrt_n * SQRT2, rel=0.03)


def test_discrepancy_decreases_with_n():
    errs = []
    for n in (5, 10, 20, 40):
        g = grid_for(SQRT2, 1.0, n)
        q = g.positions
        u = validity.uniform_wv_state(SQRT2, 1.0, n, SPEC, g).normalized()
        ideal = GridWavefunction(g, POSITION, np.exp(1j * math.sqrt(n) * SQRT2 * q - q**2 / 4)).normalized()
        errs.append(pointer.l2_error(u, ideal))
    assert all(a > b for a, b in zip(errs, errs[1:])), errs


def test_eccentric_run():
    assert validity.eccentric_run([1.2, -1.5 + 0.1j])
    assert not validity.eccentric_run([1.2, 0.9])
    assert not validity.eccentric_run([])
