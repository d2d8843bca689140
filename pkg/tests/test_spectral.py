import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defectwalk.errors import DimensionError, ProbeDomainError
from defectwalk.operators import ScalarField, apply_T0tilde, build_dense_T, build_dense_U
from defectwalk.spectral import (
    Verdict,
    arc_from_band,
    band_coverage,
    classify_eigenvalues,
    divergence_probe,
    fourier_symbol,
    resolvent_closed_form,
    resolvent_integral,
    summarize,
    torus_spectrum,
)
from defectwalk.walk import LatticeWindow, validate_params

from conftest import random_params


def closed_form(v0, mu, lam):
    # 2 pi sign(b) / sqrt(b^2 - a^2) with a = 2 mu, b = V0 - lam
    b, a = v0 - lam, 2 * mu
    return 2 * math.pi * math.copysign(1, b) / math.sqrt(b * b - a * a)


def test_summary_pstar(pstar):
    s = summarize(pstar)
    assert s.mu == pytest.approx(0.4) and abs(s.V0) < 1e-15
    assert s.band == pytest.approx((-0.8, 0.8))
    assert dict(s.point_spectrum) == {1: 1, -1: 1}
    xi = math.acos(0.8)
    np.testing.assert_allclose(s.arc, [(xi, math.pi - xi), (-(math.pi - xi), -xi)], atol=1e-14)


def test_summary_h0(h0):
    s = summarize(h0)
    assert s.band == pytest.approx((-1, 1))
    assert s.arc == ((-math.pi, math.pi),)
    assert dict(s.point_spectrum) == {1: 0, -1: 0}
    assert s.to_dict()["full_circle"]


def test_summary_flat(flat):
    s = summarize(flat)
    assert s.mu == 0 and s.band == (0.6, 0.6) and s.degenerate


def test_summary_2d(params2d):
    s = summarize(params2d)
    assert dict(s.point_spectrum) == {1: math.inf, -1: math.inf}
    assert s.to_dict()["M_plus"] == "infinity"


def test_arc_touching_one_side():
    (arc,) = arc_from_band(0.2, 1.0)
    assert arc == pytest.approx((-math.acos(0.2), math.acos(0.2)))
    (arc,) = arc_from_band(-1.0, 0.5)
    assert arc == pytest.approx((math.acos(0.5), 2 * math.pi - math.acos(0.5)))


def test_fourier_symbol(pstar, flat):
    assert fourier_symbol(pstar, 0.0) == pytest.approx(0.8)
    assert fourier_symbol(pstar, math.pi) == pytest.approx(-0.8)
    np.testing.assert_allclose(fourier_symbol(flat, np.linspace(0, 6, 7)[:, None]), 0.6)
    with pytest.raises(DimensionError):
        fourier_symbol(pstar, [0.0, 1.0])


def test_symbol_range_matches_band(rng):
    for _ in range(5):
        params = random_params(rng)
        k = np.linspace(0, 2 * math.pi, 10_000)[:, None]
        vals = fourier_symbol(params, k)
        lo, hi = summarize(params).band
        assert abs(vals.min() - lo) <= 1e-3 and abs(vals.max() - hi) <= 1e-3


def test_symbol_is_plane_wave_eigenvalue(rng):
    params = random_params(rng, 2)
    w = LatticeWindow.torus(8, 2)
    x = w.site_array().reshape(*w.shape, 2)
    for m in [(0, 0), (1, 3), (5, 7)]:
        k = 2 * math.pi * np.array(m) / 8
        wave = np.exp(1j * (x @ k))
        out = apply_T0tilde(params, ScalarField(w, wave)).values
        np.testing.assert_allclose(out, fourier_symbol(params, k) * wave, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3))
def test_band_containment(seed, n):
    lo, hi = summarize(random_params(np.random.default_rng(seed), n)).band
    assert -1 - 1e-12 <= lo <= hi <= 1 + 1e-12


# --- torus spectra -------------------------------------------------------------


@pytest.fixture(scope="module")
def pstar_spectra():
    params = validate_params([0.6], [0.8], [[2**-0.5, 2**-0.5]])
    return {
        "U400": torus_spectrum(build_dense_U(params, 400)),
        "T200": torus_spectrum(build_dense_T(params, 200)),
        "T400": torus_spectrum(build_dense_T(params, 400)),
    }


def test_U_spectrum_pstar(pstar_spectra):
    ev = pstar_spectra["U400"]
    assert ev.shape == (800,)
    labels = classify_eigenvalues(ev, (-0.8, 0.8), margin=10 / 400)
    assert labels.count("plus_one") == 1 and labels.count("minus_one") == 1
    assert labels.count("outlier") == 0
    cov = band_coverage(ev, (-0.8, 0.8), margin=10 / 400)
    assert cov.hausdorff <= 0.05 and cov.outliers == 0 and cov.excluded == 2


def test_T_spectrum_pstar(pstar_spectra):
    for key, N in (("T200", 200), ("T400", 400)):
        ev = pstar_spectra[key]
        assert ev.min() >= -0.85 and ev.max() <= 0.85
        assert band_coverage(ev, (-0.8, 0.8)).max_gap <= 10 / N
    gap200 = band_coverage(pstar_spectra["T200"], (-0.8, 0.8)).max_gap
    gap400 = band_coverage(pstar_spectra["T400"], (-0.8, 0.8)).max_gap
    assert gap400 <= 0.6 * gap200


def test_flat_spectra(flat):
    np.testing.assert_allclose(torus_spectrum(build_dense_T(flat, 30)), 0.6, atol=1e-12)
    ev = torus_spectrum(build_dense_U(flat, 30))
    cos = np.cos(np.angle(ev))
    far = (np.abs(ev - 1) > 1e-6) & (np.abs(ev + 1) > 1e-6)
    np.testing.assert_allclose(cos[far], 0.6, atol=1e-10)


def test_h0_coverage(h0):
    ev = torus_spectrum(build_dense_U(h0, 400))
    assert band_coverage(ev, (-1.0, 1.0)).hausdorff <= 0.05


def test_empty_coverage_is_inconclusive():
    cov = band_coverage(np.array([], dtype=complex), (-0.5, 0.5))
    assert cov.inconclusive and math.isnan(cov.hausdorff)


def test_coverage_hand_example():
    cov = band_coverage(np.array([-0.5, 0.0, 0.1, 0.9]), (-0.5, 0.5), margin=0.1)
    # 0.9 sits 0.4 outside; interior point 0.3 is 0.2 from the nearest value 0.1
    assert cov.hausdorff == pytest.approx(0.4)
    assert cov.max_gap == pytest.approx(0.5)
    assert cov.outliers == 1


# --- probes ----------------------------------------------------------------------


@pytest.mark.parametrize("lam, expected", [(1, -2 * math.pi / 0.6), (-1, 2 * math.pi / 0.6), (2, -3.4277586042362875), (-2, 3.4277586042362875)])
def test_resolvent_pstar(pstar, lam, expected):
    rep = resolvent_integral(pstar, lam)
    assert rep.integral_value == pytest.approx(expected, abs=1e-6)
    assert rep.closed_form == pytest.approx(closed_form(0.0, 0.4, lam), abs=1e-12)
    assert rep.verdict is Verdict.OUTSIDE_BAND_NONZERO


def test_resolvent_value_at_one(pstar):
    assert resolvent_integral(pstar, 1).integral_value == pytest.approx(-10.47198, abs=1e-4)


def test_resolvent_random(rng):
    for _ in range(100):
        params = random_params(rng)
        s = summarize(params)
        lo, hi = s.band
        lam = hi + rng.uniform(0.01, 1) if rng.random() < 0.5 else lo - rng.uniform(0.01, 1)
        rep = resolvent_integral(params, lam)
        assert rep.integral_value == pytest.approx(closed_form(s.V0, s.mu, lam), abs=1e-6)
        assert resolvent_closed_form(params, lam) == pytest.approx(closed_form(s.V0, s.mu, lam), rel=1e-12)


def test_resolvent_domain(pstar, params2d):
    with pytest.raises(ProbeDomainError):
        resolvent_integral(pstar, 0.3)
    with pytest.raises(ProbeDomainError):
        resolvent_integral(pstar, 0.8)
    with pytest.raises(DimensionError):
        resolvent_integral(params2d, 2.0)


@pytest.mark.parametrize("lam", [0.0, 0.5, 0.79])
def test_divergence_pstar(pstar, lam):
    rep = divergence_probe(pstar, lam, 4)
    vals = rep.refinement_values
    assert len(vals) == 4 and all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 1e4 and rep.verdict is Verdict.INSIDE_BAND_DIVERGENT
    assert rep.nodes == (2048, 4096, 8192, 16384)


def test_divergence_2d(params2d):
    rep = divergence_probe(params2d, 0.1, 4)
    assert rep.verdict is Verdict.INSIDE_BAND_DIVERGENT
    assert rep.nodes[-1] <= 2**24


def test_divergence_domain(pstar, flat):
    for lam in (0.8, 1.5):
        with pytest.raises(ProbeDomainError):
            divergence_probe(pstar, lam)
    with pytest.raises(ProbeDomainError):
        divergence_probe(flat, 0.6)


def test_divergence_skips_zero_mu_axes():
    s = 0.5
    # axis 2 has Phi_2 = 0 there, so mu_2 = 0 and only one axis is integrated
    params = validate_params([0.6, 0.6], [0.8, 0.8], [[s, s], [math.sqrt(0.5), 0.0]])
    rep = divergence_probe(params, 0.15, 4)
    assert rep.nodes == (2048, 4096, 8192, 16384)
