import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from conftest import scenario
from delaycorr.channel import make_layout
from delaycorr.correlation import (
    build_correlation_set,
    build_r_dh,
    build_r_hh,
    cross_corr_diffuse,
    cross_corr_los,
    delay_corr,
    location_phase,
    offset_toeplitz,
)
from delaycorr.errors import DivergenceError
from delaycorr.numerics import bessel_i0_complex, cholesky_psd


def test_params_validation():
    with pytest.raises(ValueError):
        scenario(k=-1)
    with pytest.raises(ValueError):
        scenario(c0=0.0)
    with pytest.raises(ValueError):
        scenario(aoa_mean=math.pi)
    s = scenario(k=3.0)
    assert s.doppler == pytest.approx(1000.0)
    assert s.los_power + s.diffuse_power == pytest.approx(1.0)


class TestCrossCorrelation:
    def test_matched_delay_is_real(self):
        s = scenario(k=2.0, aoa_width=3.0, aoa_mean=0.4)
        d = 0.5
        tau = d / (s.wavelength * s.doppler)
        val = cross_corr_diffuse(s, tau, d)
        assert val == pytest.approx(math.exp(-s.scatter_decay * s.speed * tau) / 3.0, rel=1e-14)
        assert val.imag == 0.0

    def test_isotropic_half_wavelength_is_j0(self):
        s = scenario(k=0.0)
        d = -s.wavelength / 2  # Delta = pi at tau = 0
        assert location_phase(s, 0.0, d) == pytest.approx(math.pi)
        val = cross_corr_diffuse(s, 0.0, d)
        assert val.real == pytest.approx(-0.30424217764409546, rel=1e-12)
        assert val.real == pytest.approx(special.j0(math.pi), rel=1e-12)

    def test_colocated(self):
        s = scenario(k=4.0, aoa_width=1.0)
        assert cross_corr_diffuse(s, 0.0, 0.0) == pytest.approx(0.2)

    def test_against_scipy_with_nonzero_aoa_width(self):
        s = scenario(k=1.0, aoa_width=2.0, aoa_mean=0.3, heading=0.1)
        tau, d = 1e-4, 0.01
        dl = location_phase(s, tau, d)
        z = cmath.sqrt(4.0 - dl**2 - 4j * dl * math.cos(0.2))
        expected = special.iv(0, z) / special.i0(2.0) / 2.0 * math.exp(-s.scatter_decay * s.speed * tau)
        assert abs(cross_corr_diffuse(s, tau, d) - expected) < 1e-12

    def test_branch_irrelevant(self):
        z = cmath.sqrt(1.5 - 4.0 - 2j * 1.2)
        assert bessel_i0_complex(z) == pytest.approx(bessel_i0_complex(-z), rel=1e-14)

    def test_far_separation_reports_divergence(self):
        # Delta ~ 63 rad: the series cannot deliver 1e-10 accuracy
        with pytest.raises(DivergenceError):
            cross_corr_diffuse(scenario(k=0.0), 0.0, 1.0)

    def test_los_values(self):
        s = scenario(k=1.0)
        assert cross_corr_los(s, 0.0, 0.0) == pytest.approx(0.5)
        assert cross_corr_los(scenario(k=0.0), 1e-3, 0.2) == 0
        assert cross_corr_los(s, 0.0, -s.wavelength / 2) == pytest.approx(-0.5, abs=1e-15)

    @given(st.floats(0, 20), st.floats(-1, 1), st.floats(-0.2, 0.2))
    def test_magnitudes_bounded(self, k, tau_ms, d):
        # keeps |Delta| <= 2 pi * 2.2 where the series is accurate
        s = scenario(k=k)
        tau = tau_ms * 1e-4
        assert abs(cross_corr_diffuse(s, tau, d)) <= s.diffuse_power + 1e-12
        assert abs(cross_corr_los(s, tau, d)) <= s.los_power + 1e-12


class TestDelayCorr:
    def test_adjacent(self):
        dif, los = delay_corr(scenario(k=0.0, spacing=1.0), 1, 2)
        assert dif == pytest.approx(0.9048374180359595, rel=1e-15)
        assert los == 0.0

    def test_static_limit(self):
        s = scenario(k=1.5, c0=1e-300)
        dif, los = delay_corr(s, 1, 7)
        assert dif == pytest.approx(1 / 2.5)
        assert dif + los == pytest.approx(1.0)

    def test_pure_los_limit(self):
        dif, los = delay_corr(scenario(k=1e12), 2, 3)
        assert dif < 1e-11 and los == pytest.approx(1.0)

    @pytest.mark.parametrize("p, q", [(2, 2), (3, 1), (0, 1), (1, 9)])
    def test_bad_indices(self, p, q):
        with pytest.raises(IndexError):
            delay_corr(scenario(), p, q, n_r=8)

    @given(st.integers(1, 30), st.integers(1, 30), st.floats(0, 10), st.floats(0.01, 1))
    def test_consistent_with_cross_correlation(self, p, gap, k, c0):
        s = scenario(k=k, c0=c0, aoa_width=1.0)
        q = p + gap
        dif, los = delay_corr(s, p, q)
        d = gap * s.antenna_spacing
        full = cross_corr_diffuse(s, d / s.speed, d)
        assert abs(full.real - dif) <= 1e-12
        assert abs(full.imag) <= 1e-12
        assert abs(cross_corr_los(s, d / s.speed, d) - los) <= 1e-12


class TestMatrices:
    def test_r_hh_small(self):
        s = scenario(k=0.0, spacing=1.0)
        r = build_r_hh(s, make_layout(2, 1)).to_dense()
        np.testing.assert_allclose(r, [[1, math.exp(-0.2)], [math.exp(-0.2), 1]], rtol=1e-15)

    def test_r_hh_uncorrelated_limit(self):
        r = build_r_hh(scenario(k=1.0, c0=1e4), make_layout(5, 2)).to_dense()
        np.testing.assert_allclose(r, np.eye(5) / 2, atol=1e-300)

    def test_r_hh_single(self):
        np.testing.assert_allclose(build_r_hh(scenario(k=3.0), make_layout(1, 3)).to_dense(), [[0.25]])

    def test_r_dh_single(self):
        s = scenario(k=1.0, spacing=1.0)
        r = build_r_dh(s, make_layout(1, 1), 1)
        assert r[0, 0] == pytest.approx(math.exp(-0.1) / 2, rel=1e-15)

    def test_zero_offset_is_r_hh(self):
        s = scenario()
        lay = make_layout(6, 4)
        np.testing.assert_allclose(offset_toeplitz(s, 6, lay.delta, 0), build_r_hh(s, lay).to_dense(), rtol=1e-15)

    def test_small_offset_limit(self):
        s = scenario()
        lay = make_layout(6, 4)
        np.testing.assert_allclose(offset_toeplitz(s, 6, lay.delta, 1e-9), build_r_hh(s, lay).to_dense(), rtol=1e-9)

    def test_r_dh_group_range(self):
        with pytest.raises(IndexError):
            build_r_dh(scenario(), make_layout(4, 3), 4)
        with pytest.raises(IndexError):
            build_r_dh(scenario(), make_layout(4, 3), 0)

    def test_r_dh_entries_match_formula(self):
        s = scenario(k=0.5, c0=0.3, spacing=0.7)
        lay = make_layout(5, 3)
        for u in (1, 2, 3):
            r = build_r_dh(s, lay, u)
            for m in range(5):
                for n in range(5):
                    expected = math.exp(-s.scatter_decay * abs(m - n + u * lay.delta) * s.antenna_spacing / lay.delta)
                    assert r[m, n] == pytest.approx(expected * s.diffuse_power, rel=1e-14)

    def test_offset_identity(self):
        # |m-n+u delta| D/delta == |(m-n) D/delta + u D|
        s = scenario(c0=0.2, spacing=0.5)
        lay = make_layout(4, 5)
        for u in range(1, 6):
            r = build_r_dh(s, lay, u)
            m, n = np.indices(r.shape)
            alt = s.diffuse_power * np.exp(-s.scatter_decay * np.abs((m - n) * s.antenna_spacing / lay.delta + u * s.antenna_spacing))
            np.testing.assert_allclose(r, alt, rtol=1e-13)

    def test_r_dh_decreasing_in_u_below_diagonal(self):
        lay = make_layout(4, 6)
        mats = [build_r_dh(scenario(), lay, u) for u in range(1, 7)]
        for a, b in zip(mats, mats[1:]):
            m, n = np.indices(a.shape)
            lower = m >= n
            assert np.all(b[lower] < a[lower])

    @given(st.integers(1, 64), st.integers(1, 20), st.floats(0, 10), st.floats(0.01, 2))
    def test_r_hh_properties(self, n_p, l_ratio, k, c0):
        s = scenario(k=k, c0=c0)
        lay = make_layout(n_p, l_ratio)
        t = build_r_hh(s, lay)
        r = t.to_dense()
        np.testing.assert_allclose(np.diag(r), s.diffuse_power)
        assert np.all(r >= 0) and np.all(r <= s.diffuse_power)  # far lags may underflow
        _, jitter = cholesky_psd(t, return_jitter=True)
        assert jitter == 0.0

    def test_correlation_set(self):
        s = scenario(k=3.0)
        cs = build_correlation_set(s, make_layout(4, 3))
        assert cs.los_coefficient == pytest.approx(0.75)
        assert len(cs.r_dh_dif) == 3
        assert cs.r_hh_dif.n == 4
