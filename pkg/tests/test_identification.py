from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ppmmsel.exceptions import DegenerateProxy, InvalidIdentification
from ppmmsel.identification import g_factor, identify, marginal_mean, phi_validity_bound
from ppmmsel.moments import ObservedSummary, PatternMoments

from strategies import summaries


def exact_g(phi, rho):
    phi, rho = F(phi), F(rho)
    return (phi + (1 - phi) * rho) / (phi * rho + (1 - phi))


class TestGFactor:
    @pytest.mark.parametrize("phi,rho,expected", [(0, 0.2, 0.2), (0.5, 0.37, 1.0), (1, 0.25, 4.0)])
    def test_landmarks(self, phi, rho, expected):
        assert g_factor(phi, rho) == pytest.approx(expected, rel=1e-15)

    def test_phi_09(self):
        expected = exact_g("0.9", "0.2")
        assert expected == F(23, 7)
        assert g_factor(0.9, 0.2) == pytest.approx(float(expected), rel=1e-14)

    @given(st.floats(1e-6, 1.0))
    def test_half_is_neutral(self, rho):
        assert g_factor(0.5, rho) == 1.0

    @given(st.floats(0, 1))
    def test_perfect_proxy(self, phi):
        assert g_factor(phi, 1.0) == pytest.approx(1.0, abs=1e-15)

    @given(st.floats(0.01, 0.99), st.floats(0, 0.99), st.floats(1e-3, 0.01))
    def test_increasing(self, rho, phi, dphi):
        assert g_factor(min(phi + dphi, 1.0), rho) > g_factor(phi, rho)

    def test_zero_rho_at_phi_one(self):
        with pytest.raises(DegenerateProxy):
            g_factor(1.0, 0.0)
        assert g_factor(0.99, 0.0) == pytest.approx(99.0)

    def test_negative_rho(self):
        with pytest.raises(DegenerateProxy):
            g_factor(0.3, -0.2)

    def test_phi_out_of_range(self):
        with pytest.raises(ValueError):
            g_factor(1.1, 0.5)


class TestIdentify:
    def test_mechanism7_half(self, mech):
        m = identify(mech(7), 0.5)
        n = m.nonrespondent
        assert (n.mu_y, n.var_y, n.cov_xy) == pytest.approx((0.8, 1.0, 0.2), abs=1e-15)
        assert (n.mu_x, n.var_x) == (0.8, 1.0)

    def test_against_exact_arithmetic(self, mech):
        # mechanism 16 at phi = 0.9, all in rationals
        obs = mech(16)
        g = exact_g("0.9", "0.2")
        mu_y0 = 1 + g * (F("1.2") - 1)
        var_y0 = 1 + g * g * (F("1.1") - 1)
        cov0 = F("0.2") + g * (F("1.1") - 1)
        n = identify(obs, 0.9).nonrespondent
        assert (n.mu_y, n.var_y, n.cov_xy) == pytest.approx(
            (float(mu_y0), float(var_y0), float(cov0)), rel=1e-14)

    def test_equal_proxy_moments(self):
        obs = ObservedSummary(PatternMoments(2, 3, 1.5, 2.0, 0.9), 2, 1.5, 0.6)
        for phi in (0, 0.3, 1):
            assert identify(obs, phi).nonrespondent == obs.respondent

    def test_invalid(self, shrinking_variance):
        # g = 1/rho = 5 so var_y0 = 1 + 25 * (0.5 - 1) < 0
        with pytest.raises(InvalidIdentification, match="variance"):
            identify(shrinking_variance, 1.0)

    @settings(max_examples=200, deadline=None)
    @given(summaries())
    def test_phi_zero_is_regression_calibration(self, obs):
        m = identify(obs, 0.0)
        r = obs.respondent
        shift = r.cov_xy / r.var_x * (obs.nonresp_mu_x - r.mu_x)
        assert m.nonrespondent.mu_y - r.mu_y == pytest.approx(shift, abs=1e-12 * max(1, abs(shift)))

    @settings(max_examples=200, deadline=None)
    @given(summaries(), st.floats(0, 1))
    def test_models_are_proper(self, obs, phi):
        try:
            m = identify(obs, phi)
        except (InvalidIdentification, DegenerateProxy):
            return
        n = m.nonrespondent
        assert n.var_y > 0
        assert n.var_y - n.cov_xy ** 2 / n.var_x > 0
        assert (n.mu_x, n.var_x) == (obs.nonresp_mu_x, obs.nonresp_var_x)


class TestMarginalMean:
    def test_arithmetic(self):
        obs = ObservedSummary(PatternMoments(1, 1, 1, 1, 0.2), 0.8, 1.0, 0.75)
        assert marginal_mean(identify(obs, 0.5)) == pytest.approx(0.75 * 1 + 0.25 * 0.8)

    def test_no_bias_when_patterns_match(self):
        obs = ObservedSummary(PatternMoments(1, 4, 1, 1, 0.2), 1, 1, 0.75)
        assert marginal_mean(identify(obs, 0.0)) == 4

    def test_mechanism10_increasing(self, mech):
        vals = [marginal_mean(identify(mech(10), phi)) for phi in (0, 0.5, 1)]
        assert vals[0] < vals[1] < vals[2]

    def test_continuity(self, mechanisms):
        grid = np.round(np.arange(0, 1.0005, 1e-3), 12)
        for obs in mechanisms:
            vals = []
            for phi in grid:
                try:
                    vals.append(marginal_mean(identify(obs, phi)))
                except InvalidIdentification:
                    break
            # derivative of the mean in phi is bounded by (1-pi) * |dmu| * dg/dphi <= 0.25 * 0.2 * 25
            assert np.max(np.abs(np.diff(vals))) < 1.25 * 1e-3 * 1.01


class TestPhiValidityBound:
    def test_equal_variances(self, mechanisms):
        for m in mechanisms[6:12]:
            assert phi_validity_bound(m, 0.01) == (0.0, 1.0)

    def test_shrinking_variance(self, shrinking_variance):
        lo, hi = phi_validity_bound(shrinking_variance, 0.01)
        assert lo == 0 and hi < 1
        # var_y0 = 1 - g^2/2 > 0 needs g < sqrt(2); the conditional variance
        # 1 - g^2/2 - (0.2 - g/2)^2 / 0.5 = 0.92 + 0.4 g - g^2 binds first
        g_max = min(np.sqrt(2), (0.4 + np.sqrt(0.16 + 4 * 0.92)) / 2)
        grid = np.round(np.arange(0, 1.0001, 0.01), 12)
        expected = max(p for p in grid if g_factor(p, 0.2) < g_max)
        assert hi == pytest.approx(expected)

    def test_weak_proxy(self):
        obs = ObservedSummary(PatternMoments(0, 0, 1, 1, 1e-4), 0, 0.9, 0.5)
        assert phi_validity_bound(obs, 0.01)[1] < 1

    def test_step_bounds(self, mech):
        with pytest.raises(ValueError):
            phi_validity_bound(mech(1), 0.2)
