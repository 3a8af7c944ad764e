import itertools
import warnings

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st

from ppmmsel.exceptions import (
    EmptyColumn,
    InputError,
    InsufficientPattern,
    NonPositiveVariance,
    NotPositiveDefinite,
    RankDeficientDesign,
)
from ppmmsel.moments import (
    DesignEncoder,
    ObservedSummary,
    PatternMoments,
    ProxyRegressor,
    encode_design,
    fit_proxy,
    summarize,
    summary_from_ols_proxy,
    validate_pattern_moments,
)


class TestValidatePatternMoments:
    @pytest.mark.parametrize("m", [PatternMoments(1, 1, 1, 1, 0.2), PatternMoments(0, 0, 1, 1, 0)])
    def test_valid(self, m):
        assert validate_pattern_moments(m) is m

    def test_correlation_above_one(self):
        with pytest.raises(NotPositiveDefinite):
            validate_pattern_moments(PatternMoments(1, 1, 1, 1, 1.5))

    def test_perfect_correlation_is_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            validate_pattern_moments(PatternMoments(0, 0, 4, 1, 2))

    @pytest.mark.parametrize("vx,vy", [(0, 1), (1, -1)])
    def test_nonpositive_variance(self, vx, vy):
        with pytest.raises(NonPositiveVariance):
            validate_pattern_moments(PatternMoments(0, 0, vx, vy, 0))

    def test_rho(self):
        assert PatternMoments(0, 0, 4, 9, 3).rho == pytest.approx(0.5)


class TestObservedSummary:
    def test_pi_bounds(self):
        with pytest.raises(ValueError):
            ObservedSummary(PatternMoments(0, 0, 1, 1, 0), 0, 1, 1.0).validate()

    def test_degenerate_summary_is_constructible_but_invalid(self):
        s = summarize([1, 1, 3, 3], [2, 4, np.nan, np.nan])
        with pytest.raises(NonPositiveVariance):
            s.validate()

    def test_roundtrip(self):
        s = ObservedSummary(PatternMoments(1, 2, 3, 4, 0.5), 0.1, 2.0, 0.3, 30, 100)
        assert ObservedSummary.from_dict(s.to_dict()) == s

    def test_from_ols_proxy(self):
        s = summary_from_ols_proxy(2.75, 0.96, 0.28, 3.04, 1.02, 0.823)
        assert s.rho1 == pytest.approx(0.28, abs=1e-14)
        assert s.respondent.mu_y == 2.75


class TestProxyRegressor:
    def test_exact_linear(self, rng):
        Z = rng.normal(size=(50, 2))
        y = 3 + 2 * Z[:, 0] - Z[:, 1]
        reg = ProxyRegressor().fit(Z, y)
        assert reg.intercept_ == pytest.approx(3)
        np.testing.assert_allclose(reg.coef_, [2, -1], atol=1e-10)
        assert reg.r_squared_ == pytest.approx(1)

    def test_matches_lstsq(self, rng):
        Z = rng.normal(size=(200, 4)) * [1, 10, 100, 0.01]
        y = rng.normal(size=200)
        A = np.column_stack([np.ones(200), Z])
        expected = np.linalg.lstsq(A, y, rcond=None)[0]
        reg = ProxyRegressor().fit(Z, y)
        np.testing.assert_allclose([reg.intercept_, *reg.coef_], expected, rtol=1e-8, atol=1e-12)

    def test_duplicate_column(self, rng):
        z = rng.normal(size=30)
        with pytest.raises(RankDeficientDesign):
            ProxyRegressor().fit(np.column_stack([z, z]), rng.normal(size=30))

    def test_column_collinear_with_intercept(self, rng):
        with pytest.raises(RankDeficientDesign):
            ProxyRegressor().fit(np.column_stack([rng.normal(size=30), np.full(30, 2.0)]),
                                 rng.normal(size=30))

    def test_get_params(self):
        assert ProxyRegressor(pivot_tol=1e-8).get_params() == {"pivot_tol": 1e-8}


class TestFitProxy:
    def test_perfect_proxy(self, rng):
        Z = rng.normal(size=(40, 1))
        fit = fit_proxy(5 * Z[:30, 0] - 1, Z[:30], Z)
        assert fit.r_squared == pytest.approx(1)
        assert fit.respondent_rho == pytest.approx(1)
        assert fit.proxy_values.shape == (40,)

    def test_independent_outcome(self):
        gen = np.random.default_rng(7)
        n = 10_000
        Z = gen.normal(size=(n, 1))
        y = gen.normal(size=n)
        fit = fit_proxy(y, Z, Z)
        # sqrt(R^2) = |corr| is O(1/sqrt(n)) under independence
        assert fit.r_squared < (3 / np.sqrt(n)) ** 2 * 4
        assert fit.respondent_rho < 3 / np.sqrt(n) * 2

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), p=st.integers(1, 5))
    def test_rho_squared_is_r_squared(self, seed, p):
        gen = np.random.default_rng(seed)
        Z = gen.normal(size=(60, p))
        y = Z @ gen.normal(size=p) + gen.normal(size=60)
        fit = fit_proxy(y, Z, Z)
        assert fit.respondent_rho >= -1e-12
        assert fit.respondent_rho ** 2 == pytest.approx(fit.r_squared, abs=1e-8)


class TestSummarize:
    def test_hand_example(self):
        s = summarize([1, 1, 3, 3], [2, 4, np.nan, np.nan])
        assert s.respondent.mu_x == 1
        assert s.respondent.mu_y == 3
        assert s.nonresp_mu_x == 3
        assert s.pi == 0.5
        assert s.respondent.var_y == 2  # ((2-3)^2 + (4-3)^2) / (2-1)

    def test_all_observed(self):
        with pytest.raises(InsufficientPattern):
            summarize([1, 2, 3], [1, 2, 3])

    def test_one_nonrespondent(self):
        with pytest.raises(InsufficientPattern):
            summarize([1, 2, 3, 4], [1, 2, 3, np.nan])

    def test_ddof(self, rng):
        x = rng.normal(size=20)
        y = np.where(np.arange(20) < 12, rng.normal(size=20), np.nan)
        unbiased = summarize(x, y)
        mle = summarize(x, y, ddof=0)
        assert mle.respondent.var_x == pytest.approx(unbiased.respondent.var_x * 11 / 12)
        assert mle.nonresp_var_x == pytest.approx(unbiased.nonresp_var_x * 7 / 8)
        assert unbiased.respondent.var_x == pytest.approx(np.var(x[:12], ddof=1))
        assert unbiased.respondent.cov_xy == pytest.approx(np.cov(x[:12], y[:12])[0, 1])

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(6, 80))
    def test_permutation_invariant(self, seed, n):
        gen = np.random.default_rng(seed)
        x = gen.normal(size=n) * 10
        y = gen.normal(size=n)
        y[gen.permutation(n)[: n // 2]] = np.nan
        perm = gen.permutation(n)
        a, b = summarize(x, y), summarize(x[perm], y[perm])
        np.testing.assert_allclose(
            [*a.respondent.to_dict().values(), a.nonresp_mu_x, a.nonresp_var_x, a.pi],
            [*b.respondent.to_dict().values(), b.nonresp_mu_x, b.nonresp_var_x, b.pi],
            rtol=0, atol=1e-12,
        )

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_moments_always_valid(self, seed):
        gen = np.random.default_rng(seed)
        x = gen.normal(size=12)
        y = 0.3 * x + gen.normal(size=12)
        y[:5] = np.nan
        s = summarize(x, y)
        assert validate_pattern_moments(s.respondent)


class TestDesignEncoder:
    def test_categorical_drops_reference(self):
        df = pd.DataFrame({"g": ["b", "a", "c", "a"]})
        X, names, notes = encode_design(df)
        assert names == ["g=a", "g=c"]  # "b" appears first, so it is the reference
        np.testing.assert_array_equal(X, [[0, 0], [1, 0], [0, 1], [1, 0]])
        assert notes == []

    def test_numeric_passthrough(self):
        df = pd.DataFrame({"age": [20.0, 35.5, 50.0]})
        X, names, _ = encode_design(df)
        assert names == ["age"]
        np.testing.assert_array_equal(X[:, 0], df["age"])

    def test_single_level_dropped(self):
        df = pd.DataFrame({"age": [1.0, 2.0, 3.0], "country": ["us", "us", "us"]})
        with pytest.warns(UserWarning, match="country"):
            enc = DesignEncoder().fit(df)
        assert list(enc.get_feature_names_out()) == ["age"]
        assert len(enc.warnings_) == 1

    def test_constant_numeric_dropped(self):
        X, names, notes = encode_design(pd.DataFrame({"a": [1.0, 2.0], "k": [5, 5]}))
        assert names == ["a"] and "k" in notes[0]

    def test_forced_categorical(self):
        _, names, _ = encode_design(pd.DataFrame({"edu": [1, 2, 3, 1]}), categorical=["edu"])
        assert names == ["edu=2", "edu=3"]

    def test_column_order(self):
        df = pd.DataFrame({"z": ["x", "y"], "a": [1.0, 2.0], "m": ["p", "q"]})
        _, names, _ = encode_design(df)
        assert names == ["z=y", "a", "m=q"]

    def test_empty_column(self):
        with pytest.raises(EmptyColumn):
            DesignEncoder().fit(pd.DataFrame({"a": [np.nan, np.nan]}))

    def test_missing_covariate_reports_line(self):
        with pytest.raises(InputError, match="line 3"):
            DesignEncoder().fit(pd.DataFrame({"a": [1.0, np.nan, 2.0]}))

    def test_unseen_level(self):
        enc = DesignEncoder().fit(pd.DataFrame({"g": ["a", "b"]}))
        with pytest.raises(ValueError, match="unseen"):
            enc.transform(pd.DataFrame({"g": ["c"]}))

    def test_sklearn_clone(self):
        from sklearn.base import clone
        enc = clone(DesignEncoder(categorical=["x"]))
        assert enc.get_params() == {"categorical": ["x"]}
