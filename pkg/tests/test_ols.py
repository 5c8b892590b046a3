import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netmon.errors import ValidationError
from netmon.econometrics import OLS, ols


def brute_force(design, y):
    """Coefficients, residuals, and bread matrix by explicit algebra."""
    xtx_inv = np.linalg.inv(design.T @ design)
    coef = xtx_inv @ design.T @ y
    resid = y - design @ coef
    return coef, resid, xtx_inv


class TestPointEstimates:
    def test_exact_line_is_recovered(self):
        x = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
        frame = pd.DataFrame({"x": x, "g": ["a", "a", "b", "b", "c", "c"]})
        res = ols(1.0 + x, frame, se="cluster", cluster_key="g")
        assert res.params["const"] == pytest.approx(1.0, abs=1e-12)
        assert res.params["x"] == pytest.approx(1.0, abs=1e-12)
        assert res.n_clusters == 3
        assert res.r2 == pytest.approx(1.0)
        assert res.ssr == pytest.approx(0.0, abs=1e-20)

    def test_matches_lstsq_with_noise(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((40, 2))
        y = 0.5 + x @ np.array([1.5, -2.0]) + rng.standard_normal(40)
        frame = pd.DataFrame(x, columns=["a", "b"])
        res = ols(y, frame)
        design = np.column_stack([np.ones(40), x])
        coef, _, _ = brute_force(design, y)
        assert res.params["const"] == pytest.approx(coef[0], abs=1e-10)
        assert res.params["a"] == pytest.approx(coef[1], abs=1e-10)
        assert res.params["b"] == pytest.approx(coef[2], abs=1e-10)


class TestSandwiches:
    def test_hc1_matches_textbook_formula(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal(10)
        y = 1.0 + 2.0 * x + rng.standard_normal(10) * (1.0 + np.abs(x))
        res = ols(y, pd.DataFrame({"x": x}), se="HC1")
        design = np.column_stack([np.ones(10), x])
        _, resid, bread = brute_force(design, y)
        n, k = design.shape
        meat = design.T @ np.diag(resid**2) @ design
        vcov = (n / (n - k)) * bread @ meat @ bread
        assert res.se["const"] == pytest.approx(np.sqrt(vcov[0, 0]), abs=1e-10)
        assert res.se["x"] == pytest.approx(np.sqrt(vcov[1, 1]), abs=1e-10)

    def test_cr1_matches_textbook_formula(self):
        rng = np.random.default_rng(10)
        x = rng.standard_normal(9)
        g = np.array(["u", "u", "u", "v", "v", "v", "w", "w", "w"])
        y = 0.3 - 1.1 * x + rng.standard_normal(9)
        res = ols(y, pd.DataFrame({"x": x, "g": g}), se="cluster", cluster_key="g")
        design = np.column_stack([np.ones(9), x])
        _, resid, bread = brute_force(design, y)
        n, k = design.shape
        scores = np.zeros((3, k))
        for i, label in enumerate(sorted(set(g))):
            scores[i] = (design[g == label] * resid[g == label, None]).sum(axis=0)
        meat = scores.T @ scores
        correction = (3 / 2.0) * ((n - 1.0) / (n - k))
        vcov = correction * bread @ meat @ bread
        assert res.se["const"] == pytest.approx(np.sqrt(vcov[0, 0]), abs=1e-10)
        assert res.se["x"] == pytest.approx(np.sqrt(vcov[1, 1]), abs=1e-10)
        assert res.cluster_key == "g"

    def test_single_cluster_rejected(self):
        frame = pd.DataFrame({"x": [1.0, 2.0, 3.0], "g": ["a", "a", "a"]})
        with pytest.raises(ValidationError):
            ols(np.array([1.0, 2.0, 3.0]), frame, se="cluster", cluster_key="g")


class TestDesignHandling:
    def test_collinear_column_dropped_and_reported(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(20)
        frame = pd.DataFrame({"x": x, "2x": 2.0 * x})
        res = ols(x + 1.0, frame)
        # pivoting decides which twin survives; exactly one must be reported
        assert len(res.dropped) == 1
        assert res.dropped[0] in {"x", "2x"}
        assert res.dropped[0] not in res.params
        assert len(res.params) == 2

    def test_categorical_expansion(self):
        frame = pd.DataFrame(
            {"x": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0], "own": list("ppnngg")}
        )
        y = np.arange(6, dtype=float)
        res = ols(y, frame)
        dummy_names = [k for k in res.params if k.startswith("own_")]
        assert len(dummy_names) == 2  # three levels, first dropped

    def test_fixed_effects_absorb_group_means(self):
        rng = np.random.default_rng(6)
        g = np.repeat(["a", "b", "c", "d"], 10)
        shift = {"a": 0.0, "b": 5.0, "c": -3.0, "d": 1.0}
        x = rng.standard_normal(40)
        y = x * 2.0 + np.array([shift[k] for k in g]) + 0.01 * rng.standard_normal(40)
        frame = pd.DataFrame({"x": x, "state": g})
        res = ols(y, frame, fe_keys=("state",))
        assert res.params["x"] == pytest.approx(2.0, abs=0.01)

    def test_listwise_deletion(self):
        frame = pd.DataFrame({"x": [1.0, np.nan, 3.0, 4.0, 5.0]})
        res = ols(np.array([1.0, 2.0, 3.0, np.nan, 5.0]), frame)
        assert res.nobs == 3

    def test_missing_cluster_column(self):
        frame = pd.DataFrame({"x": [1.0, 2.0, 3.0]})
        with pytest.raises(ValidationError, match="not in design frame"):
            ols(np.ones(3), frame, se="cluster", cluster_key="county")

    def test_cluster_key_stays_out_of_design(self):
        frame = pd.DataFrame(
            {"x": [1.0, 2.0, 3.0, 4.0], "g": ["a", "a", "b", "b"]}
        )
        res = ols(np.array([1.0, 2.0, 3.0, 4.0]), frame, se="cluster", cluster_key="g")
        assert set(res.params) == {"const", "x"}


class TestEstimatorSurface:
    def test_predict_reproduces_fitted_values(self):
        rng = np.random.default_rng(12)
        frame = pd.DataFrame({"x": rng.standard_normal(25)})
        y = 2.0 - frame["x"] + rng.standard_normal(25) * 0.1
        model = OLS().fit(frame, y)
        np.testing.assert_allclose(model.predict(frame), model.fitted_, atol=1e-12)

    def test_get_params_roundtrip(self):
        model = OLS(fe_keys=("state",), se="cluster", cluster_key="g")
        params = model.get_params()
        assert params["cluster_key"] == "g"
        clone = OLS(**params)
        assert clone.get_params() == params

    def test_unfitted_predict_raises(self):
        with pytest.raises(ValidationError):
            OLS().predict(pd.DataFrame({"x": [1.0]}))

    def test_bad_se_choice(self):
        with pytest.raises(ValidationError):
            ols(np.ones(3), pd.DataFrame({"x": [1.0, 2.0, 3.0]}), se="HC3")


@given(
    n=st.integers(12, 60),
    seed=st.integers(0, 10_000),
)
@settings(max_examples=25, deadline=None)
def test_residuals_orthogonal_to_design(n, seed):
    rng = np.random.default_rng(seed)
    frame = pd.DataFrame(
        {"a": rng.standard_normal(n), "b": rng.standard_normal(n)}
    )
    y = rng.standard_normal(n)
    model = OLS().fit(frame, y)
    design = np.column_stack([np.ones(n), frame["a"], frame["b"]])
    moments = design.T @ model.residuals_
    assert np.abs(moments).max() <= 1e-8 * max(1.0, np.abs(y).max()) * n
