import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecgrowth.errors import (
    DegreesOfFreedomError,
    NoSignificantPredictorsError,
    SingularDesignError,
    ValidationError,
)
from ecgrowth.linreg import DesignMatrix, FittedModel, backward_eliminate, fit_through_origin, predict

from conftest import COEF_2002_2013, make_design
from oracles import exact_normal_solve


def test_exact_linear_data_recovered(rng):
    X = rng.uniform(-5, 5, (10, 2))
    m = fit_through_origin(make_design(X, X @ [2.0, -3.0]))
    assert np.allclose(m.coefficients, [2.0, -3.0], atol=1e-10)
    assert np.all(np.abs(m.residuals) < 1e-10)
    assert m.adj_r2 == pytest.approx(1.0, abs=1e-10)


def test_single_predictor_closed_form():
    # sum(xy) / sum(x^2) = (2 + 10) / (1 + 4)
    m = fit_through_origin(make_design([1.0, 2.0], [2.0, 5.0]))
    assert m.coefficients[0] == pytest.approx(2.4, abs=1e-15)


def test_inference_matches_statsmodels(rng):
    sm = pytest.importorskip("statsmodels.api")
    X = rng.uniform(0, 10, (12, 3))
    y = X @ [1.1, 0.2, 2.5] + rng.normal(0, 1.0, 12)
    ours = fit_through_origin(make_design(X, y))
    ref = sm.OLS(y, X).fit()
    assert np.allclose(ours.coefficients, ref.params, rtol=1e-10)
    assert np.allclose(ours.std_errors, ref.bse, rtol=1e-8)
    assert np.allclose(ours.t_stats, ref.tvalues, rtol=1e-8)
    assert np.allclose(ours.p_values, ref.pvalues, rtol=1e-7, atol=1e-14)
    # statsmodels reports uncentered R^2 for models without a constant
    assert ours.r2 == pytest.approx(ref.rsquared, rel=1e-10)
    assert ours.adj_r2 == pytest.approx(ref.rsquared_adj, rel=1e-10)


def test_uncentered_r2_definition(rng):
    X = rng.uniform(1, 3, (9, 2))
    y = X @ [1.0, 1.0] + rng.normal(0, 0.3, 9)
    m = fit_through_origin(make_design(X, y))
    ssr = float(np.sum(np.square(m.residuals)))
    r2 = 1 - ssr / float(y @ y)
    assert m.r2 == pytest.approx(r2, rel=1e-12)
    assert m.adj_r2 == pytest.approx(1 - (1 - r2) * 9 / 7, rel=1e-12)


def test_residuals_defined_exactly(rng):
    X = rng.uniform(-3, 3, (8, 3))
    y = rng.normal(0, 1, 8)
    m = fit_through_origin(make_design(X, y))
    expected = y - X @ np.array(m.coefficients)
    assert np.array_equal(np.array(m.residuals), expected)
    assert all(0.0 <= p <= 1.0 for p in m.p_values)
    assert all(s > 0 for s in m.std_errors)


def test_rank_deficient_design_names_columns():
    X = np.array([[1.0, 2.0, 0.3], [2.0, 4.0, 0.1], [3.0, 6.0, 0.7], [4.0, 8.0, 0.2]])
    with pytest.raises(SingularDesignError) as exc:
        fit_through_origin(make_design(X, [1.0, 2.0, 3.0, 4.0], ("a", "b", "c")))
    assert set(exc.value.dependent_columns) == {"a", "b"}


@pytest.mark.parametrize("n", [2, 3])
def test_too_few_observations(n):
    X = np.eye(3)[:n]
    with pytest.raises(DegreesOfFreedomError):
        fit_through_origin(make_design(X, np.ones(n)))


def test_design_validation():
    with pytest.raises(ValidationError):
        make_design([[1.0, np.nan], [2.0, 1.0], [3.0, 1.0]], [1.0, 2.0, 3.0])
    with pytest.raises(ValidationError):
        DesignMatrix((1, 2), ("a",), np.ones((3, 1)), np.ones(3))
    with pytest.raises(ValidationError):
        DesignMatrix((1, 2, 3), ("a", "a"), np.ones((3, 2)), np.ones(3))


def test_predict_reproduces_forecast_rows():
    m = FittedModel.from_coefficients(("G", "I_lag4", "D"), COEF_2002_2013)
    assert predict(m, 7.5, -10.3, -1.41) == pytest.approx(3.0498, abs=1e-4)
    assert predict(m, 7.0, 6.2, -2.92) == pytest.approx(1.5124, abs=1e-4)
    assert predict(m, 0.0, 0.0, 0.0) == 0.0
    with pytest.raises(ValidationError):
        predict(m, 1.0, 2.0)


@settings(max_examples=100, deadline=None)
@given(
    u=st.tuples(*[st.floats(-50, 50)] * 3),
    v=st.tuples(*[st.floats(-50, 50)] * 3),
    a=st.floats(-10, 10),
)
def test_predict_is_linear(u, v, a):
    m = FittedModel.from_coefficients(("G", "I_lag4", "D"), COEF_2002_2013)
    assert predict(m, *(a * x for x in u)) == pytest.approx(a * predict(m, *u), abs=1e-9)
    summed = predict(m, *(x + y for x, y in zip(u, v)))
    assert summed == pytest.approx(predict(m, *u) + predict(m, *v), abs=1e-9)


def test_refit_on_fitted_values_is_idempotent(rng):
    X = rng.uniform(0, 10, (12, 3))
    y = X @ [1.0, 0.3, 2.0] + rng.normal(0, 1, 12)
    m = fit_through_origin(make_design(X, y))
    again = fit_through_origin(make_design(X, X @ np.array(m.coefficients)))
    assert np.allclose(again.coefficients, m.coefficients, rtol=1e-10)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(4, 12), p=st.integers(1, 3))
def test_matches_exact_rational_solution(seed, n, p):
    r = np.random.default_rng(seed)
    X = r.uniform(-10, 10, (n, p))
    y = r.uniform(-10, 10, n)
    if np.linalg.cond(X) > 1e3:
        return
    m = fit_through_origin(make_design(X, y))
    ref = np.array(exact_normal_solve(X, y))
    assert np.linalg.norm(np.array(m.coefficients) - ref) <= 1e-10 * np.linalg.norm(ref)


def test_backward_elimination_fixed_point(rng):
    X = rng.uniform(1, 10, (15, 2))
    y = X @ [3.0, 2.0] + rng.normal(0, 0.1, 15)
    design = make_design(X, y)
    assert backward_eliminate(design, 0.05) == fit_through_origin(design)


def test_backward_elimination_drops_noise_column(rng):
    n = 20
    X = rng.uniform(1, 10, (n, 2))
    noise = rng.normal(0, 1, n)
    y = X @ [2.0, -1.0]
    design = make_design(np.column_stack([X, noise]), y + 1e-3 * rng.normal(0, 1, n), ("a", "b", "noise"))
    full = fit_through_origin(design)
    assert full.p_values[2] > 0.05
    m = backward_eliminate(design, 0.05)
    assert m.predictor_names == ("a", "b")
    assert m == fit_through_origin(design.select(["a", "b"]))


def test_backward_elimination_tie_drops_later_column(monkeypatch):
    import ecgrowth.linreg as linreg

    canned = {("a", "b", "c"): (0.01, 0.5, 0.5), ("a", "b"): (0.01, 0.02)}
    calls = []

    def fake_fit(design):
        calls.append(design.predictor_names)
        p = canned[design.predictor_names]
        return FittedModel(design.predictor_names, (1.0,) * len(p), p_values=p)

    monkeypatch.setattr(linreg, "fit_through_origin", fake_fit)
    design = make_design(np.ones((6, 3)) + np.eye(6, 3), np.ones(6), ("a", "b", "c"))
    m = linreg.backward_eliminate(design, 0.05)
    assert calls == [("a", "b", "c"), ("a", "b")]
    assert m.predictor_names == ("a", "b")


def test_backward_elimination_can_empty_the_model(rng):
    X = rng.uniform(1, 2, (8, 1))
    y = rng.normal(0, 1, 8)
    y = y - X[:, 0] * (X[:, 0] @ y) / (X[:, 0] @ X[:, 0])  # orthogonal to the only column
    with pytest.raises(NoSignificantPredictorsError):
        backward_eliminate(make_design(X, y + 1e-9), 0.05)


def test_backward_elimination_alpha_validated(rng):
    design = make_design(rng.uniform(1, 2, (5, 1)), rng.uniform(1, 2, 5))
    for alpha in (0.0, 1.0, -0.1):
        with pytest.raises(ValidationError):
            backward_eliminate(design, alpha)


def test_pool_elimination_recovers_generating_predictors(rng):
    # data generated by the published coefficients through three of six candidates
    n = 24
    G = rng.uniform(6, 15, n)
    lags = rng.normal(0, 8, (n, 4))
    D = rng.normal(-0.5, 1.0, n)
    y = 1.11904 * G + 0.17232 * lags[:, 3] + 2.53056 * D + rng.normal(0, 0.4, n)
    X = np.column_stack([G, lags, D])
    names = ("G", "I_lag1", "I_lag2", "I_lag3", "I_lag4", "D")
    m = backward_eliminate(make_design(X, y, names), 0.05)
    assert m.predictor_names == ("G", "I_lag4", "D")
    ref = exact_normal_solve(X[:, [0, 4, 5]], y)
    assert np.allclose(m.coefficients, ref, rtol=1e-10)


@pytest.mark.parametrize("coefs", [(1.11904, 0.17232, 2.53056), (1.06443, 0.22177, 2.51926)])
def test_published_coefficients_recovered_from_synthetic_data(rng, coefs):
    # y = X b + e with e orthogonal to span(X): least squares must return b
    X = np.column_stack([rng.uniform(5, 15, 12), rng.uniform(-10, 10, 12), rng.uniform(-3, 2, 12)])
    e = rng.normal(0, 0.8, 12)
    q, _ = np.linalg.qr(X)
    e -= q @ (q.T @ e)
    y = X @ np.array(coefs) + e
    m = fit_through_origin(make_design(X, y, ("G", "I_lag4", "D")))
    assert np.allclose(m.coefficients, coefs, rtol=1e-10, atol=0)
    assert np.allclose(exact_normal_solve(X, y), coefs, rtol=1e-10, atol=0)
