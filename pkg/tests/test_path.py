"""Penalty paths and the parent-cap selection rule."""

import numpy as np
import pytest

from eventflow import (
    LinkFamily,
    fit_gaussian_lasso,
    fit_path,
    lambda_max,
    make_design,
    select_by_max_parents,
)
from eventflow.glm import FitResult


def _design(seed, n=60, p=5, family=LinkFamily.GAUSSIAN_IDENTITY):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    beta = np.zeros(p)
    beta[:2] = [1.2, -0.8]
    if family is LinkFamily.GAUSSIAN_IDENTITY:
        y = X @ beta + 0.1 * rng.normal(size=n) + 3.0
    else:
        y = rng.poisson(np.exp(0.9 + 0.3 * X[:, 0])).astype(float)
    return make_design(X, y, tuple(f"p{j}" for j in range(p)))


@pytest.mark.parametrize("family", list(LinkFamily))
def test_everything_at_or_above_lambda_max_is_null(family):
    d = _design(4, family=family)
    lmax = lambda_max(d)
    results = fit_path(d, family, [2 * lmax, lmax, lmax / 2])
    tol = 0.0 if family is LinkFamily.GAUSSIAN_IDENTITY else 1e-6
    for res in results[:2]:
        assert np.abs(res.coeffs * d.scales).max(initial=0.0) <= tol
    assert results[2].n_nonzero > 0


def test_empty_path_gives_no_fits():
    d = _design(1)
    assert fit_path(d, LinkFamily.GAUSSIAN_IDENTITY, []) == []


def test_single_lambda_path_matches_direct_fit():
    d = _design(2)
    direct = fit_gaussian_lasso(d, 0.2)
    (path_fit,) = fit_path(d, LinkFamily.GAUSSIAN_IDENTITY, [0.2])
    np.testing.assert_array_equal(path_fit.coeffs, direct.coeffs)
    assert path_fit.intercept == direct.intercept


def test_warm_started_path_matches_cold_fits():
    d = _design(3)
    lmax = lambda_max(d)
    lams = [lmax * f for f in (0.8, 0.4, 0.2, 0.1, 0.05)]
    path = fit_path(d, LinkFamily.GAUSSIAN_IDENTITY, lams, tol=1e-10)
    for lam, res in zip(lams, path):
        cold = fit_gaussian_lasso(d, lam, tol=1e-10)
        np.testing.assert_allclose(res.coeffs, cold.coeffs, rtol=0, atol=1e-8)


@pytest.mark.parametrize("bad", [[0.1, 0.2], [0.3, 0.3], [0.5, 0.2, 0.2]])
def test_non_descending_path_rejected(bad):
    d = _design(5)
    with pytest.raises(ValueError):
        fit_path(d, LinkFamily.GAUSSIAN_IDENTITY, bad)


def _fake_fit(lam, slopes, covariates=()):
    coeffs = np.array(list(slopes) + list(covariates), dtype=float)
    return FitResult(
        coeffs=coeffs,
        intercept=0.0,
        lam=lam,
        n_nonzero=int(np.count_nonzero(coeffs)),
        objective=0.0,
        converged=True,
        n_iter=1,
    )


def test_select_least_penalized_fit_under_cap():
    fits = [
        _fake_fit(1.0, [0, 0, 0, 0, 0, 0]),
        _fake_fit(0.5, [1, 1, 1, 0, 0, 0]),
        _fake_fit(0.1, [1, 1, 1, 1, 1, 1]),
    ]
    assert select_by_max_parents(fits, 5).lam == 0.5
    assert select_by_max_parents(fits, 6).lam == 0.1
    assert select_by_max_parents(fits, 0).lam == 1.0


def test_select_falls_back_to_most_penalized_when_all_over_cap():
    fits = [_fake_fit(0.5, [1, 1, 1]), _fake_fit(0.1, [1, 1, 1])]
    assert select_by_max_parents(fits, 2).lam == 0.5


def test_select_ignores_covariate_columns():
    # two slopes plus two always-on covariates; cap counts slopes only
    fits = [
        _fake_fit(0.6, [0, 0], [1.0, 2.0]),
        _fake_fit(0.2, [1, 1], [1.0, 2.0]),
    ]
    assert select_by_max_parents(fits, 2, n_parent_columns=2).lam == 0.2
    assert select_by_max_parents(fits, 1, n_parent_columns=2).lam == 0.6
    # without the split the covariates would blow the cap
    assert select_by_max_parents(fits, 2).lam == 0.6


def test_select_validation():
    with pytest.raises(ValueError):
        select_by_max_parents([], 3)
    with pytest.raises(ValueError):
        select_by_max_parents([_fake_fit(0.1, [1])], -1)
