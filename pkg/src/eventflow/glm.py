"""Sparse GLM fitting on a prepared design matrix.

Two families share one penalized form: a smooth per-row loss plus an L1
penalty on the slope coefficients, with an unpenalized intercept.

* identity link, squared error: cyclic coordinate descent with
  soft-thresholding (delegated to the kernel backend),
* log link, count loss: proximal gradient with backtracking line search.

Columns are always centered before fitting and optionally scaled by their
population standard deviation; results are mapped back to the original
data scale, so callers never see the internal parametrization.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import Diverged, EmptyDesign, NonFinite
from .events import LinkFamily

log = logging.getLogger(__name__)

DEFAULT_TOL_GAUSSIAN = 1e-7
DEFAULT_TOL_POISSON = 1e-6
DEFAULT_MAX_ITER = 10_000

# log-link intercept floor: keeps the fitted rate positive when the
# response is identically zero
LOG_RATE_FLOOR = math.log(1e-8)

_ETA_OVERFLOW = 700.0
_MIN_STEP = 1e-20


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Centered (and optionally scaled) design, plus what undoes it.

    ``X`` holds the transformed columns, column-major for fast column
    access. Constant columns are zeroed outright and flagged in
    ``constant_mask``; their scale is kept at 1 so the inverse transform
    stays well defined. ``y`` is the untransformed response.
    """

    X: np.ndarray
    y: np.ndarray
    column_names: tuple[str, ...]
    n_parent_columns: int
    column_means: np.ndarray
    column_sds: np.ndarray
    scales: np.ndarray
    constant_mask: np.ndarray
    response_mean: float
    standardized: bool

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_columns(self) -> int:
        return self.X.shape[1]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def make_design(
    raw_X,
    y,
    column_names: Sequence[str],
    n_parent_columns: int | None = None,
    standardize: bool = True,
) -> DesignMatrix:
    """Center, flag constants, optionally scale; returns a ready design.

    Raises:
        EmptyDesign: no rows.
        NonFinite: NaN or infinity anywhere in the inputs.
    """
    X = np.array(raw_X, dtype=np.float64, order="F")
    if X.ndim == 1:
        X = X.reshape(len(X), 1 if X.size else 0)
    if X.ndim != 2:
        raise ValueError("design must be a 2-d matrix")
    yv = np.array(y, dtype=np.float64)
    n, p = X.shape
    if n == 0:
        raise EmptyDesign("design has no rows")
    if yv.shape != (n,):
        raise ValueError(f"response length {yv.shape} does not match {n} rows")
    if not np.isfinite(X).all():
        raise NonFinite("design matrix contains NaN or infinity")
    if not np.isfinite(yv).all():
        raise NonFinite("response contains NaN or infinity")
    names = tuple(column_names)
    if len(names) != p:
        raise ValueError(f"{len(names)} column names for {p} columns")
    if n_parent_columns is None:
        n_parent_columns = p
    if not 0 <= n_parent_columns <= p:
        raise ValueError("n_parent_columns out of range")

    # per-column contiguous reductions: keeps these means bit-identical to
    # the panel-level event means computed elsewhere
    means = np.empty(p)
    sds = np.empty(p)
    constant = np.zeros(p, dtype=bool)
    for j in range(p):
        col = np.ascontiguousarray(X[:, j])
        means[j] = col.mean()
        sds[j] = col.std()
        constant[j] = bool((col == col[0]).all())

    Xc = np.asfortranarray(X - means)
    scales = np.ones(p)
    if standardize:
        keep = ~constant
        scales[keep] = sds[keep]
        with np.errstate(invalid="ignore"):
            Xc /= scales
    if constant.any():
        Xc[:, constant] = 0.0

    ym = float(np.ascontiguousarray(yv).mean())
    return DesignMatrix(
        X=_freeze(np.asfortranarray(Xc)),
        y=_freeze(yv),
        column_names=names,
        n_parent_columns=int(n_parent_columns),
        column_means=_freeze(means),
        column_sds=_freeze(sds),
        scales=_freeze(scales),
        constant_mask=_freeze(constant),
        response_mean=ym,
        standardized=bool(standardize),
    )


def lambda_max(design: DesignMatrix) -> float:
    """Smallest penalty at which the fit keeps no slope at all.

    max_j |x_jT (y - ybar)| / n over the transformed columns. Computed by
    the active kernel backend with the same dot products it uses for the
    updates, so fitting at ``lam >= lambda_max(design)`` yields exact
    zeros for the identity-link family.
    """
    yc = design.y - design.response_mean
    return float(_kernels.max_abs_corr(design.X, yc))


@dataclass(frozen=True, eq=False)
class FitResult:
    """One fitted model on the original data scale.

    ``coeffs`` aligns with ``design.column_names``; ``objective`` is the
    penalized objective actually minimized (on the transformed columns).
    """

    coeffs: np.ndarray
    intercept: float
    lam: float
    n_nonzero: int
    objective: float
    converged: bool
    n_iter: int

    def nonzero_by_name(self, names: Sequence[str]) -> dict[str, float]:
        return {n: float(c) for n, c in zip(names, self.coeffs) if c != 0.0}


def _to_original_scale(
    beta: np.ndarray, design: DesignMatrix, base_intercept: float
) -> tuple[np.ndarray, float]:
    # base_intercept is the intercept of the centered problem: ybar for the
    # identity link, the fitted log-rate for the log link
    orig = beta / design.scales
    shift = math.fsum(
        orig[j] * design.column_means[j] for j in range(len(orig)) if orig[j] != 0.0
    )
    return orig, base_intercept - shift


def fit_gaussian_lasso(
    design: DesignMatrix,
    lam: float,
    tol: float = DEFAULT_TOL_GAUSSIAN,
    max_iter: int = DEFAULT_MAX_ITER,
    warm_start: np.ndarray | None = None,
    obj_trace: list | None = None,
) -> FitResult:
    """Identity-link L1 fit by coordinate descent.

    Minimizes (1/(2n)) sum((y - intercept - X b)^2) + lam * sum|b_j| with
    the intercept left unpenalized. ``warm_start`` is on the transformed
    column scale (as produced by a previous fit in a path).
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    p = design.n_columns
    beta = np.zeros(p) if warm_start is None else np.array(warm_start, dtype=np.float64)
    if beta.shape != (p,):
        raise ValueError("warm_start length mismatch")
    yc = design.y - design.response_mean
    n_iter, converged, _ = _kernels.cd_solve(
        design.X, yc, float(lam), float(tol), int(max_iter), beta, obj_trace
    )
    r = yc - design.X @ beta
    objective = 0.5 * float(r @ r) / design.n_rows + lam * float(np.abs(beta).sum())
    orig, intercept = _to_original_scale(beta, design, design.response_mean)
    return FitResult(
        coeffs=_freeze(orig),
        intercept=intercept,
        lam=float(lam),
        n_nonzero=int(np.count_nonzero(beta)),
        objective=objective,
        converged=bool(converged),
        n_iter=int(n_iter),
    )


def _poisson_smooth(X: np.ndarray, y: np.ndarray, beta: np.ndarray, b: float):
    """Value and gradient of (1/n) sum(exp(eta) - y*eta), eta = X b + b0.

    Returns (value, grad_beta, grad_b, eta_max); value is +inf on overflow
    so the line search can reject the step.
    """
    n = X.shape[0]
    eta = X @ beta + b
    eta_max = float(eta.max()) if n else -math.inf
    if eta_max > _ETA_OVERFLOW:
        return math.inf, None, None, eta_max
    mu = np.exp(eta)
    value = float(mu.sum() - y @ eta) / n
    resid = mu - y
    grad_beta = (X.T @ resid) / n
    grad_b = float(resid.sum()) / n
    return value, grad_beta, grad_b, eta_max


def fit_poisson_l1(
    design: DesignMatrix,
    lam: float,
    tol: float = DEFAULT_TOL_POISSON,
    max_iter: int = DEFAULT_MAX_ITER,
    warm_start: tuple[np.ndarray, float] | None = None,
    obj_trace: list | None = None,
) -> FitResult:
    """Log-link L1 fit by proximal gradient with backtracking.

    Minimizes (1/n) sum(exp(eta_i) - y_i eta_i) + lam * sum|b_j| over
    slopes and an unpenalized intercept, eta = X b + b0. The intercept is
    floored at log(1e-8) so an all-zero response stays representable.

    Raises:
        Diverged: the linear predictor overflowed (max eta above 700) or
            the line search collapsed below a 1e-20 step.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    X, y = design.X, design.y
    if (y < 0).any():
        raise ValueError("log-link family requires a nonnegative response")
    if (y != np.floor(y)).any():
        log.warning("count response has non-integer values (aggregated means?); fitting anyway")
    p = design.n_columns
    if warm_start is None:
        beta = np.zeros(p)
        b = math.log(max(design.response_mean, 1e-8))
    else:
        beta = np.array(warm_start[0], dtype=np.float64)
        b = float(warm_start[1])
    if beta.shape != (p,):
        raise ValueError("warm_start length mismatch")
    b = max(b, LOG_RATE_FLOOR)
    if not math.isfinite(b):
        raise Diverged(f"initial log rate is not finite (response mean {design.response_mean})")

    f, g_beta, g_b, eta_max = _poisson_smooth(X, y, beta, b)
    if not math.isfinite(f):
        raise Diverged(f"linear predictor overflowed at start (max eta {eta_max:.1f})")

    n_iter = 0
    converged = False
    for n_iter in range(1, max_iter + 1):
        t = 1.0
        while True:
            step = beta - t * g_beta
            beta_new = np.sign(step) * np.maximum(np.abs(step) - t * lam, 0.0)
            b_new = max(b - t * g_b, LOG_RATE_FLOOR)
            f_new, g_beta_new, g_b_new, eta_max = _poisson_smooth(X, y, beta_new, b_new)
            d_beta = beta_new - beta
            d_b = b_new - b
            quad = f + float(g_beta @ d_beta) + g_b * d_b
            quad += (float(d_beta @ d_beta) + d_b * d_b) / (2.0 * t)
            if f_new <= quad:
                break
            t *= 0.5
            if t < _MIN_STEP:
                raise Diverged("line search collapsed; data is inconsistent with a log link")
        gap = max(float(np.abs(d_beta).max(initial=0.0)), abs(d_b)) / t
        beta, b = beta_new, b_new
        f, g_beta, g_b = f_new, g_beta_new, g_b_new
        if obj_trace is not None:
            obj_trace.append(f + lam * float(np.abs(beta).sum()))
        if gap <= tol:
            converged = True
            break

    objective = f + lam * float(np.abs(beta).sum())
    orig, intercept = _to_original_scale(beta, design, b)
    return FitResult(
        coeffs=_freeze(orig),
        intercept=intercept,
        lam=float(lam),
        n_nonzero=int(np.count_nonzero(beta)),
        objective=objective,
        converged=converged,
        n_iter=n_iter,
    )


def fit_glm(design: DesignMatrix, family: LinkFamily, lam: float, **kw) -> FitResult:
    if family is LinkFamily.GAUSSIAN_IDENTITY:
        return fit_gaussian_lasso(design, lam, **kw)
    if family is LinkFamily.POISSON_EXP:
        return fit_poisson_l1(design, lam, **kw)
    raise ValueError(f"unknown family {family!r}")


def fit_path(
    design: DesignMatrix,
    family: LinkFamily,
    lambdas: Sequence[float],
    tol: float | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
) -> list[FitResult]:
    """Fit the whole penalty path, warm-starting each fit from the last.

    ``lambdas`` must be strictly descending so every warm start is a
    superset problem of the one before it.
    """
    lams = [float(v) for v in lambdas]
    if any(b >= a for a, b in zip(lams, lams[1:])):
        raise ValueError("penalty path must be strictly descending")
    if tol is None:
        tol = (
            DEFAULT_TOL_GAUSSIAN
            if family is LinkFamily.GAUSSIAN_IDENTITY
            else DEFAULT_TOL_POISSON
        )
    results: list[FitResult] = []
    p = design.n_columns
    beta = np.zeros(p)
    b = math.log(max(design.response_mean, 1e-8))
    for lam in lams:
        if family is LinkFamily.GAUSSIAN_IDENTITY:
            res = fit_gaussian_lasso(design, lam, tol=tol, max_iter=max_iter, warm_start=beta)
            beta = res.coeffs * design.scales
        else:
            res = fit_poisson_l1(
                design, lam, tol=tol, max_iter=max_iter, warm_start=(beta, b)
            )
            beta = res.coeffs * design.scales
            b = res.intercept + math.fsum(
                res.coeffs[j] * design.column_means[j]
                for j in range(p)
                if res.coeffs[j] != 0.0
            )
        results.append(res)
    return results


def select_by_max_parents(
    results: Sequence[FitResult],
    max_parents: int,
    n_parent_columns: int | None = None,
) -> FitResult:
    """Pick the least-penalized fit that keeps at most ``max_parents``.

    Only the first ``n_parent_columns`` coefficients count toward the cap
    (trailing columns are static covariates, which the cap ignores). When
    every fit is over the cap, falls back to the most-penalized one.
    """
    if not results:
        raise ValueError("no fits to select from")
    if max_parents < 0:
        raise ValueError("max_parents must be >= 0")

    def parent_count(r: FitResult) -> int:
        c = r.coeffs if n_parent_columns is None else r.coeffs[:n_parent_columns]
        return int(np.count_nonzero(c))

    eligible = [r for r in results if parent_count(r) <= max_parents]
    if eligible:
        return min(eligible, key=lambda r: r.lam)
    return max(results, key=lambda r: r.lam)
