"""Pure numpy coordinate-descent kernel (fallback backend).

Same contract as the compiled extension in ``_cd.pyx``; one sweep here is
one cyclic pass over all columns with an in-place residual update.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def max_abs_corr(X: np.ndarray, y: np.ndarray) -> float:
    """max_j |x_jT y| / n, column by column.

    Used for the null-model threshold. Computed with the same per-column
    dot products as ``cd_solve`` so the threshold is exactly consistent
    with the updates (no stray one-ulp coefficients at the threshold).
    """
    n = X.shape[0]
    best = 0.0
    for j in range(X.shape[1]):
        v = abs(float(np.dot(X[:, j], y))) / n
        if v > best:
            best = v
    return best


def cd_solve(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    tol: float,
    max_iter: int,
    beta: np.ndarray,
    obj_trace: list | None = None,
) -> tuple[int, bool, float]:
    """Cyclic coordinate descent for (1/(2n))||y - X b||^2 + lam * ||b||_1.

    X must be centered float64 (column-major preferred); y is the response
    with its mean already removed, so no intercept appears here. ``beta``
    is both warm start and output, updated in place.

    Stops after a sweep whose KKT violation is <= tol:
    |grad_j + lam*sign(b_j)| for active j, max(0, |grad_j| - lam) for
    inactive j, with grad_j = -(1/n) x_jT r.

    Returns (sweeps_done, converged, last_kkt_violation).
    """
    n, p = X.shape
    if p == 0:
        if obj_trace is not None:
            obj_trace.append(0.5 * float(np.dot(y, y)) / n)
        return 0, True, 0.0

    col_nrm = np.empty(p)
    for j in range(p):
        col_nrm[j] = float(np.dot(X[:, j], X[:, j])) / n

    r = y - X @ beta
    kkt = np.inf
    sweeps = 0
    for _ in range(max_iter):
        sweeps += 1
        for j in range(p):
            sj = col_nrm[j]
            if sj == 0.0:
                continue
            bj = beta[j]
            rho = float(np.dot(X[:, j], r)) / n + sj * bj
            if rho > lam:
                bnew = (rho - lam) / sj
            elif rho < -lam:
                bnew = (rho + lam) / sj
            else:
                bnew = 0.0
            if bnew != bj:
                r += X[:, j] * (bj - bnew)
                beta[j] = bnew

        kkt = 0.0
        for j in range(p):
            if col_nrm[j] == 0.0:
                continue
            g = -float(np.dot(X[:, j], r)) / n
            if beta[j] > 0.0:
                v = abs(g + lam)
            elif beta[j] < 0.0:
                v = abs(g - lam)
            else:
                v = abs(g) - lam
                if v < 0.0:
                    v = 0.0
            if v > kkt:
                kkt = v
        if obj_trace is not None:
            obj_trace.append(
                0.5 * float(np.dot(r, r)) / n + lam * float(np.sum(np.abs(beta)))
            )
        if kkt <= tol:
            return sweeps, True, kkt
    return sweeps, False, kkt
