"""Correlation and regression statistics.

Pearson and Spearman are computed directly; Kendall tau-b delegates to scipy.
Constant inputs raise ConstantInput (an undefined correlation is never
reported as 0).
"""

from __future__ import annotations

import numpy as np
from scipy import stats as _scipy_stats

from .errors import (
    ConstantInput,
    InsufficientSamples,
    LengthMismatch,
    RankDeficient,
    RankDeficientCovariates,
)


def _check_pair(x, y, min_n: int = 3) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"{x.shape} vs {y.shape}")
    if x.size < min_n:
        raise InsufficientSamples(f"need at least {min_n} samples, got {x.size}")
    return x, y


def pearson(x, y) -> float:
    """Sample Pearson r, clamped to [-1, 1]."""
    x, y = _check_pair(x, y)
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise ConstantInput("correlation undefined for constant input")
    if np.array_equal(x, y):
        return 1.0
    cx = x - x.mean()
    cy = y - y.mean()
    r = float(np.dot(cx, cy)) / (float(np.linalg.norm(cx)) * float(np.linalg.norm(cy)))
    return min(1.0, max(-1.0, r))


def pearson_pvalue(r: float, n: int) -> float:
    """Two-tailed p for a Pearson r via the t-distribution with n-2 dof."""
    if n < 3:
        raise InsufficientSamples(f"need at least 3 samples, got {n}")
    if abs(r) >= 1.0:
        return 0.0
    t = abs(r) * np.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * _scipy_stats.t.sf(t, df=n - 2))


def pearson_test(x, y) -> tuple[float, float]:
    r = pearson(x, y)
    return r, pearson_pvalue(r, len(x))


def spearman(x, y) -> float:
    """Pearson of fractional (average-tie) ranks."""
    x, y = _check_pair(x, y)
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise ConstantInput("correlation undefined for constant input")
    return pearson(_scipy_stats.rankdata(x), _scipy_stats.rankdata(y))


def kendall_tau(x, y) -> float:
    """Kendall tau-b."""
    x, y = _check_pair(x, y)
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise ConstantInput("correlation undefined for constant input")
    tau = _scipy_stats.kendalltau(x, y, variant="b").statistic
    return float(tau)


CORRELATIONS = {"pearson": pearson, "spearman": spearman, "kendall": kendall_tau}


def _residuals(v: np.ndarray, design: np.ndarray) -> np.ndarray:
    coef, *_ = np.linalg.lstsq(design, v, rcond=None)
    return v - design @ coef


def partial_correlation(x, y, covariates: list) -> tuple[float, float]:
    """Correlation of x and y after projecting out covariates (plus intercept).

    Returns (r, two-tailed p) with n - 2 - #covariates degrees of freedom.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.size
    covs = [np.asarray(c, dtype=np.float64) for c in covariates]
    for c in covs:
        if c.shape != x.shape:
            raise LengthMismatch("covariate length differs from x")
    if y.shape != x.shape:
        raise LengthMismatch(f"{x.shape} vs {y.shape}")
    k = len(covs)
    if n <= k + 2:
        raise InsufficientSamples(f"need more than {k + 2} samples, got {n}")
    design = np.column_stack([np.ones(n)] + covs)
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise RankDeficientCovariates("covariates are linearly dependent")
    rx = _residuals(x, design)
    ry = _residuals(y, design)
    scale_x = max(1.0, float(np.linalg.norm(x)))
    scale_y = max(1.0, float(np.linalg.norm(y)))
    if np.linalg.norm(rx) <= 1e-10 * scale_x or np.linalg.norm(ry) <= 1e-10 * scale_y:
        raise ConstantInput("zero residual variance")
    r = float(np.dot(rx, ry)) / (float(np.linalg.norm(rx)) * float(np.linalg.norm(ry)))
    r = min(1.0, max(-1.0, r))
    dof = n - 2 - k
    if abs(r) >= 1.0:
        return r, 0.0
    t = abs(r) * np.sqrt(dof / (1.0 - r * r))
    return r, float(2.0 * _scipy_stats.t.sf(t, df=dof))


def adjusted_r_squared(response, predictors: list) -> float:
    """Adjusted R-squared of an OLS fit with intercept."""
    y = np.asarray(response, dtype=np.float64)
    preds = [np.asarray(p, dtype=np.float64) for p in predictors]
    n = y.size
    p = len(preds)
    for c in preds:
        if c.shape != y.shape:
            raise LengthMismatch("predictor length differs from response")
    if n <= p + 1:
        raise InsufficientSamples(f"need more than {p + 1} samples, got {n}")
    if np.ptp(y) == 0.0:
        raise ConstantInput("constant response")
    design = np.column_stack([np.ones(n)] + preds)
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise RankDeficient("design matrix is rank deficient")
    resid = _residuals(y, design)
    ss_res = float(np.dot(resid, resid))
    cy = y - y.mean()
    ss_tot = float(np.dot(cy, cy))
    r2 = 1.0 - ss_res / ss_tot
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)
