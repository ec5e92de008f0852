"""Deterministic statistical kernel.

OLS with full inference output, Pearson tests, the RSS-form AIC, and
both-direction greedy stepwise selection. Everything here is a pure
function of its inputs; no global state, no randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import (
    InsufficientDataError,
    SingularDesignError,
    UndefinedCorrelationError,
)

# Returned in place of AIC when RSS is exactly zero (log undefined);
# large and negative so a perfect fit always wins comparisons.
AIC_PERFECT_FIT = -1.0e15

_STAR_THRESHOLDS = ((0.01, "***"), (0.05, "**"), (0.10, "*"))


def significance_stars(p: float) -> str:
    for threshold, stars in _STAR_THRESHOLDS:
        if p < threshold:
            return stars
    return ""


@dataclass
class OlsResult:
    names: list[str]              # predictor names; intercept not listed
    coefficients: np.ndarray      # intercept first when fitted with one
    stderr: np.ndarray
    tstats: np.ndarray
    pvalues: np.ndarray
    stars: list[str]
    r2: float
    adj_r2: float
    resid_se: float
    df_resid: int
    fstat: float
    df_model: int
    aic: float
    aic_degenerate: bool
    residuals: np.ndarray
    fitted: np.ndarray
    n: int
    rss: float
    intercept: bool

    @property
    def k(self) -> int:
        return len(self.names)

    def coefficient_of(self, name: str) -> float:
        offset = 1 if self.intercept else 0
        return float(self.coefficients[offset + self.names.index(name)])


def _check_rank(design: np.ndarray, names: list[str]) -> None:
    # QR diagonal localizes the first dependent column for the error message
    _, r = np.linalg.qr(design)
    diag = np.abs(np.diag(r))
    tol = design.shape[0] * np.finfo(float).eps * (diag.max() if diag.size else 1.0)
    for j, d in enumerate(diag):
        if d <= tol:
            raise SingularDesignError(names[j])


def aic_from_rss(n: int, rss: float, edf: int) -> tuple[float, bool]:
    """AIC = n*ln(RSS/n) + 2*edf (extract-AIC convention, constants dropped)."""
    if rss <= 0.0:
        return AIC_PERFECT_FIT, True
    return n * math.log(rss / n) + 2.0 * edf, False


def ols_fit(
    X: np.ndarray,
    y: np.ndarray,
    names: list[str] | None = None,
    intercept: bool = True,
) -> OlsResult:
    """Least squares with exact inference quantities.

    X is n x k (k may be 0 for the intercept-only model). Raises
    SingularDesignError naming the first linearly dependent column.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    if names is None:
        names = [f"x{i + 1}" for i in range(k)]
    if len(names) != k:
        raise ValueError("names length does not match column count")
    if n <= k + (1 if intercept else 0):
        raise InsufficientDataError(f"n={n} too small for {k} predictors")

    if intercept:
        design = np.column_stack([np.ones(n), X]) if k else np.ones((n, 1))
        design_names = ["(intercept)"] + list(names)
    else:
        if k == 0:
            raise InsufficientDataError("no predictors and no intercept")
        design = X
        design_names = list(names)
    _check_rank(design, design_names)

    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    residuals = y - fitted
    rss = float(residuals @ residuals)
    p = design.shape[1]
    df_resid = n - p
    sigma2 = rss / df_resid if df_resid > 0 else float("nan")

    xtx_inv = np.linalg.inv(design.T @ design)
    stderr = np.sqrt(np.maximum(np.diag(xtx_inv), 0.0) * sigma2)
    with np.errstate(divide="ignore", invalid="ignore"):
        tstats = np.where(stderr > 0, coef / stderr, np.inf * np.sign(coef))
    pvalues = 2.0 * sps.t.sf(np.abs(tstats), df_resid)

    if intercept:
        tss = float(np.sum((y - y.mean()) ** 2))
    else:
        tss = float(y @ y)
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    df_model = k if intercept else p
    if df_model > 0 and df_resid > 0:
        adj_r2 = 1.0 - (1.0 - r2) * (n - (1 if intercept else 0)) / df_resid
        fstat = (tss - rss) / df_model / sigma2 if sigma2 > 0 else float("inf")
    else:
        adj_r2 = r2
        fstat = float("nan")

    aic, degenerate = aic_from_rss(n, rss, p)
    return OlsResult(
        names=list(names),
        coefficients=coef,
        stderr=stderr,
        tstats=np.asarray(tstats, dtype=float),
        pvalues=np.asarray(pvalues, dtype=float),
        stars=[significance_stars(pv) for pv in pvalues],
        r2=r2,
        adj_r2=adj_r2,
        resid_se=math.sqrt(sigma2) if df_resid > 0 else float("nan"),
        df_resid=df_resid,
        fstat=fstat,
        df_model=df_model,
        aic=aic,
        aic_degenerate=degenerate,
        residuals=residuals,
        fitted=fitted,
        n=n,
        rss=rss,
        intercept=intercept,
    )


def pearson(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Product-moment r with the two-sided p from the t-transform."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 3 or len(y) != n:
        raise InsufficientDataError("pearson needs n >= 3 paired observations")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(xc @ xc)
    sy = float(yc @ yc)
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("constant input")
    r = float(xc @ yc) / math.sqrt(sx * sy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(sps.t.sf(abs(t), n - 2))
    return r, p


def aic(fit: OlsResult) -> float:
    return fit.aic


@dataclass(frozen=True)
class StepRecord:
    action: str                 # "start" | "add" | "drop"
    variable: str | None
    aic: float
    variables: tuple[str, ...]  # model after the move, sorted


@dataclass
class StepwiseResult:
    fit: OlsResult
    selected: list[str]
    trace: list[StepRecord] = field(default_factory=list)


def step_aic(
    candidates: dict[str, np.ndarray],
    y: np.ndarray,
    direction: str = "both",
    start: str = "full",
) -> StepwiseResult:
    """Greedy stepwise selection by AIC.

    From the start model, repeatedly apply the single add/drop move that most
    lowers AIC; stop when no move lowers it. Ties break toward fewer
    predictors, then lexicographic variable order. Always fits with an
    intercept.
    """
    if direction not in ("both", "forward", "backward"):
        raise ValueError(f"unknown direction {direction!r}")
    if start not in ("full", "empty"):
        raise ValueError(f"unknown start {start!r}")
    names = sorted(candidates)
    y = np.asarray(y, dtype=float)

    def fit_subset(subset: tuple[str, ...]) -> OlsResult:
        if subset:
            X = np.column_stack([candidates[v] for v in subset])
        else:
            X = np.empty((len(y), 0))
        return ols_fit(X, y, names=list(subset), intercept=True)

    current: tuple[str, ...] = tuple(names) if start == "full" else ()
    current_fit = fit_subset(current)
    trace = [StepRecord("start", None, current_fit.aic, current)]

    allow_drop = direction in ("both", "backward")
    allow_add = direction in ("both", "forward")
    while True:
        moves: list[tuple[float, int, tuple[str, ...], str, str, OlsResult]] = []
        if allow_drop:
            for v in current:
                subset = tuple(u for u in current if u != v)
                f = fit_subset(subset)
                moves.append((f.aic, len(subset), subset, "drop", v, f))
        if allow_add:
            for v in names:
                if v in current:
                    continue
                subset = tuple(sorted(current + (v,)))
                f = fit_subset(subset)
                moves.append((f.aic, len(subset), subset, "add", v, f))
        if not moves:
            break
        moves.sort(key=lambda m: (m[0], m[1], m[2]))
        best_aic, _, best_subset, action, variable, best_fit = moves[0]
        if best_aic >= current_fit.aic:
            break
        current, current_fit = best_subset, best_fit
        trace.append(StepRecord(action, variable, best_aic, best_subset))

    return StepwiseResult(fit=current_fit, selected=list(current), trace=trace)
