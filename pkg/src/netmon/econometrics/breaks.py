"""Single-kink regression and sup-F break search.

The kink model regresses an outcome on a forcing variable and a hinge term
max(0, x - c), so the slope changes continuously at the candidate break c.
The break location is estimated by maximizing the F statistic for the hinge
restriction over the candidate grid of observed forcing values inside a
quantile window; inference on the existence of a break uses a parametric
residual bootstrap of the sup-F statistic under the no-break null.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import ValidationError
from ..rng import substream

_MIN_CANDIDATES = 10


@dataclass(frozen=True)
class KinkFit:
    coefficients: dict[str, float]
    ssr: float
    c: float
    nobs: int


@dataclass(frozen=True)
class BreakResult:
    c_hat: float
    f_max: float
    slope_below: float
    slope_change: float
    implied_size: float
    candidates: tuple[float, ...]
    f_profile: tuple[float, ...]
    window: tuple[float, float]
    nobs: int
    p_value: float | None = None

    def to_dict(self) -> dict:
        return {
            "c_hat": self.c_hat,
            "f_max": self.f_max,
            "slope_below": self.slope_below,
            "slope_change": self.slope_change,
            "implied_size": self.implied_size,
            "window": list(self.window),
            "nobs": self.nobs,
            "n_candidates": len(self.candidates),
            "p_value": self.p_value,
        }


def _clean_arrays(
    y: np.ndarray, x: np.ndarray, controls: np.ndarray | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    y = np.asarray(y, dtype=float).ravel()
    x = np.asarray(x, dtype=float).ravel()
    if y.shape != x.shape:
        raise ValidationError(f"y and x must align, got {y.shape} vs {x.shape}")
    if controls is not None:
        controls = np.asarray(controls, dtype=float)
        if controls.ndim == 1:
            controls = controls[:, None]
        if controls.shape[0] != y.shape[0]:
            raise ValidationError("controls must have one row per observation")
        mask = np.isfinite(y) & np.isfinite(x) & np.all(np.isfinite(controls), axis=1)
        return y[mask], x[mask], controls[mask]
    mask = np.isfinite(y) & np.isfinite(x)
    return y[mask], x[mask], None


def _base_design(x: np.ndarray, controls: np.ndarray | None) -> np.ndarray:
    cols = [np.ones_like(x), x]
    if controls is not None:
        cols.extend(controls.T)
    return np.column_stack(cols)


def _ssr(design: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return coef, float(resid @ resid)


def kink_fit(
    y: np.ndarray,
    x: np.ndarray,
    c: float,
    controls: np.ndarray | None = None,
) -> KinkFit:
    """Fit y on [1, x, max(0, x - c), controls] at a fixed kink location."""
    y, x, controls = _clean_arrays(y, x, controls)
    if y.size < 4:
        raise ValidationError(f"kink fit needs at least 4 observations, got {y.size}")
    hinge = np.maximum(0.0, x - c)
    design = np.column_stack([_base_design(x, controls), hinge])
    coef, ssr = _ssr(design, y)
    names = ["const", "slope"]
    if controls is not None:
        names += [f"control_{i}" for i in range(controls.shape[1])]
    names.append("hinge")
    return KinkFit(
        coefficients=dict(zip(names, coef.tolist())),
        ssr=ssr,
        c=float(c),
        nobs=int(y.size),
    )


def _candidates(
    x: np.ndarray, window: tuple[float, float], min_candidates: int
) -> tuple[np.ndarray, tuple[float, float]]:
    lo_q, hi_q = window
    if not (0.0 <= lo_q < hi_q <= 1.0):
        raise ValidationError(f"window must be quantiles with lo < hi, got {window}")
    lo, hi = np.quantile(x, [lo_q, hi_q])
    cands = np.unique(x[(x >= lo) & (x <= hi)])
    # A kink at the sample minimum is collinear with the slope and one at the
    # maximum is identically zero; neither is identified, so candidates must
    # be interior to the observed range.
    cands = cands[(cands > x.min()) & (cands < x.max())]
    if cands.size < min_candidates:
        raise ValidationError(
            f"need at least {min_candidates} distinct interior forcing values "
            f"in the window, got {cands.size}"
        )
    return cands, (float(lo), float(hi))


def _supf_profile(
    y_cols: np.ndarray,
    x: np.ndarray,
    controls: np.ndarray | None,
    cands: np.ndarray,
) -> np.ndarray:
    """F(c) for each candidate (rows) and each outcome column (columns).

    Precomputes a thin-QR basis per candidate design so repeated outcomes
    (bootstrap draws) reduce to matrix products.
    """
    n = x.shape[0]
    base = _base_design(x, controls)
    q0, _ = np.linalg.qr(base)
    resid0 = y_cols - q0 @ (q0.T @ y_cols)
    ssr0 = np.einsum("ij,ij->j", resid0, resid0)
    # Outcomes the restricted model already fits to rounding error leave no
    # variation for the hinge; their F would be a ratio of rounding noise.
    scale = np.maximum(1.0, np.einsum("ij,ij->j", y_cols, y_cols))
    dead = ssr0 <= 1e-24 * scale

    k1 = base.shape[1] + 1
    df1 = n - k1
    if df1 <= 0:
        raise ValidationError("not enough observations for the kink design")
    profile = np.empty((cands.size, y_cols.shape[1]))
    for idx, c in enumerate(cands):
        hinge = np.maximum(0.0, x - c)
        design = np.column_stack([base, hinge])
        q, _ = np.linalg.qr(design)
        resid = y_cols - q @ (q.T @ y_cols)
        ssr1 = np.einsum("ij,ij->j", resid, resid)
        ssr1 = np.maximum(ssr1, 1e-300)
        profile[idx] = np.maximum((ssr0 - ssr1) / (ssr1 / df1), 0.0)
    profile[:, dead] = 0.0
    return profile


def break_search(
    y: np.ndarray,
    x: np.ndarray,
    controls: np.ndarray | None = None,
    window: tuple[float, float] = (0.10, 0.90),
    min_candidates: int = _MIN_CANDIDATES,
) -> BreakResult:
    """Estimate the kink location by sup-F over observed forcing values.

    Candidates are the unique values of x inside the quantile window. Ties in
    the F profile resolve to the smallest candidate. The implied size is
    exp(c_hat), for forcing variables measured in logs.
    """
    y, x, controls = _clean_arrays(y, x, controls)
    cands, bounds = _candidates(x, window, min_candidates)
    profile = _supf_profile(y[:, None], x, controls, cands)[:, 0]
    best = int(np.argmax(profile))  # first maximum = smallest candidate
    c_hat = float(cands[best])
    fit = kink_fit(y, x, c_hat, controls)
    return BreakResult(
        c_hat=c_hat,
        f_max=float(profile[best]),
        slope_below=fit.coefficients["slope"],
        slope_change=fit.coefficients["hinge"],
        implied_size=math.exp(c_hat),
        candidates=tuple(cands.tolist()),
        f_profile=tuple(profile.tolist()),
        window=bounds,
        nobs=int(y.size),
    )


@dataclass(frozen=True)
class BootstrapSupF:
    p_value: float
    f_obs: float
    n_boot: int
    seed: int


def bootstrap_supf(
    y: np.ndarray,
    x: np.ndarray,
    controls: np.ndarray | None = None,
    n_boot: int = 199,
    seed: int = 0,
    window: tuple[float, float] = (0.10, 0.90),
    min_candidates: int = _MIN_CANDIDATES,
) -> BootstrapSupF:
    """Parametric residual bootstrap of sup-F under the no-break null.

    The null model (no hinge) is fitted once; bootstrap outcomes resample its
    residuals with replacement onto its fitted values, each draw from its own
    substream, and the sup-F statistic is recomputed over the same candidate
    grid. p = (1 + #{F_b >= F_obs}) / (B + 1).
    """
    if n_boot < 99:
        raise ValidationError(f"bootstrap needs at least 99 draws, got {n_boot}")
    y, x, controls = _clean_arrays(y, x, controls)
    cands, _ = _candidates(x, window, min_candidates)
    n = y.size

    base = _base_design(x, controls)
    coef, _ = _ssr(base, y)
    fitted0 = base @ coef
    resid0 = y - fitted0

    f_obs = float(_supf_profile(y[:, None], x, controls, cands).max())

    draws = np.empty((n, n_boot))
    for b in range(n_boot):
        idx = substream(seed, b).integers(0, n, size=n)
        draws[:, b] = fitted0 + resid0[idx]
    f_null = _supf_profile(draws, x, controls, cands).max(axis=0)

    exceed = int(np.sum(f_null >= f_obs))
    return BootstrapSupF(
        p_value=(1.0 + exceed) / (n_boot + 1.0),
        f_obs=f_obs,
        n_boot=n_boot,
        seed=seed,
    )


class BreakSearch(BaseEstimator):
    """Kink-location estimator with a scikit-learn parameter surface.

    fit(x, y, controls=None) stores a BreakResult in `result_`; when
    `bootstrap` is a positive draw count the sup-F p-value is attached.
    """

    def __init__(
        self,
        window: tuple[float, float] = (0.10, 0.90),
        min_candidates: int = _MIN_CANDIDATES,
        bootstrap: int = 0,
        seed: int = 0,
    ):
        self.window = window
        self.min_candidates = min_candidates
        self.bootstrap = bootstrap
        self.seed = seed

    def fit(
        self,
        X: np.ndarray,
        y: np.ndarray,
        controls: np.ndarray | None = None,
    ) -> "BreakSearch":
        result = break_search(
            y, X, controls, window=self.window, min_candidates=self.min_candidates
        )
        if self.bootstrap:
            boot = bootstrap_supf(
                y,
                X,
                controls,
                n_boot=self.bootstrap,
                seed=self.seed,
                window=self.window,
                min_candidates=self.min_candidates,
            )
            result = dataclasses.replace(result, p_value=boot.p_value)
        self.result_ = result
        self.c_hat_ = result.c_hat
        self.f_max_ = result.f_max
        self._fit_ = kink_fit(y, X, result.c_hat, controls)
        return self

    def predict(self, X: np.ndarray, controls: np.ndarray | None = None) -> np.ndarray:
        if not hasattr(self, "result_"):
            raise ValidationError("estimator is not fitted")
        x = np.asarray(X, dtype=float).ravel()
        fit = self._fit_
        design = [np.ones_like(x), x]
        if controls is not None:
            design.extend(np.asarray(controls, dtype=float).T)
        design.append(np.maximum(0.0, x - self.result_.c_hat))
        names = list(fit.coefficients)
        order = ["const", "slope"] + [n for n in names if n.startswith("control_")]
        order.append("hinge")
        coef = np.array([fit.coefficients[n] for n in order])
        return np.column_stack(design) @ coef
