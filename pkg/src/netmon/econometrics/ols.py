"""Least squares with fixed effects, robust and clustered standard errors.

The solver expands fixed effects into dummies, removes exactly collinear
columns through a pivoted QR decomposition (reporting what was dropped), and
computes heteroskedasticity-robust (HC1) or cluster-robust (CR1) sandwich
covariances. Listwise deletion handles missing values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
import scipy.linalg
from sklearn.base import BaseEstimator

from ..errors import ValidationError

INTERCEPT = "const"


@dataclass(frozen=True)
class RegressionResult:
    """Fitted coefficients and inference for one regression."""

    params: dict[str, float]
    se: dict[str, float]
    se_type: str
    cluster_key: str | None
    nobs: int
    df_resid: int
    r2: float
    ssr: float
    dropped: tuple[str, ...] = ()
    n_clusters: int | None = None

    def tstat(self, name: str) -> float:
        return self.params[name] / self.se[name]

    def conf_int(self, name: str, width: float = 1.96) -> tuple[float, float]:
        est, se = self.params[name], self.se[name]
        return est - width * se, est + width * se

    def to_dict(self) -> dict:
        return {
            "params": dict(self.params),
            "se": dict(self.se),
            "se_type": self.se_type,
            "cluster_key": self.cluster_key,
            "nobs": self.nobs,
            "df_resid": self.df_resid,
            "r2": self.r2,
            "ssr": self.ssr,
            "dropped": list(self.dropped),
            "n_clusters": self.n_clusters,
        }


def _prune_collinear(
    x: np.ndarray, names: list[str], tol: float = 1e-9
) -> tuple[np.ndarray, list[str], list[str]]:
    """Drop exactly collinear columns via QR with column pivoting."""
    if x.shape[1] == 0:
        raise ValidationError("design matrix has no columns")
    _, r, piv = scipy.linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diagonal(r))
    lead = diag[0] if diag.size else 0.0
    if lead == 0.0:
        raise ValidationError("design matrix has rank zero")
    rank = int(np.sum(diag > tol * lead))
    keep = np.sort(piv[:rank])
    drop = sorted(set(range(x.shape[1])) - set(keep.tolist()))
    kept_names = [names[i] for i in keep]
    dropped_names = [names[i] for i in drop]
    return x[:, keep], kept_names, dropped_names


def _sandwich_hc1(
    x: np.ndarray, resid: np.ndarray, xtx_inv: np.ndarray
) -> np.ndarray:
    n, k = x.shape
    scaled = x * resid[:, None]
    meat = scaled.T @ scaled
    return (n / (n - k)) * xtx_inv @ meat @ xtx_inv


def _sandwich_cr1(
    x: np.ndarray,
    resid: np.ndarray,
    xtx_inv: np.ndarray,
    clusters: np.ndarray,
) -> tuple[np.ndarray, int]:
    n, k = x.shape
    codes, uniques = pd.factorize(clusters)
    g = len(uniques)
    if g < 2:
        raise ValidationError(f"cluster-robust errors need >= 2 clusters, got {g}")
    scaled = x * resid[:, None]
    scores = np.zeros((g, k))
    np.add.at(scores, codes, scaled)
    meat = scores.T @ scores
    correction = (g / (g - 1.0)) * ((n - 1.0) / (n - k))
    return correction * xtx_inv @ meat @ xtx_inv, g


def _design_from_frame(
    x: pd.DataFrame,
    fe_keys: Sequence[str],
    cluster_key: str | None,
    add_intercept: bool,
) -> tuple[np.ndarray, list[str]]:
    columns = [c for c in x.columns if c not in fe_keys and c != cluster_key]
    blocks: list[np.ndarray] = []
    names: list[str] = []
    if add_intercept:
        blocks.append(np.ones((len(x), 1)))
        names.append(INTERCEPT)
    for col in columns:
        series = x[col]
        if pd.api.types.is_numeric_dtype(series) and not isinstance(
            series.dtype, pd.CategoricalDtype
        ):
            blocks.append(series.to_numpy(dtype=float)[:, None])
            names.append(col)
        else:
            dummies = pd.get_dummies(series, prefix=col, drop_first=True, dtype=float)
            blocks.append(dummies.to_numpy())
            names.extend(dummies.columns.tolist())
    for key in fe_keys:
        dummies = pd.get_dummies(x[key], prefix=key, drop_first=True, dtype=float)
        blocks.append(dummies.to_numpy())
        names.extend(dummies.columns.tolist())
    return np.hstack(blocks), names


class OLS(BaseEstimator):
    """Least-squares estimator with a scikit-learn parameter surface.

    Parameters
    ----------
    fe_keys : columns of X treated as fixed effects (dummy-expanded).
    se : "HC1" for heteroskedasticity-robust or "cluster" for CR1.
    cluster_key : column of X holding the cluster labels (required when
        se="cluster"); never enters the design.
    add_intercept : prepend a constant column.
    """

    def __init__(
        self,
        fe_keys: Sequence[str] = (),
        se: str = "HC1",
        cluster_key: str | None = None,
        add_intercept: bool = True,
    ):
        self.fe_keys = fe_keys
        self.se = se
        self.cluster_key = cluster_key
        self.add_intercept = add_intercept

    def fit(self, X: pd.DataFrame, y: pd.Series | np.ndarray) -> "OLS":
        if self.se not in ("HC1", "cluster"):
            raise ValidationError(f"se must be 'HC1' or 'cluster', got {self.se!r}")
        if self.se == "cluster" and self.cluster_key is None:
            raise ValidationError("cluster-robust errors need a cluster_key")
        if not isinstance(X, pd.DataFrame):
            X = pd.DataFrame(np.asarray(X))
            X.columns = [f"x{i}" for i in range(X.shape[1])]
        y = pd.Series(np.asarray(y, dtype=float), index=X.index, name="y")
        missing = [k for k in (*self.fe_keys, self.cluster_key) if k and k not in X]
        if missing:
            raise ValidationError(f"columns not in design frame: {missing}")

        frame = X.copy()
        frame["__y__"] = y
        frame = frame.dropna()
        if frame.empty:
            raise ValidationError("no complete observations after listwise deletion")
        y_arr = frame.pop("__y__").to_numpy(dtype=float)
        design, names = _design_from_frame(
            frame, tuple(self.fe_keys), self.cluster_key, self.add_intercept
        )
        design, kept, dropped = _prune_collinear(design, names)
        n, k = design.shape
        if n <= k:
            raise ValidationError(
                f"need more observations than parameters, got n={n}, k={k}"
            )

        coef, _, _, _ = np.linalg.lstsq(design, y_arr, rcond=None)
        fitted = design @ coef
        resid = y_arr - fitted
        ssr = float(resid @ resid)
        centered = y_arr - y_arr.mean() if self.add_intercept else y_arr
        tss = float(centered @ centered)
        r2 = 1.0 - ssr / tss if tss > 0 else 0.0
        r2 = min(max(r2, 0.0), 1.0)

        xtx_inv = np.linalg.inv(design.T @ design)
        n_clusters = None
        if self.se == "HC1":
            vcov = _sandwich_hc1(design, resid, xtx_inv)
        else:
            clusters = frame[self.cluster_key].to_numpy()
            vcov, n_clusters = _sandwich_cr1(design, resid, xtx_inv, clusters)
        se_values = np.sqrt(np.maximum(np.diagonal(vcov), 0.0))

        self.result_ = RegressionResult(
            params=dict(zip(kept, coef.tolist())),
            se=dict(zip(kept, se_values.tolist())),
            se_type=self.se,
            cluster_key=self.cluster_key if self.se == "cluster" else None,
            nobs=n,
            df_resid=n - k,
            r2=r2,
            ssr=ssr,
            dropped=tuple(dropped),
            n_clusters=n_clusters,
        )
        self.coef_ = pd.Series(self.result_.params)
        self.fitted_ = fitted
        self.residuals_ = resid
        self._design_names = kept
        return self

    def predict(self, X: pd.DataFrame) -> np.ndarray:
        if not hasattr(self, "result_"):
            raise ValidationError("estimator is not fitted")
        frame = X.copy()
        design, names = _design_from_frame(
            frame, tuple(self.fe_keys), self.cluster_key, self.add_intercept
        )
        name_to_col = {name: i for i, name in enumerate(names)}
        cols = []
        for name in self._design_names:
            if name not in name_to_col:
                raise ValidationError(f"prediction frame lacks column {name!r}")
            cols.append(design[:, name_to_col[name]])
        coef = np.array([self.result_.params[n] for n in self._design_names])
        return np.column_stack(cols) @ coef


def ols(
    y: pd.Series | np.ndarray,
    X: pd.DataFrame,
    fe_keys: Sequence[str] = (),
    se: str = "HC1",
    cluster_key: str | None = None,
    add_intercept: bool = True,
) -> RegressionResult:
    """Fit a regression and return its result object."""
    model = OLS(
        fe_keys=tuple(fe_keys),
        se=se,
        cluster_key=cluster_key,
        add_intercept=add_intercept,
    )
    return model.fit(X, y).result_
