"""Variance-equality tests across groups and threshold sides.

The workhorse is Levene's test on mean-centered absolute deviations, with the
Brown-Forsythe median-centered variant behind a flag. The threshold table
compares outcome variances between units at or below a size cutoff and units
above it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import stats

from ..errors import ValidationError


@dataclass(frozen=True)
class LeveneResult:
    statistic: float
    p_value: float
    df_between: int
    df_within: int
    center: str


def levene_test(
    values: Sequence[float] | np.ndarray,
    groups: Sequence | np.ndarray,
    center: str = "mean",
) -> LeveneResult:
    """Levene's variance-equality test.

    Deviations Z_ij = |Y_ij - center(Y_i)| feed a one-way ANOVA statistic
        W = ((N-k)/(k-1)) * sum_i n_i (Zbar_i - Zbar)^2
                          / sum_ij (Z_ij - Zbar_i)^2,
    referred to the F(k-1, N-k) upper tail. center="median" gives the
    Brown-Forsythe variant. Missing values are dropped pairwise.
    """
    if center not in ("mean", "median"):
        raise ValidationError(f"center must be 'mean' or 'median', got {center!r}")
    values = np.asarray(values, dtype=float)
    groups = np.asarray(groups)
    if values.shape != groups.shape:
        raise ValidationError("values and groups must align")
    keep = np.isfinite(values) & ~pd.isna(groups)
    values, groups = values[keep], groups[keep]

    codes, uniques = pd.factorize(groups)
    k = len(uniques)
    if k < 2:
        raise ValidationError(f"need at least 2 groups, got {k}")
    samples = [values[codes == i] for i in range(k)]
    if min(len(s) for s in samples) < 2:
        raise ValidationError("every group needs at least 2 observations")

    centers = np.array(
        [s.mean() if center == "mean" else np.median(s) for s in samples]
    )
    z = [np.abs(s - c) for s, c in zip(samples, centers)]
    n_i = np.array([len(s) for s in z], dtype=float)
    n_total = n_i.sum()
    zbar_i = np.array([zi.mean() for zi in z])
    zbar = float(np.concatenate(z).mean())
    between = float(np.sum(n_i * (zbar_i - zbar) ** 2))
    within = float(sum(np.sum((zi - zb) ** 2) for zi, zb in zip(z, zbar_i)))
    if within == 0.0:
        # All deviations identical within groups: no evidence against equality
        # unless group means of deviations differ, which then is infinite.
        statistic = float("inf") if between > 0 else 0.0
        p = 0.0 if between > 0 else 1.0
        return LeveneResult(statistic, p, k - 1, int(n_total) - k, center)
    statistic = ((n_total - k) / (k - 1.0)) * between / within
    p = float(stats.f.sf(statistic, k - 1, n_total - k))
    return LeveneResult(
        statistic=float(statistic),
        p_value=p,
        df_between=k - 1,
        df_within=int(n_total) - k,
        center=center,
    )


def variance_by_threshold(
    panel: pd.DataFrame,
    size_key: str,
    cutoff: float,
    outcomes: Sequence[str],
    center: str = "mean",
) -> pd.DataFrame:
    """Outcome variances on both sides of a size cutoff, with Levene tests.

    Units with size <= cutoff are "small", the rest "large". Returns one row
    per outcome: sample variances (ddof=1), group counts, and the Levene
    statistic and p-value for equality.
    """
    if size_key not in panel:
        raise ValidationError(f"panel lacks size column {size_key!r}")
    rows = []
    large = panel[size_key].to_numpy(dtype=float) > cutoff
    for outcome in outcomes:
        if outcome not in panel:
            raise ValidationError(f"panel lacks outcome column {outcome!r}")
        y = panel[outcome].to_numpy(dtype=float)
        keep = np.isfinite(y)
        y_small, y_large = y[keep & ~large], y[keep & large]
        if len(y_small) < 2 or len(y_large) < 2:
            raise ValidationError(
                f"outcome {outcome!r} needs >= 2 observations on each side"
            )
        test = levene_test(
            np.concatenate([y_small, y_large]),
            np.concatenate([np.zeros(len(y_small)), np.ones(len(y_large))]),
            center=center,
        )
        rows.append(
            {
                "outcome": outcome,
                "var_small": float(np.var(y_small, ddof=1)),
                "var_large": float(np.var(y_large, ddof=1)),
                "n_small": int(len(y_small)),
                "n_large": int(len(y_large)),
                "levene_w": test.statistic,
                "p_value": test.p_value,
            }
        )
    return pd.DataFrame(rows)
