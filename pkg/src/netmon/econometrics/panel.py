"""Facility panel schema and derived columns.

A panel is a pandas DataFrame with one row per facility. The raw schema is
fixed (see COLUMNS); derived columns add group sizes, threshold indicators,
leave-one-out peer means, and the deficiency change between the two
inspection cycles in the file.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import pandas as pd

from ..errors import ValidationError

COLUMNS: tuple[str, ...] = (
    "facility_id",
    "chain_id",
    "county_fips",
    "state",
    "ownership",
    "beds",
    "overall_rating",
    "staffing_rating",
    "def_total",
    "def_total_prev",
    "sff",
    "sff_candidate",
)

OWNERSHIP_LEVELS: tuple[str, ...] = ("for_profit", "non_profit", "government")

GROUP_COLUMNS = {"county": "county_fips", "chain": "chain_id"}

DEFAULT_COUNTY_CUTOFF = 7
DEFAULT_CHAIN_CUTOFF = 34

_PEER_OUTCOMES = ("overall_rating", "staffing_rating", "def_total")


def peer_means(panel: pd.DataFrame, group_key: str, outcome: str) -> pd.Series:
    """Leave-one-out group means of an outcome.

    For a row with an observed outcome in a group holding m observed values,
    the peer mean is (group sum - own value) / (m - 1); rows whose outcome is
    missing get the plain mean of the observed peers. Singleton groups and
    rows outside any group (missing group label) come back missing.
    """
    column = GROUP_COLUMNS.get(group_key, group_key)
    if column not in panel:
        raise ValidationError(f"panel lacks group column {column!r}")
    if outcome not in panel:
        raise ValidationError(f"panel lacks outcome column {outcome!r}")
    y = panel[outcome].astype(float)
    grouped = y.groupby(panel[column])
    total = grouped.transform("sum")
    count = grouped.transform("count")
    observed = y.notna()
    loo = pd.Series(np.nan, index=panel.index, dtype=float)
    has_group = panel[column].notna()
    own = observed & has_group & (count > 1)
    loo[own] = (total[own] - y[own]) / (count[own] - 1)
    other = ~observed & has_group & (count > 0)
    loo[other] = total[other] / count[other]
    return loo


def derive_columns(
    panel: pd.DataFrame,
    county_cutoff: int = DEFAULT_COUNTY_CUTOFF,
    chain_cutoff: int = DEFAULT_CHAIN_CUTOFF,
    peer_outcomes: Sequence[str] = _PEER_OUTCOMES,
) -> pd.DataFrame:
    """Return a copy of the panel with the derived analysis columns.

    chain_size: facilities sharing the chain id (missing when unaffiliated).
    nh_total: facilities in the county.
    large_chain / large_county: strict cutoff exceedance as 0/1 ints;
    unaffiliated facilities are never in a large chain.
    county_peer_<outcome>, chain_peer_<outcome>: leave-one-out means.
    delta_def: def_total - def_total_prev (current minus previous cycle).
    """
    df = panel.copy()
    sizes = df.groupby("chain_id")["facility_id"].transform("count")
    df["chain_size"] = sizes.where(df["chain_id"].notna())
    df["nh_total"] = df.groupby("county_fips")["facility_id"].transform("count")
    df["large_chain"] = (
        df["chain_size"].fillna(0).to_numpy(dtype=float) > chain_cutoff
    ).astype(int)
    df["large_county"] = (
        df["nh_total"].to_numpy(dtype=float) > county_cutoff
    ).astype(int)
    for outcome in peer_outcomes:
        df[f"county_peer_{outcome}"] = peer_means(df, "county", outcome)
        df[f"chain_peer_{outcome}"] = peer_means(df, "chain", outcome)
    df["delta_def"] = df["def_total"] - df["def_total_prev"]
    return df


def validate_panel(panel: pd.DataFrame) -> list[str]:
    """Schema and range violations, one message per problem row/column."""
    problems: list[str] = []
    missing = [c for c in COLUMNS if c not in panel.columns]
    if missing:
        problems.append(f"missing columns: {missing}")
        return problems
    extra = [c for c in panel.columns if c not in COLUMNS]
    if extra:
        problems.append(f"unexpected columns: {extra}")

    def flag(mask: pd.Series, message: str) -> None:
        bad = panel.index[mask.fillna(False)]
        for row in bad[:20]:
            problems.append(f"row {row}: {message}")
        if len(bad) > 20:
            problems.append(f"... {len(bad) - 20} more rows: {message}")

    if panel["facility_id"].duplicated().any():
        dupes = panel["facility_id"][panel["facility_id"].duplicated()].unique()
        problems.append(f"duplicate facility ids: {list(dupes[:5])}")
    flag(panel["facility_id"].isna(), "facility_id is missing")
    flag(panel["county_fips"].isna(), "county_fips is missing")
    flag(panel["state"].isna(), "state is missing")
    flag(~panel["ownership"].isin(OWNERSHIP_LEVELS), "ownership outside the three levels")
    flag(panel["beds"] <= 0, "beds must be positive")
    for col in ("overall_rating", "staffing_rating"):
        flag(~panel[col].isin([1, 2, 3, 4, 5]), f"{col} outside 1..5")
    for col in ("def_total", "def_total_prev"):
        flag(panel[col] < 0, f"{col} is negative")
    for col in ("sff", "sff_candidate"):
        flag(~panel[col].isin([0, 1]), f"{col} outside {{0,1}}")
    return problems
