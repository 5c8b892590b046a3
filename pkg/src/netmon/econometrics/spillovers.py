"""Peer-spillover and deterioration regressions on the facility panel.

Spillover regressions project a facility outcome on leave-one-out peer means
within county (and, for chain-affiliated facilities, within chain), with
state fixed effects and standard errors clustered at the peer-group level.
The deterioration regression projects the change in deficiencies between the
two cycles on large-chain and large-county membership.
"""

from __future__ import annotations

from typing import Sequence

import pandas as pd

from ..errors import ValidationError
from .ols import RegressionResult, ols
from .panel import (
    DEFAULT_CHAIN_CUTOFF,
    DEFAULT_COUNTY_CUTOFF,
    derive_columns,
    peer_means,
)

_DEFAULT_CONTROLS = ("beds", "ownership")


def _ensure_derived(
    panel: pd.DataFrame, county_cutoff: int, chain_cutoff: int
) -> pd.DataFrame:
    needed = ("nh_total", "chain_size", "large_chain", "large_county", "delta_def")
    if all(col in panel.columns for col in needed):
        return panel
    return derive_columns(panel, county_cutoff, chain_cutoff, peer_outcomes=())


def spillover_regression(
    panel: pd.DataFrame,
    outcome: str,
    peers: Sequence[str] = ("county",),
    controls: Sequence[str] = _DEFAULT_CONTROLS,
    fe: Sequence[str] = ("state",),
    cluster_key: str | None = None,
    subset: pd.Series | None = None,
) -> RegressionResult:
    """Regress an outcome on its leave-one-out peer means.

    peers is ("county",) or ("county", "chain"); including chain peers
    restricts the sample to chain-affiliated facilities and moves the default
    cluster level from county to chain. `subset` is an optional boolean mask
    (e.g. one side of a size threshold). Standard errors are CR1 clustered.
    """
    peers = tuple(peers)
    if not peers or any(p not in ("county", "chain") for p in peers):
        raise ValidationError(f"peers must draw from {{'county','chain'}}, got {peers}")
    if outcome not in panel:
        raise ValidationError(f"panel lacks outcome column {outcome!r}")
    df = panel.copy()
    peer_cols = []
    for group in peers:
        col = f"{group}_peer_{outcome}"
        if col not in df:
            df[col] = peer_means(df, group, outcome)
        peer_cols.append(col)
    if "chain" in peers:
        df = df[df["chain_id"].notna()]
    if subset is not None:
        df = df[subset.reindex(df.index).fillna(False).astype(bool)]
    if cluster_key is None:
        cluster_key = "chain_id" if "chain" in peers else "county_fips"

    cols = [*peer_cols, *controls, *fe, cluster_key]
    design = df[list(dict.fromkeys(cols))]
    return ols(
        df[outcome],
        design,
        fe_keys=tuple(fe),
        se="cluster",
        cluster_key=cluster_key,
    )


def deterioration_regression(
    panel: pd.DataFrame,
    controls: Sequence[str] = _DEFAULT_CONTROLS,
    fe: Sequence[str] = ("state",),
    se: str = "HC1",
    county_cutoff: int = DEFAULT_COUNTY_CUTOFF,
    chain_cutoff: int = DEFAULT_CHAIN_CUTOFF,
    cluster_key: str | None = None,
) -> RegressionResult:
    """Regress the deficiency change on large-chain/large-county membership."""
    df = _ensure_derived(panel, county_cutoff, chain_cutoff)
    cols = ["large_chain", "large_county", *controls, *fe]
    if cluster_key is not None:
        cols.append(cluster_key)
    design = df[list(dict.fromkeys(cols))]
    return ols(
        df["delta_def"],
        design,
        fe_keys=tuple(fe),
        se=se,
        cluster_key=cluster_key,
    )
