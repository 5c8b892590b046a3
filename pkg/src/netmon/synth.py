"""Synthetic facility panel generator with planted ground truth.

The generator builds a cross-section of facilities nested in counties and
(partially) in chains, with every mechanism the estimation pipeline targets
planted explicitly and recorded in a truth sidecar:

* Latent quality per facility is the equilibrium response to Gaussian shocks
  on the complete within-group network: the common shock component is
  amplified by 1/(1-lambda) and idiosyncratic deviations damped by
  1/(1 + lambda/(n-1)). Groups above the size cutoffs get a higher lambda,
  so their quality is more correlated and more dispersed.
* Deficiency counts are negative binomial with mean affine in latent quality
  (falling in quality), which keeps the population leave-one-out projection
  coefficients of the spillover regressions analytically computable.
* A second deficiency draw one cycle earlier plants an additive deterioration
  shift for large-chain and large-county facilities.
* Special-focus designations are Poisson counts per county (and per chain)
  whose intensity is a linear kink in log group size, assigned to the worst
  facilities in the group.
* Ratings are quantile bins of noisy latent quality; beds and ownership are
  independent nuisance covariates.

Generation is deterministic in the seed: every stage and every group draws
from its own named substream, so output is byte-identical across runs and
platforms.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from .errors import SchemaError, ValidationError
from .econometrics.panel import COLUMNS, OWNERSHIP_LEVELS, validate_panel
from .rng import substream

_INT_COLUMNS = (
    "beds",
    "overall_rating",
    "staffing_rating",
    "def_total",
    "def_total_prev",
    "sff",
    "sff_candidate",
)

# Substream stage tags; entity indices are packed below the stage bits.
_S_COUNTY_SIZES = 1
_S_STATES = 2
_S_CHAIN_SIZES = 3
_S_CHAIN_ASSIGN = 4
_S_COUNTY_SHOCK = 5
_S_CHAIN_SHOCK = 6
_S_RATING_NOISE = 7
_S_NB_PREV = 8
_S_NB_CUR = 9
_S_SFF_COUNTY = 10
_S_SFF_CHAIN = 11
_S_BEDS = 12
_S_OWNERSHIP = 13

_STAGE_SHIFT = 44


def _stage_stream(seed: int, stage: int, entity: int = 0) -> np.random.Generator:
    return substream(seed, (stage << _STAGE_SHIFT) | entity)


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs of the synthetic world; defaults give the standard calibration."""

    seed: int = 0
    n_counties: int = 3900
    county_size_mu: float = 1.35
    county_size_sigma: float = 1.0
    n_states: int = 50
    n_chains: int = 600
    chain_size_mu: float = 1.7
    chain_size_sigma: float = 0.6
    chain_large_share: float = 0.25
    chain_size_mu_large: float = 4.6
    chain_size_sigma_large: float = 0.3
    county_cutoff: int = 7
    chain_cutoff: int = 34
    lambda_county_below: float = 0.5
    lambda_county_above: float = 0.75
    lambda_chain_below: float = 0.55
    lambda_chain_above: float = 0.8
    sigma_q: float = 1.0
    chain_weight: float = 0.6
    def_intercept: float = 25.0
    def_slope: float = 4.0
    def_floor: float = 0.5
    nb_dispersion_small: float = 16.0
    nb_dispersion_large: float = 5.5
    det_const: float = -0.3
    theta_county: float = 0.6
    theta_chain: float = 0.2
    rating_noise: float = 0.4
    staffing_weight: float = 0.8
    staffing_noise: float = 0.6
    sff_county_enabled: bool = True
    sff_alpha: float = -0.21
    sff_beta1: float = 0.12
    sff_beta2: float = 1.34
    sff_c0: float = math.log(7.0)
    sff_chain_enabled: bool = True
    sff_chain_alpha: float = -0.046 * math.log(34.0)
    sff_chain_beta1: float = 0.046
    sff_chain_beta2: float = 0.503
    sff_chain_c0: float = math.log(34.0)
    candidate_scale: float = 2.0
    beds_mu: float = 4.6
    beds_sigma: float = 0.35
    ownership_probs: tuple[float, float, float] = (0.70, 0.22, 0.08)

    def __post_init__(self) -> None:
        if self.n_counties < 1 or self.n_states < 1 or self.n_chains < 0:
            raise ValidationError("county, state, and chain counts must be positive")
        for lam in (
            self.lambda_county_below,
            self.lambda_county_above,
            self.lambda_chain_below,
            self.lambda_chain_above,
        ):
            if not (0.0 <= lam < 1.0):
                raise ValidationError(f"lambda values must lie in [0, 1), got {lam}")
        if self.sigma_q < 0 or self.def_slope < 0:
            raise ValidationError("sigma_q and def_slope must be nonnegative")
        if self.def_intercept <= 0 or self.def_floor <= 0:
            raise ValidationError("deficiency intercept and floor must be positive")
        if self.nb_dispersion_small <= 0 or self.nb_dispersion_large <= 0:
            raise ValidationError("negative binomial dispersions must be positive")
        if self.county_cutoff < 1 or self.chain_cutoff < 1:
            raise ValidationError("cutoffs must be >= 1")
        if abs(sum(self.ownership_probs) - 1.0) > 1e-9 or min(self.ownership_probs) < 0:
            raise ValidationError("ownership_probs must be a probability vector")
        if self.chain_weight < 0 or self.candidate_scale < 0:
            raise ValidationError("chain_weight and candidate_scale must be nonnegative")
        if not (0.0 <= self.chain_large_share <= 1.0):
            raise ValidationError("chain_large_share must lie in [0, 1]")


def latent_moments(n: int, lam: float, sigma_q: float) -> tuple[float, float]:
    """(variance, within-group covariance) of equilibrium latent quality.

    On the complete network of size n with complementarity lam, the shock
    response is alpha*mean + beta*(own - mean) with alpha = 1/(1-lam) and
    beta = 1/(1 + lam/(n-1)).
    """
    s2 = sigma_q * sigma_q
    if n < 2:
        return s2, 0.0
    alpha = 1.0 / (1.0 - lam)
    beta = 1.0 / (1.0 + lam / (n - 1.0))
    var = s2 * (alpha * alpha / n + beta * beta * (1.0 - 1.0 / n))
    cov = s2 * (alpha * alpha - beta * beta) / n
    return var, cov


def sff_intensity(
    log_sizes: np.ndarray, alpha: float, beta1: float, beta2: float, c0: float
) -> np.ndarray:
    """Expected designation count: linear kink in log size, floored at zero."""
    raw = alpha + beta1 * log_sizes + beta2 * np.maximum(0.0, log_sizes - c0)
    return np.maximum(raw, 0.0)


def _draw_group_sizes(
    rng: np.random.Generator, count: int, mu: float, sigma: float, floor: int
) -> np.ndarray:
    sizes = np.maximum(floor, np.rint(rng.lognormal(mu, sigma, size=count))).astype(int)
    return sizes


def _group_latent(
    seed: int,
    stage: int,
    sizes: np.ndarray,
    lambdas: np.ndarray,
    sigma_q: float,
    member_group: np.ndarray,
    member_offset: np.ndarray,
) -> np.ndarray:
    """Equilibrium latent deviations for every member, group by group."""
    out = np.empty(member_group.shape[0])
    for g, (size, lam) in enumerate(zip(sizes, lambdas)):
        rng = _stage_stream(seed, stage, g)
        eps = sigma_q * rng.standard_normal(size)
        if size == 1:
            vals = eps
        else:
            alpha = 1.0 / (1.0 - lam)
            beta = 1.0 / (1.0 + lam / (size - 1.0))
            mean = eps.mean()
            vals = alpha * mean + beta * (eps - mean)
        out[member_offset[g] : member_offset[g] + size] = vals
    return out


def _rank_within(group_idx: np.ndarray, score: np.ndarray) -> np.ndarray:
    """Rank (0 = lowest score) of each member within its group."""
    order = np.lexsort((score, group_idx))
    ranks = np.empty_like(order)
    sorted_groups = group_idx[order]
    boundaries = np.flatnonzero(np.diff(sorted_groups)) + 1
    starts = np.concatenate([[0], boundaries])
    positions = np.arange(len(order))
    group_start = np.repeat(positions[starts], np.diff(np.concatenate([starts, [len(order)]])))
    ranks[order] = positions - group_start
    return ranks


def _poisson_flags(
    seed: int,
    stage: int,
    group_idx: np.ndarray,
    group_sizes: np.ndarray,
    intensity: np.ndarray,
    ranks: np.ndarray,
    candidate_scale: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Designation and candidate flags: worst-ranked members get designated."""
    rng = _stage_stream(seed, stage)
    counts = np.minimum(rng.poisson(intensity), group_sizes)
    cand_counts = np.minimum(
        rng.poisson(candidate_scale * intensity), group_sizes - counts
    )
    member_counts = counts[group_idx]
    member_cands = cand_counts[group_idx]
    flag = ranks < member_counts
    cand = (~flag) & (ranks < member_counts + member_cands)
    return flag, cand


def generate(config: GeneratorConfig) -> tuple[pd.DataFrame, dict]:
    """Build the synthetic panel and its ground-truth sidecar.

    Returns (panel, truth). The panel is ordered by facility id; rerunning
    with the same config yields an identical frame.
    """
    seed = config.seed

    county_sizes = _draw_group_sizes(
        _stage_stream(seed, _S_COUNTY_SIZES),
        config.n_counties,
        config.county_size_mu,
        config.county_size_sigma,
        floor=1,
    )
    n_fac = int(county_sizes.sum())
    county_idx = np.repeat(np.arange(config.n_counties), county_sizes)
    county_offset = np.concatenate([[0], np.cumsum(county_sizes)[:-1]])

    state_of_county = _stage_stream(seed, _S_STATES).integers(
        0, config.n_states, size=config.n_counties
    )

    # Chains draw sizes first, then claim facilities at random.
    chain_sizes = np.zeros(0, dtype=int)
    chain_of_fac = np.full(n_fac, -1)
    if config.n_chains > 0:
        # Two clusters: regional operators and a heavy national tier.
        rng_ch = _stage_stream(seed, _S_CHAIN_SIZES)
        is_large = rng_ch.random(config.n_chains) < config.chain_large_share
        small = rng_ch.lognormal(
            config.chain_size_mu, config.chain_size_sigma, config.n_chains
        )
        large = rng_ch.lognormal(
            config.chain_size_mu_large, config.chain_size_sigma_large, config.n_chains
        )
        chain_sizes = np.maximum(2, np.rint(np.where(is_large, large, small))).astype(int)
        slots = int(chain_sizes.sum())
        if slots > n_fac:
            raise ValidationError(
                f"infeasible config: chains require {slots} facilities, "
                f"only {n_fac} exist"
            )
        chosen = _stage_stream(seed, _S_CHAIN_ASSIGN).permutation(n_fac)[:slots]
        chain_of_fac[chosen] = np.repeat(np.arange(config.n_chains), chain_sizes)

    county_above = county_sizes > config.county_cutoff
    lam_county = np.where(
        county_above, config.lambda_county_above, config.lambda_county_below
    )
    q_county = _group_latent(
        seed,
        _S_COUNTY_SHOCK,
        county_sizes,
        lam_county,
        config.sigma_q,
        county_idx,
        county_offset,
    )

    q_chain_member = np.zeros(n_fac)
    chain_above = np.zeros(0, dtype=bool)
    if config.n_chains > 0 and config.chain_weight > 0:
        chain_above = chain_sizes > config.chain_cutoff
        lam_chain = np.where(
            chain_above, config.lambda_chain_above, config.lambda_chain_below
        )
        chain_members = np.flatnonzero(chain_of_fac >= 0)
        chain_order = chain_members[np.argsort(chain_of_fac[chain_members], kind="stable")]
        chain_offset = np.concatenate([[0], np.cumsum(chain_sizes)[:-1]])
        z = _group_latent(
            seed,
            _S_CHAIN_SHOCK,
            chain_sizes,
            lam_chain,
            config.sigma_q,
            chain_of_fac[chain_order],
            chain_offset,
        )
        q_chain_member[chain_order] = z
    elif config.n_chains > 0:
        chain_above = chain_sizes > config.chain_cutoff

    q_total = q_county + config.chain_weight * q_chain_member

    # Ratings: quantile bins of noisy latent quality, 1 = worst.
    rng_rate = _stage_stream(seed, _S_RATING_NOISE)
    overall_latent = q_total + config.rating_noise * rng_rate.standard_normal(n_fac)
    staffing_latent = (
        config.staffing_weight * q_total
        + config.staffing_noise * rng_rate.standard_normal(n_fac)
    )

    def quantile_bin(values: np.ndarray) -> np.ndarray:
        edges = np.quantile(values, [0.2, 0.4, 0.6, 0.8])
        return (np.digitize(values, edges) + 1).astype(int)

    overall_rating = quantile_bin(overall_latent)
    staffing_rating = quantile_bin(staffing_latent)

    # Deficiencies: negative binomial, mean affine and decreasing in quality.
    large_county = county_above[county_idx]
    large_chain = np.zeros(n_fac, dtype=bool)
    if config.n_chains > 0:
        affiliated = chain_of_fac >= 0
        large_chain[affiliated] = chain_above[chain_of_fac[affiliated]]
    dispersion = np.where(
        large_county, config.nb_dispersion_large, config.nb_dispersion_small
    )
    mu_prev = np.maximum(
        config.def_intercept - config.def_slope * q_total, config.def_floor
    )
    delta = (
        config.det_const
        + config.theta_county * large_county
        + config.theta_chain * large_chain
    )
    mu_cur = np.maximum(mu_prev + delta, config.def_floor)

    def nb_draw(stage: int, mean: np.ndarray) -> np.ndarray:
        rng = _stage_stream(seed, stage)
        p = dispersion / (dispersion + mean)
        return rng.negative_binomial(dispersion, p)

    def_total_prev = nb_draw(_S_NB_PREV, mu_prev)
    def_total = nb_draw(_S_NB_CUR, mu_cur)

    # Designations: worst facilities in groups whose intensity follows the
    # planted kink in log group size.
    sff = np.zeros(n_fac, dtype=bool)
    sff_candidate = np.zeros(n_fac, dtype=bool)
    if config.sff_county_enabled:
        intensity = sff_intensity(
            np.log(county_sizes.astype(float)),
            config.sff_alpha,
            config.sff_beta1,
            config.sff_beta2,
            config.sff_c0,
        )
        ranks = _rank_within(county_idx, q_total)
        flag, cand = _poisson_flags(
            seed,
            _S_SFF_COUNTY,
            county_idx,
            county_sizes,
            intensity,
            ranks,
            config.candidate_scale,
        )
        sff |= flag
        sff_candidate |= cand
    if config.sff_chain_enabled and config.n_chains > 0:
        affiliated = chain_of_fac >= 0
        intensity = sff_intensity(
            np.log(chain_sizes.astype(float)),
            config.sff_chain_alpha,
            config.sff_chain_beta1,
            config.sff_chain_beta2,
            config.sff_chain_c0,
        )
        ranks_all = np.zeros(n_fac, dtype=int)
        ranks_all[affiliated] = _rank_within(
            chain_of_fac[affiliated], q_total[affiliated]
        )
        flag = np.zeros(n_fac, dtype=bool)
        cand = np.zeros(n_fac, dtype=bool)
        flag_aff, cand_aff = _poisson_flags(
            seed,
            _S_SFF_CHAIN,
            chain_of_fac[affiliated],
            chain_sizes,
            intensity,
            ranks_all[affiliated],
            config.candidate_scale,
        )
        flag[affiliated] = flag_aff
        cand[affiliated] = cand_aff
        sff |= flag
        sff_candidate |= cand
    sff_candidate &= ~sff

    beds = np.maximum(
        5,
        np.rint(
            _stage_stream(seed, _S_BEDS).lognormal(
                config.beds_mu, config.beds_sigma, size=n_fac
            )
        ).astype(int),
    )
    ownership = np.asarray(OWNERSHIP_LEVELS)[
        _stage_stream(seed, _S_OWNERSHIP).choice(
            3, size=n_fac, p=list(config.ownership_probs)
        )
    ]

    width = max(6, len(str(n_fac)))
    panel = pd.DataFrame(
        {
            "facility_id": [f"F{i + 1:0{width}d}" for i in range(n_fac)],
            "chain_id": [
                f"CH{j + 1:04d}" if j >= 0 else np.nan for j in chain_of_fac
            ],
            "county_fips": [f"C{c + 1:05d}" for c in county_idx],
            "state": [f"S{s + 1:02d}" for s in state_of_county[county_idx]],
            "ownership": ownership,
            "beds": beds,
            "overall_rating": overall_rating,
            "staffing_rating": staffing_rating,
            "def_total": def_total.astype(int),
            "def_total_prev": def_total_prev.astype(int),
            "sff": sff.astype(int),
            "sff_candidate": sff_candidate.astype(int),
        },
        columns=list(COLUMNS),
    )

    truth = _build_truth(config, county_sizes, chain_sizes, chain_of_fac, county_idx)
    return panel, truth


def _implied_def_variance(
    config: GeneratorConfig,
    county_sizes: np.ndarray,
    chain_of_fac: np.ndarray,
    chain_sizes: np.ndarray,
    county_idx: np.ndarray,
) -> dict:
    """Facility-level deficiency variance per county side, from the design."""
    above = county_sizes > config.county_cutoff
    lam = np.where(above, config.lambda_county_above, config.lambda_county_below)
    var_q = np.array(
        [latent_moments(n, l, config.sigma_q)[0] for n, l in zip(county_sizes, lam)]
    )
    var_lat = var_q[county_idx].copy()
    delta = np.full(len(county_idx), config.det_const)
    delta += config.theta_county * above[county_idx]
    if config.n_chains > 0 and chain_sizes.size:
        ch_above = chain_sizes > config.chain_cutoff
        lam_ch = np.where(ch_above, config.lambda_chain_above, config.lambda_chain_below)
        var_z = np.array(
            [latent_moments(m, l, config.sigma_q)[0] for m, l in zip(chain_sizes, lam_ch)]
        )
        member = chain_of_fac >= 0
        var_lat[member] += config.chain_weight**2 * var_z[chain_of_fac[member]]
        delta[member] += config.theta_chain * ch_above[chain_of_fac[member]]
    b2 = config.def_slope**2
    mu_bar = config.def_intercept + delta
    disp = np.where(
        above[county_idx], config.nb_dispersion_large, config.nb_dispersion_small
    )
    per_fac = b2 * var_lat + mu_bar + (mu_bar**2 + b2 * var_lat) / disp
    out = {}
    for side, mask in (("small", ~above[county_idx]), ("large", above[county_idx])):
        if mask.any():
            total = per_fac[mask].mean() + mu_bar[mask].var()
            out[side] = float(total)
    return out


def _implied_spillover_beta(
    config: GeneratorConfig, county_sizes: np.ndarray
) -> dict:
    """Population leave-one-out projection slope of deficiencies, per side.

    Exact when the chain channel is off (chain_weight = 0 or no chains);
    otherwise the chain component adds unmodeled variance and the value is an
    approximation, flagged in the sidecar.
    """
    b2 = config.def_slope**2
    out = {}
    for side, mask_fn, lam, disp, delta in (
        (
            "below",
            lambda n: n <= config.county_cutoff,
            config.lambda_county_below,
            config.nb_dispersion_small,
            config.det_const,
        ),
        (
            "above",
            lambda n: n > config.county_cutoff,
            config.lambda_county_above,
            config.nb_dispersion_large,
            config.det_const + config.theta_county,
        ),
    ):
        sizes = county_sizes[mask_fn(county_sizes) & (county_sizes >= 2)]
        if sizes.size == 0:
            continue
        mu_bar = config.def_intercept + delta
        num = 0.0
        den = 0.0
        for n in np.unique(sizes):
            count = int((sizes == n).sum()) * int(n)
            var_q, cov_q = latent_moments(int(n), lam, config.sigma_q)
            var_def = b2 * var_q + mu_bar + (mu_bar**2 + b2 * var_q) / disp
            cov_def = b2 * cov_q
            var_x = (var_def + (n - 2) * cov_def) / (n - 1)
            num += count * cov_def
            den += count * var_x
        out[side] = float(num / den)
    exact = config.chain_weight == 0.0 or config.n_chains == 0
    out["exact"] = bool(exact)
    return out


def _build_truth(
    config: GeneratorConfig,
    county_sizes: np.ndarray,
    chain_sizes: np.ndarray,
    chain_of_fac: np.ndarray,
    county_idx: np.ndarray,
) -> dict:
    n_fac = int(county_sizes.sum())
    share_large_county = float((county_sizes > config.county_cutoff)[county_idx].mean())
    return {
        "config": asdict(config),
        "counts": {
            "n_facilities": n_fac,
            "n_counties": int(config.n_counties),
            "n_chains": int(config.n_chains),
            "share_large_county_facilities": share_large_county,
            "share_chain_affiliated": float((chain_of_fac >= 0).mean()),
        },
        "spillover": {
            "lambda_county": {
                "below": config.lambda_county_below,
                "above": config.lambda_county_above,
            },
            "lambda_chain": {
                "below": config.lambda_chain_below,
                "above": config.lambda_chain_above,
            },
            "implied_beta_def_total": _implied_spillover_beta(config, county_sizes),
        },
        "deterioration": {
            "const": config.det_const,
            "theta_county": config.theta_county,
            "theta_chain": config.theta_chain,
        },
        "variance": {
            "def_total": _implied_def_variance(
                config, county_sizes, chain_of_fac, chain_sizes, county_idx
            )
        },
        "sff": {
            "county": {
                "enabled": config.sff_county_enabled,
                "alpha": config.sff_alpha,
                "beta1": config.sff_beta1,
                "beta2": config.sff_beta2,
                "c0": config.sff_c0,
            },
            "chain": {
                "enabled": config.sff_chain_enabled,
                "alpha": config.sff_chain_alpha,
                "beta1": config.sff_chain_beta1,
                "beta2": config.sff_chain_beta2,
                "c0": config.sff_chain_c0,
            },
        },
    }


def write_csv(panel: pd.DataFrame, path: str) -> None:
    """Write the panel in schema order, sorted by facility id."""
    missing = [c for c in COLUMNS if c not in panel.columns]
    if missing:
        raise SchemaError(f"panel lacks schema columns: {missing}")
    out = panel.loc[:, list(COLUMNS)].sort_values("facility_id")
    out.to_csv(path, index=False, na_rep="")


def read_csv(path: str) -> pd.DataFrame:
    """Read and validate a facility panel; raises SchemaError with row detail."""
    raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    if list(raw.columns) != list(COLUMNS):
        raise SchemaError(
            f"header mismatch: expected {list(COLUMNS)}, got {list(raw.columns)}"
        )
    problems: list[str] = []
    frame = pd.DataFrame(index=raw.index)
    for col in ("facility_id", "county_fips", "state", "ownership"):
        values = raw[col].where(raw[col] != "", np.nan)
        frame[col] = values
    frame["chain_id"] = raw["chain_id"].where(raw["chain_id"] != "", np.nan)
    for col in _INT_COLUMNS:
        parsed = pd.to_numeric(raw[col].where(raw[col] != "", np.nan), errors="coerce")
        bad = parsed.isna()
        for idx in raw.index[bad][:20]:
            problems.append(
                f"line {idx + 2}, column {col!r}: cannot parse {raw.at[idx, col]!r}"
            )
        frame[col] = parsed
    if problems:
        raise SchemaError("; ".join(problems))
    frame = frame[list(COLUMNS)]
    violations = validate_panel(frame)
    if violations:
        raise SchemaError("; ".join(violations))
    for col in _INT_COLUMNS:
        frame[col] = frame[col].astype(int)
    return frame


def county_table(panel: pd.DataFrame) -> pd.DataFrame:
    """County-level aggregates for threshold analysis."""
    df = panel.copy()
    for level in OWNERSHIP_LEVELS:
        df[f"share_{level}"] = (df["ownership"] == level).astype(float)
    df["share_in_chain"] = df["chain_id"].notna().astype(float)
    agg = df.groupby("county_fips").agg(
        state=("state", "first"),
        nh_total=("facility_id", "count"),
        sff_count=("sff", "sum"),
        sff_cand_count=("sff_candidate", "sum"),
        share_for_profit=("share_for_profit", "mean"),
        share_non_profit=("share_non_profit", "mean"),
        share_government=("share_government", "mean"),
        share_in_chain=("share_in_chain", "mean"),
        avg_overall_rating=("overall_rating", "mean"),
        avg_staffing_rating=("staffing_rating", "mean"),
        avg_beds=("beds", "mean"),
        avg_def_total=("def_total", "mean"),
    )
    agg["log_size"] = np.log(agg["nh_total"].astype(float))
    return agg.reset_index()


def chain_table(panel: pd.DataFrame) -> pd.DataFrame:
    """Chain-level aggregates for threshold analysis."""
    df = panel[panel["chain_id"].notna()].copy()
    if df.empty:
        raise ValidationError("panel has no chain-affiliated facilities")
    agg = df.groupby("chain_id").agg(
        chain_size=("facility_id", "count"),
        sff_count=("sff", "sum"),
        sff_cand_count=("sff_candidate", "sum"),
        avg_overall_rating=("overall_rating", "mean"),
        avg_beds=("beds", "mean"),
        avg_def_total=("def_total", "mean"),
    )
    agg["log_size"] = np.log(agg["chain_size"].astype(float))
    return agg.reset_index()


def summarize(panel: pd.DataFrame) -> dict:
    """Panel composition: counts, shares, and size histograms."""
    shares = (
        panel["ownership"].value_counts(normalize=True).reindex(OWNERSHIP_LEVELS).fillna(0.0)
    )
    county_sizes = panel.groupby("county_fips")["facility_id"].count()
    chain_sizes = panel[panel["chain_id"].notna()].groupby("chain_id")[
        "facility_id"
    ].count()
    return {
        "n_facilities": int(len(panel)),
        "n_counties": int(county_sizes.size),
        "n_chains": int(chain_sizes.size),
        "ownership_shares": {k: float(v) for k, v in shares.items()},
        "county_size_hist": {
            int(k): int(v) for k, v in county_sizes.value_counts().sort_index().items()
        },
        "chain_size_hist": {
            int(k): int(v) for k, v in chain_sizes.value_counts().sort_index().items()
        },
    }


def simulate_county_counts(
    n_counties: int,
    alpha: float,
    beta1: float,
    beta2: float,
    c0: float,
    seed: int,
    size_mu: float = 1.35,
    size_sigma: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """County-level designation counts alone: (log sizes, Poisson counts).

    The county submodel of the full generator, for placebo and size studies
    that do not need facility rows.
    """
    rng = substream(seed, 0)
    sizes = np.maximum(1, np.rint(rng.lognormal(size_mu, size_sigma, n_counties)))
    log_sizes = np.log(sizes)
    intensity = sff_intensity(log_sizes, alpha, beta1, beta2, c0)
    counts = substream(seed, 1).poisson(intensity)
    return log_sizes, counts.astype(float)
