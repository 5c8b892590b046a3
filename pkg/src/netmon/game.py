"""Closed-form solutions of the symmetric monitoring game.

A regime is a pair (complementarity, monitoring cost curvature): the
decentralized regime D runs many local monitors, the centralized regime C a
single one with stronger effort complementarities. With effort best responses
e_i = 1 + lambda * mean(e_{-i}) + mu * phi, the symmetric equilibrium, the
welfare-maximizing intensity, and total welfare all have closed forms, and the
welfare gap between regimes yields two thresholds: a complementarity level
lambda_star above which centralization wins, and a system size n_star at which
the gap changes sign.

Two cost conventions are supported. Under ``global`` cost both regimes pay a
single quadratic monitoring cost K/2 * mu^2 for a common intensity. Under
``per_unit`` cost the decentralized regime instead runs one monitor per unit,
each paying K_D/2 * mu_i^2 for its own unit and ignoring network feedback of
its choice, which makes decentralized welfare affine in n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .errors import NoSignChangeError, ScanDisagreementError, ValidationError

CostMode = Literal["global", "per_unit"]
Regime = Literal["D", "C", "decentralized", "centralized"]

_REGIME_ALIASES = {"D": "D", "decentralized": "D", "C": "C", "centralized": "C"}


def _regime_label(which: Regime) -> str:
    label = _REGIME_ALIASES.get(which)
    if label is None:
        raise ValidationError(
            f"regime must be 'D'/'decentralized' or 'C'/'centralized', got {which!r}"
        )
    return label

_LAMBDA_HI = 1.0 - 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Primitives of the two-regime comparison.

    phi: productivity of monitoring intensity in the effort drift (> 0).
    k_d, k_c: monitoring cost curvatures, k_c >= k_d > 0.
    lambda_d, lambda_c: effort complementarities, 0 <= lambda_d < lambda_c < 1.
    n: number of units (>= 2).
    cost_mode: "global" or "per_unit" (see module docstring).
    """

    phi: float
    k_d: float
    k_c: float
    lambda_d: float
    lambda_c: float
    n: int
    cost_mode: CostMode = "global"

    def __post_init__(self) -> None:
        if not (self.phi > 0 and math.isfinite(self.phi)):
            raise ValidationError(f"phi must be positive and finite, got {self.phi}")
        if not (0 < self.k_d <= self.k_c) or not math.isfinite(self.k_c):
            raise ValidationError(
                f"cost curvatures need 0 < k_d <= k_c, got k_d={self.k_d}, k_c={self.k_c}"
            )
        if not (0.0 <= self.lambda_d < 1.0):
            raise ValidationError(f"lambda_d must lie in [0, 1), got {self.lambda_d}")
        if not (self.lambda_d < self.lambda_c < 1.0):
            raise ValidationError(
                f"lambda_c must lie in (lambda_d, 1), got {self.lambda_c}"
            )
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 2):
            raise ValidationError(f"n must be an integer >= 2, got {self.n}")
        if self.cost_mode not in ("global", "per_unit"):
            raise ValidationError(f"unknown cost_mode {self.cost_mode!r}")

    def regime(self, which: Regime) -> tuple[float, float]:
        """(lambda, K) for regime D or C; full words accepted."""
        if _regime_label(which) == "D":
            return self.lambda_d, self.k_d
        return self.lambda_c, self.k_c


@dataclass(frozen=True)
class RegimeSolution:
    mu_star: float
    effort: float
    welfare: float


@dataclass(frozen=True)
class NStarClassification:
    """Sign pattern of the welfare gap over system sizes n >= 2.

    kind is one of always_centralize, never_centralize, centralize_above,
    centralize_below. For the two boundary kinds n_star is the real root of
    the gap; callers round outward to integers.
    """

    kind: str
    n_star: float | None
    linear_coeff: float
    quad_coeff: float


def equilibrium_effort(mu: float, lam: float, phi: float) -> float:
    """Symmetric equilibrium effort (1 + mu*phi) / (1 - lambda)."""
    if not (0.0 <= lam < 1.0):
        raise ValidationError(f"lambda must lie in [0, 1), got {lam}")
    if mu < 0 or phi < 0:
        raise ValidationError("mu and phi must be nonnegative")
    return (1.0 + mu * phi) / (1.0 - lam)


def optimal_mu(params: ModelParams, regime: Regime) -> float:
    """Welfare-maximizing monitoring intensity for the given regime."""
    lam, k = params.regime(regime)
    if params.cost_mode == "per_unit" and _regime_label(regime) == "D":
        # One monitor per unit; each optimizes its own unit in isolation.
        return params.phi / k
    return params.n * params.phi / (k * (1.0 - lam))


def optimal_welfare(params: ModelParams, regime: Regime) -> float:
    """Total welfare at the optimal intensity."""
    lam, k = params.regime(regime)
    n, phi = params.n, params.phi
    if params.cost_mode == "per_unit" and _regime_label(regime) == "D":
        # n units each contribute effort minus own monitor's cost; affine in n.
        return n * ((1.0 + phi * phi / k) / (1.0 - lam) - phi * phi / (2.0 * k))
    one = 1.0 - lam
    return n / one + n * n * phi * phi / (2.0 * k * one * one)


def solve_regime(params: ModelParams, regime: Regime) -> RegimeSolution:
    """Intensity, symmetric effort, and welfare for one regime."""
    lam, _ = params.regime(regime)
    mu = optimal_mu(params, regime)
    return RegimeSolution(
        mu_star=mu,
        effort=equilibrium_effort(mu, lam, params.phi),
        welfare=optimal_welfare(params, regime),
    )


def welfare_gap(params: ModelParams) -> float:
    """Centralized minus decentralized welfare at the respective optima."""
    return optimal_welfare(params, "C") - optimal_welfare(params, "D")


def _gap_coefficients(params: ModelParams) -> tuple[float, float]:
    """(linear, quadratic) coefficients of the gap as a polynomial in n."""
    phi2 = params.phi * params.phi
    one_c = 1.0 - params.lambda_c
    one_d = 1.0 - params.lambda_d
    quad_c = phi2 / (2.0 * params.k_c * one_c * one_c)
    if params.cost_mode == "per_unit":
        per_unit_d = (1.0 + phi2 / params.k_d) / one_d - phi2 / (2.0 * params.k_d)
        return 1.0 / one_c - per_unit_d, quad_c
    quad_d = phi2 / (2.0 * params.k_d * one_d * one_d)
    return 1.0 / one_c - 1.0 / one_d, quad_c - quad_d


def _welfare_pair_grid(
    params: ModelParams, n_values: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(W_C, W_D) from the welfare formulas over an array of sizes."""
    n = n_values.astype(float)
    phi2 = params.phi * params.phi
    one_c = 1.0 - params.lambda_c
    one_d = 1.0 - params.lambda_d
    w_c = n / one_c + n * n * phi2 / (2.0 * params.k_c * one_c * one_c)
    if params.cost_mode == "per_unit":
        w_d = n * ((1.0 + phi2 / params.k_d) / one_d - phi2 / (2.0 * params.k_d))
    else:
        w_d = n / one_d + n * n * phi2 / (2.0 * params.k_d * one_d * one_d)
    return w_c, w_d


def _gap_at(params: ModelParams, lam_c: float) -> float:
    # Gap as a function of lambda_c alone, valid on [lambda_d, 1) including
    # the left endpoint that ModelParams itself excludes.
    n, phi2 = params.n, params.phi * params.phi
    one_c = 1.0 - lam_c
    one_d = 1.0 - params.lambda_d
    w_c = n / one_c + n * n * phi2 / (2.0 * params.k_c * one_c * one_c)
    if params.cost_mode == "per_unit":
        w_d = n * ((1.0 + phi2 / params.k_d) / one_d - phi2 / (2.0 * params.k_d))
    else:
        w_d = n / one_d + n * n * phi2 / (2.0 * params.k_d * one_d * one_d)
    return w_c - w_d


def lambda_star(params: ModelParams, tol: float = 1e-10) -> float:
    """Complementarity threshold: the root of the welfare gap in lambda_c.

    The gap at lambda_c = lambda_d must be <= 0 (it is, whenever k_c > k_d,
    or exactly 0 when the curvatures coincide); the gap diverges to +inf as
    lambda_c -> 1, so the root is unique. Bisection splits the bracket until
    its width falls below `tol` or floating-point resolution. `params.lambda_c`
    plays no role here.
    """
    lo = params.lambda_d
    gap_lo = _gap_at(params, lo)
    if gap_lo > 0.0:
        raise NoSignChangeError(
            "centralization already dominates at equal complementarities; "
            "no interior threshold exists"
        )
    if gap_lo == 0.0:
        return lo
    hi = _LAMBDA_HI
    if _gap_at(params, hi) <= 0.0:
        raise NoSignChangeError("welfare gap does not turn positive below lambda_c = 1")
    while hi - lo > max(tol, 4.0 * np.spacing(max(abs(lo), abs(hi)))):
        mid = 0.5 * (lo + hi)
        if _gap_at(params, mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _classify_from_coefficients(b: float, a: float) -> NStarClassification:
    # Gap(n) = a*n^2 + b*n; classify its sign over real n >= 2.
    root = -b / a if a != 0.0 else None
    if a > 0.0:
        if b >= 0.0 or root is None or root < 2.0:
            return NStarClassification("always_centralize", None, b, a)
        return NStarClassification("centralize_above", root, b, a)
    if a < 0.0:
        if b <= 0.0 or root is None or root <= 2.0:
            return NStarClassification("never_centralize", None, b, a)
        return NStarClassification("centralize_below", root, b, a)
    if b > 0.0:
        return NStarClassification("always_centralize", None, b, a)
    return NStarClassification("never_centralize", None, b, a)


def _expected_signs(
    cls: NStarClassification, n_values: np.ndarray
) -> np.ndarray:
    n = n_values.astype(float)
    if cls.kind == "always_centralize":
        return np.ones(n.shape, dtype=bool)
    if cls.kind == "never_centralize":
        return np.zeros(n.shape, dtype=bool)
    assert cls.n_star is not None
    if cls.kind == "centralize_above":
        return n > cls.n_star
    return n < cls.n_star


def n_star(params: ModelParams, n_max: int = 10_000) -> NStarClassification:
    """Classify for which system sizes centralization is strictly better.

    The gap is the quadratic a*n^2 + b*n in n; the classification from its
    coefficients is cross-checked against the sign of the gap evaluated from
    the welfare formulas at every integer in [2, n_max]. Disagreement beyond
    rounding noise at the boundary indicates a coding fault and raises.
    `params.n` is ignored; the classification covers all sizes.
    """
    if n_max < 2:
        raise ValidationError(f"n_max must be >= 2, got {n_max}")
    b, a = _gap_coefficients(params)
    cls = _classify_from_coefficients(b, a)

    grid = np.arange(2, n_max + 1)
    w_c, w_d = _welfare_pair_grid(params, grid)
    gaps = w_c - w_d
    observed = gaps > 0.0
    expected = _expected_signs(cls, grid)
    mismatch = observed != expected
    if mismatch.any():
        # The gap vanishes at the boundary root; allow either sign where the
        # evaluated gap is within rounding error of zero relative to welfare.
        scale = np.maximum(1.0, np.maximum(np.abs(w_c), np.abs(w_d)))
        benign = np.abs(gaps) <= 1e-9 * scale
        if (mismatch & ~benign).any():
            where = int(grid[mismatch & ~benign][0])
            raise ScanDisagreementError(
                f"quadratic classification {cls.kind} disagrees with the "
                f"integer sign scan at n={where}"
            )
    return cls


@dataclass(frozen=True)
class RegimeDiagnostic:
    n_values: tuple[int, ...]
    lambda_values: tuple[float, ...]
    gap_signs: tuple[tuple[int, ...], ...]  # rows follow n_values
    lambda_star_by_n: tuple[float, ...]
    direction: str  # increasing / decreasing / non_monotonic / flat


def regime_diagnostic(
    params: ModelParams,
    n_range: tuple[int, int],
    lambda_grid: tuple[float, ...] | list[float],
) -> RegimeDiagnostic:
    """Sign table of the gap over (n, lambda_c) plus the threshold curve.

    Reports whether lambda_star(n) is increasing or decreasing over the range;
    under global cost the direction can run either way, so it is measured, not
    assumed.
    """
    lo, hi = n_range
    if not (2 <= lo <= hi):
        raise ValidationError(f"n_range must satisfy 2 <= lo <= hi, got {n_range}")
    lams = tuple(float(x) for x in lambda_grid)
    for lam in lams:
        if not (params.lambda_d < lam < 1.0):
            raise ValidationError(
                f"lambda grid values must lie in (lambda_d, 1), got {lam}"
            )
    ns = tuple(range(lo, hi + 1))
    signs: list[tuple[int, ...]] = []
    stars: list[float] = []
    for n in ns:
        base = replace(params, n=n)
        row = tuple(
            int(np.sign(welfare_gap(replace(base, lambda_c=lam)))) for lam in lams
        )
        signs.append(row)
        stars.append(lambda_star(base))
    diffs = np.diff(stars)
    if np.all(diffs > 0):
        direction = "increasing"
    elif np.all(diffs < 0):
        direction = "decreasing"
    elif np.all(diffs == 0):
        direction = "flat"
    else:
        direction = "non_monotonic"
    return RegimeDiagnostic(ns, lams, tuple(signs), tuple(stars), direction)
