"""Stochastic extension: correlated shocks, noisy signals, amplification.

Latent quality is theta = theta_bar + eps with network-correlated shocks
eps ~ N(0, Sigma_eps), Sigma_eps = sigma^2 (I - rho G)^{-1} (I - rho G')^{-1}.
Units observe noisy signals s = theta + eta, eta ~ N(0, tau^2 I), and efforts
respond to shocks through the best-response system
    (I - lambda * Ghat) e = (1 + mu * phi) 1 + eps,
where Ghat is the row-normalized interaction matrix. Higher complementarity
amplifies shock dispersion: cross-sectional effort variance and the top
eigenvalue of the outcome covariance both rise with lambda and diverge at the
spectral bound.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Literal, Sequence

import numpy as np
import scipy.linalg

from .errors import NumericalError, SpectralBoundError, ValidationError
from .game import ModelParams, lambda_star
from .network import Graph, dominant_eigenvalue, spectral_radius
from .rng import substream

EffortRule = Literal["none", "decentralized_plugin", "centralized_plugin"]

_GUARD = 1e-9


@dataclass(frozen=True)
class ShockSpec:
    """Environment for the stochastic model.

    graph: underlying network; shock correlation uses its raw weights while
        effort interaction uses the row-normalized matrix.
    lam: effort complementarity, lam * psi(Ghat) < 1.
    sigma2: shock innovation variance (> 0 unless the degenerate zero case).
    rho: shock spatial correlation, rho * psi(G) < 1.
    tau2: signal noise variance (>= 0).
    gamma: effect of effort on measured outcomes (> 0).
    omega2: outcome measurement noise variance (>= 0).
    theta_bar: latent quality mean.
    phi: productivity of monitoring in the effort drift.
    """

    graph: Graph
    lam: float
    sigma2: float = 1.0
    rho: float = 0.0
    tau2: float = 0.0
    gamma: float = 1.0
    omega2: float = 0.0
    theta_bar: float = 0.0
    phi: float = 1.0

    def __post_init__(self) -> None:
        if self.sigma2 < 0 or self.tau2 < 0 or self.omega2 < 0:
            raise ValidationError("variances must be nonnegative")
        if self.gamma <= 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")
        if self.phi < 0:
            raise ValidationError(f"phi must be nonnegative, got {self.phi}")
        if self.rho < 0 or self.lam < 0:
            raise ValidationError("rho and lam must be nonnegative")
        if self.rho > 0:
            psi = spectral_radius(self.graph)
            if self.rho * psi >= 1.0 - _GUARD:
                raise SpectralBoundError(
                    f"rho*psi(G) = {self.rho * psi:.6g} breaks the shock bound"
                )
        psi_hat = spectral_radius(self.interaction())
        if self.lam * psi_hat >= 1.0 - _GUARD:
            raise SpectralBoundError(
                f"lam*psi(Ghat) = {self.lam * psi_hat:.6g} breaks the effort bound"
            )

    def interaction(self) -> np.ndarray:
        """Row-normalized weights; zero-degree rows stay zero."""
        w = self.graph.weights
        sums = w.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            ghat = np.where(sums > 0, w / sums, 0.0)
        return ghat


@dataclass(frozen=True)
class SimResult:
    reps: int
    cross_var: float
    mean_effort: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "reps": self.reps,
            "cross_var": self.cross_var,
            "mean_effort": self.mean_effort,
            "seed": self.seed,
        }


def shock_covariance(spec: ShockSpec) -> np.ndarray:
    """Sigma_eps = sigma^2 (I - rho G)^{-1} (I - rho G')^{-1}, symmetrized."""
    n = spec.graph.n
    if spec.rho == 0.0:
        return spec.sigma2 * np.eye(n)
    m = np.linalg.solve(np.eye(n) - spec.rho * spec.graph.weights, np.eye(n))
    cov = spec.sigma2 * (m @ m.T)
    return 0.5 * (cov + cov.T)


def equilibrium_with_shocks(
    spec: ShockSpec, mu: float, eps: np.ndarray | Sequence[float]
) -> np.ndarray:
    """Effort vector solving (I - lam*Ghat) e = (1 + mu*phi) 1 + eps."""
    if mu < 0:
        raise ValidationError(f"mu must be nonnegative, got {mu}")
    eps = np.asarray(eps, dtype=float)
    n = spec.graph.n
    if eps.shape != (n,):
        raise ValidationError(f"eps must have shape ({n},), got {eps.shape}")
    rhs = (1.0 + mu * spec.phi) * np.ones(n) + eps
    return np.linalg.solve(np.eye(n) - spec.lam * spec.interaction(), rhs)


def effort_variance_closed_form(n: int, lam: float, sigma2: float) -> float:
    """Ensemble effort variance on the mean-field network of size n.

    sigma^2 * [ (1/n) (1-lam)^{-2} + (1 - 1/n) (1 + lam/(n-1))^{-2} ]:
    the common shock component is amplified by 1/(1-lam), idiosyncratic
    deviations are damped toward 1/(1 + lam/(n-1)).
    """
    if n < 2:
        raise ValidationError(f"n must be >= 2, got {n}")
    if not (0.0 <= lam < 1.0):
        raise ValidationError(f"lam must lie in [0, 1), got {lam}")
    if sigma2 < 0:
        raise ValidationError(f"sigma2 must be nonnegative, got {sigma2}")
    up = 1.0 / ((1.0 - lam) * (1.0 - lam))
    down = 1.0 / ((1.0 + lam / (n - 1.0)) ** 2)
    return sigma2 * (up / n + (1.0 - 1.0 / n) * down)


def _shock_factor(spec: ShockSpec) -> np.ndarray | float:
    """Sampling factor L with eps = L z for iid standard normal z."""
    if spec.rho == 0.0 or spec.sigma2 == 0.0:
        return math.sqrt(spec.sigma2)
    cov = shock_covariance(spec)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * spec.sigma2
        return np.linalg.cholesky(cov + jitter * np.eye(spec.graph.n))


def monte_carlo_variance(
    spec: ShockSpec,
    mu: float,
    reps: int,
    seed: int,
    threads: int = 1,
) -> SimResult:
    """Cross-sectional effort dispersion by simulation.

    Each replication draws shocks from its own substream, solves the
    equilibrium, and records the population mean squared deviation of effort
    from the no-shock equilibrium; replications are averaged with pairwise
    summation, so the result is independent of scheduling and thread count.
    """
    if reps < 1:
        raise ValidationError(f"reps must be >= 1, got {reps}")
    if threads < 1:
        raise ValidationError(f"threads must be >= 1, got {threads}")
    n = spec.graph.n
    system = np.eye(n) - spec.lam * spec.interaction()
    lu, piv = scipy.linalg.lu_factor(system)
    base = (1.0 + mu * spec.phi) * np.ones(n)
    e0 = scipy.linalg.lu_solve((lu, piv), base)
    factor = _shock_factor(spec)

    variances = np.empty(reps)
    means = np.empty(reps)

    def run_block(block: range) -> None:
        for t in block:
            z = substream(seed, t).standard_normal(n)
            eps = factor * z if np.isscalar(factor) else factor @ z
            e = scipy.linalg.lu_solve((lu, piv), base + eps)
            d = e - e0
            variances[t] = float(d @ d) / n
            means[t] = float(e.mean())

    if threads == 1:
        run_block(range(reps))
    else:
        chunk = -(-reps // threads)
        blocks = [range(i, min(i + chunk, reps)) for i in range(0, reps, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_block, blocks))

    return SimResult(
        reps=reps,
        cross_var=float(np.mean(variances)),
        mean_effort=float(np.mean(means)),
        seed=seed,
    )


def posterior_mean(spec: ShockSpec, signals: np.ndarray | Sequence[float]) -> np.ndarray:
    """E[theta | s] = theta_bar 1 + Sigma (Sigma + tau^2 I)^{-1} (s - theta_bar 1)."""
    s = np.asarray(signals, dtype=float)
    n = spec.graph.n
    if s.shape != (n,):
        raise ValidationError(f"signals must have shape ({n},), got {s.shape}")
    if spec.sigma2 == 0.0 and spec.tau2 == 0.0:
        raise NumericalError("degenerate posterior: sigma2 and tau2 are both zero")
    cov = shock_covariance(spec)
    gain_rhs = s - spec.theta_bar
    x = np.linalg.solve(cov + spec.tau2 * np.eye(n), gain_rhs)
    return spec.theta_bar + cov @ x


def _response_map(spec: ShockSpec, rule: EffortRule) -> np.ndarray | None:
    """Linear map from signal surprises to equilibrium effort responses.

    Both plug-in rules filter the signal and let the response propagate
    through the complementarity resolvent (I - lam*Ghat)^{-1}: decentralized
    monitors apply per-unit scalar shrinkage, the centralized monitor applies
    the full posterior-mean matrix.
    """
    if rule == "none":
        return None
    n = spec.graph.n
    cov = shock_covariance(spec)
    if rule == "decentralized_plugin":
        diag = np.diagonal(cov)
        denom = diag + spec.tau2
        if np.any(denom == 0.0):
            raise NumericalError("degenerate signal: zero variance and zero noise")
        filt = np.diag(diag / denom)
    elif rule == "centralized_plugin":
        denom = cov + spec.tau2 * np.eye(n)
        filt = np.linalg.solve(denom.T, cov.T).T  # cov @ inv(cov + tau2 I)
    else:
        raise ValidationError(f"unknown effort rule {rule!r}")
    resolvent_sys = np.eye(n) - spec.lam * spec.interaction()
    return np.linalg.solve(resolvent_sys, filt)


def outcome_covariance(
    spec: ShockSpec, effort_rule: EffortRule = "none"
) -> tuple[np.ndarray, float]:
    """Covariance of outcomes y = theta + gamma*e + xi and its top eigenvalue.

    Effort follows the chosen plug-in rule; signal surprises s - theta_bar
    carry both the shock and the signal noise into outcomes.
    """
    n = spec.graph.n
    cov = shock_covariance(spec)
    response = _response_map(spec, effort_rule)
    if response is None:
        sigma_y = cov + spec.omega2 * np.eye(n)
    else:
        h = np.eye(n) + spec.gamma * response
        sigma_y = h @ cov @ h.T
        sigma_y += (spec.gamma**2 * spec.tau2) * (response @ response.T)
        sigma_y += spec.omega2 * np.eye(n)
    sigma_y = 0.5 * (sigma_y + sigma_y.T)
    return sigma_y, dominant_eigenvalue(sigma_y)


@dataclass(frozen=True)
class AmplificationProfile:
    lambdas: tuple[float, ...]
    variances: tuple[float, ...]
    lambda_max: tuple[float, ...]
    threshold: float | None

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.lambdas, self.variances, self.lambda_max))

    def to_tsv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("lambda\tvariance\tlambda_max\n")
            for lam, var, lmax in self.rows():
                fh.write(f"{lam:.12g}\t{var:.12g}\t{lmax:.12g}\n")


def amplification_profile(
    spec: ShockSpec,
    lambda_grid: Sequence[float],
    mu: float,
    rule: EffortRule = "decentralized_plugin",
    params: ModelParams | None = None,
) -> AmplificationProfile:
    """Variance amplification along an ascending complementarity grid.

    Per grid point: the closed-form mean-field effort variance at the graph
    size, and the top eigenvalue of the outcome covariance under `rule`.
    When model parameters are supplied, the matching centralization threshold
    lambda_star is attached for annotation. `mu` shifts the effort level only
    and is accepted for interface symmetry.
    """
    del mu  # level shift; dispersion is invariant to it
    lams = [float(x) for x in lambda_grid]
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ValidationError("lambda_grid must be strictly ascending")
    psi_hat = spectral_radius(spec.interaction())
    for lam in lams:
        if lam < 0 or lam * psi_hat >= 1.0 - _GUARD:
            raise SpectralBoundError(
                f"grid point lam={lam} is at or beyond the spectral bound"
            )
    variances = []
    lambda_maxes = []
    for lam in lams:
        point = replace(spec, lam=lam)
        variances.append(effort_variance_closed_form(spec.graph.n, lam, spec.sigma2))
        lambda_maxes.append(outcome_covariance(point, rule)[1])
    threshold = lambda_star(params) if params is not None else None
    return AmplificationProfile(
        lambdas=tuple(lams),
        variances=tuple(variances),
        lambda_max=tuple(lambda_maxes),
        threshold=threshold,
    )
