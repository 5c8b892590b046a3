"""Weighted directed graphs and the spectral quantities built on them.

The network generalization replaces the mean-field count n by the resolvent
aggregate S(lambda, G) = 1'(I - lambda*G)^{-1} 1, the sum of Bonacich-style
amplification weights. Monitoring intensity and welfare depend on the network
only through S, so a single scalar per regime carries all network structure,
and the centralization comparison reduces to a threshold S_bar in the
centralized aggregate.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    ConvergenceError,
    NoSignChangeError,
    NumericalError,
    SpectralBoundError,
    ValidationError,
)
from .game import ModelParams
from .rng import substream

_ER_RETRY_BUDGET = 100
_SPECTRAL_GUARD = 1e-9


@dataclass(frozen=True)
class Graph:
    """Dense nonnegative adjacency with zero diagonal.

    `normalized` marks row-stochastic interaction matrices (each row with
    positive degree sums to one); constructors set it, and validation checks
    the claim.
    """

    weights: np.ndarray
    labels: tuple[str, ...] | None = None
    normalized: bool = False

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValidationError(f"adjacency must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValidationError("adjacency contains non-finite weights")
        if (w < 0).any():
            raise ValidationError("adjacency weights must be nonnegative")
        if w.shape[0] and np.abs(np.diagonal(w)).max() > 0:
            raise ValidationError("adjacency diagonal must be zero")
        if self.labels is not None and len(self.labels) != w.shape[0]:
            raise ValidationError("label count must match node count")
        if self.normalized and w.shape[0]:
            sums = w.sum(axis=1)
            live = sums > 0
            if live.any() and np.abs(sums[live] - 1.0).max() > 1e-12:
                raise ValidationError(
                    "normalized graph rows with positive degree must sum to 1"
                )
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def _strongly_connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]
    if n == 0:
        return False
    support = adj > 0
    for mat in (support, support.T):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            node = queue.popleft()
            for nxt in np.flatnonzero(mat[node] & ~seen):
                seen[nxt] = True
                queue.append(int(nxt))
        if not seen.all():
            return False
    return True


def make_graph(
    kind: str,
    n: int | None = None,
    *,
    p: float | None = None,
    k: int = 1,
    sizes: tuple[int, int] | None = None,
    w_within: float = 1.0,
    w_between: float = 0.1,
    seed: int = 0,
) -> Graph:
    """Construct a named graph family member.

    complete: unit weights off the diagonal.
    mean_field: complete scaled by 1/(n-1); rows sum to one.
    ring: circulant with unit weights to the k nearest neighbors per side.
    erdos_renyi: undirected Bernoulli(p) edges, resampled until the support
        is connected (at most 100 draws).
    two_block: two fully connected blocks of the given sizes joined by
        weight `w_between` edges across blocks.
    """
    if kind in ("complete", "mean_field", "ring", "erdos_renyi"):
        if n is None or n < 2:
            raise ValidationError(f"{kind} graph needs n >= 2, got {n}")
    if kind == "complete":
        w = np.ones((n, n)) - np.eye(n)
        return Graph(w)
    if kind == "mean_field":
        w = (np.ones((n, n)) - np.eye(n)) / (n - 1)
        return Graph(w, normalized=True)
    if kind == "ring":
        if not (1 <= k <= (n - 1) // 2) and not (n == 2 and k == 1):
            raise ValidationError(f"ring offset k={k} invalid for n={n}")
        w = np.zeros((n, n))
        for off in range(1, k + 1):
            idx = np.arange(n)
            w[idx, (idx + off) % n] = 1.0
            w[idx, (idx - off) % n] = 1.0
        return Graph(w)
    if kind == "erdos_renyi":
        if p is None or not (0.0 < p <= 1.0):
            raise ValidationError(f"erdos_renyi needs edge probability in (0, 1], got {p}")
        for attempt in range(_ER_RETRY_BUDGET):
            rng = substream(seed, attempt)
            upper = rng.random((n, n)) < p
            adj = np.triu(upper, k=1)
            w = (adj | adj.T).astype(float)
            if _strongly_connected(w):
                return Graph(w)
        raise NumericalError(
            f"no connected draw in {_ER_RETRY_BUDGET} attempts at p={p}, n={n}"
        )
    if kind == "two_block":
        if sizes is None or len(sizes) != 2 or min(sizes) < 1:
            raise ValidationError(f"two_block needs two positive sizes, got {sizes}")
        if w_within <= 0 or w_between <= 0:
            raise ValidationError("two_block weights must be positive")
        n1, n2 = sizes
        total = n1 + n2
        w = np.full((total, total), w_between)
        w[:n1, :n1] = w_within
        w[n1:, n1:] = w_within
        np.fill_diagonal(w, 0.0)
        return Graph(w)
    raise ValidationError(f"unknown graph kind {kind!r}")


def graph_from_descriptor(desc: dict) -> Graph:
    """Build a graph from a JSON-style descriptor {kind, ...params}."""
    if "kind" not in desc:
        raise ValidationError("graph descriptor needs a 'kind' field")
    desc = dict(desc)
    kind = desc.pop("kind")
    if "sizes" in desc and desc["sizes"] is not None:
        desc["sizes"] = tuple(desc["sizes"])
    try:
        return make_graph(kind, **desc)
    except TypeError as exc:
        raise ValidationError(f"bad descriptor for graph kind {kind!r}: {exc}") from exc


def write_edge_list(graph: Graph, path: str) -> None:
    """CSV edge list (src,dst,weight); zero-weight pairs are omitted."""
    labels = graph.labels or tuple(str(i) for i in range(graph.n))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst", "weight"])
        rows, cols = np.nonzero(graph.weights)
        for i, j in zip(rows, cols):
            writer.writerow([labels[i], labels[j], repr(float(graph.weights[i, j]))])


def read_edge_list(path: str) -> Graph:
    """Read a CSV edge list written by `write_edge_list`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["src", "dst", "weight"]:
            raise ValidationError(f"edge list header must be src,dst,weight, got {header}")
        edges: list[tuple[str, str, float]] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ValidationError(f"line {lineno}: expected 3 fields, got {len(row)}")
            try:
                weight = float(row[2])
            except ValueError as exc:
                raise ValidationError(f"line {lineno}: bad weight {row[2]!r}") from exc
            edges.append((row[0], row[1], weight))
    names = sorted({e[0] for e in edges} | {e[1] for e in edges})
    index = {name: i for i, name in enumerate(names)}
    w = np.zeros((len(names), len(names)))
    for src, dst, weight in edges:
        w[index[src], index[dst]] = weight
    return Graph(w, labels=tuple(names))


def spectral_radius(
    graph: Graph | np.ndarray, tol: float = 1e-12, max_iter: int = 100_000
) -> float:
    """Perron root of a nonnegative matrix by power iteration.

    Iterates on G + I so periodic structures (rings, bipartite graphs) still
    converge, then removes the unit shift. Convergence is declared when the
    Rayleigh quotient stabilizes to `tol`.
    """
    w = graph.weights if isinstance(graph, Graph) else np.asarray(graph, dtype=float)
    n = w.shape[0]
    if n == 0:
        raise ValidationError("empty matrix has no spectral radius")
    shifted = w + np.eye(n)
    x = np.full(n, 1.0 / math.sqrt(n))
    rq_old = float(x @ (shifted @ x))
    for _ in range(max_iter):
        y = shifted @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x = y / norm
        rq = float(x @ (shifted @ x))
        if abs(rq - rq_old) <= tol * max(1.0, abs(rq)):
            return rq - 1.0
        rq_old = rq
    raise ConvergenceError(f"power iteration did not stabilize in {max_iter} steps")


def dominant_eigenvalue(
    matrix: np.ndarray, tol: float = 1e-12, max_iter: int = 100_000, seed: int = 7
) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration."""
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    if n == 0:
        raise ValidationError("empty matrix has no eigenvalues")
    x = substream(seed, 0).standard_normal(n)
    x /= np.linalg.norm(x)
    rq_old = float(x @ (a @ x))
    for _ in range(max_iter):
        y = a @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x = y / norm
        rq = float(x @ (a @ x))
        if abs(rq - rq_old) <= tol * max(1.0, abs(rq)):
            return rq
        rq_old = rq
    raise ConvergenceError(f"power iteration did not stabilize in {max_iter} steps")


def resolvent_sum(graph: Graph, lam: float) -> float:
    """Aggregate amplification S(lambda, G) = 1'(I - lambda*G)^{-1} 1.

    Requires lambda * psi(G) < 1 with a small guard band; the linear system
    is solved by LU with partial pivoting.
    """
    if lam < 0:
        raise ValidationError(f"lambda must be nonnegative, got {lam}")
    psi = spectral_radius(graph)
    if lam * psi >= 1.0 - _SPECTRAL_GUARD:
        raise SpectralBoundError(
            f"lambda*psi = {lam * psi:.6g} is at or beyond the convergence bound"
        )
    n = graph.n
    try:
        x = np.linalg.solve(np.eye(n) - lam * graph.weights, np.ones(n))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"resolvent solve failed: {exc}") from exc
    return float(x.sum())


@dataclass(frozen=True)
class SpectralSummary:
    s_value: float
    mu_star: float
    welfare: float


def spectral_welfare(graph: Graph, lam: float, k: float, phi: float) -> SpectralSummary:
    """Optimal intensity and welfare when the network enters through S.

    mu* = (phi/K) * S and W* = S + (phi^2 / 2K) * S^2.
    """
    if k <= 0 or phi < 0:
        raise ValidationError("need cost curvature k > 0 and phi >= 0")
    s = resolvent_sum(graph, lam)
    mu = phi * s / k
    welfare = s + phi * phi * s * s / (2.0 * k)
    return SpectralSummary(s_value=s, mu_star=mu, welfare=welfare)


def s_bar(s_d: float, phi: float, k_c: float, k_d: float) -> float:
    """Centralization threshold in the aggregate S.

    Unique root above S_D of
        S_C - S_D + (phi^2/2) * (S_C^2/K_C - S_D^2/K_D) = 0,
    the positive root of a quadratic in S_C.
    """
    if s_d <= 0:
        raise ValidationError(f"s_d must be positive, got {s_d}")
    if k_d <= 0 or k_c < k_d:
        raise ValidationError(f"need 0 < k_d <= k_c, got k_d={k_d}, k_c={k_c}")
    if phi < 0:
        raise ValidationError(f"phi must be nonnegative, got {phi}")
    quad = phi * phi / (2.0 * k_c)
    rhs = s_d + phi * phi * s_d * s_d / (2.0 * k_d)
    if quad == 0.0:
        return rhs
    disc = 1.0 + 4.0 * quad * rhs
    return (-1.0 + math.sqrt(disc)) / (2.0 * quad)


def uniform_complete_family(n: int) -> Callable[[float], Graph]:
    """One-parameter family kappa -> complete graph with edge weight kappa."""
    if n < 2:
        raise ValidationError(f"family needs n >= 2, got {n}")
    base = np.ones((n, n)) - np.eye(n)

    def family(kappa: float) -> Graph:
        if kappa < 0:
            raise ValidationError(f"kappa must be nonnegative, got {kappa}")
        return Graph(kappa * base)

    return family


def kappa_star(
    family: Callable[[float], Graph],
    params: ModelParams,
    kappa_range: tuple[float, float],
    tol: float = 1e-10,
    grid_points: int = 33,
) -> tuple[float, float]:
    """Density threshold on a one-parameter graph family.

    Verifies that S(lambda_c, G(kappa)) is strictly increasing on a grid over
    `kappa_range`, brackets the welfare crossing W_C = W_D, and bisects to the
    crossing. Returns (kappa*, psi(G(kappa*))). Cost mode and n in `params`
    are ignored; the network carries the size information.
    """
    lo, hi = kappa_range
    if not (lo < hi):
        raise ValidationError(f"kappa_range must be increasing, got {kappa_range}")
    grid = np.linspace(lo, hi, grid_points)
    s_values = [resolvent_sum(family(k), params.lambda_c) for k in grid]
    if not all(b > a for a, b in zip(s_values, s_values[1:])):
        raise NumericalError(
            "S(lambda_c, G(kappa)) is not strictly increasing over kappa_range"
        )

    def gap(kappa: float) -> float:
        g = family(kappa)
        w_c = spectral_welfare(g, params.lambda_c, params.k_c, params.phi).welfare
        w_d = spectral_welfare(g, params.lambda_d, params.k_d, params.phi).welfare
        return w_c - w_d

    g_lo, g_hi = gap(lo), gap(hi)
    if not (g_lo < 0.0 < g_hi):
        raise NoSignChangeError(
            f"welfare gap does not cross zero on kappa_range: gap({lo})={g_lo:.6g}, "
            f"gap({hi})={g_hi:.6g}"
        )
    a, b = lo, hi
    g_mid = g_lo
    while b - a > max(tol, 4.0 * np.spacing(max(abs(a), abs(b)))):
        mid = 0.5 * (a + b)
        g_mid = gap(mid)
        if abs(g_mid) <= 1e-8:
            a = b = mid
            break
        if g_mid > 0.0:
            b = mid
        else:
            a = mid
    kappa = 0.5 * (a + b)
    if abs(gap(kappa)) > 1e-8:
        raise NumericalError("bisection finished without closing the welfare gap")
    return kappa, spectral_radius(family(kappa))
