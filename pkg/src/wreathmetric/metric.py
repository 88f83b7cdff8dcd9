"""Word metric on A wr B and its polynomial-time estimates.

The exact length of x = (prod b_i a_i b_i^-1) b_f is

    sum |a_i|_A + tau(e, {b_i}, b_f)

where tau is the shortest walk in the Cayley graph of B from e through every
b_i to b_f.  tau is a travelling-salesman path length and is computed here by
Held-Karp; the estimates replace it by the weight mu of a minimum spanning
tree on {e, b_i, b_f}, which satisfies mu <= tau <= 2 mu.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import TooLarge, Unreachable
from .groups import Group, cayley_ball, generating_set, word_norm
from .wreath import WreathElement, WreathProduct

DEFAULT_TSP_CAP = 18
DEFAULT_BFS_CAP = 64
VARIANTS = range(1, 8)


@dataclass(frozen=True)
class PointMetric:
    """Finite point list with a symmetric distance matrix (the complete graph K)."""

    points: tuple
    dist: tuple

    @classmethod
    def from_function(cls, points, d: Callable) -> PointMetric:
        points = tuple(points)
        n = len(points)
        rows = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                rows[i][j] = rows[j][i] = d(points[i], points[j])
        return cls(points, tuple(tuple(r) for r in rows))

    def __len__(self):
        return len(self.points)


def mst_weight(pm: PointMetric):
    """Prim's algorithm on the complete graph; ties go to the lowest index."""
    n = len(pm.dist)
    if n == 0:
        raise ValueError("need at least one point")
    dist = pm.dist
    in_tree = [False] * n
    best = list(dist[0])
    in_tree[0] = True
    total = 0
    for _ in range(n - 1):
        j = -1
        for k in range(n):
            if not in_tree[k] and (j < 0 or best[k] < best[j]):
                j = k
        total += best[j]
        in_tree[j] = True
        row = dist[j]
        for k in range(n):
            if not in_tree[k] and row[k] < best[k]:
                best[k] = row[k]
    return total


def tsp_path_length(pm: PointMetric, start: int, end: int, cap: int = DEFAULT_TSP_CAP) -> int:
    """Shortest path from ``start`` through every point to ``end`` (Held-Karp).

    Points at distance 0 from an already kept point are dropped first.  Raises
    :class:`TooLarge` if more than ``cap`` distinct points remain.
    """
    dist = pm.dist
    kept = [start] if start == end else [start, end]
    visit = []
    for i in range(len(dist)):
        if any(dist[i][k] == 0 for k in kept):
            continue
        kept.append(i)
        visit.append(i)
    if len(visit) + 2 > cap:
        raise TooLarge(len(visit) + 2, cap)
    k = len(visit)
    if k == 0:
        return dist[start][end]
    if k == 1:
        v = visit[0]
        return dist[start][v] + dist[v][end]
    if k <= 6:
        return _held_karp_small(dist, start, end, visit)
    return _held_karp_numpy(dist, start, end, visit)


def _held_karp_small(dist, start, end, visit):
    k = len(visit)
    full = (1 << k) - 1
    # dp[mask][j]: shortest path from start covering mask, ending at visit[j]
    dp = [[math.inf] * k for _ in range(1 << k)]
    for j, v in enumerate(visit):
        dp[1 << j][j] = dist[start][v]
    for mask in range(1, full + 1):
        row = dp[mask]
        for j in range(k):
            c = row[j]
            if c == math.inf:
                continue
            dj = dist[visit[j]]
            for t in range(k):
                if mask & (1 << t):
                    continue
                nm = mask | (1 << t)
                nc = c + dj[visit[t]]
                if nc < dp[nm][t]:
                    dp[nm][t] = nc
    return min(dp[full][j] + dist[visit[j]][end] for j in range(k))


def _held_karp_numpy(dist, start, end, visit):
    k = len(visit)
    D = np.array([[dist[a][b] for b in visit] for a in visit], dtype=np.int64)
    from_start = np.array([dist[start][v] for v in visit], dtype=np.int64)
    to_end = np.array([dist[v][end] for v in visit], dtype=np.int64)
    big = np.int64(1) << 60
    size = 1 << k
    dp = np.full((size, k), big, dtype=np.int64)
    for j in range(k):
        dp[1 << j, j] = from_start[j]
    masks = np.arange(size)
    popcount = np.array([bin(m).count("1") for m in range(size)])
    for layer in range(2, k + 1):
        layer_masks = masks[popcount == layer]
        for j in range(k):
            bit = 1 << j
            m = layer_masks[(layer_masks & bit) != 0]
            prev = dp[m ^ bit]
            dp[m, j] = np.min(prev + D[:, j][None, :], axis=1)
    return int(np.min(dp[size - 1] + to_end))


class FactorMetric:
    """Exact word norm on a factor group: closed form when known, cached BFS otherwise."""

    def __init__(self, group: Group, bfs_cap: int = DEFAULT_BFS_CAP):
        self.group = group
        self.gens = generating_set(group)
        self.bfs_cap = bfs_cap
        self._closed = group.closed_form_norm(group.identity) is not None
        self._memo = {}

    def norm(self, x):
        d = self._memo.get(x)
        if d is None:
            if self._closed:
                d = self.group.closed_form_norm(x)
            else:
                d = word_norm(self.group, self.gens, x, self.bfs_cap)
            self._memo[x] = d
        return d

    def distance(self, p, q):
        return self.norm(self.group.mul(self.group.inv(p), q))


@dataclass(frozen=True)
class MetricSource:
    """Where a factor metric comes from.

    ``exact``/``closed-form`` use the true word norm.  ``affine`` is the
    estimate E(g) = scale*|g| + offset for g != e (and 0 at e); ``custom``
    wraps a callable.  ``C`` and ``D`` are the declared equivalence constants.
    """

    kind: str = "exact"
    scale: int = 1
    offset: int = 0
    fn: Callable | None = field(default=None, compare=False)
    C: float = 1
    D: float = 0

    def __post_init__(self):
        if self.kind not in ("exact", "closed-form", "affine", "custom"):
            raise ValueError(f"unknown metric source {self.kind!r}")
        if self.kind == "custom" and self.fn is None:
            raise ValueError("custom metric source needs fn")

    @classmethod
    def perturbed(cls, scale=2, offset=1):
        return cls("affine", scale, offset, C=scale + offset, D=0)

    @classmethod
    def from_json(cls, value) -> MetricSource:
        if isinstance(value, str):
            return cls(value)
        return cls(
            value.get("kind", "exact"),
            int(value.get("scale", 1)),
            int(value.get("offset", 0)),
            C=value.get("C", 1),
            D=value.get("D", 0),
        )

    def to_json(self):
        if self.kind == "affine":
            return {"kind": "affine", "scale": self.scale, "offset": self.offset, "C": self.C, "D": self.D}
        return self.kind

    def apply(self, metric: FactorMetric, x):
        if self.kind == "custom":
            return self.fn(x)
        if self.kind == "closed-form" and not metric._closed:
            raise ValueError(f"no closed-form norm for {metric.group}")
        d = metric.norm(x)
        if isinstance(d, Unreachable) or self.kind != "affine":
            return d
        return 0 if d == 0 else self.scale * d + self.offset


EXACT = MetricSource("exact")


@dataclass(frozen=True)
class EstimateConfig:
    variant: int = 1
    a_source: MetricSource = EXACT
    b_source: MetricSource = EXACT
    tsp_cap: int = DEFAULT_TSP_CAP
    bfs_cap: int = DEFAULT_BFS_CAP

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be 1..7, got {self.variant}")

    @classmethod
    def from_json(cls, value) -> EstimateConfig:
        if isinstance(value, str):
            value = json.loads(value)
        return cls(
            variant=int(value.get("variant", 1)),
            a_source=MetricSource.from_json(value.get("a_source", "exact")),
            b_source=MetricSource.from_json(value.get("b_source", "exact")),
            tsp_cap=int(value.get("tsp_cap", DEFAULT_TSP_CAP)),
            bfs_cap=int(value.get("bfs_cap", DEFAULT_BFS_CAP)),
        )

    @classmethod
    def load(cls, path) -> EstimateConfig:
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self):
        return {
            "variant": self.variant,
            "a_source": self.a_source.to_json(),
            "b_source": self.b_source.to_json(),
            "tsp_cap": self.tsp_cap,
            "bfs_cap": self.bfs_cap,
        }


@dataclass
class EstimateParts:
    """Every ingredient of the seven estimates for one element."""

    sum_exact: int
    sum_est: int
    mu: int
    mu_hat: int
    tau: int | None
    cursor_est: int

    def variant(self, v: int):
        if v == 1:
            return self.sum_exact + self.mu
        if v == 2:
            if self.tau is None:
                return None
            return self.sum_est + self.tau
        if v == 3:
            return self.sum_est + self.mu
        if v == 4:
            return self.sum_exact + self.mu_hat
        if v == 5:
            return self.sum_est + self.mu_hat
        if v == 6:
            return self.sum_exact + self.mu + self.cursor_est
        if v == 7:
            return self.sum_est + self.mu_hat + self.cursor_est
        raise ValueError(f"variant must be 1..7, got {v}")


class WreathMetric:
    """Exact norms and estimates for one wreath product, with factor-norm caches."""

    def __init__(self, W: WreathProduct, cfg: EstimateConfig | None = None):
        self.W = W
        self.cfg = cfg or EstimateConfig()
        self.A = FactorMetric(W.A, self.cfg.bfs_cap)
        self.B = FactorMetric(W.B, self.cfg.bfs_cap)
        # tau depends only on the positions and the cursor, not on lamp values
        self._tau = {}

    def points(self, x: WreathElement) -> list:
        """[e, b_1, ..., b_s, b_f]"""
        return [self.W.B.identity] + [p for p, _ in x.support] + [x.cursor]

    def point_metric(self, x: WreathElement, source: MetricSource = EXACT) -> PointMetric:
        B = self.W.B
        return PointMetric.from_function(
            self.points(x), lambda p, q: source.apply(self.B, B.mul(B.inv(p), q))
        )

    def _sum(self, x, source):
        total = 0
        for _, a in x.support:
            v = source.apply(self.A, a)
            if isinstance(v, Unreachable):
                return v
            total += v
        return total

    def exact_norm(self, x: WreathElement):
        """sum |a_i|_A + tau(e, b_i, b_f).  Raises TooLarge past the TSP cap."""
        s = self._sum(x, EXACT)
        if isinstance(s, Unreachable):
            return s
        key = (tuple(p for p, _ in x.support), x.cursor)
        tau = self._tau.get(key)
        if tau is None:
            pm = self.point_metric(x)
            if _unreachable(pm):
                return Unreachable(self.cfg.bfs_cap)
            tau = self._tau[key] = tsp_path_length(pm, 0, len(pm) - 1, self.cfg.tsp_cap)
        return s + tau

    def parts(self, x: WreathElement, cfg: EstimateConfig | None = None, with_tau=True) -> EstimateParts:
        cfg = cfg or self.cfg
        pm = self.point_metric(x)
        pm_hat = pm if cfg.b_source == EXACT else self.point_metric(x, cfg.b_source)
        sum_exact = self._sum(x, EXACT)
        sum_est = sum_exact if cfg.a_source == EXACT else self._sum(x, cfg.a_source)
        cursor_est = cfg.b_source.apply(self.B, x.cursor)
        if any(isinstance(v, Unreachable) for v in (sum_exact, sum_est, cursor_est)) or _unreachable(pm, pm_hat):
            raise ValueError(f"factor norm beyond BFS cap {cfg.bfs_cap}")
        tau = None
        if with_tau:
            try:
                tau = tsp_path_length(pm, 0, len(pm) - 1, cfg.tsp_cap)
            except TooLarge:
                tau = None
        return EstimateParts(sum_exact, sum_est, mst_weight(pm), mst_weight(pm_hat), tau, cursor_est)

    def estimate(self, x: WreathElement, cfg: EstimateConfig | None = None):
        cfg = cfg or self.cfg
        parts = self.parts(x, cfg, with_tau=cfg.variant == 2)
        if cfg.variant == 2 and parts.tau is None:
            n = len({p for p in self.points(x)})
            raise TooLarge(n, cfg.tsp_cap)
        return parts.variant(cfg.variant)


def _unreachable(*pms):
    return any(isinstance(d, Unreachable) for pm in pms for row in pm.dist for d in row)


_engines: dict = {}


def engine(W: WreathProduct, cfg: EstimateConfig | None = None) -> WreathMetric:
    cfg = cfg or EstimateConfig()
    key = (W, cfg.bfs_cap, cfg.tsp_cap)
    e = _engines.get(key)
    if e is None:
        e = _engines[key] = WreathMetric(W, cfg)
    return e


def exact_norm(W: WreathProduct, x: WreathElement, cfg: EstimateConfig | None = None):
    return engine(W, cfg).exact_norm(x)


def estimate(W: WreathProduct, x: WreathElement, cfg: EstimateConfig):
    return engine(W, cfg).estimate(x, cfg)


def bfs_wreath_norm(W: WreathProduct, x: WreathElement, cap: int):
    """Ground truth: BFS over the Cayley graph of W with generators S_A u S_B."""
    return cayley_ball(W, W.generating_set()).norm(x, cap)


@dataclass(frozen=True)
class EquivalenceFit:
    C: Fraction | float
    D: Fraction
    witness: int | None  # index of the sample pair forcing C

    def __str__(self):
        c = self.C if self.C == math.inf else float(self.C)
        return f"C={c:.4f} D={float(self.D):g}"


def fit_equivalence_constants(sample, D=2) -> EquivalenceFit:
    """Smallest C >= 1 with g/C - D <= f <= C g + D on every (f, g) in ``sample``."""
    sample = list(sample)
    if not sample:
        raise ValueError("empty sample")
    D = Fraction(D)
    C = Fraction(1)
    witness = None
    for i, (f, g) in enumerate(sample):
        f, g = Fraction(f), Fraction(g)
        if f < 0 or g < 0:
            raise ValueError("values must be nonnegative")
        need = Fraction(0)
        if f - D > 0:
            need = math.inf if g == 0 else (f - D) / g
        if g > 0:
            need = max(need, math.inf if f + D == 0 else g / (f + D))
        if need > C:
            C, witness = need, i
    return EquivalenceFit(C, D, witness)
