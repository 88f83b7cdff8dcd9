import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import WREATHS, elements
from wreathmetric.errors import TooLarge
from wreathmetric.groups import ball
from wreathmetric.metric import (
    EstimateConfig,
    MetricSource,
    PointMetric,
    _held_karp_numpy,
    _held_karp_small,
    bfs_wreath_norm,
    engine,
    estimate,
    exact_norm,
    fit_equivalence_constants,
    mst_weight,
    tsp_path_length,
)
from wreathmetric.wreath import parse_wreath


def l1(p, q):
    return abs(p[0] - q[0]) + abs(p[1] - q[1])


def prufer_mst(pm):
    """Minimum over all spanning trees, enumerated by Pruefer sequences."""
    n = len(pm)
    if n == 1:
        return 0
    if n == 2:
        return pm.dist[0][1]
    best = math.inf
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for v in seq:
            degree[v] += 1
        w = 0
        for v in seq:
            leaf = min(i for i in range(n) if degree[i] == 1)
            w += pm.dist[leaf][v]
            degree[leaf] -= 1
            degree[v] -= 1
        u, v = [i for i in range(n) if degree[i] == 1]
        best = min(best, w + pm.dist[u][v])
    return best


def brute_tsp(pm, start, end):
    inner = [i for i in range(len(pm)) if i not in (start, end)]
    best = math.inf
    for perm in itertools.permutations(inner):
        path = [start, *perm, end]
        best = min(best, sum(pm.dist[a][b] for a, b in zip(path, path[1:])))
    return best


points_z2 = st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=6)


@settings(max_examples=150, deadline=None)
@given(points_z2)
def test_mst_matches_pruefer_oracle(pts):
    pm = PointMetric.from_function(pts, l1)
    assert mst_weight(pm) == prufer_mst(pm)


@settings(max_examples=150, deadline=None)
@given(points_z2.filter(lambda p: len(p) >= 2))
def test_tsp_matches_permutation_oracle(pts):
    pm = PointMetric.from_function(pts, l1)
    n = len(pts)
    assert tsp_path_length(pm, 0, n - 1) == brute_tsp(pm, 0, n - 1)


@settings(max_examples=150, deadline=None)
@given(points_z2.filter(lambda p: len(p) >= 2))
def test_mst_tsp_sandwich(pts):
    pm = PointMetric.from_function(pts, l1)
    mu = mst_weight(pm)
    tau = tsp_path_length(pm, 0, len(pts) - 1)
    assert mu <= tau <= 2 * mu


def test_held_karp_backends_agree():
    rng = random.Random(3)
    for _ in range(60):
        n = rng.randint(3, 10)
        pts = [(rng.randint(-6, 6), rng.randint(-6, 6)) for _ in range(n)]
        dist = [[l1(p, q) for q in pts] for p in pts]
        visit = list(range(1, n - 1))
        assert _held_karp_small(dist, 0, n - 1, visit) == _held_karp_numpy(dist, 0, n - 1, visit)


def test_tsp_examples():
    pm = PointMetric.from_function([0, 5, 2, -1, 0], lambda p, q: abs(p - q))
    assert tsp_path_length(pm, 0, 4) == 12  # 0 -> -1 -> 2 -> 5 -> 0
    assert mst_weight(pm) == 6


def test_tsp_cap():
    pts = [(i, i * i) for i in range(12)]
    pm = PointMetric.from_function(pts, l1)
    with pytest.raises(TooLarge):
        tsp_path_length(pm, 0, 11, cap=8)


def test_section_element_norms(lamplighter, section1_element):
    W, x = lamplighter, section1_element
    assert exact_norm(W, x) == 14
    assert bfs_wreath_norm(W, x, 20) == 14
    assert estimate(W, x, EstimateConfig(1)) == 10
    assert estimate(W, x, EstimateConfig(2)) == 14
    assert estimate(W, x, EstimateConfig(6)) == 12


def test_exact_norm_equals_bfs_on_radius_10_ball(lamplighter):
    W = lamplighter
    b = ball(W, W.generating_set(), 10)
    assert len(b) == 1457
    eng = engine(W)
    for x, d in b.items():
        assert eng.exact_norm(x) == d


@pytest.mark.parametrize("name, radius", [("Z wr Z^2", 4), ("Z/3 wr F2", 4), ("F2 wr H3", 3)])
def test_exact_norm_equals_bfs_on_other_balls(name, radius):
    W = WREATHS[name]
    eng = engine(W)
    for x, d in ball(W, W.generating_set(), radius).items():
        assert eng.exact_norm(x) == d


@pytest.mark.parametrize("name", ["Z2 wr Z", "Z wr Z^2", "Z/3 wr F2"])
def test_variant_one_sandwich(name):
    W = WREATHS[name]
    eng = engine(W)

    @settings(max_examples=60, deadline=None)
    @given(elements(W))
    def check(x):
        p = eng.parts(x)
        assert p.variant(1) <= eng.exact_norm(x) <= 2 * p.variant(1)
        assert p.variant(2) == eng.exact_norm(x)
        assert p.mu <= p.tau <= 2 * p.mu

    check()


def test_exact_norm_is_symmetric_and_subadditive(lamplighter):
    W = lamplighter
    eng = engine(W)
    pool = list(ball(W, W.generating_set(), 6))
    rng = random.Random(11)
    for _ in range(400):
        x, y = rng.choice(pool), rng.choice(pool)
        assert eng.exact_norm(W.inv(x)) == eng.exact_norm(x)
        assert eng.exact_norm(W.mul(x, y)) <= eng.exact_norm(x) + eng.exact_norm(y)


def test_perturbed_source():
    s = MetricSource.perturbed()
    assert s.to_json() == {"kind": "affine", "scale": 2, "offset": 1, "C": 3, "D": 0}
    W = parse_wreath("Z2 wr Z")
    eng = engine(W)
    assert s.apply(eng.B, 0) == 0
    assert s.apply(eng.B, 3) == 7


def test_estimate_config_json_round_trip():
    cfg = EstimateConfig(5, MetricSource.perturbed(), MetricSource.perturbed(3, 0), tsp_cap=10)
    assert EstimateConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ValueError):
        EstimateConfig(8)


def test_variant_two_reports_cap(lamplighter):
    W = lamplighter
    x = W.element({2 * i: 1 for i in range(20)}, 0)
    with pytest.raises(TooLarge):
        estimate(W, x, EstimateConfig(2, tsp_cap=10))
    assert estimate(W, x, EstimateConfig(1)) == 20 + 38


def test_custom_source_excluded_from_equality():
    a = MetricSource("custom", fn=lambda g: 1)
    b = MetricSource("custom", fn=lambda g: 2)
    assert a == b
    with pytest.raises(ValueError):
        MetricSource("custom")


def test_fit_examples():
    fit = fit_equivalence_constants([(n, 2 * n) for n in range(1, 20)], D=0)
    assert fit.C == 2
    assert fit_equivalence_constants([(n, n) for n in range(30)]).C == 1
    assert fit_equivalence_constants([(5, 0)], D=0).C == math.inf
    assert fit_equivalence_constants([(0, 0)], D=0).C == 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=1, max_size=20), st.integers(0, 3))
def test_fit_is_minimal_and_valid(sample, D):
    fit = fit_equivalence_constants(sample, D)
    if fit.C == math.inf:
        return
    C = fit.C
    for f, g in sample:
        assert Fraction(g) / C - D <= f <= C * g + D
    if fit.witness is not None:
        f, g = sample[fit.witness]
        smaller = C * Fraction(999, 1000)
        assert not (Fraction(g) / smaller - D <= f <= smaller * g + D)
