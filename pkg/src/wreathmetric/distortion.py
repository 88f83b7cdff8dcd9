"""Empirical distortion of subgroups, and the growth of cyclic subgroups of A wr B.

Distortion is measured as

    Delta(n) = max { |h|_H : h in H, |h|_G <= n }

where |h|_H is the exact word length in the subgroup generators (a BFS in
those generators) and |h|_G is either an exact ambient norm or one of the
wreath estimates.  Finite tables can only ever bound Delta from below; rows
that a larger subgroup ball might still change are flagged ``truncated``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Callable

from .errors import HomomorphismError, Unreachable
from .groups import CayleyBall, GeneratingSet, Group, evaluate_word, generating_set, parse_word, word_norm
from .metric import DEFAULT_BFS_CAP, EstimateConfig, engine, fit_equivalence_constants
from .wreath import WreathElement, WreathProduct, iter_powers


@dataclass(frozen=True)
class SubgroupEmbedding:
    """H < G given by generators that are elements of G.

    ``ambient_norm`` maps an element of G to its (exact or estimated) length;
    ``metric_kind`` names which.
    """

    ambient: Group
    gens: GeneratingSet
    ambient_norm: Callable = field(compare=False)
    metric_kind: str = "exact"

    def evaluate(self, word):
        """Image in G of a word in the subgroup generators."""
        return evaluate_word(self.ambient, self.gens, word)

    def check_homomorphism(self, rng, trials=50, max_len=6):
        n = len(self.gens)
        letters = [i for i in range(1, n + 1)] + [-i for i in range(1, n + 1)]
        for _ in range(trials):
            w1 = [rng.choice(letters) for _ in range(rng.randint(0, max_len))]
            w2 = [rng.choice(letters) for _ in range(rng.randint(0, max_len))]
            if self.evaluate(w1 + w2) != self.ambient.mul(self.evaluate(w1), self.evaluate(w2)):
                raise HomomorphismError(f"image of {w1}+{w2} differs from the product of images")
        return True


def ambient_metric(G: Group, kind: str = "exact", cap: int = DEFAULT_BFS_CAP) -> Callable:
    """Norm function on G: ``exact``, ``bfs`` or (wreath products only) ``estimate:k``."""
    if isinstance(G, WreathProduct):
        if kind == "exact":
            return engine(G).exact_norm
        if kind == "bfs":
            from .metric import bfs_wreath_norm

            return lambda x: bfs_wreath_norm(G, x, cap)
        if kind.startswith("estimate:"):
            cfg = EstimateConfig(int(kind.split(":")[1]))
            return lambda x: engine(G, cfg).estimate(x, cfg)
        raise ValueError(f"unknown metric kind {kind!r}")
    if kind not in ("exact", "bfs"):
        raise ValueError(f"{kind!r} needs a wreath product ambient group")
    gens = generating_set(G)
    return lambda x: word_norm(G, gens, x, cap)


def embed_words(G: Group, words, metric_kind: str = "exact", cap: int = DEFAULT_BFS_CAP) -> SubgroupEmbedding:
    """Subgroup generated by the given words in G's standard generators (labels or indices)."""
    ggens = G.generating_set() if hasattr(G, "generating_set") else generating_set(G)
    elements = tuple(evaluate_word(G, ggens, parse_word(ggens, w)) for w in words)
    labels = tuple(f"h{i + 1}" for i in range(len(elements)))
    return SubgroupEmbedding(G, GeneratingSet(elements, labels), ambient_metric(G, metric_kind, cap), metric_kind)


def embed_subwreath(W: WreathProduct, a_words, b_words, metric_kind: str = "exact") -> SubgroupEmbedding:
    """A' wr B' inside A wr B, for A' and B' generated by the given A- and B-words.

    The subgroup generators are the A'-generators placed at the identity
    position and the B'-generators as pure cursor moves.
    """
    A, B = W.A, W.B
    agens = generating_set(A, W.a_prefix)
    bgens = generating_set(B, W.b_prefix)
    e = B.identity
    elements = []
    labels = []
    for i, w in enumerate(a_words):
        a = evaluate_word(A, agens, parse_word(agens, w))
        elements.append(W.element({e: a}))
        labels.append(f"a'{i + 1}")
    for i, w in enumerate(b_words):
        elements.append(WreathElement((), evaluate_word(B, bgens, parse_word(bgens, w))))
        labels.append(f"t'{i + 1}")
    return SubgroupEmbedding(W, GeneratingSet(tuple(elements), tuple(labels)), ambient_metric(W, metric_kind), metric_kind)


@dataclass(frozen=True)
class DistortionRow:
    n: int
    delta: int
    witness: object
    metric_kind: str
    truncated: bool


@dataclass
class DistortionTable:
    rows: list
    metadata: dict = field(default_factory=dict)

    def as_function(self, include_truncated=True) -> dict:
        return {r.n: r.delta for r in self.rows if include_truncated or not r.truncated}

    def to_csv(self, element_json=None) -> str:
        element_json = element_json or (lambda x: x)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "delta", "witness", "metric_kind", "truncated"])
        for r in self.rows:
            wit = json.dumps(element_json(r.witness), separators=(",", ":"), sort_keys=True)
            w.writerow([r.n, r.delta, wit, r.metric_kind, int(r.truncated)])
        return buf.getvalue()

    def to_json(self, element_json=None) -> dict:
        element_json = element_json or (lambda x: x)
        rows = []
        for r in self.rows:
            d = asdict(r)
            d["witness"] = element_json(r.witness)
            rows.append(d)
        return {"metadata": self.metadata, "rows": rows}


def distortion_table(emb: SubgroupEmbedding, n_max: int, h_radius: int, max_elements: int | None = None) -> DistortionTable:
    """Delta(n) for n = 0..n_max from the subgroup ball of radius ``h_radius``.

    A row is flagged truncated when some element on the outer sphere of the
    subgroup ball already has ambient length <= n; elements just outside the
    ball could then also qualify.  This is a heuristic, not a certificate.
    """
    kwargs = {} if max_elements is None else {"max_elements": max_elements}
    cb = CayleyBall(emb.ambient, emb.gens, **kwargs)
    cb.extend_to(h_radius)
    lengths = {x: d for x, d in cb.lengths.items() if d <= h_radius}
    complete = cb.complete and cb.radius <= h_radius
    key = emb.ambient.sort_key
    entries = []
    for x, h in lengths.items():
        g = emb.ambient_norm(x)
        if isinstance(g, Unreachable):
            continue
        entries.append((g, h, x))
    # best witness per ambient value: longest subgroup length, then smallest element
    entries.sort(key=lambda t: (t[0], -t[1], key(t[2])))
    sphere = [g for g, h, _ in entries if h == h_radius]
    sphere_min = None if complete or not sphere else min(sphere)
    rows = []
    best = None
    i = 0
    for n in range(n_max + 1):
        while i < len(entries) and entries[i][0] <= n:
            g, h, x = entries[i]
            if best is None or h > best[0] or (h == best[0] and key(x) < key(best[1])):
                best = (h, x)
            i += 1
        truncated = sphere_min is not None and sphere_min <= n
        rows.append(DistortionRow(n, best[0], best[1], emb.metric_kind, truncated))
    meta = {
        "ambient": emb.ambient.descriptor,
        "subgroup_generators": list(emb.gens.labels),
        "metric_kind": emb.metric_kind,
        "h_radius": h_radius,
        "subgroup_ball_size": len(lengths),
        "n_max": n_max,
    }
    return DistortionTable(rows, meta)


# --- cyclic subgroups ---------------------------------------------------------


@dataclass(frozen=True)
class ProfileRow:
    n: int
    support_size: int
    cursor_norm: int
    estimate: int


def cyclic_power_profile(W: WreathProduct, x: WreathElement, N: int, cfg: EstimateConfig | None = None) -> list:
    cfg = cfg or EstimateConfig(1)
    eng = engine(W, cfg)
    rows = []
    for n, y in iter_powers(W, x, N):
        rows.append(ProfileRow(n, y.size, eng.B.norm(y.cursor), eng.estimate(y, cfg)))
    return rows


FINAL_TORSION = "FinalTorsion"
SUPPORT_STABILIZES = "SupportStabilizes"
NON_STABILIZING = "NonStabilizing"

_REGIMES = {
    FINAL_TORSION: "max over lamps of the distortion of <a_i> in A",
    SUPPORT_STABILIZES: "distortion of <b_f> in B",
    NON_STABILIZING: "undistorted (linear)",
}


@dataclass(frozen=True)
class Classification:
    kind: str
    period: int | None = None
    n0: int | None = None
    heuristic: bool = True  # the underlying condition is asymptotic

    @property
    def regime(self) -> str:
        return _REGIMES[self.kind]


def classify_cyclic(W: WreathProduct, x: WreathElement, window: int = 16) -> Classification:
    """Which of the three growth regimes <x> falls in, judged from n <= window."""
    if window < 4:
        raise ValueError("window must be at least 4")
    B = W.B
    b = x.cursor
    for m in range(1, window + 1):
        if b == B.identity:
            return Classification(FINAL_TORSION, period=m)
        b = B.mul(b, x.cursor)
    sizes = [y.size for _, y in iter_powers(W, x, window)]
    tail = sizes[window // 2 :]
    if len(set(tail)) == 1:
        n0 = window
        while n0 > 1 and sizes[n0 - 2] == tail[0]:
            n0 -= 1
        return Classification(SUPPORT_STABILIZES, n0=n0)
    return Classification(NON_STABILIZING)


def predicted_growth(W: WreathProduct, x: WreathElement, cls: Classification, n: int, cfg=None) -> int:
    """The regime's model value for x^n (up to constants)."""
    eng = engine(W, cfg)
    if cls.kind == FINAL_TORSION:
        m = cls.period
        y = W.power(x, m)
        return max((eng.A.norm(W.A.power(a, n // m)) for _, a in y.support), default=0)
    if cls.kind == SUPPORT_STABILIZES:
        return eng.B.norm(W.B.power(x.cursor, n))
    cfg = cfg or EstimateConfig(1)
    return n * eng.estimate(x, cfg)


def regime_fit(W: WreathProduct, x: WreathElement, N: int = 64, cfg: EstimateConfig | None = None, window: int = 16, D=2):
    """Classify x and fit estimate(x^n) ~ predicted_growth(n) over n = 1..N."""
    cfg = cfg or EstimateConfig(1)
    cls = classify_cyclic(W, x, window)
    profile = cyclic_power_profile(W, x, N, cfg)
    sample = [(row.estimate, predicted_growth(W, x, cls, row.n, cfg)) for row in profile]
    return cls, fit_equivalence_constants(sample, D), profile


@dataclass
class SuperadditivityReport:
    checked: int
    violations: list  # (x, y, f(x), f(y), f(x+y))

    @property
    def ok(self) -> bool:
        return not self.violations

    note = "advisory: a finite table cannot certify superadditivity"


def superadditivity_probe(f) -> SuperadditivityReport:
    """Check f(x+y) >= f(x) + f(y) for all sampled x, y >= 1 with x+y sampled."""
    if isinstance(f, DistortionTable):
        f = f.as_function()
    if not f:
        raise ValueError("empty table")
    f = dict(f)
    keys = sorted(k for k in f if k >= 1)
    checked = 0
    violations = []
    for i, a in enumerate(keys):
        for b in keys[i:]:
            if a + b not in f:
                continue
            checked += 1
            if f[a + b] < f[a] + f[b]:
                violations.append((a, b, f[a], f[b], f[a + b]))
    return SuperadditivityReport(checked, violations)
