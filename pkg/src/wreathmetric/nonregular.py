"""Wreath products A wr_Omega B for a left B-set Omega with finitely many orbits.

Omega is a disjoint union of components, each one of

* ``CycleSpec(size, shifts)``: Z/size, generator i adds ``shifts[i]``;
* ``LineSpec(shifts)``: Z, generator i adds ``shifts[i]``;
* ``PermSpec(perms)``: {0..m-1}, generator i acts by ``perms[i]``;
* ``RegularSpec()``: B itself under left multiplication.

A point is a pair ``(component, local)``.  Points are ordered by component
index, then by the local order (integers, or ``B.sort_key`` for regular
components); each orbit's basepoint is its minimal point.

The Schreier graph has an edge p -- g.p for every generator g of B.  For
nonabelian B this graph is built from the left action, while the cursor
walks by right multiplication; the two agree whenever B is abelian.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

from .errors import ActionError, DifferentOrbits, GroupMismatchError, Unreachable
from .groups import GeneratingSet, Group, cayley_ball, parse_group
from .metric import DEFAULT_BFS_CAP, FactorMetric, PointMetric, mst_weight
from .wreath import WreathElement


@dataclass(frozen=True)
class CycleSpec:
    size: int
    shifts: tuple | None = None
    kind = "cycle"

    def __post_init__(self):
        if self.size < 1:
            raise ActionError("cycle size must be positive")


@dataclass(frozen=True)
class LineSpec:
    shifts: tuple | None = None
    kind = "line"


@dataclass(frozen=True)
class PermSpec:
    perms: tuple
    kind = "perm"

    def __post_init__(self):
        for p in self.perms:
            if sorted(p) != list(range(len(p))) or len(p) != len(self.perms[0]):
                raise ActionError(f"not a bijection of {{0..{len(self.perms[0]) - 1}}}: {list(p)}")


@dataclass(frozen=True)
class RegularSpec:
    kind = "regular"


@dataclass(frozen=True)
class Orbit:
    index: int
    component: int
    basepoint: tuple
    points: frozenset | None  # None for infinite orbits


@dataclass(frozen=True)
class OmegaAction:
    base: Group
    components: tuple
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        ngens = len(self.base.standard_generators())
        for c in self.components:
            if isinstance(c, (CycleSpec, LineSpec)) and c.shifts is not None and len(c.shifts) != ngens:
                raise ActionError(f"{c.kind} component needs {ngens} shifts")
            if isinstance(c, PermSpec) and len(c.perms) != ngens:
                raise ActionError(f"perm component needs {ngens} permutations")

    # --- action -------------------------------------------------------

    def _shift(self, spec, i):
        return 1 if spec.shifts is None else spec.shifts[i]

    def gen_act(self, i: int, p):
        """Act on point p by the signed 1-based generator index i."""
        c, v = p
        spec = self.components[c]
        sign = 1 if i > 0 else -1
        g = abs(i) - 1
        if isinstance(spec, CycleSpec):
            return (c, (v + sign * self._shift(spec, g)) % spec.size)
        if isinstance(spec, LineSpec):
            return (c, v + sign * self._shift(spec, g))
        if isinstance(spec, PermSpec):
            perm = spec.perms[g]
            return (c, perm[v] if sign > 0 else perm.index(v))
        B = self.base
        gen = B.standard_generators()[g]
        return (c, B.mul(gen if sign > 0 else B.inv(gen), v))

    def act(self, b, p):
        """b . p for an arbitrary element b of B."""
        c, v = p
        spec = self.components[c]
        if isinstance(spec, RegularSpec):
            return (c, self.base.mul(b, v))
        word = self._cache.get(("word", b))
        if word is None:
            word = self._cache[("word", b)] = self.base.to_word(b)
        if isinstance(spec, (CycleSpec, LineSpec)):
            total = sum(self._shift(spec, abs(i) - 1) * (1 if i > 0 else -1) for i in word)
            v = v + total
            return (c, v % spec.size if isinstance(spec, CycleSpec) else v)
        for i in reversed(word):
            p = self.gen_act(i, p)
        return p

    def is_point(self, p) -> bool:
        if not (isinstance(p, tuple) and len(p) == 2 and isinstance(p[0], int)):
            return False
        c, v = p
        if not 0 <= c < len(self.components):
            return False
        spec = self.components[c]
        if isinstance(spec, CycleSpec):
            return isinstance(v, int) and 0 <= v < spec.size
        if isinstance(spec, PermSpec):
            return isinstance(v, int) and 0 <= v < len(spec.perms[0])
        if isinstance(spec, LineSpec):
            return isinstance(v, int)
        return self.base.is_element(v)

    def point_key(self, p):
        c, v = p
        if isinstance(self.components[c], RegularSpec):
            return (c, self.base.sort_key(v))
        return (c, (v,))

    def sample_points(self, c):
        spec = self.components[c]
        if isinstance(spec, CycleSpec):
            return [(c, v) for v in range(spec.size)]
        if isinstance(spec, PermSpec):
            return [(c, v) for v in range(len(spec.perms[0]))]
        if isinstance(spec, LineSpec):
            return [(c, v) for v in range(-3, 4)]
        return [(c, x) for x in cayley_ball(self.base).snapshot(2)]

    def check_relations(self):
        """Every relator of B must fix every (sampled) point."""
        for rel in self.base.relators():
            for c in range(len(self.components)):
                for p in self.sample_points(c):
                    q = p
                    for i in reversed(rel):
                        q = self.gen_act(i, q)
                    if q != p:
                        raise ActionError(f"relator {rel} moves {p} to {q}: not a B-action")
        return True

    # --- orbits -------------------------------------------------------

    @property
    def orbits(self) -> tuple:
        cached = self._cache.get("orbits")
        if cached is None:
            cached = self._cache["orbits"] = tuple(self._compute_orbits())
        return cached

    def _compute_orbits(self):
        ngens = len(self.base.standard_generators())
        out = []
        for c, spec in enumerate(self.components):
            if isinstance(spec, RegularSpec):
                out.append(Orbit(len(out), c, (c, self.base.identity), None))
            elif isinstance(spec, LineSpec):
                g = 0
                for i in range(ngens):
                    g = math.gcd(g, self._shift(spec, i))
                if g == 0:
                    raise ActionError("line component with all shifts zero has infinitely many orbits")
                for r in range(g):
                    out.append(Orbit(len(out), c, (c, r), None))
            else:
                seen = set()
                for p in self.sample_points(c):
                    if p in seen:
                        continue
                    comp = {p}
                    queue = deque([p])
                    while queue:
                        q = queue.popleft()
                        for i in range(1, ngens + 1):
                            for s in (i, -i):
                                r = self.gen_act(s, q)
                                if r not in comp:
                                    comp.add(r)
                                    queue.append(r)
                    seen |= comp
                    base = min(comp, key=self.point_key)
                    out.append(Orbit(len(out), c, base, frozenset(comp)))
        return out

    @property
    def omega(self) -> int:
        return len(self.orbits)

    def orbit_of(self, p) -> int:
        c, v = p
        spec = self.components[c]
        for o in self.orbits:
            if o.component != c:
                continue
            if isinstance(spec, RegularSpec):
                return o.index
            if isinstance(spec, LineSpec):
                g = len([q for q in self.orbits if q.component == c])
                if o.basepoint[1] == v % g:
                    return o.index
            elif p in o.points:
                return o.index
        raise ActionError(f"{p} is not a point of this action")

    # --- Schreier graph -----------------------------------------------

    def schreier_distance(self, p, q, cap: int = DEFAULT_BFS_CAP):
        if self.orbit_of(p) != self.orbit_of(q):
            raise DifferentOrbits(f"{p} and {q} lie in different orbits")
        if p == q:
            return 0
        key = (p, q) if self.point_key(p) <= self.point_key(q) else (q, p)
        d = self._cache.get(key)
        if d is not None and (not isinstance(d, Unreachable) or d.cap >= cap):
            return d if not isinstance(d, Unreachable) else Unreachable(cap)
        d = self._bfs(key[0], key[1], cap)
        self._cache[key] = d
        return d

    def _bfs(self, p, q, cap):
        ngens = len(self.base.standard_generators())
        moves = [s for i in range(1, ngens + 1) for s in (i, -i)]
        seen = {p}
        frontier = [p]
        for r in range(1, cap + 1):
            nxt = []
            for x in frontier:
                for s in moves:
                    y = self.gen_act(s, x)
                    if y == q:
                        return r
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            if not nxt:
                break
            frontier = nxt
        return Unreachable(cap)

    def transversal_word(self, p, cap: int = DEFAULT_BFS_CAP) -> list:
        """A word w in B's generators with w . e_j = p, e_j the basepoint of p's orbit."""
        e = self.orbits[self.orbit_of(p)].basepoint
        ngens = len(self.base.standard_generators())
        moves = [s for i in range(1, ngens + 1) for s in (i, -i)]
        words = {e: []}
        frontier = [e]
        for _ in range(cap + 1):
            if p in words:
                return words[p]
            nxt = []
            for x in frontier:
                for s in moves:
                    y = self.gen_act(s, x)
                    if y not in words:
                        words[y] = [s] + words[x]
                        nxt.append(y)
            frontier = nxt
        raise ActionError(f"{p} not reached from {e} within {cap} steps")

    # --- serialization ------------------------------------------------

    def point_to_json(self, p):
        c, v = p
        local = self.base.to_json(v) if isinstance(self.components[c], RegularSpec) else v
        return [self.orbit_of(p), c, local]

    def point_from_json(self, value):
        if len(value) == 3:
            value = value[1:]
        c, v = value
        spec = self.components[c]
        return (c, self.base.from_json(v) if isinstance(spec, RegularSpec) else int(v))

    def to_json(self):
        comps = []
        for spec in self.components:
            d = {"type": spec.kind}
            if isinstance(spec, CycleSpec):
                d["size"] = spec.size
            if isinstance(spec, (CycleSpec, LineSpec)) and spec.shifts is not None:
                d["shifts"] = list(spec.shifts)
            if isinstance(spec, PermSpec):
                d["perms"] = [list(p) for p in spec.perms]
            comps.append(d)
        return {"base": self.base.descriptor, "omega": comps}


def parse_action(value) -> OmegaAction:
    """Build an action from ``{"base": "Z", "omega": [{"type": "cycle", "size": 3}, ...]}``."""
    if isinstance(value, str):
        value = json.loads(value)
    base = parse_group(value["base"])
    comps = []
    for d in value["omega"]:
        t = d.get("type")
        shifts = tuple(d["shifts"]) if "shifts" in d else None
        if t == "cycle":
            comps.append(CycleSpec(int(d["size"]), shifts))
        elif t == "line":
            comps.append(LineSpec(shifts))
        elif t == "perm":
            comps.append(PermSpec(tuple(tuple(p) for p in d["perms"])))
        elif t == "regular":
            comps.append(RegularSpec())
        else:
            raise ActionError(f"unknown omega component type {t!r}")
    action = OmegaAction(base, tuple(comps))
    action.check_relations()
    return action


def compute_orbits(action: OmegaAction):
    """[(basepoint, points or None), ...] in orbit order."""
    return [(o.basepoint, o.points) for o in action.orbits]


def schreier_distance(action: OmegaAction, p, q, cap: int = DEFAULT_BFS_CAP):
    return action.schreier_distance(p, q, cap)


@dataclass(frozen=True)
class NonregularWreath(Group):
    """A wr_Omega B.  Generators: one copy of A's generators per orbit, then B's."""

    A: Group
    action: OmegaAction
    a_prefix: str = "a"
    b_prefix: str = "t"

    @property
    def B(self):
        return self.action.base

    @property
    def descriptor(self):
        return f"{self.A.descriptor} wr_Omega {self.B.descriptor}"

    @property
    def identity(self):
        return WreathElement((), self.B.identity)

    def _make(self, d, cursor):
        key = self.action.point_key
        return WreathElement(tuple(sorted(d.items(), key=lambda pa: key(pa[0]))), cursor)

    def element(self, lamps, cursor=None) -> WreathElement:
        if cursor is None:
            cursor = self.B.identity
        items = lamps.items() if isinstance(lamps, dict) else lamps
        e = self.A.identity
        return self._make({p: a for p, a in items if a != e}, cursor)

    def mul(self, x, y):
        A, act = self.A, self.action
        b1 = x.cursor
        d = dict(x.support)
        e = A.identity
        for p, a in y.support:
            q = act.act(b1, p)
            v = d.get(q)
            v = a if v is None else A.mul(v, a)
            if v == e:
                del d[q]
            else:
                d[q] = v
        return self._make(d, self.B.mul(b1, y.cursor))

    def inv(self, x):
        binv = self.B.inv(x.cursor)
        return self._make({self.action.act(binv, p): self.A.inv(a) for p, a in x.support}, binv)

    def is_element(self, x):
        return (
            isinstance(x, WreathElement)
            and self.B.is_element(x.cursor)
            and all(self.action.is_point(p) and self.A.is_element(a) and a != self.A.identity for p, a in x.support)
        )

    def standard_generators(self):
        e = self.B.identity
        gens = []
        for o in self.action.orbits:
            gens += [WreathElement(((o.basepoint, a),), e) for a in self.A.standard_generators()]
        gens += [WreathElement((), b) for b in self.B.standard_generators()]
        return tuple(gens)

    def standard_labels(self, prefix=None):
        labels = []
        for o in self.action.orbits:
            labels += [f"{lab}@{o.index}" for lab in self.A.standard_labels(self.a_prefix)]
        return tuple(labels) + self.B.standard_labels(self.b_prefix)

    def generating_set(self) -> GeneratingSet:
        return GeneratingSet(self.standard_generators(), self.standard_labels())

    def to_word(self, x):
        ka = len(self.A.standard_generators())
        k = ka * self.action.omega

        def shift(w):
            return [i + k if i > 0 else i - k for i in w]

        word = []
        for p, a in x.support:
            j = self.action.orbit_of(p)
            wp = shift(self.action.transversal_word(p))
            wa = [i + j * ka if i > 0 else i - j * ka for i in self.A.to_word(a)]
            word += wp + wa + [-i for i in reversed(wp)]
        return word + shift(self.B.to_word(x.cursor))

    def sort_key(self, x):
        return (
            tuple((self.action.point_key(p), self.A.sort_key(a)) for p, a in x.support),
            self.B.sort_key(x.cursor),
        )

    def to_json(self, x):
        return {
            "support": [[self.action.point_to_json(p), self.A.to_json(a)] for p, a in x.support],
            "cursor": self.B.to_json(x.cursor),
        }

    def from_json(self, value):
        pairs = [(self.action.point_from_json(p), self.A.from_json(a)) for p, a in value.get("support", [])]
        cursor = value.get("cursor")
        return self.element(pairs, self.B.identity if cursor is None else self.B.from_json(cursor))


def nonregular_multiply(NW: NonregularWreath, x, y):
    if not (NW.is_element(x) and NW.is_element(y)):
        raise GroupMismatchError(f"operands are not elements of {NW.descriptor}")
    return NW.mul(x, y)


def evaluate_nonregular_word(NW: NonregularWreath, word):
    """Tokens ``a@j`` write at orbit j's pointer; B tokens move the cursor."""
    from .groups import evaluate_word, parse_word

    gens = NW.generating_set()
    return evaluate_word(NW, gens, parse_word(gens, word))


class NonregularMetric:
    """The orbit-wise spanning-tree estimate and its BFS ground truth."""

    def __init__(self, NW: NonregularWreath, bfs_cap: int = DEFAULT_BFS_CAP):
        self.NW = NW
        self.bfs_cap = bfs_cap
        self.A = FactorMetric(NW.A, bfs_cap)
        self.B = FactorMetric(NW.B, bfs_cap)

    def orbit_trees(self, x: WreathElement) -> list:
        """mu_j over {e_j} u (support in orbit j) u {b_f . e_j}, for each orbit j."""
        act = self.NW.action
        groups = {o.index: [o.basepoint] for o in act.orbits}
        for p, _ in x.support:
            groups[act.orbit_of(p)].append(p)
        out = []
        for o in act.orbits:
            pts = groups[o.index] + [act.act(x.cursor, o.basepoint)]
            pm = PointMetric.from_function(pts, lambda p, q: act.schreier_distance(p, q, self.bfs_cap))
            if any(isinstance(d, Unreachable) for row in pm.dist for d in row):
                return Unreachable(self.bfs_cap)
            out.append(mst_weight(pm))
        return out

    def estimate(self, x: WreathElement):
        trees = self.orbit_trees(x)
        if isinstance(trees, Unreachable):
            return trees
        parts = [self.A.norm(a) for _, a in x.support] + [self.B.norm(x.cursor)]
        if any(isinstance(v, Unreachable) for v in parts):
            return Unreachable(self.bfs_cap)
        return sum(parts) + sum(trees)

    def walk_bound(self, x: WreathElement):
        """Length of an explicit word for x: each orbit tree walked out and back, then b_f."""
        trees = self.orbit_trees(x)
        return sum(self.A.norm(a) for _, a in x.support) + 2 * sum(trees) + self.B.norm(x.cursor)


_metrics: dict = {}


def nonregular_metric(NW: NonregularWreath, bfs_cap: int = DEFAULT_BFS_CAP) -> NonregularMetric:
    m = _metrics.get((NW, bfs_cap))
    if m is None:
        m = _metrics[(NW, bfs_cap)] = NonregularMetric(NW, bfs_cap)
    return m


def nonregular_estimate(NW: NonregularWreath, x: WreathElement):
    return nonregular_metric(NW).estimate(x)


def bfs_nonregular_norm(NW: NonregularWreath, x: WreathElement, cap: int):
    return cayley_ball(NW, NW.generating_set()).norm(x, cap)
