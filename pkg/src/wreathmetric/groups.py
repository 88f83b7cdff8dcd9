"""Concrete finitely generated groups with exact arithmetic.

Supported: free abelian groups Z^k, cyclic groups Z/n, free groups F_k, the
discrete Heisenberg group H3, and finite direct products of these.  Elements
are plain immutable Python values (ints and tuples) so they hash cheaply and
can be used directly as BFS states.

Words are sequences of signed 1-based generator indices: ``+i`` is the i-th
generator, ``-i`` its inverse.  Words are read left to right.
"""

from __future__ import annotations

import re
from collections.abc import Sequence
from dataclasses import dataclass

from .errors import GroupMismatchError, ResourceLimit, Unreachable, WordError

# BFS balls refuse to grow past this many elements.
DEFAULT_MAX_ELEMENTS = 2_000_000


class Group:
    """Base class.  Subclasses are frozen dataclasses, hence hashable."""

    descriptor = "?"
    is_abelian = False

    @property
    def identity(self):
        raise NotImplementedError

    def mul(self, x, y):
        """Unchecked product; use :func:`multiply` for validated input."""
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def is_element(self, x) -> bool:
        raise NotImplementedError

    def standard_generators(self) -> tuple:
        raise NotImplementedError

    def standard_labels(self, prefix: str = "x") -> tuple[str, ...]:
        n = len(self.standard_generators())
        if n == 1:
            return (prefix,)
        return tuple(f"{prefix}{i + 1}" for i in range(n))

    def to_word(self, x) -> list[int]:
        """Some word (not necessarily geodesic) in the standard generators equal to x."""
        raise NotImplementedError

    def relators(self) -> list[list[int]]:
        """Defining relators as words in the standard generators."""
        return []

    def closed_form_norm(self, x):
        """Word length w.r.t. the standard generators, or None if no closed form."""
        return None

    def sort_key(self, x):
        return x

    def to_json(self, x):
        return x

    def from_json(self, value):
        return value

    def power(self, x, n: int):
        if n < 0:
            x, n = self.inv(x), -n
        result = self.identity
        for _ in range(n):
            result = self.mul(result, x)
        return result

    def check(self, x):
        if not self.is_element(x):
            raise GroupMismatchError(f"{x!r} is not an element of {self.descriptor}")
        return x

    def __str__(self):
        return self.descriptor


@dataclass(frozen=True)
class FreeAbelian(Group):
    """Z^k.  Rank-1 elements are ints, higher ranks are k-tuples."""

    rank: int = 1
    is_abelian = True

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be positive")

    @property
    def descriptor(self):
        return "Z" if self.rank == 1 else f"Z^{self.rank}"

    @property
    def identity(self):
        return 0 if self.rank == 1 else (0,) * self.rank

    def mul(self, x, y):
        if self.rank == 1:
            return x + y
        return tuple(a + b for a, b in zip(x, y))

    def inv(self, x):
        if self.rank == 1:
            return -x
        return tuple(-a for a in x)

    def is_element(self, x):
        if self.rank == 1:
            return isinstance(x, int) and not isinstance(x, bool)
        return isinstance(x, tuple) and len(x) == self.rank and all(isinstance(a, int) for a in x)

    def standard_generators(self):
        if self.rank == 1:
            return (1,)
        return tuple(tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank))

    def _coords(self, x):
        return (x,) if self.rank == 1 else x

    def to_word(self, x):
        word = []
        for i, v in enumerate(self._coords(x)):
            word.extend([i + 1 if v > 0 else -(i + 1)] * abs(v))
        return word

    def relators(self):
        return [[i, j, -i, -j] for i in range(1, self.rank + 1) for j in range(i + 1, self.rank + 1)]

    def closed_form_norm(self, x):
        return sum(abs(v) for v in self._coords(x))

    def sort_key(self, x):
        return self._coords(x)

    def to_json(self, x):
        return x if self.rank == 1 else list(x)

    def from_json(self, value):
        if self.rank == 1:
            return int(value)
        return tuple(int(v) for v in value)


@dataclass(frozen=True)
class Cyclic(Group):
    """Z/n with residues in [0, n)."""

    n: int
    is_abelian = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("modulus must be positive")

    @property
    def descriptor(self):
        return f"Z/{self.n}"

    @property
    def identity(self):
        return 0

    def mul(self, x, y):
        return (x + y) % self.n

    def inv(self, x):
        return -x % self.n

    def is_element(self, x):
        return isinstance(x, int) and not isinstance(x, bool) and 0 <= x < self.n

    def standard_generators(self):
        return (1 % self.n,)

    def to_word(self, x):
        return [1] * x

    def relators(self):
        return [[1] * self.n]

    def closed_form_norm(self, x):
        return min(x, self.n - x)

    def from_json(self, value):
        return int(value) % self.n


def _free_reduce(word):
    out = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


@dataclass(frozen=True)
class FreeGroup(Group):
    """F_k; elements are freely reduced tuples of signed 1-based generator indices."""

    rank: int = 2

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be positive")

    @property
    def descriptor(self):
        return f"F{self.rank}"

    @property
    def is_abelian(self):
        return self.rank == 1

    @property
    def identity(self):
        return ()

    def mul(self, x, y):
        # only the junction can cancel
        i = 0
        n = min(len(x), len(y))
        while i < n and x[len(x) - 1 - i] == -y[i]:
            i += 1
        return x[: len(x) - i] + y[i:]

    def inv(self, x):
        return tuple(-a for a in reversed(x))

    def is_element(self, x):
        return (
            isinstance(x, tuple)
            and all(isinstance(a, int) and 0 < abs(a) <= self.rank for a in x)
            and _free_reduce(x) == x
        )

    def standard_generators(self):
        return tuple((i,) for i in range(1, self.rank + 1))

    def to_word(self, x):
        return list(x)

    def closed_form_norm(self, x):
        return len(x)

    def sort_key(self, x):
        return (len(x), x)

    def to_json(self, x):
        return list(x)

    def from_json(self, value):
        return _free_reduce(tuple(int(v) for v in value))


# z = [x, y] = x y x^-1 y^-1 in the standard generators of H3
_H3_Z = [1, 2, -1, -2]
_H3_Z_INV = [2, 1, -2, -1]


@dataclass(frozen=True)
class Heisenberg(Group):
    """Discrete Heisenberg group, (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')."""

    @property
    def descriptor(self):
        return "H3"

    @property
    def identity(self):
        return (0, 0, 0)

    def mul(self, x, y):
        return (x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1])

    def inv(self, x):
        return (-x[0], -x[1], -x[2] + x[0] * x[1])

    def is_element(self, x):
        return isinstance(x, tuple) and len(x) == 3 and all(isinstance(a, int) for a in x)

    def standard_generators(self):
        return ((1, 0, 0), (0, 1, 0))

    def standard_labels(self, prefix="x"):
        if prefix == "x":
            return ("x", "y")
        return super().standard_labels(prefix)

    def to_word(self, x):
        a, b, c = x
        word = [1 if a > 0 else -1] * abs(a) + [2 if b > 0 else -2] * abs(b)
        k = c - a * b
        word += (_H3_Z if k > 0 else _H3_Z_INV) * abs(k)
        return word

    def relators(self):
        return [[1] + _H3_Z + [-1] + _H3_Z_INV, [2] + _H3_Z + [-2] + _H3_Z_INV]

    def to_json(self, x):
        return list(x)

    def from_json(self, value):
        a, b, c = (int(v) for v in value)
        return (a, b, c)


@dataclass(frozen=True)
class DirectProduct(Group):
    factors: tuple

    def __post_init__(self):
        if len(self.factors) < 2:
            raise ValueError("a direct product needs at least two factors")

    @property
    def descriptor(self):
        return " x ".join(f.descriptor for f in self.factors)

    @property
    def is_abelian(self):
        return all(f.is_abelian for f in self.factors)

    @property
    def identity(self):
        return tuple(f.identity for f in self.factors)

    def mul(self, x, y):
        return tuple(f.mul(a, b) for f, a, b in zip(self.factors, x, y))

    def inv(self, x):
        return tuple(f.inv(a) for f, a in zip(self.factors, x))

    def is_element(self, x):
        return (
            isinstance(x, tuple)
            and len(x) == len(self.factors)
            and all(f.is_element(a) for f, a in zip(self.factors, x))
        )

    def _offsets(self):
        offsets, k = [], 0
        for f in self.factors:
            offsets.append(k)
            k += len(f.standard_generators())
        return offsets

    def standard_generators(self):
        gens = []
        for i, f in enumerate(self.factors):
            for g in f.standard_generators():
                e = list(self.identity)
                e[i] = g
                gens.append(tuple(e))
        return tuple(gens)

    def to_word(self, x):
        word = []
        for f, a, off in zip(self.factors, x, self._offsets()):
            word += [w + off if w > 0 else w - off for w in f.to_word(a)]
        return word

    def relators(self):
        offsets = self._offsets()
        rels = []
        for f, off in zip(self.factors, offsets):
            rels += [[w + off if w > 0 else w - off for w in r] for r in f.relators()]
        sizes = [len(f.standard_generators()) for f in self.factors]
        for i in range(len(self.factors)):
            for j in range(i + 1, len(self.factors)):
                for g in range(offsets[i] + 1, offsets[i] + sizes[i] + 1):
                    for h in range(offsets[j] + 1, offsets[j] + sizes[j] + 1):
                        rels.append([g, h, -g, -h])
        return rels

    def closed_form_norm(self, x):
        parts = [f.closed_form_norm(a) for f, a in zip(self.factors, x)]
        if any(p is None for p in parts):
            return None
        return sum(parts)

    def sort_key(self, x):
        return tuple(f.sort_key(a) for f, a in zip(self.factors, x))

    def to_json(self, x):
        return [f.to_json(a) for f, a in zip(self.factors, x)]

    def from_json(self, value):
        return tuple(f.from_json(v) for f, v in zip(self.factors, value))


@dataclass(frozen=True)
class GeneratingSet:
    """Ordered generators with unique labels.  Inverses are implicit."""

    elements: tuple
    labels: tuple

    def __post_init__(self):
        if len(self.elements) != len(self.labels):
            raise ValueError("one label per generator")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"generator labels must be unique: {self.labels}")

    def __len__(self):
        return len(self.elements)

    def index(self, label: str) -> int:
        """1-based index of ``label``."""
        return self.labels.index(label) + 1


def generating_set(group: Group, prefix: str = "x") -> GeneratingSet:
    """The standard generating set of a built-in group."""
    return GeneratingSet(tuple(group.standard_generators()), group.standard_labels(prefix))


def _is_standard(group, gens):
    return tuple(gens.elements) == tuple(group.standard_generators())


def letters(group: Group, gens: GeneratingSet) -> list:
    """Generators followed by their inverses, as group elements."""
    return list(gens.elements) + [group.inv(g) for g in gens.elements]


def parse_word(gens: GeneratingSet, tokens) -> list[int]:
    """Turn labels like ``t`` / ``t-`` (whitespace-separated string or list) into signed indices."""
    if isinstance(tokens, str):
        tokens = tokens.split()
    word = []
    for pos, tok in enumerate(tokens):
        if isinstance(tok, int) and not isinstance(tok, bool):
            word.append(tok)
            continue
        label, sign = (tok[:-1], -1) if tok.endswith("-") else (tok, 1)
        if label not in gens.labels:
            raise WordError(f"unknown token {tok!r} at position {pos}", position=pos, token=tok)
        word.append(sign * gens.index(label))
    return word


def multiply(group: Group, x, y):
    return group.mul(group.check(x), group.check(y))


def evaluate_word(group: Group, gens: GeneratingSet, word: Sequence[int]):
    result = group.identity
    n = len(gens)
    inverses = {}
    for pos, i in enumerate(word):
        if not isinstance(i, int) or i == 0 or abs(i) > n:
            raise WordError(f"generator index {i!r} out of range 1..{n}", position=pos, token=i)
        if i > 0:
            g = gens.elements[i - 1]
        else:
            g = inverses.get(i)
            if g is None:
                g = inverses[i] = group.inv(gens.elements[-i - 1])
        result = group.mul(result, g)
    return result


class CayleyBall:
    """Breadth-first ball around the identity that can be grown on demand.

    ``lengths`` maps every element found so far to its exact word length.
    Growth is by right multiplication with generators and their inverses.
    """

    def __init__(self, group: Group, gens: GeneratingSet, max_elements: int = DEFAULT_MAX_ELEMENTS):
        self.group = group
        self.gens = gens
        self.max_elements = max_elements
        self._moves = letters(group, gens)
        self.lengths = {group.identity: 0}
        self.frontier = [group.identity]
        self.radius = 0

    @property
    def complete(self) -> bool:
        """True once the whole (finite) group has been enumerated."""
        return not self.frontier

    def grow(self):
        mul = self.group.mul
        lengths = self.lengths
        r = self.radius + 1
        nxt = []
        for x in self.frontier:
            for g in self._moves:
                y = mul(x, g)
                if y not in lengths:
                    lengths[y] = r
                    nxt.append(y)
            if len(lengths) > self.max_elements:
                raise ResourceLimit(
                    f"ball of {self.group} exceeded {self.max_elements} elements",
                    self.radius,
                    len(lengths),
                    partial={k: v for k, v in lengths.items() if v <= self.radius},
                )
        self.frontier = nxt
        self.radius = r

    def extend_to(self, radius: int):
        while self.radius < radius and self.frontier:
            self.grow()
        return self

    def norm(self, x, cap: int):
        d = self.lengths.get(x)
        while d is None and self.radius < cap and self.frontier:
            self.grow()
            d = self.lengths.get(x)
        if d is None or d > cap:
            return Unreachable(cap)
        return d

    def snapshot(self, radius: int) -> dict:
        self.extend_to(radius)
        return {x: d for x, d in self.lengths.items() if d <= radius}


_balls: dict = {}


def cayley_ball(group: Group, gens: GeneratingSet | None = None) -> CayleyBall:
    """Shared, lazily grown ball for (group, gens)."""
    gens = gens or generating_set(group)
    key = (group, gens)
    b = _balls.get(key)
    if b is None:
        b = _balls[key] = CayleyBall(group, gens)
    return b


def ball(group: Group, gens: GeneratingSet, radius: int, max_elements: int = DEFAULT_MAX_ELEMENTS) -> dict:
    """All elements of word length <= radius mapped to their lengths.

    Memory is the practical limit: the default budget of two million elements
    corresponds to radius ~12 in Z2 wr Z, ~30 in H3, ~11 in F2.  Exceeding the
    budget raises :class:`ResourceLimit` carrying the completed inner ball.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    return CayleyBall(group, gens, max_elements).snapshot(radius)


def word_norm(group: Group, gens: GeneratingSet | None, x, cap: int):
    """Exact word length of x, or ``Unreachable(cap)`` if it exceeds cap."""
    if cap < 0:
        raise ValueError("cap must be nonnegative")
    gens = gens or generating_set(group)
    if _is_standard(group, gens):
        d = group.closed_form_norm(x)
        if d is not None:
            return d if d <= cap else Unreachable(cap)
    return cayley_ball(group, gens).norm(x, cap)


_FACTOR_RE = re.compile(r"^(?:Z\^(\d+)|Z/(\d+)|Z(\d+)|Z|F(\d+)|H3)$")


def parse_group(text: str) -> Group:
    """Parse ``Z``, ``Z^2``, ``Z/5`` (or ``Z5``), ``F2``, ``H3``, ``Z x Z/3``."""
    parts = [p.strip() for p in re.split(r"\s+x\s+|\s*×\s*", text.strip())]
    factors = []
    for part in parts:
        m = _FACTOR_RE.match(part)
        if not m:
            raise ValueError(f"unknown group descriptor {part!r}")
        rank, mod, mod2, free = m.groups()
        if part == "Z":
            factors.append(FreeAbelian(1))
        elif rank:
            factors.append(FreeAbelian(int(rank)))
        elif mod or mod2:
            factors.append(Cyclic(int(mod or mod2)))
        elif free:
            factors.append(FreeGroup(int(free)))
        else:
            factors.append(Heisenberg())
    return factors[0] if len(factors) == 1 else DirectProduct(tuple(factors))
