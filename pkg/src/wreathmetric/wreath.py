"""Restricted regular wreath products A wr B.

An element is a pair (f, b): a finitely supported map f from B to A and a
cursor b in B.  B acts on maps by left multiplication of positions,
``(b.f)(p) = f(b^-1 p)``, and

    (f1, b1)(f2, b2) = (f1 * b1.f2, b1 b2).

With this convention the conjugate b a b^-1 is supported at position b, so an
element is the product of its lamps ``b_i a_i b_i^-1`` (in any order) followed
by the cursor ``b_f``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GroupMismatchError, WordError
from .groups import GeneratingSet, Group, parse_group, parse_word


@dataclass(frozen=True)
class WreathElement:
    """``support`` is a canonically sorted tuple of (position, value) pairs with
    no identity values; ``cursor`` is the B-component."""

    support: tuple
    cursor: object

    @property
    def size(self) -> int:
        return len(self.support)

    def lamps(self) -> dict:
        return dict(self.support)


@dataclass(frozen=True)
class WreathProduct(Group):
    A: Group
    B: Group
    a_prefix: str = "a"
    b_prefix: str = "t"

    def __post_init__(self):
        if set(self.A.standard_labels(self.a_prefix)) & set(self.B.standard_labels(self.b_prefix)):
            raise ValueError("A and B generator labels collide")

    @property
    def descriptor(self):
        return f"{_paren(self.A)} wr {_paren(self.B)}"

    @property
    def is_abelian(self):
        return False

    @property
    def identity(self):
        return WreathElement((), self.B.identity)

    def element(self, lamps, cursor=None) -> WreathElement:
        """Build an element from a {position: value} mapping (or pairs), dropping trivial lamps."""
        if cursor is None:
            cursor = self.B.identity
        items = lamps.items() if isinstance(lamps, dict) else lamps
        e = self.A.identity
        key = self.B.sort_key
        support = tuple(sorted(((p, a) for p, a in items if a != e), key=lambda pa: key(pa[0])))
        if len({p for p, _ in support}) != len(support):
            raise ValueError("repeated position in support")
        return WreathElement(support, cursor)

    def _make(self, d, cursor):
        key = self.B.sort_key
        return WreathElement(tuple(sorted(d.items(), key=lambda pa: key(pa[0]))), cursor)

    def mul(self, x, y):
        A, B = self.A, self.B
        b1 = x.cursor
        if not y.support:
            return WreathElement(x.support, B.mul(b1, y.cursor))
        d = dict(x.support)
        e = A.identity
        for p, a in y.support:
            q = B.mul(b1, p)
            v = d.get(q)
            v = a if v is None else A.mul(v, a)
            if v == e:
                del d[q]
            else:
                d[q] = v
        return self._make(d, B.mul(b1, y.cursor))

    def inv(self, x):
        A, B = self.A, self.B
        binv = B.inv(x.cursor)
        return self._make({B.mul(binv, p): A.inv(a) for p, a in x.support}, binv)

    def is_element(self, x):
        if not isinstance(x, WreathElement) or not self.B.is_element(x.cursor):
            return False
        e = self.A.identity
        positions = [p for p, _ in x.support]
        return (
            all(self.B.is_element(p) and self.A.is_element(a) and a != e for p, a in x.support)
            and len(set(positions)) == len(positions)
            and list(x.support) == sorted(x.support, key=lambda pa: self.B.sort_key(pa[0]))
        )

    def a_generators(self):
        e = self.B.identity
        return tuple(WreathElement(((e, a),), e) for a in self.A.standard_generators())

    def b_generators(self):
        return tuple(WreathElement((), b) for b in self.B.standard_generators())

    def standard_generators(self):
        return self.a_generators() + self.b_generators()

    def standard_labels(self, prefix=None):
        return self.A.standard_labels(self.a_prefix) + self.B.standard_labels(self.b_prefix)

    def generating_set(self) -> GeneratingSet:
        return GeneratingSet(self.standard_generators(), self.standard_labels())

    def to_word(self, x):
        k = len(self.A.standard_generators())

        def shift(w):
            return [i + k if i > 0 else i - k for i in w]

        word = []
        for p, a in x.support:
            wp = shift(self.B.to_word(p))
            word += wp + self.A.to_word(a) + [-i for i in reversed(wp)]
        return word + shift(self.B.to_word(x.cursor))

    def sort_key(self, x):
        return (
            tuple((self.B.sort_key(p), self.A.sort_key(a)) for p, a in x.support),
            self.B.sort_key(x.cursor),
        )

    def to_json(self, x):
        return {
            "support": [[self.B.to_json(p), self.A.to_json(a)] for p, a in x.support],
            "cursor": self.B.to_json(x.cursor),
        }

    def from_json(self, value):
        pairs = [(self.B.from_json(p), self.A.from_json(a)) for p, a in value.get("support", [])]
        return self.element(pairs, self.B.from_json(value.get("cursor", self.B.to_json(self.B.identity))))


def _paren(g):
    return f"({g.descriptor})" if " " in g.descriptor else g.descriptor


def parse_wreath(text: str) -> WreathProduct:
    """``"Z2 wr Z"`` -> WreathProduct(Z/2, Z)."""
    parts = text.split(" wr ")
    if len(parts) != 2:
        raise ValueError(f"expected 'A wr B', got {text!r}")
    return WreathProduct(parse_group(parts[0].strip().strip("()")), parse_group(parts[1].strip().strip("()")))


def wreath_multiply(W: WreathProduct, x: WreathElement, y: WreathElement) -> WreathElement:
    if not (W.is_element(x) and W.is_element(y)):
        raise GroupMismatchError(f"operands are not elements of {W.descriptor}")
    return W.mul(x, y)


def wreath_inverse(W: WreathProduct, x: WreathElement) -> WreathElement:
    return W.inv(x)


def evaluate_lamplighter_word(W: WreathProduct, word) -> WreathElement:
    """Run the lamplighter: A-letters act on the lamp under the cursor, B-letters move the cursor.

    ``word`` is a token string (``"t t a t-"``), a list of labels, or signed
    indices into ``W.generating_set()`` (A generators first).
    """
    gens = W.generating_set()
    word = parse_word(gens, word)
    A, B = W.A, W.B
    a_gens = A.standard_generators()
    b_gens = B.standard_generators()
    k = len(a_gens)
    lamps = {}
    cursor = B.identity
    for pos, i in enumerate(word):
        if i == 0 or abs(i) > len(gens):
            raise WordError(f"generator index {i} out of range", position=pos, token=i)
        j = abs(i)
        if j <= k:
            g = a_gens[j - 1] if i > 0 else A.inv(a_gens[j - 1])
            lamps[cursor] = A.mul(lamps.get(cursor, A.identity), g)
        else:
            g = b_gens[j - k - 1] if i > 0 else B.inv(b_gens[j - k - 1])
            cursor = B.mul(cursor, g)
    return W.element(lamps, cursor)


def normal_form(W: WreathProduct, x: WreathElement):
    """``([(b_1, a_1), ...], b_f)`` with positions in canonical order."""
    return list(x.support), x.cursor


def from_normal_form(W: WreathProduct, pairs, cursor) -> WreathElement:
    """Multiply out prod b_i a_i b_i^-1 * b_f."""
    result = W.identity
    e = W.B.identity
    for b, a in pairs:
        conj = W.mul(W.mul(WreathElement((), b), WreathElement(((e, a),), e)), WreathElement((), W.B.inv(b)))
        result = W.mul(result, conj)
    return W.mul(result, WreathElement((), cursor))


def wreath_pow(W: WreathProduct, x: WreathElement, n: int) -> WreathElement:
    if n < 0:
        x, n = W.inv(x), -n
    result = W.identity
    for _ in range(n):
        result = W.mul(result, x)
    return result


def iter_powers(W: WreathProduct, x: WreathElement, n_max: int):
    """Yield (n, x^n) for n = 1..n_max."""
    y = W.identity
    for n in range(1, n_max + 1):
        y = W.mul(y, x)
        yield n, y
