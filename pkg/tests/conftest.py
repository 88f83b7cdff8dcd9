import itertools
import sys

import pytest
from hypothesis import strategies as st

from wreathmetric.groups import Cyclic, DirectProduct, FreeAbelian, FreeGroup, Heisenberg, _free_reduce
from wreathmetric.wreath import WreathProduct, parse_wreath

GROUPS = {
    "Z": FreeAbelian(1),
    "Z^2": FreeAbelian(2),
    "Z/5": Cyclic(5),
    "F2": FreeGroup(2),
    "H3": Heisenberg(),
    "Z x Z/3": DirectProduct((FreeAbelian(1), Cyclic(3))),
}

small = st.integers(-6, 6)


def elements(G):
    """Hypothesis strategy for elements of a built-in group."""
    if isinstance(G, FreeAbelian):
        return small if G.rank == 1 else st.tuples(*[small] * G.rank)
    if isinstance(G, Cyclic):
        return st.integers(0, G.n - 1)
    if isinstance(G, FreeGroup):
        letters = st.sampled_from([i for i in range(1, G.rank + 1)] + [-i for i in range(1, G.rank + 1)])
        return st.lists(letters, max_size=8).map(lambda w: _free_reduce(tuple(w)))
    if isinstance(G, Heisenberg):
        return st.tuples(small, small, st.integers(-20, 20))
    if isinstance(G, DirectProduct):
        return st.tuples(*[elements(f) for f in G.factors])
    if isinstance(G, WreathProduct):
        return st.builds(
            lambda lamps, c: G.element(lamps, c),
            st.dictionaries(elements(G.B), elements(G.A), max_size=5),
            elements(G.B),
        )
    raise TypeError(G)


WREATHS = {
    "Z2 wr Z": parse_wreath("Z2 wr Z"),
    "Z wr Z^2": WreathProduct(FreeAbelian(1), FreeAbelian(2)),
    "Z/3 wr F2": WreathProduct(Cyclic(3), FreeGroup(2)),
    "F2 wr H3": WreathProduct(FreeGroup(2), Heisenberg()),
}


@pytest.fixture(scope="session")
def lamplighter():
    return parse_wreath("Z2 wr Z")


@pytest.fixture(scope="session")
def section1_element(lamplighter):
    from wreathmetric.wreath import evaluate_lamplighter_word

    return evaluate_lamplighter_word(lamplighter, "t t a t a t- t- t- t- a t- t- a t")


def all_words(n_letters, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(range(n_letters), repeat=n)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
