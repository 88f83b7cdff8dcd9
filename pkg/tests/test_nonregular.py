import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wreathmetric.errors import ActionError, DifferentOrbits
from wreathmetric.groups import Cyclic, FreeAbelian, ball, evaluate_word
from wreathmetric.metric import engine
from wreathmetric.nonregular import (
    CycleSpec,
    LineSpec,
    NonregularWreath,
    OmegaAction,
    PermSpec,
    RegularSpec,
    bfs_nonregular_norm,
    compute_orbits,
    evaluate_nonregular_word,
    nonregular_metric,
    parse_action,
    schreier_distance,
)
from wreathmetric.wreath import WreathProduct

Z = FreeAbelian(1)


def nw(*components, A=Cyclic(2), base=Z):
    return NonregularWreath(A, OmegaAction(base, tuple(components)))


def test_orbits_of_mixed_action():
    act = parse_action({"base": "Z", "omega": [{"type": "cycle", "size": 3}, {"type": "line", "shifts": [2]}]})
    orbits = compute_orbits(act)
    assert [b for b, _ in orbits] == [(0, 0), (1, 0), (1, 1)]
    assert orbits[0][1] == frozenset({(0, 0), (0, 1), (0, 2)})
    assert orbits[1][1] is None
    assert act.omega == 3
    assert act.orbit_of((1, 7)) == 2


def test_perm_orbits_and_distances():
    act = OmegaAction(Z, (PermSpec(((1, 2, 0, 4, 3),)),))
    assert act.omega == 2
    assert schreier_distance(act, (0, 0), (0, 2)) == 1
    assert schreier_distance(act, (0, 3), (0, 4)) == 1
    with pytest.raises(DifferentOrbits):
        schreier_distance(act, (0, 0), (0, 3))


def test_cycle_distance_wraps():
    act = OmegaAction(Z, (CycleSpec(7),))
    assert act.schreier_distance((0, 0), (0, 5)) == 2
    assert act.schreier_distance((0, 1), (0, 4)) == 3


def test_action_validation():
    with pytest.raises(ActionError):
        PermSpec(((0, 0, 1),))
    with pytest.raises(ActionError):
        OmegaAction(FreeAbelian(2), (CycleSpec(3, (1,)),))
    # the two generators of Z^2 must commute on Omega
    bad = {"base": "Z^2", "omega": [{"type": "perm", "perms": [[1, 0, 2], [0, 2, 1]]}]}
    with pytest.raises(ActionError):
        parse_action(bad)
    with pytest.raises(ActionError):
        parse_action({"base": "Z", "omega": [{"type": "torus"}]})


def test_action_json_round_trip():
    spec = {"base": "Z^2", "omega": [{"type": "cycle", "size": 4, "shifts": [1, 2]}, {"type": "regular"}]}
    act = parse_action(spec)
    assert act.to_json() == spec
    assert parse_action(act.to_json()) == act


def test_regular_component_reproduces_regular_wreath():
    NW = nw(RegularSpec())
    W = WreathProduct(Cyclic(2), Z)
    word = [1, 2, 1, 2, 2, 1, -2]
    x = evaluate_word(NW, NW.generating_set(), word)
    y = evaluate_word(W, W.generating_set(), word)
    assert x.cursor == y.cursor
    assert {p[1]: a for p, a in x.support} == y.lamps()
    m = nonregular_metric(NW)
    for z, d in ball(NW, NW.generating_set(), 6).items():
        w = W.element({p[1]: a for p, a in z.support}, z.cursor)
        assert engine(W).exact_norm(w) == d
        assert m.estimate(z) == engine(W).parts(w).variant(6)


def test_word_tokens():
    NW = nw(CycleSpec(3), CycleSpec(2))
    x = evaluate_nonregular_word(NW, "t a@0 t a@1 t")
    assert x.lamps() == {(0, 1): 1, (1, 0): 1}
    assert x.cursor == 3


@pytest.mark.parametrize(
    "NW",
    [
        nw(CycleSpec(3), CycleSpec(2)),
        nw(LineSpec((2,)), PermSpec(((1, 2, 0),))),
        nw(CycleSpec(4, (1, 2)), RegularSpec(), A=Z, base=FreeAbelian(2)),
    ],
)
def test_group_axioms_and_words(NW):
    gens = NW.generating_set()
    letters = st.lists(st.sampled_from([i for i in range(1, len(gens) + 1)] + [-i for i in range(1, len(gens) + 1)]), max_size=10)
    s = letters.map(lambda w: evaluate_word(NW, gens, w))

    @settings(max_examples=50, deadline=None)
    @given(s, s, s)
    def check(x, y, z):
        assert NW.mul(NW.mul(x, y), z) == NW.mul(x, NW.mul(y, z))
        assert NW.mul(x, NW.inv(x)) == NW.identity
        assert NW.is_element(x)
        assert evaluate_word(NW, gens, NW.to_word(x)) == x
        assert NW.from_json(NW.to_json(x)) == x

    check()


def test_estimate_examples():
    NW = nw(CycleSpec(3))
    m = nonregular_metric(NW)
    one = NW.element({(0, 1): 1})
    assert m.estimate(one) == 2
    assert bfs_nonregular_norm(NW, one, 10) == 3
    assert m.walk_bound(one) == 3


@pytest.mark.parametrize("NW", [nw(CycleSpec(3)), nw(CycleSpec(3), CycleSpec(2)), nw(LineSpec(), CycleSpec(4))])
def test_estimate_lower_bound_and_walk_bound(NW):
    # E <= (omega + 1) |x| and |x| <= sum |a| + 2 sum mu_j + |b_f|
    m = nonregular_metric(NW)
    omega = NW.action.omega
    for x, d in ball(NW, NW.generating_set(), 6).items():
        assert m.estimate(x) <= (omega + 1) * d
        assert d <= m.walk_bound(x)


def test_lipschitz_on_two_orbits():
    NW = nw(CycleSpec(3), CycleSpec(2))
    m = nonregular_metric(NW)
    for x in ball(NW, NW.generating_set(), 4):
        ex = m.estimate(x)
        for g in NW.standard_generators():
            assert abs(m.estimate(NW.mul(x, g)) - ex) <= NW.action.omega + 1
