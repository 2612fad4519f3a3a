import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from vfuzz.effects import Partial, Pow, StateKernel, SubDist, get_monad
from vfuzz.quantale import INF, get_quantale
from vfuzz.relators import (
    ConversiveMeet, HausdorffRelator, KernelRelator, PartialRelator, RelatorCfg, RelatorError,
    StateRelator, VRelation, WassersteinBotRelator, WassersteinRelator, lift_hausdorff,
    lift_hausdorff_sym, lift_partial, lift_state, lift_wasserstein, lift_wasserstein_bot,
    rel_compose, rel_dual, rel_id,
)
from vfuzz.transport import TransportError, brute_force_transport, check_certificate, solve_transport

LAW = get_quantale("lawvere")
UNIT = get_quantale("unit")
BOOL = get_quantale("bool")


def discrete(q):
    return VRelation(q, fn=lambda x, y: q.unit if x == y else q.bottom)


# -- relations

def test_identity_is_a_unit_for_composition():
    pts = "abc"
    alpha = VRelation(LAW, {("a", "b"): F(1, 2), ("b", "c"): F(1, 3)}, default=INF)
    comp = rel_compose(rel_id(LAW), alpha, pts)
    assert all(comp(x, y) == alpha(x, y) for x in pts for y in pts)
    assert rel_dual(alpha)("b", "a") == F(1, 2)


def test_boolean_composition_brute_force():
    pts = range(3)
    rng = random.Random(0)
    for _ in range(20):
        r = {(x, y) for x in pts for y in pts if rng.random() < 0.4}
        s = {(x, y) for x in pts for y in pts if rng.random() < 0.4}
        alpha = VRelation(BOOL, {p: True for p in r}, default=False)
        beta = VRelation(BOOL, {p: True for p in s}, default=False)
        comp = rel_compose(beta, alpha, pts)
        for x, z in itertools.product(pts, pts):
            assert comp(x, z) == any((x, y) in r and (y, z) in s for y in pts)


def test_lawvere_composition_on_a_chain():
    pts = [0, 1, 2]
    d = VRelation(LAW, fn=lambda x, y: F(abs(x - y), 3))
    comp = rel_compose(d, d, pts)
    for x, z in itertools.product(pts, pts):
        assert comp(x, z) == min(d(x, y) + d(y, z) for y in pts)


# -- lifting examples

def test_partial_lifting():
    a = VRelation(LAW, fn=lambda x, y: F(1, 4))
    lp = lift_partial(a)
    assert lp(Partial(), Partial("w")) == 0
    assert lp(Partial("v"), Partial()) == INF
    assert lp(Partial("v"), Partial("w")) == F(1, 4)


def test_hausdorff_lifting():
    a = VRelation(LAW, fn=lambda x, y: 0 if x == y else F(1, 3))
    h = lift_hausdorff(a)
    assert h(Pow(), Pow({"y"})) == 0
    assert h(Pow({"x"}), Pow()) == INF
    assert lift_hausdorff_sym(a)(Pow({"x"}), Pow({"x", "y"})) == F(1, 3)
    assert h(Pow({"x"}), Pow({"x", "y"})) == 0


def test_wasserstein_liftings():
    disc = discrete(UNIT)
    wb = lift_wasserstein_bot(disc)
    assert wb(SubDist(), SubDist({"v": F(1, 3)})) == 0
    assert wb(SubDist({"v": 1}), SubDist({"v": F(1, 2)})) == F(1, 2)
    mu = SubDist({"a": F(1, 3), "b": F(2, 3)})
    assert lift_wasserstein(disc)(mu, mu) == 0
    cost = VRelation(UNIT, {("x", "y1"): 0, ("x", "y2"): 1}, default=1)
    assert lift_wasserstein(cost)(SubDist({"x": 1}), SubDist({"y1": F(1, 2), "y2": F(1, 2)})) == F(1, 2)
    with pytest.raises(RelatorError):
        WassersteinRelator(LAW)


def test_state_lifting():
    S = get_monad("state", ("l",))
    disc = discrete(UNIT)
    m = S.unit("v")
    assert lift_state(disc, S.states)(m, m) == 0
    written = S.op("set1", "l", [S.unit("v")])
    assert lift_state(disc, S.states)(m, written) == 1
    near = VRelation(UNIT, fn=lambda x, y: 0 if x == y else F(1, 3))
    k1 = StateKernel({b: SubDist({(b, "v"): 1}) for b in S.states})
    k2 = StateKernel({b: SubDist({(b, "v" if b == (0,) else "w"): 1}) for b in S.states})
    assert lift_state(near, S.states)(k1, k2) == F(1, 3)


def test_kernel_relators():
    P = KernelRelator(PartialRelator(LAW))
    assert P.lift(lambda x, y: False, Partial(), Partial("w")) is True
    H = KernelRelator(HausdorffRelator(LAW))
    rel = {("a", "x"), ("b", "y")}
    assert H.lift(lambda x, y: (x, y) in rel, Pow({"a", "b"}), Pow({"x", "y"})) is True
    assert H.lift(lambda x, y: (x, y) in rel, Pow({"a", "c"}), Pow({"x", "y"})) is False
    W = KernelRelator(WassersteinBotRelator(UNIT))
    for x, y in [("a", "x"), ("a", "y")]:
        assert W.lift(lambda u, v: (u, v) in rel, SubDist({x: 1}), SubDist({y: 1})) == ((x, y) in rel)


def test_relator_config():
    assert isinstance(RelatorCfg("auto").make("unit", "dist"), WassersteinBotRelator)
    assert isinstance(RelatorCfg("wasserstein").make("unit", "dist"), WassersteinBotRelator)
    assert isinstance(RelatorCfg("wasserstein_full").make("unit", "dist"), WassersteinRelator)
    assert isinstance(RelatorCfg("hausdorff_sym").make("lawvere", "powerset"), ConversiveMeet)
    assert isinstance(RelatorCfg("auto").make("unit", "state", [(0,), (1,)]), StateRelator)
    with pytest.raises(RelatorError):
        RelatorCfg("hausdorff").make("lawvere", "dist")
    with pytest.raises(RelatorError):
        RelatorCfg("bogus").make("lawvere", "dist")


# -- transport

weights = st.lists(st.integers(1, 6), min_size=1, max_size=4)


@st.composite
def problems(draw):
    a, b = draw(weights), draw(weights)
    sa, sb = sum(a), sum(b)
    supply = [F(x, sa) for x in a]
    demand = [F(x, sb) for x in b]
    cost = [[F(draw(st.integers(0, 8)), draw(st.sampled_from([1, 2, 3]))) for _ in b] for _ in a]
    return supply, demand, cost


@given(problems())
def test_transport_duality_and_oracle(p):
    supply, demand, cost = p
    res = solve_transport(supply, demand, cost)
    assert check_certificate(supply, demand, cost, res)
    assert res.cost == res.dual_value(supply, demand)
    assert res.cost == brute_force_transport(supply, demand, cost)


def test_transport_examples():
    assert solve_transport([1], [1], [[F(2, 5)]]).cost == F(2, 5)
    same = [F(1, 3), F(2, 3)]
    disc = [[0, 1], [1, 0]]
    assert solve_transport(same, same, disc).cost == 0
    assert solve_transport([1], [F(1, 2), F(1, 2)], [[0, 1]]).cost == F(1, 2)
    with pytest.raises(TransportError):
        solve_transport([1], [F(1, 2)], [[0]])
