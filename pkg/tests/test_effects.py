import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from vfuzz.effects import (
    MAX_LOCATIONS, EffectError, Partial, Pow, StateKernel, SubDist, get_monad, op_interp,
    order_leq, strong_kleisli, unit,
)

V, W = "v", "w"


def test_units():
    assert unit(get_monad("dist"), V) == SubDist({V: 1})
    assert unit(get_monad("powerset"), V) == Pow({V})
    assert unit(get_monad("partial"), V) == Partial(V)


def test_bind_examples():
    D = get_monad("dist")
    out = strong_kleisli(D, lambda x: SubDist({W: F(1, 2)}), SubDist({V: F(1, 2)}))
    assert out == SubDist({W: F(1, 4)}) and 1 - out.mass == F(3, 4)
    P = get_monad("partial")
    assert strong_kleisli(P, lambda x: Partial(W), Partial()) == Partial()
    for name, m in [("dist", SubDist({V: F(1, 3), W: F(1, 2)})), ("powerset", Pow({V, W})),
                    ("partial", Partial(V))]:
        M = get_monad(name)
        assert strong_kleisli(M, M.unit, m) == m


def test_operations():
    D = get_monad("dist")
    assert op_interp(D, "op+", [SubDist({V: 1}), SubDist()], F(1, 2)) == SubDist({V: F(1, 2)})
    assert op_interp(get_monad("powerset"), "op+", [Pow({V}), Pow({W})]) == Pow({V, W})
    S = get_monad("state", ("l",))
    first, second = S.unit(V), S.unit(W)
    routed = S.op("set0", "l", [S.op("get", "l", [first, second])])
    for b in S.states:
        assert routed(b) == SubDist({((0,), V): 1})
    with pytest.raises(EffectError):
        D.op("get", "l", [D.unit(V), D.unit(W)])


def test_orders():
    D = get_monad("dist")
    assert order_leq(D, SubDist(), SubDist({V: F(1, 2)}))
    assert not order_leq(get_monad("partial"), Partial(V), Partial(W))
    assert order_leq(get_monad("powerset"), Pow({V}), Pow({V, W}))
    assert D.lub([SubDist(), SubDist({V: F(1, 2)})]) == SubDist({V: F(1, 2)})
    with pytest.raises(EffectError):
        D.lub([SubDist({V: 1}), SubDist()])


def test_representation_invariants():
    with pytest.raises(EffectError):
        SubDist({V: F(2, 3), W: F(2, 3)})
    with pytest.raises(EffectError):
        SubDist({V: -1})
    assert SubDist({V: 0}).support() == []
    with pytest.raises(EffectError):
        get_monad("state", [f"l{i}" for i in range(MAX_LOCATIONS + 1)])
    S = get_monad("state", ("a", "b"))
    assert len(S.states) == 4
    assert isinstance(S.bottom(), StateKernel)


atoms = st.sampled_from("abcd")
probs = st.fractions(min_value=0, max_value=1, max_denominator=8)


@st.composite
def subdists(draw):
    xs = draw(st.lists(atoms, max_size=3, unique=True))
    out, left = {}, F(1)
    for x in xs:
        p = min(draw(probs), left)
        out[x] = p
        left -= p
    return SubDist(out)


@st.composite
def kleisli(draw):
    table = {x: draw(subdists()) for x in "abcd"}
    return lambda x: table[x]


@given(subdists(), kleisli(), kleisli())
def test_dist_monad_laws(m, f, g):
    D = get_monad("dist")
    assert D.bind(f, D.unit("a")) == f("a")
    assert D.bind(D.unit, m) == m
    assert D.bind(g, D.bind(f, m)) == D.bind(lambda x: D.bind(g, f(x)), m)
    assert D.bind(f, m).mass <= m.mass


@given(subdists(), subdists(), kleisli(), probs)
def test_bind_is_algebraic_and_monotone(m, n, f, p):
    D = get_monad("dist")
    assert D.bind(f, D.op("op+", p, [m, n])) == D.op("op+", p, [D.bind(f, m), D.bind(f, n)])
    smaller = SubDist({x: q / 2 for x, q in m.items()})
    assert D.leq(D.bind(f, smaller), D.bind(f, m))


def test_state_monad_laws_on_samples():
    rng = random.Random(0)
    S = get_monad("state", ("l",))

    def rand_kernel():
        out = {}
        for b in S.states:
            xs = rng.sample("ab", rng.randint(0, 2))
            w = {((rng.randint(0, 1),), x): F(1, len(xs) + 1) for x in xs}
            out[b] = SubDist(w)
        return StateKernel(out)

    for _ in range(50):
        m = rand_kernel()
        fa, fb = rand_kernel(), rand_kernel()
        f = {"a": fa, "b": fb}.get
        assert S.bind(S.unit, m) == m
        assert S.bind(f, S.unit("a")) == fa
        g = {"a": rand_kernel(), "b": rand_kernel()}.get
        assert S.bind(g, S.bind(f, m)) == S.bind(lambda x: S.bind(g, f(x)), m)
