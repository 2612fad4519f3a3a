from fractions import Fraction as F
import itertools

import pytest
from hypothesis import given, strategies as st

from vfuzz.quantale import (
    INF, Cbe, QuantaleError, bottom_of, cbe_apply, cbe_compose, cbe_leq, cbe_meet, cbe_op,
    cbe_tensor, choice_op, elem, format_scalar, get_quantale, join, leq, meet, phi, psi,
    quantale_names, residual, tensor, unit_of,
)

fracs = st.fractions(min_value=0, max_value=5, max_denominator=12)
lawvere_vals = st.one_of(fracs, st.just(INF))
unit_vals = st.fractions(min_value=0, max_value=1, max_denominator=12)
scalars = st.one_of(st.fractions(min_value=0, max_value=4, max_denominator=6), st.just(INF))


def L(x):
    return elem("lawvere", x)


def U(x):
    return elem("unit", x)


# -- examples

def test_lawvere_tensor_is_extended_addition():
    assert tensor(L(F(1, 2)), L(F(1, 3))).value == F(5, 6)
    assert tensor(L(F(2, 7)), unit_of("lawvere")).value == F(2, 7)


def test_unit_interval_tensor_truncates():
    assert tensor(U(F(3, 4)), U(F(1, 2))).value == 1


def test_joins_and_meets():
    assert join([L(F(1, 2)), L(F(1, 3))]).value == F(1, 3)
    assert meet([], "lawvere").value == 0
    assert join([elem("bool", False)]).value is False
    assert join([], "lawvere").value == INF


def test_residual_examples():
    assert residual(L(F(1, 3)), L(F(1, 2))).value == F(1, 6)
    assert residual(L(F(1, 2)), L(F(1, 3))).value == 0
    assert residual(elem("bool", True), elem("bool", False)).value is False


def test_bool_residual_adjunction_brute_force():
    for a, b, c in itertools.product((False, True), repeat=3):
        lhs = leq(tensor(elem("bool", a), elem("bool", b)), elem("bool", c))
        rhs = leq(elem("bool", b), residual(elem("bool", a), elem("bool", c)))
        assert lhs == rhs


def test_cbe_apply_examples():
    assert cbe_apply(Cbe(2), L(F(1, 4))).value == F(1, 2)
    assert cbe_apply(Cbe(INF), L(F(1, 4))).value == INF
    for name in quantale_names():
        q = get_quantale(name)
        for a in ([True, False] if name == "bool" else [F(0), F(1, 3), F(1)]):
            assert cbe_apply(Cbe(0), elem(name, a)).value == q.unit


def test_cbe_algebra_examples():
    assert cbe_meet(Cbe(0), Cbe(1)) == Cbe(1)
    assert cbe_compose(Cbe(2), Cbe(3)) == Cbe(6)
    assert cbe_tensor(Cbe(2), Cbe(INF)) == Cbe(INF)
    assert cbe_op(choice_op(F(1, 2)), [Cbe(2), Cbe(4)]) == Cbe(3)
    assert cbe_leq(Cbe(3), Cbe(1)) and not cbe_leq(Cbe(1), Cbe(3))


@given(unit_vals)
def test_cbe_op_pointwise(a):
    # (p s1 + (1-p) s2) a is the p-mixture of s1 a and s2 a before truncation
    p = F(1, 2)
    s = cbe_op(choice_op(p), [Cbe(2), Cbe(4)])
    assert cbe_apply(s, L(a)).value == p * 2 * a + (1 - p) * 4 * a


def test_kernel_maps():
    assert phi(L(0)) is True
    assert phi(L(F(1, 2))) is False
    assert psi(False, "lawvere").value == INF
    assert psi(True, "unit").value == 0


def test_bool_scalar_action():
    assert cbe_apply(Cbe(INF), elem("bool", False)).value is False
    assert cbe_apply(Cbe(INF), elem("bool", True)).value is True
    assert cbe_apply(Cbe(3), elem("bool", False)).value is False


def test_format_scalar():
    assert format_scalar(F(1, 2)) == "1/2"
    assert format_scalar(INF) == "inf"
    assert format_scalar(F(4)) == "4"


def test_errors():
    with pytest.raises(QuantaleError):
        get_quantale("nope")
    with pytest.raises(QuantaleError):
        U(F(3, 2))
    with pytest.raises(QuantaleError):
        tensor(L(1), U(1))
    with pytest.raises(QuantaleError):
        meet([])


# -- properties

@given(lawvere_vals, lawvere_vals, lawvere_vals)
def test_lawvere_monoid_and_residuation(a, b, c):
    a, b, c = L(a), L(b), L(c)
    assert tensor(a, b) == tensor(b, a)
    assert tensor(tensor(a, b), c) == tensor(a, tensor(b, c))
    assert leq(tensor(a, b), c) == leq(b, residual(a, c))
    assert leq(tensor(a, b), meet([a, b]))


@given(unit_vals, unit_vals, unit_vals)
def test_unit_interval_distributive(a, b, c):
    a, b, c = U(a), U(b), U(c)
    assert tensor(a, join([b, c])) == join([tensor(a, b), tensor(a, c)])
    assert leq(tensor(a, b), c) == leq(b, residual(a, c))


@given(scalars, lawvere_vals, lawvere_vals)
def test_cbe_monotone_and_lax(s, a, b):
    s = Cbe(s)
    a, b = L(a), L(b)
    if leq(a, b):
        assert leq(cbe_apply(s, a), cbe_apply(s, b))
    assert leq(unit_of("lawvere"), cbe_apply(s, unit_of("lawvere")))
    assert leq(tensor(cbe_apply(s, a), cbe_apply(s, b)), cbe_apply(s, tensor(a, b)))


@given(st.fractions(min_value=0, max_value=4, max_denominator=6), lawvere_vals, lawvere_vals)
def test_finite_cbe_preserves_binary_join(s, a, b):
    s = Cbe(s)
    assert cbe_apply(s, join([L(a), L(b)])) == join([cbe_apply(s, L(a)), cbe_apply(s, L(b))])


@given(unit_vals, unit_vals)
def test_choice_is_a_sigma_operation(a, b):
    op = choice_op(F(1, 3))
    out = op.eval([U(a), U(b)])
    assert out.value == F(1, 3) * a + F(2, 3) * b
    assert bottom_of("unit").value == 1
