import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from vfuzz.fuzz import BOOL2, Fuzzer
from vfuzz.parser import ParseError, parse, parse_term, parse_type, parse_value
from vfuzz.printer import show
from vfuzz.quantale import INF, Cbe
from vfuzz.syntax import (
    NAT, NAT_BODY, UNIT, ZERO, App, Bang, BangV, Case, CaseBang, CaseFold, Fold, Inj, Lam,
    Let, Lolli, Mu, Op, Return, Sum, SyntaxError_, TVar, Var, as_numeral, derived, free_vars,
    identity, numeral, subst_term, term_I, term_Omega,
)
from vfuzz.typecheck import infer


# -- an independent de Bruijn oracle for substitution

def db(n, env=()):
    """Nameless form: bound variables become indices, free ones keep names."""
    if isinstance(n, Var):
        return ("bv", env.index(n.name)) if n.name in env else ("fv", n.name)
    if isinstance(n, Lam):
        return ("lam", n.ty, db(n.body, (n.var,) + env))
    if isinstance(n, Inj):
        return ("inj", n.index, n.ty, db(n.value, env))
    if isinstance(n, Fold):
        return ("fold", n.ty, db(n.value, env))
    if isinstance(n, BangV):
        return ("bang", db(n.value, env))
    if isinstance(n, Return):
        return ("ret", db(n.value, env))
    if isinstance(n, App):
        return ("app", db(n.fn, env), db(n.arg, env))
    if isinstance(n, Case):
        return ("case", db(n.scrut, env),
                tuple(db(b, (x,) + env) for x, b in n.branches))
    if isinstance(n, Let):
        return ("let", db(n.bound, env), db(n.body, (n.var,) + env))
    if isinstance(n, CaseBang):
        return ("case!", db(n.scrut, env), db(n.body, (n.var,) + env))
    if isinstance(n, CaseFold):
        return ("casefold", db(n.scrut, env), db(n.body, (n.var,) + env))
    if isinstance(n, Op):
        return ("op", n.symbol, n.param, tuple(db(a, env) for a in n.args))
    raise TypeError(n)


def db_subst(t, x, u):
    if t == ("fv", x):
        return u
    if isinstance(t, tuple):
        return tuple(db_subst(c, x, u) for c in t)
    return t


def test_subst_examples():
    v = numeral(2)
    assert subst_term(Return(Var("x")), "x", v) == Return(v)
    assert subst_term(Return(Var("y")), "x", v) == Return(Var("y"))
    e = App(Lam("y", NAT, Return(Var("x"))), Var("w"))
    assert subst_term(e, "x", v) == App(Lam("y", NAT, Return(v)), Var("w"))
    assert db(subst_term(e, "x", v)) == db_subst(db(e), "x", db(v))


def _fuzzed(seed, n, scope):
    fz = Fuzzer(random.Random(seed), "dist")
    return [fz.term(NAT, 3, scope) for _ in range(n)]


def test_subst_matches_de_bruijn_oracle():
    # the substituent mentions x1, a name the fuzzer also uses for binders
    u = Fold(NAT, Inj(2, NAT_BODY, Var("x1")))
    for e in _fuzzed(7, 400, {"x": NAT, "y": NAT}):
        assert db(subst_term(e, "x", u)) == db_subst(db(e), "x", db(u))


def test_free_variable_accounting():
    for e in _fuzzed(8, 300, {"x": NAT, "y": NAT}):
        assert free_vars(subst_term(e, "x", numeral(1))) == free_vars(e) - {"x"}


def test_substitutions_commute_on_distinct_variables():
    a, b = numeral(1), numeral(3)
    for e in _fuzzed(9, 300, {"x": NAT, "y": NAT}):
        one = subst_term(subst_term(e, "x", a), "y", b)
        two = subst_term(subst_term(e, "y", b), "x", a)
        assert one == two


def test_alpha_equivalence():
    assert Lam("a", NAT, Return(Var("a"))) == Lam("b", NAT, Return(Var("b")))
    assert Lam("a", NAT, Return(Var("c"))) == Lam("b", NAT, Return(Var("c")))
    assert Lam("a", NAT, Return(Var("a"))) != Lam("a", NAT, Return(Var("c")))
    assert Mu("s", Sum((UNIT, TVar("s")))) == NAT


# -- derived forms

def test_numerals_encode_nat():
    z = numeral(0)
    assert isinstance(z, Fold) and isinstance(z.value, Inj) and z.value.index == 1
    for k in range(5):
        assert infer(numeral(k))[0] == NAT
        assert as_numeral(numeral(k)) == k


@pytest.mark.parametrize("ty", [UNIT, NAT, BOOL2, Lolli(NAT, NAT), Bang(Cbe(2), NAT), ZERO])
def test_I_and_Omega_are_well_typed(ty):
    assert infer(term_I(ty))[0] == Lolli(ty, ty)
    assert infer(term_Omega(ty))[0] == ty
    assert derived("I", ty) == term_I(ty)
    assert derived("Omega", ty) == term_Omega(ty)


def test_derived_names():
    assert derived("nat") == NAT
    assert derived("zero-type") == ZERO
    assert derived("unit-type") == Lolli(ZERO, ZERO)
    assert derived("numeral", 3) == numeral(3)
    with pytest.raises(SyntaxError_):
        derived("K")


# -- parser

def test_parse_identity_computation():
    e = parse("return (\\x:unit. return x)")
    assert e == term_I(UNIT)
    assert infer(e)[0] == Lolli(UNIT, UNIT)


def test_parse_choice_example():
    e = parse("let x = op+[1/2](return !0, return !1) in return x")
    assert isinstance(e, Let) and isinstance(e.bound, Op)
    assert e.bound.symbol == "op+" and e.bound.param == F(1, 2)
    assert e.bound.args[0] == Return(BangV(numeral(0)))


def test_parse_sugar_and_types():
    assert parse_term("Omega[nat]") == term_Omega(NAT)
    assert parse_term("I[nat]") == term_I(NAT)
    assert parse_type("!_1/2 nat -o sum{unit, 0}") == Lolli(Bang(Cbe(F(1, 2)), NAT), Sum((UNIT, ZERO)))
    assert parse_type("mu t. sum{unit, t}") == NAT
    assert parse_value("inj_2[sum{unit,nat}] 3") == Inj(2, Sum((UNIT, NAT)), numeral(3))
    assert parse_value("!_inf *") == BangV(identity(ZERO), Cbe(INF))


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as err:
        parse("return\n  (\\x:unit. )")
    assert err.value.line == 2
    with pytest.raises(ParseError):
        parse_value("inj_3[sum{unit,unit}] *")
    with pytest.raises(ParseError):
        parse_term("op+[3/2](return 0, return 1)")
    with pytest.raises(ParseError):
        parse_term("get(return 0, return 1)")


@pytest.mark.parametrize("monad", ["dist", "powerset", "state"])
def test_print_parse_round_trip(monad):
    fz = Fuzzer(random.Random(monad), monad)
    for _ in range(350):
        ty = fz.rng.choice([NAT, BOOL2, Lolli(NAT, NAT), Bang(Cbe(2), NAT)])
        e = fz.term(ty, 3, {"v": NAT, "f": Lolli(NAT, NAT)})
        assert parse(show(e)) == e, show(e)


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_values(seed):
    fz = Fuzzer(random.Random(seed), "dist")
    for ty in (NAT, Lolli(NAT, BOOL2), Sum((UNIT, NAT, BOOL2))):
        v = fz.value(ty, 3, {})
        assert parse(show(v)) == v
