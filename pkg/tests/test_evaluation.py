import random
from dataclasses import replace
from fractions import Fraction as F

import pytest

from vfuzz.effects import Partial, SubDist
from vfuzz.evaluation import EvalError, Evaluator, eval_n, evaluate
from vfuzz.fuzz import FIRST_ORDER, Fuzzer
from vfuzz.parser import parse_term
from vfuzz.syntax import (
    NAT, UNIT, App, BangV, Case, CaseBang, CaseFold, Fold, Inj, Let, Return, identity,
    numeral, subst_term, term_Omega,
)
from vfuzz.typecheck import infer


def test_return_and_omega():
    v = numeral(2)
    for n in range(1, 6):
        assert eval_n(Return(v), n) == SubDist({v: 1})
        assert eval_n(term_Omega(NAT), n) == SubDist()
    assert eval_n(Return(v), 0) == SubDist()


def test_I_plus_Omega():
    e = parse_term("op+[1/2](I[unit], Omega[unit -o unit])")
    assert eval_n(e, 3) == SubDist({identity(UNIT): F(1, 2)})


def test_stabilization():
    r = evaluate(Return(numeral(1)), 8)
    assert r.value == SubDist({numeral(1): 1}) and r.stabilized
    r = evaluate(term_Omega(NAT), 50)
    assert r.value == SubDist() and not r.stabilized
    pred = parse_term("casefold 3 of fold z -> case z of {inj_1 u -> return 0; inj_2 p -> return p}")
    r = evaluate(pred, 8)
    assert r.stabilized and r.value == SubDist({numeral(2): 1})


def test_errors():
    with pytest.raises(EvalError) as err:
        eval_n(parse_term("return x"), 3)
    assert err.value.code == "open"
    with pytest.raises(EvalError):
        Evaluator().eval_n(numeral(0), 3)


# -- an independent small-step interpreter for the partiality monad

def small_step(e, fuel):
    """Run a deterministic machine; ``None`` if no value within ``fuel`` steps."""
    stack = []
    for _ in range(fuel):
        if isinstance(e, Return):
            if not stack:
                return e.value
            x, body = stack.pop()
            e = subst_term(body, x, e.value)
        elif isinstance(e, Let):
            stack.append((e.var, e.body))
            e = e.bound
        elif isinstance(e, App):
            e = subst_term(e.fn.body, e.fn.var, e.arg)
        elif isinstance(e, Case):
            x, body = e.branches[e.scrut.index - 1]
            e = subst_term(body, x, e.scrut.value)
        elif isinstance(e, (CaseFold, CaseBang)):
            e = subst_term(e.body, e.var, e.scrut.value)
        else:
            raise AssertionError(f"unexpected {e}")
    return None


def _programs(monad, n, seed):
    fz = Fuzzer(random.Random(seed), monad, omega_rate=0.15)
    out = []
    for _ in range(n):
        ty = fz.rng.choice(FIRST_ORDER)
        out.append((fz.closed_term(ty, 4), ty))
    return out


def test_differential_against_small_step():
    ev = Evaluator("partial")
    seen_div = seen_val = 0
    for e, _ in _programs("partial", 300, 11):
        v = small_step(e, 3000)
        got = ev.eval_n(e, 200)
        if v is None:
            assert got == Partial(), e
            seen_div += 1
        else:
            assert got == Partial(v), e
            seen_val += 1
    assert seen_div > 5 and seen_val > 100


def erase(n):
    """Drop bang annotations, which are not part of value identity."""
    if isinstance(n, BangV):
        return BangV(erase(n.value))
    if isinstance(n, (Inj, Fold)):
        return replace(n, value=erase(n.value))
    return n


def test_let_unfolding_at_matching_budgets():
    for monad in ("dist", "powerset", "state"):
        lets = [e for e, _ in _programs(monad, 300, 12) if isinstance(e, Let)]
        assert len(lets) > 20
        for e in lets:
            ev = Evaluator(monad, typecheck=False)
            M = ev.monad
            for n in range(1, 7):
                rhs = M.bind(lambda v: ev.eval_n(subst_term(e.body, e.var, v), n),
                             ev.eval_n(e.bound, n))
                assert ev.eval_n(e, n + 1) == rhs


def test_monotone_in_budget_and_type_preserving():
    for monad in ("dist", "powerset", "state", "partial"):
        for e, ty in _programs(monad, 60, 13):
            ev = Evaluator(monad)
            M = ev.monad
            prev = M.bottom()
            for n in range(1, 13):
                cur = ev.eval_n(e, n)
                assert M.leq(prev, cur)
                prev = cur
            for v in M.support(prev):
                assert infer(erase(v), {}, ty, M)[0] == ty


def test_evaluator_instances_agree():
    progs = _programs("dist", 50, 14)
    a, b = Evaluator("dist"), Evaluator("dist")
    for e, _ in progs:
        assert a.eval_n(e, 9) == b.eval_n(e, 9)
