"""Step-indexed evaluation.

``eval_n(e, n)`` follows the approximation semantics clause by clause.  On top
of it each result carries an *exactness* flag: it is set when the result is
already the limit of the chain.  Returns are exact; a chain of pure redexes
that revisits a term is a divergent loop and its bottom result is exact; a
sequencing or operation is exact when all its parts are.  Running out of
budget is never exact.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass

from .effects import Monad, get_monad
from .syntax import (
    App, BangV, Case, CaseBang, CaseFold, Fold, Inj, Lam, Let, Op, Return,
    free_vars, is_term, subst_term,
)
from .typecheck import type_of_closed

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class EvalError(ValueError):
    def __init__(self, msg: str, code: str = "eval-error"):
        super().__init__(msg)
        self.code = code


@dataclass(frozen=True)
class EvalResult:
    value: object
    stabilized: bool  # exact and not bottom
    exact: bool
    n: int


def reduce_redex(e):
    """One beta/case step, or None when ``e`` is not a redex."""
    if isinstance(e, App):
        f = e.fn
        if isinstance(f, Lam):
            return subst_term(f.body, f.var, e.arg)
        raise EvalError(f"stuck application of a non-function: {e}", "stuck")
    if isinstance(e, Case):
        v = e.scrut
        if isinstance(v, Inj) and v.index <= len(e.branches):
            x, body = e.branches[v.index - 1]
            return subst_term(body, x, v.value)
        raise EvalError(f"stuck case: {e}", "stuck")
    if isinstance(e, CaseFold):
        if isinstance(e.scrut, Fold):
            return subst_term(e.body, e.var, e.scrut.value)
        raise EvalError(f"stuck casefold: {e}", "stuck")
    if isinstance(e, CaseBang):
        if isinstance(e.scrut, BangV):
            return subst_term(e.body, e.var, e.scrut.value)
        raise EvalError(f"stuck case!: {e}", "stuck")
    return None


class Evaluator:
    """Memoizing evaluator for one monad.  Not shared across threads."""

    def __init__(self, monad: Monad | str = "dist", typecheck: bool = True):
        self.monad = get_monad(monad) if isinstance(monad, str) else monad
        self.typecheck = typecheck
        self.memo: dict = {}
        self._checked: set = set()

    def _admit(self, e):
        if not is_term(e):
            raise EvalError("only terms can be evaluated", "not-a-term")
        if e in self._checked:
            return
        if free_vars(e):
            raise EvalError(f"open term: free variables {sorted(free_vars(e))}", "open")
        if self.typecheck:
            try:
                type_of_closed(e, monad=self.monad)
            except ValueError as err:
                raise EvalError(f"ill-typed term: {err}", "ill-typed") from None
        self._checked.add(e)

    def eval_n(self, e, n: int):
        self._admit(e)
        return self._ev(e, n)[0]

    def eval_exact(self, e, n: int):
        """``(eval_n(e, n), exact)``."""
        self._admit(e)
        return self._ev(e, n)

    def eval(self, e, max_budget: int) -> EvalResult:
        self._admit(e)
        for n in range(1, max_budget + 1):
            m, exact = self._ev(e, n)
            if exact:
                return EvalResult(m, not self.monad.is_bottom(m), True, n)
        m, exact = self._ev(e, max_budget)
        return EvalResult(m, False, exact, max_budget)

    def _ev(self, e, n: int):
        key = (e, n)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        res = self._compute(e, n)
        self.memo[key] = res
        return res

    def _compute(self, e, n: int):
        M = self.monad
        if n <= 0:
            return M.bottom(), False
        t, k = e, n
        seen = {t}
        while True:
            nxt = reduce_redex(t)
            if nxt is None:
                break
            if nxt in seen:
                return M.bottom(), True
            k -= 1
            if k == 0:
                return M.bottom(), False
            seen.add(nxt)
            t = nxt
            if (t, k) in self.memo:
                return self.memo[(t, k)]
        if isinstance(t, Return):
            return M.unit(t.value), True
        if isinstance(t, Let):
            m, exact = self._ev(t.bound, k - 1)
            flags = [exact]

            def cont(v, body=t.body, x=t.var, j=k - 1):
                r, ex = self._ev(subst_term(body, x, v), j)
                flags.append(ex)
                return r

            out = M.bind(cont, m)
            return out, all(flags)
        if isinstance(t, Op):
            parts = [self._ev(a, k - 1) for a in t.args]
            out = M.op(t.symbol, t.param, [p[0] for p in parts])
            return out, all(p[1] for p in parts)
        raise EvalError(f"cannot evaluate {t}", "stuck")


def eval_n(e, n: int, monad="dist"):
    return Evaluator(monad).eval_n(e, n)


def evaluate(e, max_budget: int, monad="dist") -> EvalResult:
    return Evaluator(monad).eval(e, max_budget)
