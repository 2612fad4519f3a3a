"""Random generation of well-typed programs.

Generation is type-directed and deliberately loose about linearity: a
candidate is kept only if the type checker accepts it, so lambda bodies that
use their argument twice are simply rejected and redrawn.
"""
from __future__ import annotations

import random
from fractions import Fraction

from .effects import Monad, StateMonad, get_monad
from .quantale import Cbe
from .syntax import (
    NAT, NAT_BODY, UNIT, App, Bang, BangV, Case, CaseBang, CaseFold, Fold, Inj,
    Lam, Let, Lolli, Mu, Op, Return, Sum, Var, numeral, term_Omega, unfold, STAR,
)
from .typecheck import TypeCheckError, infer

BOOL2 = Sum((UNIT, UNIT))
FIRST_ORDER = (NAT, BOOL2, Bang(Cbe(1), NAT), Bang(Cbe(2), NAT))
PROBS = (Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 4), Fraction(3, 4))


class FuzzError(RuntimeError):
    pass


class Fuzzer:
    def __init__(self, rng=None, monad: Monad | str = "dist", max_numeral: int = 3,
                 omega_rate: float = 0.08):
        self.rng = rng if rng is not None else random.Random(0)
        self.monad = get_monad(monad) if isinstance(monad, str) else monad
        self.max_numeral = max_numeral
        self.omega_rate = omega_rate
        self._n = 0

    def _fresh(self, base="x"):
        self._n += 1
        return f"{base}{self._n}"

    # -- values
    def value(self, ty, depth: int, scope: dict):
        r = self.rng
        vars_ = [x for x, t in scope.items() if t == ty]
        if vars_ and r.random() < 0.5:
            return Var(r.choice(vars_))
        if ty == NAT:
            nats = [x for x, t in scope.items() if t == NAT]
            if nats and r.random() < 0.3:
                return Fold(NAT, Inj(2, NAT_BODY, Var(r.choice(nats))))
            return numeral(r.randint(0, self.max_numeral))
        if ty == UNIT:
            return STAR
        if isinstance(ty, Sum):
            if not ty.items:
                raise FuzzError("the empty sum has no values")
            i = r.randrange(len(ty.items))
            return Inj(i + 1, ty, self.value(ty.items[i], depth - 1, scope))
        if isinstance(ty, Mu):
            return Fold(ty, self.value(unfold(ty), depth - 1, scope))
        if isinstance(ty, Bang):
            return BangV(self.value(ty.body, depth, scope), ty.scale)
        if isinstance(ty, Lolli):
            x = self._fresh()
            return Lam(x, ty.dom, self.term(ty.cod, depth - 1, {**scope, x: ty.dom}))
        raise FuzzError(f"cannot generate values of {ty}")

    # -- terms
    def _ops(self):
        m = self.monad
        if m.name == "partial":
            return []
        ops = ["op+"]
        if isinstance(m, StateMonad):
            ops += ["get", "set0", "set1"]
        return ops

    def term(self, ty, depth: int, scope: dict):
        r = self.rng
        if depth <= 0:
            if r.random() < self.omega_rate:
                return term_Omega(ty)
            return Return(self.value(ty, 0, scope))
        kinds = ["return", "let", "case", "casefold", "caseb", "app", "omega"] + ["op"] * 2 * bool(self._ops())
        weights = {"return": 2, "let": 2, "case": 1, "casefold": 1, "caseb": 1, "app": 1,
                   "omega": self.omega_rate * 10, "op": 1.5}
        kind = r.choices(kinds, [weights[k] for k in kinds])[0]
        d = depth - 1
        if kind == "return":
            return Return(self.value(ty, depth, scope))
        if kind == "omega":
            return term_Omega(ty)
        if kind == "op":
            sym = r.choice(self._ops())
            if sym == "op+":
                p = r.choice(PROBS) if self.monad.name in ("dist", "state") else None
                return Op("op+", (self.term(ty, d, scope), self.term(ty, d, scope)), p)
            loc = r.choice(self.monad.locations)
            arity = 2 if sym == "get" else 1
            return Op(sym, tuple(self.term(ty, d, scope) for _ in range(arity)), loc)
        if kind == "let":
            sigma = r.choice(FIRST_ORDER)
            x = self._fresh()
            return Let(x, self.term(sigma, d, scope), self.term(ty, d, {**scope, x: sigma}))
        if kind == "case":
            sums = [y for y, t in scope.items() if isinstance(t, Sum) and t.items]
            if sums and r.random() < 0.6:
                y = r.choice(sums)
                branches = []
                for comp in scope[y].items:
                    z = self._fresh("c")
                    branches.append((z, self.term(ty, d, {**scope, z: comp})))
                return Case(Var(y), tuple(branches))
            a, b = self._fresh("a"), self._fresh("b")
            return Case(self.value(BOOL2, d, scope),
                        ((a, self.term(ty, d, {**scope, a: UNIT})),
                         (b, self.term(ty, d, {**scope, b: UNIT}))))
        if kind == "casefold":
            z, a, p = self._fresh("z"), self._fresh("a"), self._fresh("p")
            inner = Case(Var(z), ((a, self.term(ty, d, {**scope, a: UNIT})),
                                  (p, self.term(ty, d, {**scope, p: NAT}))))
            return CaseFold(self.value(NAT, d, scope), z, inner)
        if kind == "caseb":
            bty = r.choice(FIRST_ORDER[2:])
            y = self._fresh("y")
            return CaseBang(self.value(bty, d, scope), y, self.term(ty, d, {**scope, y: NAT}))
        # app: apply a function in scope when one fits, else a fresh redex
        fns = [y for y, t in scope.items() if isinstance(t, Lolli) and t.cod == ty]
        if fns and r.random() < 0.7:
            y = r.choice(fns)
            return App(Var(y), self.value(scope[y].dom, d, scope))
        sigma = r.choice(FIRST_ORDER)
        x = self._fresh()
        return App(Lam(x, sigma, self.term(ty, d, {**scope, x: sigma})),
                   self.value(sigma, d, scope))

    # -- checked generation
    def typed_term(self, ty, depth: int = 3, scope=None, tries: int = 200):
        """A term of ``ty`` under ``scope`` that type-checks, with its demand."""
        scope = dict(scope or {})
        for _ in range(tries):
            e = self.term(ty, depth, scope)
            try:
                got, demand = infer(e, scope, ty, self.monad)
            except TypeCheckError:
                continue
            if got == ty:
                return e, demand
        raise FuzzError(f"no well-typed term of {ty} after {tries} tries")

    def closed_term(self, ty, depth: int = 3):
        return self.typed_term(ty, depth)[0]

    def closed_value(self, ty, depth: int = 2):
        for _ in range(200):
            v = self.value(ty, depth, {})
            try:
                infer(v, {}, ty, self.monad)
            except TypeCheckError:
                continue
            return v
        raise FuzzError(f"no well-typed value of {ty}")
