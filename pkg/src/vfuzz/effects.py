"""Monads for effectful evaluation: partiality, finite powerset, finite
subdistributions and state-indexed subdistributions.

Monadic values are immutable and hashable.  Atoms inside distributions and
sets are arbitrary hashable objects (syntactic values, or ``(state, value)``
pairs for the state monad).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .quantale import SigmaOpInterp, choice_op

MAX_LOCATIONS = 10


class EffectError(ValueError):
    pass


# -- monadic values -------------------------------------------------------

@dataclass(frozen=True)
class Partial:
    value: Optional[object] = None

    @property
    def defined(self) -> bool:
        return self.value is not None


class Pow:
    __slots__ = ("items",)

    def __init__(self, items: Iterable = ()):
        object.__setattr__(self, "items", frozenset(items))

    def __setattr__(self, *_):
        raise AttributeError("Pow is immutable")

    def __eq__(self, other):
        return isinstance(other, Pow) and self.items == other.items

    def __hash__(self):
        return hash(("Pow", self.items))

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __repr__(self):
        return f"Pow({set(self.items)!r})"


class SubDist:
    """Finitely supported subdistribution with exact positive weights."""

    __slots__ = ("weights", "_frozen")

    def __init__(self, weights=None):
        w = {}
        for x, p in (weights or {}).items():
            p = Fraction(p)
            if p < 0:
                raise EffectError("negative probability")
            if p > 0:
                w[x] = w.get(x, Fraction(0)) + p
        if sum(w.values(), Fraction(0)) > 1:
            raise EffectError("total mass exceeds 1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_frozen", frozenset(w.items()))

    def __setattr__(self, *_):
        raise AttributeError("SubDist is immutable")

    @property
    def mass(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def support(self):
        return list(self.weights)

    def __getitem__(self, x) -> Fraction:
        return self.weights.get(x, Fraction(0))

    def items(self):
        return self.weights.items()

    def __eq__(self, other):
        return isinstance(other, SubDist) and self._frozen == other._frozen

    def __hash__(self):
        return hash(("SubDist", self._frozen))

    def __repr__(self):
        return "SubDist({" + ", ".join(f"{x!s}: {p}" for x, p in self.weights.items()) + "})"


def _mix(pairs) -> SubDist:
    acc = {}
    for p, d in pairs:
        if p == 0:
            continue
        for x, q in d.items():
            acc[x] = acc.get(x, Fraction(0)) + p * q
    return SubDist(acc)


class StateKernel:
    """A map from states (bit tuples) to subdistributions over (state, value)."""

    __slots__ = ("table", "_frozen")

    def __init__(self, table: dict):
        object.__setattr__(self, "table", dict(table))
        object.__setattr__(self, "_frozen", frozenset(self.table.items()))

    def __setattr__(self, *_):
        raise AttributeError("StateKernel is immutable")

    def __call__(self, b) -> SubDist:
        return self.table[b]

    def __eq__(self, other):
        return isinstance(other, StateKernel) and self._frozen == other._frozen

    def __hash__(self):
        return hash(("StateKernel", self._frozen))

    def __repr__(self):
        return f"StateKernel({self.table!r})"


# -- monads -----------------------------------------------------------------

class Monad:
    name: str

    def unit(self, v):
        raise NotImplementedError

    def bind(self, f: Callable, m):
        raise NotImplementedError

    def bottom(self):
        raise NotImplementedError

    def op(self, symbol: str, param, args):
        raise EffectError(f"operation {symbol} not supported by the {self.name} monad")

    def leq(self, m, n) -> bool:
        raise NotImplementedError

    def support(self, m) -> list:
        """Values (not states) occurring in ``m``."""
        raise NotImplementedError

    def strong_kleisli(self, f: Callable, z, m):
        # all monads here are on Set, so strength just threads the parameter
        return self.bind(lambda x: f(z, x), m)

    def fmap(self, f: Callable, m):
        return self.bind(lambda x: self.unit(f(x)), m)

    def lub(self, chain):
        chain = list(chain)
        if not chain:
            return self.bottom()
        for a, b in zip(chain, chain[1:]):
            if not self.leq(a, b):
                raise EffectError("lub: input is not an ascending chain")
        return chain[-1]

    def is_bottom(self, m) -> bool:
        return m == self.bottom()

    def signature(self) -> list[tuple[str, int]]:
        return []

    def sigma_interp(self, symbol: str, param=None) -> SigmaOpInterp:
        raise EffectError(f"operation {symbol} not in the {self.name} signature")


class PartialMonad(Monad):
    name = "partial"

    def unit(self, v):
        return Partial(v)

    def bind(self, f, m):
        if m.value is None:
            return m
        return f(m.value)

    def bottom(self):
        return Partial(None)

    def leq(self, m, n):
        return m.value is None or m.value == n.value

    def support(self, m):
        return [] if m.value is None else [m.value]


class PowersetMonad(Monad):
    name = "powerset"

    def unit(self, v):
        return Pow((v,))

    def bind(self, f, m):
        out = set()
        for x in m:
            out |= f(x).items
        return Pow(out)

    def bottom(self):
        return Pow()

    def op(self, symbol, param, args):
        if symbol != "op+" or len(args) != 2:
            return super().op(symbol, param, args)
        return Pow(args[0].items | args[1].items)

    def leq(self, m, n):
        return m.items <= n.items

    def support(self, m):
        return list(m.items)

    def signature(self):
        return [("op+", 2)]

    def sigma_interp(self, symbol, param=None):
        if symbol != "op+":
            return super().sigma_interp(symbol, param)
        return SigmaOpInterp("op+", 2, "meet")


class DistMonad(Monad):
    name = "dist"

    def unit(self, v):
        return SubDist({v: 1})

    def bind(self, f, m):
        return _mix((p, f(x)) for x, p in m.items())

    def bottom(self):
        return SubDist()

    def op(self, symbol, param, args):
        if symbol != "op+" or len(args) != 2:
            return super().op(symbol, param, args)
        p = Fraction(1, 2) if param is None else Fraction(param)
        return _mix(((p, args[0]), (1 - p, args[1])))

    def leq(self, m, n):
        return all(p <= n[x] for x, p in m.items())

    def support(self, m):
        return m.support()

    def signature(self):
        return [("op+", 2)]

    def sigma_interp(self, symbol, param=None):
        if symbol != "op+":
            return super().sigma_interp(symbol, param)
        return choice_op(Fraction(1, 2) if param is None else param)


class StateMonad(Monad):
    """``S -> D(S x X)`` over ``S = {0,1}^L``."""

    name = "state"

    def __init__(self, locations=("l",)):
        locations = tuple(locations)
        if len(locations) > MAX_LOCATIONS:
            raise EffectError(f"at most {MAX_LOCATIONS} locations are supported")
        if len(set(locations)) != len(locations):
            raise EffectError("duplicate location names")
        self.locations = locations
        self.states = list(itertools.product((0, 1), repeat=len(locations)))

    def loc(self, name) -> int:
        try:
            return self.locations.index(name)
        except ValueError:
            raise EffectError(f"unknown location {name!r}") from None

    def unit(self, v):
        return StateKernel({b: SubDist({(b, v): 1}) for b in self.states})

    def bind(self, f, m):
        cache = {}

        def fx(x):
            if x not in cache:
                cache[x] = f(x)
            return cache[x]

        return StateKernel({
            b: _mix((p, fx(x)(b2)) for (b2, x), p in m(b).items())
            for b in self.states})

    def bottom(self):
        return StateKernel({b: SubDist() for b in self.states})

    def op(self, symbol, param, args):
        if symbol == "op+" and len(args) == 2:
            p = Fraction(1, 2) if param is None else Fraction(param)
            return StateKernel({b: _mix(((p, args[0](b)), (1 - p, args[1](b))))
                                for b in self.states})
        if symbol == "get" and len(args) == 2:
            i = self.loc(param)
            return StateKernel({b: args[b[i]](b) for b in self.states})
        if symbol in ("set0", "set1") and len(args) == 1:
            i = self.loc(param)
            bit = int(symbol[-1])
            return StateKernel({b: args[0](b[:i] + (bit,) + b[i + 1:]) for b in self.states})
        return super().op(symbol, param, args)

    def leq(self, m, n):
        return all(p <= n(b)[x] for b in self.states for x, p in m(b).items())

    def support(self, m):
        out = []
        seen = set()
        for b in self.states:
            for (_, x) in m(b).support():
                if x not in seen:
                    seen.add(x)
                    out.append(x)
        return out

    def signature(self):
        sig = [("op+", 2)]
        for l in self.locations:
            sig += [(f"get[{l}]", 2), (f"set0[{l}]", 1), (f"set1[{l}]", 1)]
        return sig

    def sigma_interp(self, symbol, param=None):
        if symbol == "op+":
            return choice_op(Fraction(1, 2) if param is None else param)
        if symbol in ("get", "set0", "set1"):
            self.loc(param)
            return SigmaOpInterp(symbol, 2 if symbol == "get" else 1, "meet")
        return super().sigma_interp(symbol, param)


MONADS = ("partial", "powerset", "dist", "state")


def get_monad(name: str, locations=("l",)) -> Monad:
    if name == "partial":
        return PartialMonad()
    if name == "powerset":
        return PowersetMonad()
    if name == "dist":
        return DistMonad()
    if name == "state":
        return StateMonad(locations)
    raise EffectError(f"unknown monad {name!r}; expected one of {', '.join(MONADS)}")


@dataclass(frozen=True)
class EffectSig:
    monad: str = "dist"
    locations: tuple = ("l",)

    def make(self) -> Monad:
        return get_monad(self.monad, self.locations)


# public aliases
def unit(monad: Monad, v):
    return monad.unit(v)


def strong_kleisli(monad: Monad, f, m):
    return monad.bind(f, m)


def op_interp(monad: Monad, name: str, args, param=None):
    return monad.op(name, param, list(args))


def order_leq(monad: Monad, m, n) -> bool:
    return monad.leq(m, n)
