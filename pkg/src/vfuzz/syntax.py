"""Abstract syntax of the calculus: types, values and terms.

Binders are named.  Equality and hashing go through a cached de Bruijn key,
so two nodes compare equal exactly when they are alpha-equivalent.  Free
variable sets are cached too; substitution skips subtrees where the target
variable does not occur.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .quantale import INF, Cbe


class SyntaxError_(ValueError):
    pass


class _Node:
    """Shared alpha-equivalence plumbing."""

    __slots__ = ()

    def key(self):
        k = self.__dict__.get("_key")
        if k is None:
            k = _key(self, ())
            object.__setattr__(self, "_key", k)
        return k

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, _Node):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(self.key())
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self):
        from .printer import show
        return show(self)


# -- types ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TVar(_Node):
    name: str


@dataclass(frozen=True, eq=False)
class Sum(_Node):
    items: tuple


@dataclass(frozen=True, eq=False)
class Lolli(_Node):
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True, eq=False)
class Mu(_Node):
    var: str
    body: "Type"


@dataclass(frozen=True, eq=False)
class Bang(_Node):
    scale: Cbe
    body: "Type"


Type = Union[TVar, Sum, Lolli, Mu, Bang]


# -- values -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Var(_Node):
    name: str


@dataclass(frozen=True, eq=False)
class Lam(_Node):
    var: str
    ty: Type
    body: "Term"


@dataclass(frozen=True, eq=False)
class Inj(_Node):
    index: int  # 1-based
    ty: Sum
    value: "Value"


@dataclass(frozen=True, eq=False)
class Fold(_Node):
    ty: Mu
    value: "Value"


@dataclass(frozen=True, eq=False)
class BangV(_Node):
    value: "Value"
    # optional typing hint; not part of the identity of the value
    scale: Optional[Cbe] = None


Value = Union[Var, Lam, Inj, Fold, BangV]


# -- terms ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Return(_Node):
    value: Value


@dataclass(frozen=True, eq=False)
class App(_Node):
    fn: Value
    arg: Value


@dataclass(frozen=True, eq=False)
class Case(_Node):
    scrut: Value
    branches: tuple  # of (name, Term)


@dataclass(frozen=True, eq=False)
class Let(_Node):
    var: str
    bound: "Term"
    body: "Term"


@dataclass(frozen=True, eq=False)
class CaseBang(_Node):
    scrut: Value
    var: str
    body: "Term"


@dataclass(frozen=True, eq=False)
class CaseFold(_Node):
    scrut: Value
    var: str
    body: "Term"


@dataclass(frozen=True, eq=False)
class Op(_Node):
    symbol: str  # "op+", "get", "set0", "set1"
    args: tuple
    param: object = None  # Fraction for op+, location name for state ops


Term = Union[Return, App, Case, Let, CaseBang, CaseFold, Op]

VALUE_TYPES = (Var, Lam, Inj, Fold, BangV)
TERM_TYPES = (Return, App, Case, Let, CaseBang, CaseFold, Op)
TYPE_TYPES = (TVar, Sum, Lolli, Mu, Bang)


def is_value(x) -> bool:
    return isinstance(x, VALUE_TYPES)


def is_term(x) -> bool:
    return isinstance(x, TERM_TYPES)


def is_type(x) -> bool:
    return isinstance(x, TYPE_TYPES)


# -- canonical keys ---------------------------------------------------------

def _idx(env, name):
    for i in range(len(env) - 1, -1, -1):
        if env[i] == name:
            return len(env) - 1 - i
    return None


def _key(n, env):
    # env lists bound names, innermost last; types and terms share it (the
    # namespaces never collide in practice because every reference is
    # resolved within its own syntactic category)
    if not env:
        k = n.__dict__.get("_key")
        if k is not None:
            return k
    if isinstance(n, (TVar, Var)):
        i = _idx(env, n.name)
        tag = "t" if isinstance(n, TVar) else "v"
        return (tag, "b", i) if i is not None else (tag, "f", n.name)
    if isinstance(n, Sum):
        return ("S",) + tuple(_key(t, env) for t in n.items)
    if isinstance(n, Lolli):
        return ("L", _key(n.dom, env), _key(n.cod, env))
    if isinstance(n, Mu):
        return ("M", _key(n.body, env + (n.var,)))
    if isinstance(n, Bang):
        return ("!", n.scale.scalar, _key(n.body, env))
    if isinstance(n, Lam):
        return ("lam", n.ty.key(), _key(n.body, env + (n.var,)))
    if isinstance(n, Inj):
        return ("inj", n.index, n.ty.key(), _key(n.value, env))
    if isinstance(n, Fold):
        return ("fold", n.ty.key(), _key(n.value, env))
    if isinstance(n, BangV):
        return ("bang", _key(n.value, env))
    if isinstance(n, Return):
        return ("ret", _key(n.value, env))
    if isinstance(n, App):
        return ("app", _key(n.fn, env), _key(n.arg, env))
    if isinstance(n, Case):
        return ("case", _key(n.scrut, env)) + tuple(
            _key(b, env + (x,)) for x, b in n.branches)
    if isinstance(n, Let):
        return ("let", _key(n.bound, env), _key(n.body, env + (n.var,)))
    if isinstance(n, CaseBang):
        return ("case!", _key(n.scrut, env), _key(n.body, env + (n.var,)))
    if isinstance(n, CaseFold):
        return ("casefold", _key(n.scrut, env), _key(n.body, env + (n.var,)))
    if isinstance(n, Op):
        return ("op", n.symbol, n.param) + tuple(_key(a, env) for a in n.args)
    raise TypeError(f"not a syntax node: {n!r}")


# -- free variables ---------------------------------------------------------

def free_vars(n) -> frozenset:
    """Free term variables of a value or term (type variables excluded)."""
    fv = n.__dict__.get("_fv")
    if fv is not None:
        return fv
    if isinstance(n, Var):
        fv = frozenset((n.name,))
    elif isinstance(n, Lam):
        fv = free_vars(n.body) - {n.var}
    elif isinstance(n, (Inj, Fold, BangV, Return)):
        fv = free_vars(n.value)
    elif isinstance(n, App):
        fv = free_vars(n.fn) | free_vars(n.arg)
    elif isinstance(n, Case):
        fv = free_vars(n.scrut).union(*(free_vars(b) - {x} for x, b in n.branches))
    elif isinstance(n, Let):
        fv = free_vars(n.bound) | (free_vars(n.body) - {n.var})
    elif isinstance(n, (CaseBang, CaseFold)):
        fv = free_vars(n.scrut) | (free_vars(n.body) - {n.var})
    elif isinstance(n, Op):
        fv = frozenset().union(*(free_vars(a) for a in n.args))
    elif is_type(n):
        fv = frozenset()
    else:
        raise TypeError(f"not a syntax node: {n!r}")
    object.__setattr__(n, "_fv", fv)
    return fv


def free_tvars(t) -> frozenset:
    if isinstance(t, TVar):
        return frozenset((t.name,))
    if isinstance(t, Sum):
        return frozenset().union(*(free_tvars(x) for x in t.items))
    if isinstance(t, Lolli):
        return free_tvars(t.dom) | free_tvars(t.cod)
    if isinstance(t, Mu):
        return free_tvars(t.body) - {t.var}
    if isinstance(t, Bang):
        return free_tvars(t.body)
    raise TypeError(f"not a type: {t!r}")


def is_closed(n) -> bool:
    return not free_vars(n)


_counter = itertools.count()


def fresh(base: str, avoid) -> str:
    base = base.split("'")[0]
    while True:
        cand = f"{base}'{next(_counter)}"
        if cand not in avoid:
            return cand


def all_names(n) -> set:
    """Every variable name occurring in ``n``, bound or free."""
    out = set()
    stack = [n]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, Lam):
            out.add(x.var)
            stack.append(x.body)
        elif isinstance(x, (Inj, Fold, BangV, Return)):
            stack.append(x.value)
        elif isinstance(x, App):
            stack += [x.fn, x.arg]
        elif isinstance(x, Case):
            stack.append(x.scrut)
            for v, b in x.branches:
                out.add(v)
                stack.append(b)
        elif isinstance(x, Let):
            out.add(x.var)
            stack += [x.bound, x.body]
        elif isinstance(x, (CaseBang, CaseFold)):
            out.add(x.var)
            stack += [x.scrut, x.body]
        elif isinstance(x, Op):
            stack += list(x.args)
    return out


# -- substitution -----------------------------------------------------------

def subst_value(v, x: str, u):
    """``v[x := u]``, capture-avoiding."""
    return _subst(v, x, u, free_vars(u))


def subst_term(e, x: str, u):
    """``e[x := u]``, capture-avoiding."""
    return _subst(e, x, u, free_vars(u))


def _under(binder, body, x, u, fvu):
    """Substitute under a binder, renaming it if it would capture."""
    if binder == x:
        return binder, body
    if binder in fvu:
        new = fresh(binder, fvu | all_names(body) | {x})
        body = _subst(body, binder, Var(new), frozenset((new,)))
        binder = new
    return binder, _subst(body, x, u, fvu)


def _subst(n, x, u, fvu):
    if x not in free_vars(n):
        return n
    if isinstance(n, Var):
        return u
    if isinstance(n, Lam):
        y, b = _under(n.var, n.body, x, u, fvu)
        return Lam(y, n.ty, b)
    if isinstance(n, Inj):
        return Inj(n.index, n.ty, _subst(n.value, x, u, fvu))
    if isinstance(n, Fold):
        return Fold(n.ty, _subst(n.value, x, u, fvu))
    if isinstance(n, BangV):
        return BangV(_subst(n.value, x, u, fvu), n.scale)
    if isinstance(n, Return):
        return Return(_subst(n.value, x, u, fvu))
    if isinstance(n, App):
        return App(_subst(n.fn, x, u, fvu), _subst(n.arg, x, u, fvu))
    if isinstance(n, Case):
        return Case(_subst(n.scrut, x, u, fvu),
                    tuple(_under(y, b, x, u, fvu) for y, b in n.branches))
    if isinstance(n, Let):
        y, b = _under(n.var, n.body, x, u, fvu)
        return Let(y, _subst(n.bound, x, u, fvu), b)
    if isinstance(n, CaseBang):
        y, b = _under(n.var, n.body, x, u, fvu)
        return CaseBang(_subst(n.scrut, x, u, fvu), y, b)
    if isinstance(n, CaseFold):
        y, b = _under(n.var, n.body, x, u, fvu)
        return CaseFold(_subst(n.scrut, x, u, fvu), y, b)
    if isinstance(n, Op):
        return Op(n.symbol, tuple(_subst(a, x, u, fvu) for a in n.args), n.param)
    raise TypeError(f"not a value or term: {n!r}")


def subst_many(e, mapping: dict):
    """Simultaneous substitution of closed values."""
    for x, u in mapping.items():
        if free_vars(u):
            raise SyntaxError_("simultaneous substitution needs closed values")
        e = subst_term(e, x, u) if is_term(e) else subst_value(e, x, u)
    return e


def subst_type(t, a: str, s):
    """``t[a := s]`` on types, capture-avoiding."""
    if isinstance(t, TVar):
        return s if t.name == a else t
    if isinstance(t, Sum):
        return Sum(tuple(subst_type(x, a, s) for x in t.items))
    if isinstance(t, Lolli):
        return Lolli(subst_type(t.dom, a, s), subst_type(t.cod, a, s))
    if isinstance(t, Bang):
        return Bang(t.scale, subst_type(t.body, a, s))
    if isinstance(t, Mu):
        if t.var == a or a not in free_tvars(t.body):
            return t
        fs = free_tvars(s)
        if t.var in fs:
            new = fresh(t.var, fs | free_tvars(t.body))
            return Mu(new, subst_type(subst_type(t.body, t.var, TVar(new)), a, s))
        return Mu(t.var, subst_type(t.body, a, s))
    raise TypeError(f"not a type: {t!r}")


def unfold(t: Mu):
    """``sigma[t := mu t. sigma]``."""
    u = t.__dict__.get("_unfold")
    if u is None:
        u = subst_type(t.body, t.var, t)
        object.__setattr__(t, "_unfold", u)
    return u


# -- derived forms ------------------------------------------------------------

ZERO = Sum(())
UNIT = Lolli(ZERO, ZERO)
NAT = Mu("t", Sum((UNIT, TVar("t"))))
NAT_BODY = unfold(NAT)
STAR = Lam("x", ZERO, Return(Var("x")))


def numeral(n: int) -> Value:
    if n < 0:
        raise SyntaxError_("numerals are nonnegative")
    v = Fold(NAT, Inj(1, NAT_BODY, STAR))
    for _ in range(n):
        v = Fold(NAT, Inj(2, NAT_BODY, v))
    return v


def as_numeral(v) -> Optional[int]:
    """Inverse of :func:`numeral`, or None."""
    n = 0
    while isinstance(v, Fold) and v.ty == NAT and isinstance(v.value, Inj):
        inj = v.value
        if inj.index == 1:
            return n if inj.value == STAR else None
        n += 1
        v = inj.value
    return None


def identity(ty) -> Value:
    return Lam("x", ty, Return(Var("x")))


def term_I(ty) -> Term:
    """``return (\\x. return x)`` at ``ty -o ty``."""
    return Return(identity(ty))


def omega_type(ty) -> Mu:
    t = fresh("t", free_tvars(ty)) if "t" in free_tvars(ty) else "t"
    return Mu(t, Lolli(Bang(Cbe(INF), TVar(t)), ty))


def small_omega(ty) -> Lam:
    m = omega_type(ty)
    return Lam("x", Bang(Cbe(INF), m),
               CaseBang(Var("x"), "y",
                        CaseFold(Var("y"), "z",
                                 App(Var("z"), BangV(Fold(m, Var("z")), Cbe(INF))))))


def term_Omega(ty) -> Term:
    """The purely divergent term at ``ty``."""
    w = small_omega(ty)
    return App(w, BangV(Fold(omega_type(ty), w), Cbe(INF)))


def derived(name: str, arg=None):
    table = {
        "zero-type": lambda: ZERO,
        "unit-type": lambda: UNIT,
        "unit": lambda: STAR,
        "nat": lambda: NAT,
        "numeral": lambda: numeral(int(arg)),
        "I": lambda: term_I(UNIT if arg is None else arg),
        "Omega": lambda: term_Omega(UNIT if arg is None else arg),
    }
    if name not in table:
        raise SyntaxError_(f"unknown derived form {name!r}")
    return table[name]()


def choice(e: Term, f: Term, p=None) -> Op:
    return Op("op+", (e, f), None if p is None else Fraction(p))


OP_ARITY = {"op+": 2, "get": 2, "set0": 1, "set1": 1}


def size(n) -> int:
    if isinstance(n, Var):
        return 1
    if isinstance(n, Lam):
        return 1 + size(n.body)
    if isinstance(n, (Inj, Fold, BangV, Return)):
        return 1 + size(n.value)
    if isinstance(n, App):
        return 1 + size(n.fn) + size(n.arg)
    if isinstance(n, Case):
        return 1 + size(n.scrut) + sum(size(b) for _, b in n.branches)
    if isinstance(n, Let):
        return 1 + size(n.bound) + size(n.body)
    if isinstance(n, (CaseBang, CaseFold)):
        return 1 + size(n.scrut) + size(n.body)
    if isinstance(n, Op):
        return 1 + sum(size(a) for a in n.args)
    raise TypeError(f"not a value or term: {n!r}")
