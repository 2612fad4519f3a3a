"""Sensitivity inference and checking.

Inference is bidirectional: an optional expected type flows down so that
bang values in argument positions pick up the scaling of the domain they
are checked against.  It computes, for each free variable, the least scalar
under which the subject is derivable; checking is inference followed by
subsumption against the declared environment.

Demands are plain ``dict``s from variable name to scalar; absent names have
demand 0.
"""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .effects import DistMonad, EffectError, Monad
from .quantale import INF, Cbe, cbe_op, ext_add, ext_mul, format_scalar
from .syntax import (
    App, Bang, BangV, Case, CaseBang, CaseFold, Fold, Inj, Lam, Let, Lolli,
    Mu, Op, Return, Sum, Var, free_tvars, is_term, is_value, unfold,
)

ONE = Fraction(1)
ZERO_S = Fraction(0)


class TypeCheckError(ValueError):
    def __init__(self, msg: str, code: str = "type-error"):
        super().__init__(msg)
        self.code = code


# -- environments -------------------------------------------------------------

class Env:
    """An ordered map ``name -> (Cbe, Type)``."""

    def __init__(self, entries=()):
        self.entries: dict = {}
        items = entries.items() if isinstance(entries, dict) else entries
        for name, (s, ty) in items:
            if name in self.entries:
                raise TypeCheckError(f"duplicate variable {name}")
            if free_tvars(ty):
                raise TypeCheckError(f"type of {name} is not closed")
            self.entries[name] = (s if isinstance(s, Cbe) else Cbe(s), ty)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, name):
        return self.entries[name]

    def __contains__(self, name):
        return name in self.entries

    def __eq__(self, other):
        return isinstance(other, Env) and self.entries == other.entries

    def __repr__(self):
        inner = ", ".join(f"{x} :_{s} {ty}" for x, (s, ty) in self.entries.items())
        return f"Env({inner})"

    def scope(self) -> dict:
        return {x: ty for x, (_, ty) in self.entries.items()}

    def scalars(self) -> dict:
        return {x: s.scalar for x, (s, _) in self.entries.items()}


def _skeleton(envs) -> dict:
    sk = {}
    for g in envs:
        for x, (_, ty) in g.entries.items():
            if x in sk and sk[x] != ty:
                raise TypeCheckError(f"environment mismatch on {x}: {sk[x]} vs {ty}",
                                     "env-mismatch")
            sk.setdefault(x, ty)
    return sk


def _scalar(g: Env, x):
    return g.entries[x][0] if x in g.entries else Cbe(0)


def env_scale(r: Cbe, g: Env) -> Env:
    return Env({x: (Cbe(ext_mul(r.scalar, s.scalar)), ty) for x, (s, ty) in g.entries.items()})


def env_tensor(g: Env, d: Env) -> Env:
    sk = _skeleton((g, d))
    return Env({x: (Cbe(ext_add(_scalar(g, x).scalar, _scalar(d, x).scalar)), ty)
                for x, ty in sk.items()})


def env_op(op, envs) -> Env:
    envs = list(envs)
    sk = _skeleton(envs)
    return Env({x: (cbe_op(op, [_scalar(g, x) for g in envs]), ty) for x, ty in sk.items()})


# -- demand algebra -----------------------------------------------------------

def d_scale(r, d: dict) -> dict:
    out = {}
    for x, s in d.items():
        v = ext_mul(r, s)
        if v != 0:
            out[x] = v
    return out


def d_tensor(*ds: dict) -> dict:
    out = {}
    for d in ds:
        for x, s in d.items():
            out[x] = ext_add(out.get(x, ZERO_S), s)
    return out


def d_max(*ds: dict) -> dict:
    out = {}
    for d in ds:
        for x, s in d.items():
            out[x] = max(out.get(x, ZERO_S), s)
    return out


def d_without(d: dict, x: str) -> dict:
    return {y: s for y, s in d.items() if y != x}


# -- inference ----------------------------------------------------------------

def _mismatch(what, expected, got):
    raise TypeCheckError(f"{what}: expected {expected}, got {got}", "type-mismatch")


def _op_interp(monad: Monad, e: Op):
    try:
        return monad.sigma_interp(e.symbol, e.param)
    except EffectError as err:
        raise TypeCheckError(str(err), "signature") from None


def infer_value(v, scope: dict, expected=None, monad: Monad = None):
    """Return ``(type, demand)`` for a value."""
    monad = monad or DistMonad()
    if isinstance(v, Var):
        if v.name not in scope:
            raise TypeCheckError(f"unbound variable {v.name}", "unbound")
        ty = scope[v.name]
        if expected is not None and expected != ty:
            _mismatch(f"variable {v.name}", expected, ty)
        return ty, {v.name: ONE}
    if isinstance(v, Lam):
        cod = None
        if expected is not None:
            if not isinstance(expected, Lolli):
                _mismatch("lambda", expected, "a function")
            if expected.dom != v.ty:
                _mismatch(f"domain of lambda {v.var}", expected.dom, v.ty)
            cod = expected.cod
        if free_tvars(v.ty):
            raise TypeCheckError(f"annotation of {v.var} is not closed")
        tau, d = infer_term(v.body, {**scope, v.var: v.ty}, cod, monad)
        dx = d.get(v.var, ZERO_S)
        if dx > 1:
            raise TypeCheckError(
                f"lambda-bound {v.var} has sensitivity {format_scalar(dx)} > 1", "sensitivity")
        return Lolli(v.ty, tau), d_without(d, v.var)
    if isinstance(v, Inj):
        if expected is not None and expected != v.ty:
            _mismatch("injection", expected, v.ty)
        if not 1 <= v.index <= len(v.ty.items):
            raise TypeCheckError(f"injection index {v.index} out of range")
        _, d = infer_value(v.value, scope, v.ty.items[v.index - 1], monad)
        return v.ty, d
    if isinstance(v, Fold):
        if expected is not None and expected != v.ty:
            _mismatch("fold", expected, v.ty)
        _, d = infer_value(v.value, scope, unfold(v.ty), monad)
        return v.ty, d
    if isinstance(v, BangV):
        body = None
        if expected is not None:
            if not isinstance(expected, Bang):
                _mismatch("bang", expected, "a bang type")
            if v.scale is not None and v.scale != expected.scale:
                _mismatch("bang scaling", expected.scale, v.scale)
            s, body = expected.scale, expected.body
        else:
            s = v.scale if v.scale is not None else Cbe(1)
        ty, d = infer_value(v.value, scope, body, monad)
        return Bang(s, ty), d_scale(s.scalar, d)
    raise TypeCheckError(f"not a value: {v!r}", "syntax")


# Under truncated scaling (the unit interval) ``s . r`` is the composite
# ``x -> min(s * min(r * x, 1), 1)``, which is not the product scalar once r > 1.
_TRUNCATED = contextvars.ContextVar("truncated_scaling", default=False)


@contextlib.contextmanager
def truncated_scaling(flag: bool = True):
    token = _TRUNCATED.set(flag)
    try:
        yield
    finally:
        _TRUNCATED.reset(token)


def bang_factor(d, r):
    """Least ``s`` whose composite with ``r`` demands at least ``d``.

    For ``r = inf`` no least one exists above 0 and we pick 1.  With truncated
    scaling only ``min(r, 1)`` of the scaling can be divided out.
    """
    if d == 0:
        return ZERO_S
    if r == 0:
        raise TypeCheckError("variable bound by case! at scaling 0 is used", "sensitivity")
    if r == INF:
        return ONE
    if d == INF:
        return INF
    return d / (min(r, ONE) if _TRUNCATED.get() else r)


def case_scale(s, branches: int):
    """Scaling applied to the scrutinee's environment by a sum case.

    Choosing a branch observes the injection even when no branch uses its
    binder, so with two or more branches this is ``s meet 1``, as for
    sequencing.
    """
    return max(s, ONE) if branches >= 2 else s


def infer_term(e, scope: dict, expected=None, monad: Monad = None):
    """Return ``(type, demand)`` for a term."""
    monad = monad or DistMonad()
    if isinstance(e, Return):
        return infer_value(e.value, scope, expected, monad)
    if isinstance(e, App):
        fty, d1 = infer_value(e.fn, scope, None, monad)
        if not isinstance(fty, Lolli):
            _mismatch("application head", "a function", fty)
        if expected is not None and expected != fty.cod:
            _mismatch("application result", expected, fty.cod)
        _, d2 = infer_value(e.arg, scope, fty.dom, monad)
        return fty.cod, d_tensor(d1, d2)
    if isinstance(e, Case):
        sty, dv = infer_value(e.scrut, scope, None, monad)
        if not isinstance(sty, Sum):
            _mismatch("case scrutinee", "a sum", sty)
        if len(sty.items) != len(e.branches):
            raise TypeCheckError(
                f"case has {len(e.branches)} branches for a sum of {len(sty.items)}",
                "type-mismatch")
        if not e.branches and expected is None:
            raise TypeCheckError("cannot infer the type of an empty case", "annotation")
        ty = expected
        s = ZERO_S
        deltas = []
        for (x, body), comp in zip(e.branches, sty.items):
            bty, d = infer_term(body, {**scope, x: comp}, ty, monad)
            ty = bty
            s = max(s, d.get(x, ZERO_S))
            deltas.append(d_without(d, x))
        return ty, d_tensor(d_scale(case_scale(s, len(e.branches)), dv), d_max(*deltas))
    if isinstance(e, Let):
        sigma, de = infer_term(e.bound, scope, None, monad)
        tau, df = infer_term(e.body, {**scope, e.var: sigma}, expected, monad)
        s = df.get(e.var, ZERO_S)
        return tau, d_tensor(d_scale(max(s, ONE), de), d_without(df, e.var))
    if isinstance(e, CaseBang):
        bty, dv = infer_value(e.scrut, scope, None, monad)
        if not isinstance(bty, Bang):
            _mismatch("case! scrutinee", "a bang type", bty)
        tau, de = infer_term(e.body, {**scope, e.var: bty.body}, expected, monad)
        s = bang_factor(de.get(e.var, ZERO_S), bty.scale.scalar)
        return tau, d_tensor(d_scale(s, dv), d_without(de, e.var))
    if isinstance(e, CaseFold):
        mty, dv = infer_value(e.scrut, scope, None, monad)
        if not isinstance(mty, Mu):
            _mismatch("casefold scrutinee", "a recursive type", mty)
        tau, de = infer_term(e.body, {**scope, e.var: unfold(mty)}, expected, monad)
        s = de.get(e.var, ZERO_S)
        return tau, d_tensor(d_scale(s, dv), d_without(de, e.var))
    if isinstance(e, Op):
        interp = _op_interp(monad, e)
        if len(e.args) != interp.arity:
            raise TypeCheckError(f"{e.symbol} expects {interp.arity} arguments", "arity")
        ty = expected
        ds = []
        for a in e.args:
            ty, d = infer_term(a, scope, ty, monad)
            ds.append(d)
        names = set().union(*ds)
        out = {}
        for x in names:
            c = cbe_op(interp, [Cbe(d.get(x, ZERO_S)) for d in ds]).scalar
            if c != 0:
                out[x] = c
        return ty, out
    raise TypeCheckError(f"not a term: {e!r}", "syntax")


def infer(subject, scope=None, expected=None, monad: Monad = None,
          truncated: Optional[bool] = None):
    """``(type, demand)``; ``truncated`` selects truncated scaling (unit interval)."""
    scope = scope or {}
    if truncated is not None:
        with truncated_scaling(truncated):
            return infer(subject, scope, expected, monad)
    if is_term(subject):
        return infer_term(subject, scope, expected, monad)
    if is_value(subject):
        return infer_value(subject, scope, expected, monad)
    raise TypeCheckError(f"not a term or value: {subject!r}", "syntax")


@dataclass
class CheckResult:
    type: object
    demand: dict


def check(subject, declared: Env, declared_type, monad: Monad = None,
          truncated: Optional[bool] = None) -> CheckResult:
    """Succeed iff ``declared |- subject : declared_type`` is derivable."""
    ty, demand = infer(subject, declared.scope(), declared_type, monad, truncated)
    if ty != declared_type:
        _mismatch("subject", declared_type, ty)
    for x, need in demand.items():
        have = declared[x][0].scalar
        if have < need:
            raise TypeCheckError(
                f"variable {x} declared with sensitivity {format_scalar(have)} "
                f"but used with sensitivity {format_scalar(need)}", "sensitivity")
    return CheckResult(ty, demand)


def type_of_closed(subject, expected=None, monad: Monad = None):
    ty, demand = infer(subject, {}, expected, monad)
    if demand:
        raise TypeCheckError(f"free variables {sorted(demand)}", "open")
    return ty


# -- explicit derivations -----------------------------------------------------

@dataclass
class Derivation:
    rule: str
    env: dict  # name -> scalar, over the names in scope
    subject: object
    type: object
    premises: list = field(default_factory=list)
    binder: Optional[str] = None
    binder_scalar: object = None  # annotation required on the binder in premise(s)
    extra: object = None          # rule parameter (s, r, op interpretation)


def build_derivation(subject, env: Env, monad: Monad = None, expected=None) -> Derivation:
    """Reconstruct a rule-by-rule derivation from inferred demands.

    Each node's environment is the declared one at the root and the inferred
    demand (padded with zeros) below it; binder annotations are exactly those
    the rules prescribe.
    """
    monad = monad or DistMonad()
    scope = env.scope()
    root = _derive(subject, scope, expected, monad)
    declared = env.scalars()
    if any(declared.get(x, ZERO_S) < s for x, s in root.env.items()):
        raise TypeCheckError("declared environment below the inferred demand", "sensitivity")
    root.env = {x: declared.get(x, ZERO_S) for x in scope}
    return root


def _node(rule, subject, scope, expected, monad, **kw):
    ty, d = infer(subject, scope, expected, monad)
    return Derivation(rule, {x: d.get(x, ZERO_S) for x in scope}, subject, ty, **kw)


def _derive(n, scope, expected, monad) -> Derivation:
    ty, _ = infer(n, scope, expected, monad)
    if isinstance(n, Var):
        return _node("var", n, scope, expected, monad)
    if isinstance(n, Lam):
        body = _derive(n.body, {**scope, n.var: n.ty}, ty.cod, monad)
        body.env[n.var] = ONE
        return _node("lam", n, scope, expected, monad, premises=[body], binder=n.var,
                     binder_scalar=ONE)
    if isinstance(n, Inj):
        return _node("inj", n, scope, expected, monad,
                     premises=[_derive(n.value, scope, n.ty.items[n.index - 1], monad)])
    if isinstance(n, Fold):
        return _node("fold", n, scope, expected, monad,
                     premises=[_derive(n.value, scope, unfold(n.ty), monad)])
    if isinstance(n, BangV):
        return _node("bang", n, scope, expected, monad, extra=ty.scale.scalar,
                     premises=[_derive(n.value, scope, ty.body, monad)])
    if isinstance(n, Return):
        return _node("return", n, scope, expected, monad,
                     premises=[_derive(n.value, scope, ty, monad)])
    if isinstance(n, App):
        fty, _ = infer_value(n.fn, scope, None, monad)
        return _node("app", n, scope, expected, monad,
                     premises=[_derive(n.fn, scope, fty, monad),
                               _derive(n.arg, scope, fty.dom, monad)])
    if isinstance(n, Case):
        sty, _ = infer_value(n.scrut, scope, None, monad)
        prem = [_derive(n.scrut, scope, sty, monad)]
        branches = [_derive(b, {**scope, x: c}, ty, monad)
                    for (x, b), c in zip(n.branches, sty.items)]
        s = max([b.env[x] for (x, _), b in zip(n.branches, branches)], default=ZERO_S)
        # one shared environment for every branch
        shared = {y: max([b.env[y] for b in branches], default=ZERO_S) for y in scope}
        for (x, _), b in zip(n.branches, branches):
            b.env = {**shared, x: s}
        return _node("case", n, scope, expected, monad, premises=prem + branches,
                     binder_scalar=s)
    if isinstance(n, Let):
        sigma, _ = infer_term(n.bound, scope, None, monad)
        f = _derive(n.body, {**scope, n.var: sigma}, ty, monad)
        return _node("let", n, scope, expected, monad, binder=n.var,
                     binder_scalar=f.env[n.var],
                     premises=[_derive(n.bound, scope, sigma, monad), f])
    if isinstance(n, CaseBang):
        bty, _ = infer_value(n.scrut, scope, None, monad)
        body = _derive(n.body, {**scope, n.var: bty.body}, ty, monad)
        s = bang_factor(body.env[n.var], bty.scale.scalar)
        body.env[n.var] = ext_mul(s, bty.scale.scalar)
        return _node("case!", n, scope, expected, monad, binder=n.var, extra=s,
                     binder_scalar=body.env[n.var],
                     premises=[_derive(n.scrut, scope, bty, monad), body])
    if isinstance(n, CaseFold):
        mty, _ = infer_value(n.scrut, scope, None, monad)
        body = _derive(n.body, {**scope, n.var: unfold(mty)}, ty, monad)
        return _node("casefold", n, scope, expected, monad, binder=n.var,
                     binder_scalar=body.env[n.var],
                     premises=[_derive(n.scrut, scope, mty, monad), body])
    if isinstance(n, Op):
        return _node("op", n, scope, expected, monad, extra=_op_interp(monad, n),
                     premises=[_derive(a, scope, ty, monad) for a in n.args])
    raise TypeCheckError(f"cannot derive {n!r}")


def verify_derivation(node: Derivation, monad: Monad = None) -> bool:
    """Check every rule instance; subsumption allowed at each conclusion."""
    monad = monad or DistMonad()

    def geq(env, need: dict) -> bool:
        return all(env.get(x, ZERO_S) >= s for x, s in need.items())

    def outer(p: Derivation, binder=None):
        return {x: s for x, s in p.env.items() if x != binder}

    def ok(n: Derivation) -> bool:
        if not all(ok(p) for p in n.premises):
            return False
        P = n.premises
        subj = n.subject
        if n.rule == "var":
            return n.env.get(subj.name, ZERO_S) >= 1
        if n.rule == "lam":
            b = P[0]
            return (b.env.get(subj.var) == 1 and geq(n.env, outer(b, subj.var))
                    and n.type == Lolli(subj.ty, b.type))
        if n.rule in ("inj", "fold", "return"):
            return geq(n.env, P[0].env)
        if n.rule == "bang":
            return geq(n.env, d_scale(n.extra, P[0].env)) and n.type == Bang(Cbe(n.extra), P[0].type)
        if n.rule == "app":
            f, a = P
            return (isinstance(f.type, Lolli) and f.type.dom == a.type
                    and f.type.cod == n.type and geq(n.env, d_tensor(f.env, a.env)))
        if n.rule == "case":
            v, branches = P[0], P[1:]
            s = n.binder_scalar
            shared = None
            for (x, _), b in zip(subj.branches, branches):
                if b.env.get(x) != s or b.type != n.type:
                    return False
                o = outer(b, x)
                if shared is not None and o != shared:
                    return False
                shared = o
            sv = case_scale(s, len(subj.branches))
            return geq(n.env, d_tensor(d_scale(sv, v.env), shared or {}))
        if n.rule == "let":
            e, f = P
            s = f.env.get(subj.var, ZERO_S)
            return f.type == n.type and geq(
                n.env, d_tensor(d_scale(max(s, ONE), e.env), outer(f, subj.var)))
        if n.rule == "case!":
            v, b = P
            s, r = n.extra, v.type.scale.scalar
            return (b.env.get(subj.var) == ext_mul(s, r) and b.type == n.type
                    and geq(n.env, d_tensor(d_scale(s, v.env), outer(b, subj.var))))
        if n.rule == "casefold":
            v, b = P
            s = b.env.get(subj.var, ZERO_S)
            return b.type == n.type and geq(n.env, d_tensor(d_scale(s, v.env), outer(b, subj.var)))
        if n.rule == "op":
            if any(p.type != n.type for p in P):
                return False
            names = set().union(*(p.env for p in P))
            need = {x: cbe_op(n.extra, [Cbe(p.env.get(x, ZERO_S)) for p in P]).scalar
                    for x in names}
            return geq(n.env, need)
        return False

    return ok(node)
