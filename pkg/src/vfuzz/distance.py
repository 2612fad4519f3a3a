"""Approximating applicative similarity and bisimilarity distances.

The engine computes a chain of relations indexed by a level ``m``::

    T_0(e, f)      = k
    T_m(e, f)      = G V_m([[e]], [[f]])                      (m >= 1)
    V_m(inj_i v, inj_i w) = V_m(v, w),  mismatched injections = Bot
    V_m(fold v, fold w)   = V_m(v, w)
    V_m(!v, !w)           = s(V_m(v, w))           at type !_s sigma
    V_m(v, w)             = meet_{u in probes} T_{m-1}(v u, w u)   at sigma -o tau

Only function types consume a level; the first-order clauses are unrolled in
place, which is sound because the distance itself satisfies them as
equations.  Evaluation is truncated at the query budget and the meet over
arguments at the probe set, so the reported value is an approximant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .effects import StateMonad, get_monad
from .evaluation import Evaluator
from .quantale import BOOL, get_quantale
from .relators import ConversiveMeet, KernelRelator, Relator, RelatorCfg
from .syntax import (
    App, Bang, BangV, Case, CaseBang, CaseFold, Fold, Inj, Lam, Let, Lolli, Mu, Op,
    Return, Sum, TVar, Var, identity, is_term, is_value, subst_many, term_Omega, unfold,
)
from .typecheck import TypeCheckError, bang_factor, case_scale, infer, truncated_scaling


class DistanceError(ValueError):
    def __init__(self, msg: str, code: str = "distance-error"):
        super().__init__(msg)
        self.code = code


# -- probes ------------------------------------------------------------------

_PROBES: dict = {}


def probes(ty, depth: int) -> list:
    """A deterministic finite list of closed values of ``ty``."""
    key = (ty, depth)
    hit = _PROBES.get(key)
    if hit is None:
        hit = _probes(ty, depth)
        _PROBES[key] = hit
    return hit


def _dedup(xs):
    out, seen = [], set()
    for x in xs:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def _probes(ty, d):
    if isinstance(ty, Sum):
        return [Inj(i, ty, p) for i, comp in enumerate(ty.items, 1) for p in probes(comp, d)]
    if isinstance(ty, Mu):
        if d < 0:
            return []
        return [Fold(ty, p) for p in probes(unfold(ty), d - 1)]
    if isinstance(ty, Bang):
        return [BangV(p, ty.scale) for p in probes(ty.body, d)]
    if isinstance(ty, Lolli):
        sigma, tau = ty.dom, ty.cod
        omega = Lam("x", sigma, term_Omega(tau))
        ident = [identity(sigma)] if sigma == tau else []
        if not probes(sigma, d):
            return (ident or [omega])[:1]
        consts = [Lam("x", sigma, Return(w)) for w in probes(tau, d - 1)] if d >= 0 else []
        return _dedup(ident + [omega] + consts)
    if isinstance(ty, TVar):
        raise DistanceError(f"open type variable {ty.name}")
    raise DistanceError(f"not a type: {ty!r}")


# -- queries -----------------------------------------------------------------

MODES = ("sim", "bisim", "twoway")


@dataclass
class DistQuery:
    lhs: object
    rhs: object
    type: object
    mode: str = "sim"
    quantale: str = "unit"
    relator: RelatorCfg = field(default_factory=RelatorCfg)
    monad: str = "dist"
    locations: tuple = ("l",)
    budget: int = 8
    iters: int = 4
    probe_depth: int = 2
    diagonal: bool = True


@dataclass
class DistResult:
    value: object          # raw quantale value
    quantale: str
    stabilized: bool
    iterations: int
    trace: list            # value of the queried pair at levels 0..iters
    exact_evals: bool


class Engine:
    """Memoized approximants for one configuration.

    ``kernel=True`` runs the boolean pipeline: values live in the boolean
    quantale, the relator is the kernel of the configured one and bang
    clauses are conjugated by the kernel maps.
    """

    def __init__(self, quantale="unit", relator: Optional[Relator] = None,
                 monad="dist", locations=("l",), budget: int = 8, probe_depth: int = 2,
                 diagonal: bool = True, kernel: bool = False, mode: str = "sim",
                 evaluator: Optional[Evaluator] = None):
        self.monad = get_monad(monad, locations) if isinstance(monad, str) else monad
        base_q = get_quantale(quantale)
        if relator is None:
            relator = RelatorCfg().make(base_q, self.monad.name, self._states())
        if mode == "bisim" and not isinstance(relator, ConversiveMeet):
            relator = ConversiveMeet(relator)
        self.base_q = base_q
        self.kernel = kernel
        if kernel:
            self.relator = KernelRelator(relator)
            self.q = BOOL
        else:
            self.relator = relator
            self.q = relator.q
        self.budget = budget
        self.probe_depth = probe_depth
        self.diagonal = diagonal
        self.evaluator = evaluator or Evaluator(self.monad, typecheck=False)
        self.memo_t: dict = {}
        self.memo_v: dict = {}
        self.inexact: set = set()

    def _states(self):
        return self.monad.states if isinstance(self.monad, StateMonad) else None

    # -- pieces
    def bang(self, s, a):
        if self.kernel:
            q = self.base_q
            return q.scale(s, q.unit if a else q.bottom) == q.unit
        return self.q.scale(s, a)

    def ev(self, e):
        m, exact = self.evaluator.eval_exact(e, self.budget)
        if not exact:
            self.inexact.add(e)
        return m

    # -- the two mutually recursive tables
    def T(self, m: int, ty, e, f):
        if m <= 0:
            return self.q.unit
        if self.diagonal and e == f:
            return self.q.unit
        key = (m, ty, e, f)
        hit = self.memo_t.get(key)
        if hit is not None:
            return hit
        me, mf = self.ev(e), self.ev(f)
        val = self.relator.lift(lambda x, y: self.V(m, ty, x, y), me, mf)
        self.memo_t[key] = val
        return val

    def V(self, m: int, ty, v, w):
        if self.diagonal and v == w:
            return self.q.unit
        key = (m, ty, v, w)
        hit = self.memo_v.get(key)
        if hit is not None:
            return hit
        val = self._value_clause(m, ty, v, w)
        self.memo_v[key] = val
        return val

    def _value_clause(self, m, ty, v, w):
        q = self.q
        if isinstance(ty, Sum):
            if not (isinstance(v, Inj) and isinstance(w, Inj)):
                raise DistanceError(f"non-injection at sum type: {v}, {w}", "ill-typed")
            if v.index != w.index:
                return q.bottom
            return self.V(m, ty.items[v.index - 1], v.value, w.value)
        if isinstance(ty, Mu):
            if not (isinstance(v, Fold) and isinstance(w, Fold)):
                raise DistanceError(f"non-fold at recursive type: {v}, {w}", "ill-typed")
            return self.V(m, unfold(ty), v.value, w.value)
        if isinstance(ty, Bang):
            if not (isinstance(v, BangV) and isinstance(w, BangV)):
                raise DistanceError(f"non-bang at bang type: {v}, {w}", "ill-typed")
            return self.bang(ty.scale.scalar, self.V(m, ty.body, v.value, w.value))
        if isinstance(ty, Lolli):
            if m - 1 <= 0:
                return q.unit
            out = q.unit
            for u in probes(ty.dom, self.probe_depth):
                out = q.meet2(out, self.T(m - 1, ty.cod, App(v, u), App(w, u)))
                if out == q.bottom:
                    break
            return out
        raise DistanceError(f"cannot relate values at type {ty}", "ill-typed")

    # -- queries
    def at(self, m: int, ty, a, b):
        if is_term(a) and is_term(b):
            return self.T(m, ty, a, b)
        if is_value(a) and is_value(b):
            return self.V(m, ty, a, b)
        raise DistanceError("compare two terms or two values", "mixed")

    def open_at(self, m: int, ty, a, b, scope: dict, extra: Optional[dict] = None):
        """Open extension: meet over closing substitutions drawn from probes,
        plus any ``extra`` witnesses per variable (more witnesses can only
        bring the meet closer to the real one)."""
        extra = extra or {}
        names = sorted(scope)
        subs = [{}]
        for x in names:
            vals = _dedup(list(probes(scope[x], self.probe_depth)) + list(extra.get(x, ())))
            subs = [{**s, x: p} for s in subs for p in vals]
        out = self.q.unit
        for s in subs:
            out = self.q.meet2(out, self.at(m, ty, subst_many(a, s), subst_many(b, s)))
        return out

    def stable(self, level: int) -> bool:
        """Every pair memoized at ``level`` agrees with ``level - 1``, and every
        evaluation so far was exact."""
        if level <= 0:
            return not self.inexact
        while True:
            n_t, n_v = len(self.memo_t), len(self.memo_v)
            for (m, ty, a, b), val in list(self.memo_t.items()):
                if m == level and self.T(level - 1, ty, a, b) != val:
                    return False
            for (m, ty, a, b), val in list(self.memo_v.items()):
                if m == level and self.V(level - 1, ty, a, b) != val:
                    return False
            if (len(self.memo_t), len(self.memo_v)) == (n_t, n_v):
                break
        return not self.inexact


def _check_pair(q: DistQuery):
    for side in (q.lhs, q.rhs):
        try:
            ty, demand = infer(side, {}, q.type, get_monad(q.monad, q.locations))
        except TypeCheckError as err:
            raise DistanceError(f"ill-typed operand: {err}", "ill-typed") from None
        if demand:
            raise DistanceError(f"operand has free variables {sorted(demand)}", "open")
        if ty != q.type:
            raise DistanceError(f"operand has type {ty}, expected {q.type}", "ill-typed")
    if is_term(q.lhs) != is_term(q.rhs):
        raise DistanceError("compare two terms or two values", "mixed")


def make_engine(q: DistQuery, kernel: bool = False, mode: Optional[str] = None) -> Engine:
    monad = get_monad(q.monad, q.locations)
    base_q = get_quantale(q.quantale)
    states = monad.states if isinstance(monad, StateMonad) else None
    rel = q.relator.make(base_q, monad.name, states)
    mode = mode or q.mode
    return Engine(base_q, rel, monad, q.locations, q.budget, q.probe_depth, q.diagonal,
                  kernel=kernel, mode="bisim" if mode == "bisim" else "sim")


def _one_way(q: DistQuery, lhs, rhs, kernel=False, mode=None):
    eng = make_engine(q, kernel, mode)
    trace = [eng.at(m, q.type, lhs, rhs) for m in range(q.iters + 1)]
    return eng, trace


def distance(q: DistQuery, kernel: bool = False) -> DistResult:
    if q.mode not in MODES:
        raise DistanceError(f"unknown mode {q.mode!r}", "usage")
    if q.iters < 1:
        raise DistanceError("iters must be positive", "usage")
    _check_pair(q)
    if q.mode == "twoway":
        e1, t1 = _one_way(q, q.lhs, q.rhs, kernel, "sim")
        e2, t2 = _one_way(q, q.rhs, q.lhs, kernel, "sim")
        qq = e1.q
        trace = [qq.tensor(a, b) for a, b in zip(t1, t2)]
        stab = e1.stable(q.iters) and e2.stable(q.iters)
        exact = not e1.inexact and not e2.inexact
        return DistResult(trace[-1], qq.name, stab, q.iters, trace, exact)
    eng, trace = _one_way(q, q.lhs, q.rhs, kernel)
    return DistResult(trace[-1], eng.q.name, eng.stable(q.iters), q.iters, trace,
                      not eng.inexact)


# -- checks ---------------------------------------------------------------------------

def adequacy_check(q: DistQuery, result: Optional[DistResult] = None) -> bool:
    """Convergence-mass difference bounded by the distance (dist monad, [0,1])."""
    if q.monad != "dist" or q.quantale != "unit":
        raise DistanceError("adequacy is stated for the dist monad over [0,1]", "usage")
    if not (is_term(q.lhs) and is_term(q.rhs)):
        raise DistanceError("adequacy compares terms", "usage")
    result = result or distance(q)
    ev = Evaluator(q.monad, typecheck=False)
    a = ev.eval_n(q.lhs, q.budget).mass
    b = ev.eval_n(q.rhs, q.budget).mass
    return max(a - b, Fraction(0)) <= result.value


def kernel_check(q: DistQuery):
    """``(agree, quantitative, boolean, stabilized)``."""
    quant = distance(q)
    boolean = distance(q, kernel=True)
    qq = get_quantale(q.quantale)
    return (qq.leq(qq.unit, quant.value) == boolean.value, quant, boolean,
            quant.stabilized and boolean.stabilized)


def metric_preservation_check(e, env, vs: dict, ws: dict, q: DistQuery):
    """``(holds, lhs, rhs, stabilized)`` for the metric preservation inequality.

    ``env`` maps each variable to ``(scalar, type)``; ``vs``/``ws`` give the two
    closing substitutions.
    """
    eng = make_engine(q)
    qq = eng.q
    lhs = qq.unit
    for x, (s, ty) in env.items():
        scalar = getattr(s, "scalar", s)
        lhs = qq.tensor(lhs, qq.scale(scalar, eng.V(q.iters, ty, vs[x], ws[x])))
    a, b = subst_many(e, vs), subst_many(e, ws)
    rhs = eng.at(q.iters, q.type, a, b)
    return qq.leq(lhs, rhs), lhs, rhs, eng.stable(q.iters)


# -- compatibility clauses ----------------------------------------------------------

CLAUSES = ("var", "lambda", "app", "inj", "case", "return", "let", "bang", "case!",
           "fold", "casefold", "op")


@dataclass
class ClauseOutcome:
    clause: str
    holds: bool
    lhs: object
    rhs: object
    stabilized: bool

    @property
    def status(self) -> str:
        if not self.stabilized:
            return "inconclusive"
        return "pass" if self.holds else "fail"


def _demand(eng: Engine, term, x, ty, tau):
    _, d = infer(term, {x: ty}, tau, eng.monad, eng.base_q.truncated)
    return d.get(x, Fraction(0))


def compat_check(clause: str, fill: dict, q: DistQuery) -> ClauseOutcome:
    """Instantiate one compatibility inequality on closed fillings.

    Open premises ``x :_s sigma |- e, f`` use the open extension; ``s`` is the
    least annotation typing both bodies.  Diagonal shortcuts are switched off
    so that reflexivity is computed rather than assumed.
    """
    q = DistQuery(**{**q.__dict__, "diagonal": False})
    eng = make_engine(q)
    Q, L = eng.q, q.iters
    f = fill
    if clause == "var":
        lhs = Q.unit
        rhs = eng.open_at(L, f["ty"], Var("x"), Var("x"), {"x": f["ty"]})
    elif clause == "lambda":
        x, sigma, tau = f["x"], f["sigma"], f["tau"]
        lhs = eng.open_at(L, tau, f["e"], f["f"], {x: sigma})
        rhs = eng.V(L, Lolli(sigma, tau), Lam(x, sigma, f["e"]), Lam(x, sigma, f["f"]))
    elif clause == "app":
        fty = Lolli(f["sigma"], f["tau"])
        lhs = Q.tensor(eng.V(L, fty, f["v"], f["v2"]), eng.V(L, f["sigma"], f["w"], f["w2"]))
        rhs = eng.T(L, f["tau"], App(f["v"], f["w"]), App(f["v2"], f["w2"]))
    elif clause in ("inj", "fold", "bang"):
        ty = f["ty"]
        lhs = eng.V(L, _inner(ty, f.get("index")), f["v"], f["w"])
        wrap = {"inj": lambda v: Inj(f["index"], ty, v), "fold": lambda v: Fold(ty, v),
                "bang": lambda v: BangV(v, ty.scale)}[clause]
        rhs = eng.V(L, ty, wrap(f["v"]), wrap(f["w"]))
        if clause == "bang":
            lhs = Q.scale(ty.scale.scalar, lhs)
    elif clause == "return":
        lhs = eng.V(L, f["ty"], f["v"], f["w"])
        rhs = eng.T(L, f["ty"], Return(f["v"]), Return(f["w"]))
    elif clause in ("case", "case!", "casefold"):
        ty, x, tau = f["ty"], f["x"], f["tau"]
        v, w = f["v"], f["w"]
        if clause == "case":
            i = f["index"]
            inner = ty.items[i - 1]
            sv, sw = Inj(i, ty, v), Inj(i, ty, w)
            bl = list(f["others_l"])
            br = list(f["others_r"])
            bl.insert(i - 1, (x, f["e"]))
            br.insert(i - 1, (x, f["f"]))
            el, er = Case(sv, tuple(bl)), Case(sw, tuple(br))
        elif clause == "case!":
            inner = ty.body
            sv, sw = BangV(v, ty.scale), BangV(w, ty.scale)
            el, er = CaseBang(sv, x, f["e"]), CaseBang(sw, x, f["f"])
        else:
            inner = unfold(ty)
            sv, sw = Fold(ty, v), Fold(ty, w)
            el, er = CaseFold(sv, x, f["e"]), CaseFold(sw, x, f["f"])
        d = max(_demand(eng, f["e"], x, inner, tau), _demand(eng, f["f"], x, inner, tau))
        if clause == "case!":
            with truncated_scaling(eng.base_q.truncated):
                s = bang_factor(d, ty.scale.scalar)
        elif clause == "case":
            s = case_scale(d, len(ty.items))
        else:
            s = d
        opened = eng.open_at(L, tau, f["e"], f["f"], {x: inner}, {x: [v, w]})
        lhs = Q.tensor(Q.scale(s, eng.V(L, ty, sv, sw)), opened)
        rhs = eng.T(L, tau, el, er)
    elif clause == "let":
        x, sigma, tau = f["x"], f["sigma"], f["tau"]
        d = max(_demand(eng, f["f"], x, sigma, tau), _demand(eng, f["f2"], x, sigma, tau))
        support = eng.monad.support(eng.ev(f["e"])) + eng.monad.support(eng.ev(f["e2"]))
        opened = eng.open_at(L, tau, f["f"], f["f2"], {x: sigma}, {x: support})
        lhs = Q.tensor(Q.scale(max(d, Fraction(1)), eng.T(L, sigma, f["e"], f["e2"])), opened)
        rhs = eng.T(L, tau, Let(x, f["e"], f["f"]), Let(x, f["e2"], f["f2"]))
    elif clause == "op":
        interp = eng.monad.sigma_interp(f["symbol"], f.get("param"))
        parts = [eng.T(L, f["tau"], a, b) for a, b in zip(f["es"], f["fs"])]
        lhs = interp.eval_raw(Q, parts)
        rhs = eng.T(L, f["tau"], Op(f["symbol"], tuple(f["es"]), f.get("param")),
                    Op(f["symbol"], tuple(f["fs"]), f.get("param")))
    else:
        raise DistanceError(f"unknown clause {clause!r}", "usage")
    return ClauseOutcome(clause, Q.leq(lhs, rhs), lhs, rhs, eng.stable(L))


def _inner(ty, index):
    if isinstance(ty, Sum):
        return ty.items[index - 1]
    if isinstance(ty, Mu):
        return unfold(ty)
    return ty.body
