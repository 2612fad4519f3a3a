"""Executable property suites for the metatheory.

Every suite takes a ``random.Random`` and a sample count and returns a list
of :class:`LawResult`.  The CLI ``verify`` command and the acceptance tests
both run these, so a law is stated once.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .distance import (
    CLAUSES, DistQuery, adequacy_check, compat_check, distance, kernel_check,
    metric_preservation_check, probes,
)
from .effects import Partial, Pow, StateKernel, SubDist, get_monad
from .evaluation import Evaluator
from .fuzz import BOOL2, FIRST_ORDER, FuzzError, Fuzzer
from .quantale import (
    INF, LAWVERE, UNIT, Cbe, QuantaleElem, cbe_apply, cbe_compose, cbe_leq,
    ext_monus, get_quantale, phi, psi, quantale_names, sample_values,
)
from .relators import (
    ConversiveMeet, HausdorffRelator, PartialRelator, StateRelator,
    VRelation, WassersteinBotRelator, WassersteinRelator, rel_compose,
)
from .syntax import (
    NAT, NAT_BODY, App, Bang, CaseBang, Lolli, Op, Return, Sum, Var, numeral, term_Omega,
)
from .transport import brute_force_transport, check_certificate, solve_transport
from .typecheck import TypeCheckError, infer


@dataclass
class LawResult:
    suite: str
    law: str
    passed: int = 0
    failed: int = 0
    inconclusive: int = 0
    #: passes whose hypothesis side was already the bottom element
    vacuous: int = 0
    seconds: float = 0.0
    counterexample: Optional[str] = None

    @property
    def total(self) -> int:
        return self.passed + self.failed + self.inconclusive

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.passed > 0

    def record(self, ok: Optional[bool], detail: Callable[[], str] = lambda: "",
               vacuous: bool = False):
        """``ok=None`` records an inconclusive sample."""
        if ok is None:
            self.inconclusive += 1
        elif ok:
            self.passed += 1
            self.vacuous += vacuous
        else:
            self.failed += 1
            if self.counterexample is None:
                self.counterexample = detail()

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = f", {self.inconclusive} inconclusive" if self.inconclusive else ""
        if self.vacuous:
            extra += f", {self.vacuous} vacuous"
        out = (f"{status} {self.suite}/{self.law}: {self.passed}/{self.total} passed"
               f"{extra} ({self.seconds:.2f}s)")
        if self.counterexample:
            out += f"\n    counterexample: {self.counterexample}"
        return out


@dataclass
class SuiteReport:
    suite: str
    seed: int
    results: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)


class _Laws:
    """Collects timed LawResults by name."""

    def __init__(self, suite: str):
        self.suite = suite
        self.by_name: dict = {}
        self.order: list = []

    def __call__(self, law: str) -> LawResult:
        if law not in self.by_name:
            self.by_name[law] = LawResult(self.suite, law)
            self.order.append(law)
        return self.by_name[law]

    def timed(self, law: str):
        res = self(law)

        class _T:
            def __enter__(self):
                self.t = time.perf_counter()
                return res

            def __exit__(self, *exc):
                res.seconds += time.perf_counter() - self.t
                return False

        return _T()

    def results(self):
        return [self.by_name[k] for k in self.order]


# -- quantales ---------------------------------------------------------------

def quantale_suite(rng: random.Random, n: int = 200):
    laws = _Laws("quantale")
    scalars = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3), INF]
    int_scalars = [Fraction(0), Fraction(1), Fraction(2), Fraction(3), INF]
    for name in quantale_names():
        q = get_quantale(name)
        cs = int_scalars if name.startswith("tnorm") else scalars
        for _ in range(n):
            a, b, c = sample_values(q, rng, 3)
            s, r = rng.choice(cs), rng.choice(cs)
            d = lambda: f"{name}: a={a}, b={b}, c={c}, s={s}, r={r}"
            with laws.timed(f"{name}:monoid") as L:
                L.record(q.tensor(a, q.tensor(b, c)) == q.tensor(q.tensor(a, b), c)
                         and q.tensor(a, b) == q.tensor(b, a)
                         and q.tensor(a, q.unit) == a, d)
            with laws.timed(f"{name}:integral") as L:
                L.record(q.leq(a, q.unit) and q.leq(q.bottom, a), d)
            with laws.timed(f"{name}:lattice") as L:
                j, m = q.join2(a, b), q.meet2(a, b)
                L.record(q.leq(a, j) and q.leq(b, j) and q.leq(m, a) and q.leq(m, b)
                         and (not (q.leq(a, c) and q.leq(b, c)) or q.leq(j, c)), d)
            with laws.timed(f"{name}:distributive") as L:
                L.record(q.tensor(a, q.join2(b, c)) == q.join2(q.tensor(a, b), q.tensor(a, c)), d)
            with laws.timed(f"{name}:residuation") as L:
                L.record(q.leq(q.tensor(a, b), c) == q.leq(b, q.residual(a, c)), d)
            with laws.timed(f"{name}:cbe-lax") as L:
                L.record(q.leq(q.tensor(q.scale(s, a), q.scale(s, b)), q.scale(s, q.tensor(a, b)))
                         and q.leq(q.unit, q.scale(s, q.unit))
                         and (not q.leq(a, b) or q.leq(q.scale(s, a), q.scale(s, b))), d)
            with laws.timed(f"{name}:cbe-order") as L:
                # s <= r as CBEs means s(a) <= r(a) pointwise
                e = QuantaleElem(name, a)
                ok = (not cbe_leq(Cbe(s), Cbe(r))
                      or q.leq(cbe_apply(Cbe(s), e).value, cbe_apply(Cbe(r), e).value))
                comp = cbe_apply(cbe_compose(Cbe(r), Cbe(s)), e).value
                seq = cbe_apply(Cbe(r), cbe_apply(Cbe(s), e)).value
                if name in ("bool", "lawvere", "ultra"):
                    ok = ok and comp == seq
                elif name == "unit":
                    # truncation makes the product scalar only an upper bound
                    ok = ok and q.leq(comp, seq)
                L.record(ok, d)
            with laws.timed(f"{name}:kernel-adjunction") as L:
                bb = rng.random() < 0.5
                e = QuantaleElem(name, a)
                L.record(q.leq(psi(bb, q).value, a) == ((not bb) or phi(e)), d)
    return laws.results()


# -- random finite instances for relators -------------------------------------

XS, YS, ZS = (0, 1, 2), ("a", "b", "c"), (10, 11, 12)


def _weights(rng, k, mass):
    if k == 0:
        return []
    cuts = sorted(Fraction(rng.randint(0, 12), 12) for _ in range(k - 1))
    pts = [Fraction(0)] + cuts + [Fraction(1)]
    return [(pts[i + 1] - pts[i]) * mass for i in range(k)]


def rand_subdist(rng, xs, full=False):
    mass = Fraction(1) if full else Fraction(rng.randint(0, 4), 4)
    pts = rng.sample(list(xs), rng.randint(1, len(xs)))
    return SubDist({x: w for x, w in zip(pts, _weights(rng, len(pts), mass)) if w > 0})


def rand_monadic(kind: str, rng, xs, states=None):
    if kind == "partial":
        return Partial(None if rng.random() < 0.25 else rng.choice(xs))
    if kind == "powerset":
        return Pow(x for x in xs if rng.random() < 0.5)
    if kind == "dist_full":
        return rand_subdist(rng, xs, full=True)
    if kind == "dist":
        return rand_subdist(rng, xs)
    if kind == "state":
        return StateKernel({b: rand_subdist(rng, [(b2, x) for b2 in states for x in xs])
                            for b in states})
    raise ValueError(kind)


def rand_relation(q, rng, xs, ys) -> VRelation:
    vals = sample_values(q, rng, len(xs) * len(ys))
    table = {(x, y): v for (x, y), v in zip(((x, y) for x in xs for y in ys), vals)}
    return VRelation(q, table, default=q.bottom)


def _rel_above(q, rng, alpha, xs, ys) -> VRelation:
    """A relation pointwise above ``alpha`` in the quantale order."""
    extra = rand_relation(q, rng, xs, ys)
    return VRelation(q, {(x, y): q.join2(alpha(x, y), extra(x, y)) for x in xs for y in ys},
                     default=q.bottom)


def _relators():
    state_m = get_monad("state", ("l",))
    S = state_m.states
    base = [
        ("partial", PartialRelator(LAWVERE), "partial", get_monad("partial")),
        ("hausdorff", HausdorffRelator(LAWVERE), "powerset", get_monad("powerset")),
        ("wasserstein", WassersteinRelator(UNIT), "dist_full", get_monad("dist")),
        ("wasserstein_bot", WassersteinBotRelator(UNIT), "dist", get_monad("dist")),
        ("state", StateRelator(UNIT, S), "state", state_m),
    ]
    conv = [(f"conversive({n})", ConversiveMeet(r), k, m) for n, r, k, m in base]
    return base, conv, S


def relator_suite(rng: random.Random, n: int = 200):
    laws = _Laws("relators")
    base, conv, S = _relators()
    for name, G, kind, monad in base + conv:
        q = G.q
        for _ in range(n):
            m = rand_monadic(kind, rng, XS, S)
            m2 = rand_monadic(kind, rng, XS, S)
            nn = rand_monadic(kind, rng, YS, S)
            p = rand_monadic(kind, rng, ZS, S)
            alpha = rand_relation(q, rng, XS, YS)
            beta = rand_relation(q, rng, YS, ZS)
            f = dict(zip(XS, (rng.choice(YS) for _ in XS)))
            d = lambda: f"{name}: m={m!r} n={nn!r} p={p!r}"
            with laws.timed(f"{name}:V-rel1") as L:
                ident = lambda x, y: q.unit if x == y else q.bottom
                L.record(G.lift(ident, m, m) == q.unit, d)
            with laws.timed(f"{name}:V-rel2") as L:
                ba = rel_compose(beta, alpha, YS)
                lhs = q.tensor(G.lift(alpha, m, nn), G.lift(beta, nn, p))
                L.record(q.leq(lhs, G.lift(ba, m, p)), d)
            with laws.timed(f"{name}:V-rel3") as L:
                fm = monad.fmap(lambda x: f[x], m)
                graph = lambda x, y: q.unit if f[x] == y else q.bottom
                cograph = lambda y, x: q.unit if f[x] == y else q.bottom
                L.record(G.lift(graph, m, fm) == q.unit and G.lift(cograph, fm, m) == q.unit, d)
            with laws.timed(f"{name}:V-rel4") as L:
                hi = _rel_above(q, rng, alpha, XS, YS)
                L.record(q.leq(G.lift(alpha, m, nn), G.lift(hi, m, nn))
                         and q.leq(G.lift(alpha, m2, nn), G.lift(hi, m2, nn)), d)
            if G.conversive:
                with laws.timed(f"{name}:V-rel5") as L:
                    dual = lambda y, x: alpha(x, y)
                    L.record(G.lift(dual, nn, m) == G.lift(alpha, m, nn), d)
    return laws.results()


# -- strong relators, Sigma-compatibility, inductivity ---------------------------

def _need(q, b, g, s):
    """Least ``a`` (largest real) with ``g (x) s(a) <= b``, read as reals."""
    if b == INF:
        return INF
    if s == 0:
        return q.unit
    return min(ext_monus(b, g) / s, q.bottom) if q.bottom != INF else ext_monus(b, g) / s


def strong_suite(rng: random.Random, n: int = 200):
    laws = _Laws("strong")
    base, _, S = _relators()
    cases = [b for b in base if b[0] in ("partial", "hausdorff", "wasserstein_bot", "state")]
    scalars = [Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3)]
    for name, G, kind, monad in cases:
        q = G.q
        for _ in range(n):
            alpha = rand_relation(q, rng, XS, YS)
            x, y = rng.choice(XS), rng.choice(YS)
            with laws.timed(f"{name}:lax-unit") as L:
                L.record(q.leq(alpha(x, y), G.lift(alpha, monad.unit(x), monad.unit(y))),
                         lambda: f"{name}: x={x} y={y} alpha={alpha(x, y)}")
            # lax bind: enforce the hypothesis by construction, then test the conclusion
            fk = {a: rand_monadic(kind, rng, ZS, S) for a in XS}
            gk = {b: rand_monadic(kind, rng, ZS, S) for b in YS}
            beta = rand_relation(q, rng, ZS, ZS)
            gamma = sample_values(q, rng, 1)[0]
            s = rng.choice(scalars)
            noise = rand_relation(q, rng, XS, YS)
            table = {}
            for a in XS:
                for b in YS:
                    need = _need(q, G.lift(beta, fk[a], gk[b]), gamma, s)
                    table[(a, b)] = q.meet2(noise(a, b), need)
            alpha2 = VRelation(q, table, default=q.bottom)
            m = rand_monadic(kind, rng, XS, S)
            nn = rand_monadic(kind, rng, YS, S)
            with laws.timed(f"{name}:lax-bind") as L:
                hyp = all(q.leq(q.tensor(gamma, q.scale(s, alpha2(a, b))),
                                G.lift(beta, fk[a], gk[b])) for a in XS for b in YS)
                lhs = q.tensor(gamma, q.scale(s, G.lift(alpha2, m, nn)))
                rhs = G.lift(beta, monad.bind(lambda a: fk[a], m), monad.bind(lambda b: gk[b], nn))
                L.record(hyp and q.leq(lhs, rhs),
                         lambda: f"{name}: gamma={gamma} s={s} lhs={lhs} rhs={rhs}")
            with laws.timed(f"{name}:inductive") as L:
                L.record(G.lift(alpha, monad.bottom(), nn) == q.unit)
            with laws.timed(f"{name}:sigma-compatible") as L:
                ms = [rand_monadic(kind, rng, XS, S) for _ in range(2)]
                ns = [rand_monadic(kind, rng, YS, S) for _ in range(2)]
                ok = True
                for sym, param, ar in _ops_of(monad, rng):
                    interp = monad.sigma_interp(sym, param)
                    lhs = interp.eval_raw(q, [G.lift(alpha, a, b) for a, b in zip(ms[:ar], ns[:ar])])
                    rhs = G.lift(alpha, monad.op(sym, param, ms[:ar]), monad.op(sym, param, ns[:ar]))
                    ok = ok and q.leq(lhs, rhs)
                L.record(ok)
            with laws.timed(f"{name}:chain-continuity") as L:
                # a chain and its last element stand in for the lub
                xs_chain = [monad.bottom(), m]
                lub = monad.lub(xs_chain)
                lhs = q.meet(G.lift(alpha, c, nn) for c in xs_chain)
                L.record(q.leq(lhs, G.lift(alpha, lub, nn)))
    return laws.results()


def _ops_of(monad, rng):
    if monad.name == "partial":
        return []
    out = [("op+", rng.choice([Fraction(1, 3), Fraction(1, 2)]) if monad.name != "powerset" else None, 2)]
    if monad.name == "state":
        out += [("get", "l", 2), ("set0", "l", 1), ("set1", "l", 1)]
    return out


# -- monads and evaluation ----------------------------------------------------------

def monad_suite(rng: random.Random, n: int = 200):
    laws = _Laws("monad")
    _, _, S = _relators()
    for mname, kind in (("partial", "partial"), ("powerset", "powerset"),
                        ("dist", "dist"), ("state", "state")):
        M = get_monad(mname, ("l",))
        for _ in range(n):
            m = rand_monadic(kind, rng, XS, S)
            f = {x: rand_monadic(kind, rng, YS, S) for x in XS}
            g = {y: rand_monadic(kind, rng, ZS, S) for y in YS}
            x = rng.choice(XS)
            with laws.timed(f"{mname}:left-unit") as L:
                L.record(M.bind(lambda a: f[a], M.unit(x)) == f[x])
            with laws.timed(f"{mname}:right-unit") as L:
                L.record(M.bind(M.unit, m) == m)
            with laws.timed(f"{mname}:associativity") as L:
                lhs = M.bind(lambda b: g[b], M.bind(lambda a: f[a], m))
                rhs = M.bind(lambda a: M.bind(lambda b: g[b], f[a]), m)
                L.record(lhs == rhs)
            with laws.timed(f"{mname}:bottom-least") as L:
                L.record(M.leq(M.bottom(), m) and M.bind(lambda a: f[a], M.bottom()) == M.bottom())
            with laws.timed(f"{mname}:algebraic-ops") as L:
                ok = True
                for sym, param, ar in _ops_of(M, rng):
                    ms = [rand_monadic(kind, rng, XS, S) for _ in range(ar)]
                    lhs = M.bind(lambda a: f[a], M.op(sym, param, ms))
                    rhs = M.op(sym, param, [M.bind(lambda a: f[a], mm) for mm in ms])
                    ok = ok and lhs == rhs
                L.record(ok)
    return laws.results()


def eval_suite(rng: random.Random, n: int = 500, max_n: int = 12):
    laws = _Laws("eval")
    monads = ("partial", "powerset", "dist", "state")
    for i in range(n):
        mname = monads[i % len(monads)]
        fz = Fuzzer(rng, mname)
        ty = rng.choice([NAT, BOOL2, Lolli(NAT, NAT)])
        e = fz.closed_term(ty, rng.randint(2, 4))
        ev = Evaluator(mname, typecheck=False)
        with laws.timed("monotone") as L:
            prev = ev.eval_n(e, 0)
            ok = True
            for k in range(1, max_n + 1):
                cur = ev.eval_n(e, k)
                ok = ok and ev.monad.leq(prev, cur)
                prev = cur
            L.record(ok, lambda: f"{mname}: {e}")
        with laws.timed("exact-is-limit") as L:
            m, exact = ev.eval_exact(e, 6)
            L.record(not exact or m == ev.eval_n(e, max_n), lambda: f"{mname}: {e}")
    return laws.results()


def transport_suite(rng: random.Random, n: int = 500):
    laws = _Laws("transport")
    for _ in range(n):
        rows, cols = rng.randint(1, 4), rng.randint(1, 4)
        den = rng.choice([2, 3, 4, 6, 12])
        supply = _weights_pos(rng, rows, den)
        demand = _weights_pos(rng, cols, den)
        cost = [[Fraction(rng.randint(0, 8), rng.choice([1, 2, 3])) for _ in range(cols)]
                for _ in range(rows)]
        d = lambda: f"supply={supply} demand={demand} cost={cost}"
        with laws.timed("duality") as L:
            res = solve_transport(supply, demand, cost)
            L.record(check_certificate(supply, demand, cost, res), d)
        with laws.timed("brute-force-oracle") as L:
            L.record(res.cost == brute_force_transport(supply, demand, cost), d)
    return laws.results()


def _weights_pos(rng, k, den):
    """``k`` positive multiples of ``1/(k*den)`` summing to one."""
    units = k * den
    cuts = sorted(rng.sample(range(1, units), k - 1)) if k > 1 else []
    pts = [0] + cuts + [units]
    return [Fraction(pts[i + 1] - pts[i], units) for i in range(k)]


# -- distances ---------------------------------------------------------------------

_QUANT = {"partial": "lawvere", "powerset": "lawvere", "dist": "unit", "state": "unit"}


def _pair_type(rng):
    return rng.choice([NAT, NAT, BOOL2, Lolli(NAT, NAT)])


def adequacy_suite(rng: random.Random, n: int = 300, budget: int = 10):
    laws = _Laws("adequacy")
    fz = Fuzzer(rng, "dist")
    for _ in range(n):
        e, f = fz.closed_term(NAT, 3), fz.closed_term(NAT, 3)
        if rng.random() < 0.2:
            f = Op("op+", (e, term_Omega(NAT)), Fraction(rng.randint(1, 3), 4))
        q = DistQuery(e, f, NAT, budget=budget, iters=3)
        with laws.timed("mass-bound") as L:
            L.record(adequacy_check(q), lambda: f"{e}  vs  {f}")
    return laws.results()


def kernel_suite(rng: random.Random, n: int = 200, budget: int = 10):
    laws = _Laws("kernel")
    for mname in ("partial", "powerset", "dist", "state"):
        fz = Fuzzer(rng, mname)
        for _ in range(n):
            ty = _pair_type(rng)
            e = fz.closed_term(ty, 3)
            f = e if rng.random() < 0.1 else fz.closed_term(ty, 3)
            q = DistQuery(e, f, ty, quantale=_QUANT[mname], monad=mname, budget=budget,
                          iters=3, mode=rng.choice(["sim", "bisim"]))
            with laws.timed(mname) as L:
                agree, quant, boolean, stab = kernel_check(q)
                L.record(agree if stab else None,
                         lambda: f"{e}  vs  {f}: {quant.value} / {boolean.value}")
    return laws.results()


def distance_suite(rng: random.Random, n_diag: int = 500, n_sym: int = 200,
                   n_trans: int = 200, budget: int = 10):
    laws = _Laws("distance")
    monads = ("partial", "powerset", "dist", "state")
    for i in range(n_diag):
        mname = monads[i % 4]
        fz = Fuzzer(rng, mname)
        ty = _pair_type(rng)
        e = fz.closed_term(ty, 3)
        q = DistQuery(e, e, ty, quantale=_QUANT[mname], monad=mname, budget=budget,
                      iters=3, diagonal=False)
        with laws.timed("diagonal") as L:
            r = distance(q)
            unit = get_quantale(q.quantale).unit
            L.record(r.value == unit if r.stabilized else None, lambda: f"{mname}: {e}")
        with laws.timed("antitone-iterates") as L:
            qq = get_quantale(q.quantale)
            L.record(all(qq.leq(b, a) for a, b in zip(r.trace, r.trace[1:])))
    for i in range(n_sym):
        mname = monads[i % 4]
        fz = Fuzzer(rng, mname)
        ty = _pair_type(rng)
        e, f = fz.closed_term(ty, 3), fz.closed_term(ty, 3)
        base = dict(quantale=_QUANT[mname], monad=mname, budget=budget, iters=3, mode="bisim")
        with laws.timed("bisim-symmetry") as L:
            r1 = distance(DistQuery(e, f, ty, **base))
            r2 = distance(DistQuery(f, e, ty, **base))
            L.record(r1.value == r2.value if r1.stabilized and r2.stabilized else None,
                     lambda: f"{mname}: {e}  vs  {f}: {r1.value} / {r2.value}")
    for i in range(n_trans):
        mname = monads[i % 4]
        fz = Fuzzer(rng, mname)
        ty = _pair_type(rng)
        e, f, g = (fz.closed_term(ty, 3) for _ in range(3))
        base = dict(quantale=_QUANT[mname], monad=mname, budget=budget, iters=3)
        qq = get_quantale(base["quantale"])
        with laws.timed("transitivity") as L:
            rs = [distance(DistQuery(a, b, ty, **base)) for a, b in ((e, f), (f, g), (e, g))]
            ok = qq.leq(qq.tensor(rs[0].value, rs[1].value), rs[2].value)
            L.record(ok if all(r.stabilized for r in rs) else None,
                     lambda: f"{mname}: {[r.value for r in rs]}")
    # probe monotonicity and budget monotonicity where the right side is exact
    fz = Fuzzer(rng, "dist")
    for _ in range(max(n_sym // 2, 1)):
        ty = Lolli(NAT, NAT)
        v, w = fz.closed_value(ty), fz.closed_value(ty)
        e, f = Return(v), Return(w)
        with laws.timed("probe-monotone") as L:
            vals = [distance(DistQuery(e, f, ty, budget=budget, iters=3, probe_depth=d)).value
                    for d in (0, 1, 2, 3)]
            L.record(all(UNIT.leq(b, a) for a, b in zip(vals, vals[1:])),
                     lambda: f"{v} vs {w}: {vals}")
    for _ in range(max(n_sym // 2, 1)):
        e, f = fz.closed_term(NAT, 3), fz.closed_term(NAT, 3)
        ev = Evaluator("dist", typecheck=False)
        b0 = rng.randint(2, 6)
        if not ev.eval_exact(f, b0)[1]:
            continue
        with laws.timed("budget-monotone-exact-rhs") as L:
            lo = distance(DistQuery(e, f, NAT, budget=b0, iters=3)).value
            hi = distance(DistQuery(e, f, NAT, budget=b0 + 4, iters=3)).value
            L.record(UNIT.leq(hi, lo), lambda: f"{e} vs {f}: {lo} then {hi}")
    return laws.results()


# -- compatibility clauses ------------------------------------------------------------

def _open_pair(fz: Fuzzer, rng, tau, scope, depth=2, max_s=None):
    """Two open terms under ``scope``; the second is often a perturbation."""
    for _ in range(50):
        e, de = fz.typed_term(tau, depth, scope)
        if rng.random() < 0.3:
            f, df = e, de
        elif rng.random() < 0.5:
            other, do = fz.typed_term(tau, depth - 1, scope)
            f = Op("op+", (e, other), rng.choice([Fraction(1, 2), Fraction(3, 4)])) \
                if fz.monad.name != "partial" else other
            try:
                _, df = infer(f, scope, tau, fz.monad)
            except TypeCheckError:
                continue
        else:
            f, df = fz.typed_term(tau, depth, scope)
        if max_s is None or all(max(de.get(x, 0), df.get(x, 0)) <= max_s for x in scope):
            return e, f
    raise FuzzError("no open pair")


FN = Lolli(NAT, NAT)
_VALUE_TYPES = FIRST_ORDER + (FN, Bang(Cbe(Fraction(1, 2)), NAT), Bang(Cbe(Fraction(1, 2)), FN))


def _value_pair(fz: Fuzzer, rng, ty) -> dict:
    v = fz.closed_value(ty)
    return {"v": v, "w": v if rng.random() < 0.2 else fz.closed_value(ty)}


def sample_filling(clause: str, rng, fz: Fuzzer, probe_depth: int) -> dict:
    tau = rng.choice([NAT, NAT, BOOL2])
    if clause == "var":
        return {"ty": rng.choice(list(FIRST_ORDER) + [Lolli(NAT, NAT)])}
    if clause == "lambda":
        sigma = rng.choice(FIRST_ORDER)
        e, f = _open_pair(fz, rng, tau, {"x": sigma}, max_s=1)
        return {"x": "x", "sigma": sigma, "tau": tau, "e": e, "f": f}
    if clause == "app":
        sigma = rng.choice(FIRST_ORDER)
        fty = Lolli(sigma, tau)
        ps = probes(sigma, probe_depth)
        v, w = fz.closed_value(fty), rng.choice(ps)
        return {"sigma": sigma, "tau": tau, "v": v, "w": w,
                "v2": v if rng.random() < 0.3 else fz.closed_value(fty),
                "w2": w if rng.random() < 0.5 else rng.choice(ps)}
    if clause == "inj":
        ty = rng.choice([BOOL2, Sum((NAT, BOOL2)), Sum((FN, NAT))])
        i = rng.randint(1, len(ty.items))
        comp = ty.items[i - 1]
        return {"ty": ty, "index": i, **_value_pair(fz, rng, comp)}
    if clause == "fold":
        return {"ty": NAT, **_value_pair(fz, rng, NAT_BODY)}
    if clause == "bang":
        ty = Bang(Cbe(rng.choice([0, Fraction(1, 2), 1, 2, INF])), rng.choice([NAT, FN]))
        return {"ty": ty, **_value_pair(fz, rng, ty.body)}
    if clause == "return":
        ty = rng.choice(_VALUE_TYPES)
        return {"ty": ty, **_value_pair(fz, rng, ty)}
    if clause == "case":
        ty = Sum((NAT, BOOL2))
        i = rng.randint(1, 2)
        comp = ty.items[i - 1]
        e, f = _open_pair(fz, rng, tau, {"x": comp})
        j = 3 - i
        others_l = [("o", fz.typed_term(tau, 2, {"o": ty.items[j - 1]})[0])]
        others_r = [("o", fz.typed_term(tau, 2, {"o": ty.items[j - 1]})[0])]
        return {"ty": ty, "index": i, "x": "x", "tau": tau, "e": e, "f": f,
                "v": fz.closed_value(comp), "w": fz.closed_value(comp),
                "others_l": others_l, "others_r": others_r}
    if clause == "case!":
        r = rng.choice([Fraction(1, 2), Fraction(1), Fraction(2), INF])
        ty = Bang(Cbe(r), NAT)
        e, f = _open_pair(fz, rng, tau, {"x": NAT})
        return {"ty": ty, "x": "x", "tau": tau, "e": e, "f": f,
                "v": fz.closed_value(NAT), "w": fz.closed_value(NAT)}
    if clause == "casefold":
        e, f = _open_pair(fz, rng, tau, {"x": NAT_BODY})
        return {"ty": NAT, "x": "x", "tau": tau, "e": e, "f": f,
                "v": fz.closed_value(NAT_BODY), "w": fz.closed_value(NAT_BODY)}
    if clause == "let":
        sigma = rng.choice(FIRST_ORDER)
        e = fz.closed_term(sigma, 2)
        e2 = e if rng.random() < 0.3 else fz.closed_term(sigma, 2)
        f, f2 = _open_pair(fz, rng, tau, {"x": sigma})
        return {"x": "x", "sigma": sigma, "tau": tau, "e": e, "e2": e2, "f": f, "f2": f2}
    if clause == "op":
        m = fz.monad
        if m.name == "partial":
            raise FuzzError("the partial monad has no operations")
        sym, param, ar = rng.choice(_ops_of(m, rng))
        es = [fz.closed_term(tau, 2) for _ in range(ar)]
        fs = [fz.closed_term(tau, 2) for _ in range(ar)]
        return {"symbol": sym, "param": param, "tau": tau, "es": es, "fs": fs}
    raise ValueError(clause)


def _show_fill(fill: dict) -> str:
    def show(v):
        if isinstance(v, (list, tuple)):
            return "[" + ", ".join(show(x) for x in v) + "]"
        return str(v)
    return "{" + ", ".join(f"{k}: {show(v)}" for k, v in fill.items()) + "}"


def compat_suite(rng: random.Random, n: int = 60, budget: int = 10, monads=("dist", "powerset"),
                 probe_depth: int = 6, max_tries: int = 20):
    """Sample each clause until ``n`` fillings were decided non-vacuously
    (or ``max_tries * n`` fillings were drawn)."""
    laws = _Laws("compat")
    for mname in monads:
        fz = Fuzzer(rng, mname)
        for clause in CLAUSES:
            L = laws(f"{mname}:{clause}")
            while L.passed + L.failed - L.vacuous < n and L.total < max_tries * n:
                fill = sample_filling(clause, rng, fz, probe_depth)
                q = DistQuery(None, None, None, quantale=_QUANT[mname], monad=mname,
                              budget=budget, iters=3, probe_depth=probe_depth)
                with laws.timed(f"{mname}:{clause}") as L:
                    out = compat_check(clause, fill, q)
                    L.record(None if out.status == "inconclusive" else out.holds,
                             lambda: f"{_show_fill(fill)}: lhs={out.lhs} rhs={out.rhs}",
                             vacuous=out.lhs == get_quantale(q.quantale).bottom)
    return laws.results()


# -- metric preservation ----------------------------------------------------------

def _metric_instances(rng, fz: Fuzzer):
    """Yield ``(e, env, vs, ws, tau)``: handcrafted shapes first, then fuzzed ones."""
    fn = Lolli(NAT, NAT)
    hand = [
        # case! x of !y -> return y (+) Omega, with x :_1 !_1 nat
        (CaseBang(Var("x"), "y", Op("op+", (Return(Var("y")), term_Omega(NAT)), None)),
         {"x": Bang(Cbe(1), NAT)}, NAT),
        # the same shape through a function argument
        (CaseBang(Var("x"), "y", Op("op+", (App(Var("y"), numeral(1)), term_Omega(NAT)), None)),
         {"x": Bang(Cbe(1), fn)}, NAT),
        (CaseBang(Var("x"), "y", App(Var("y"), numeral(2))), {"x": Bang(Cbe(2), fn)}, NAT),
        (App(Var("x"), numeral(0)), {"x": fn}, NAT),
    ]
    env_types = list(FIRST_ORDER) + [fn, Bang(Cbe(2), fn), Bang(Cbe(Fraction(1, 2)), fn)]
    while True:
        if hand and rng.random() < 0.3:
            e, scope, tau = hand[rng.randrange(len(hand))]
        else:
            k = rng.randint(1, 2)
            scope = {f"x{i}": rng.choice(env_types) for i in range(k)}
            tau = rng.choice([NAT, BOOL2])
            try:
                e, _ = fz.typed_term(tau, 3, scope)
            except FuzzError:
                continue
        try:
            _, demand = infer(e, scope, tau, fz.monad, get_quantale(_QUANT[fz.monad.name]).truncated)
        except TypeCheckError:
            continue
        if not demand and rng.random() < 0.9:
            continue  # mostly skip instances where no variable is used
        env = {x: (demand.get(x, Fraction(0)), ty) for x, ty in scope.items()}
        vs = {x: fz.closed_value(ty) for x, ty in scope.items()}
        ws = {}
        for x, ty in scope.items():
            w = fz.closed_value(ty)
            for _ in range(5):
                if w != vs[x] or rng.random() < 0.1:
                    break
                w = fz.closed_value(ty)
            ws[x] = w
        yield e, env, vs, ws, tau


def metric_suite(rng: random.Random, n: int = 100, budget: int = 10, probe_depth: int = 6,
                 max_tries: int = 20):
    """Sample until ``n`` instances were decided non-vacuously."""
    laws = _Laws("metric")
    mnames = ("dist", "powerset")
    gens = {m: _metric_instances(rng, Fuzzer(rng, m, max_numeral=3)) for m in mnames}
    L = laws("preservation")
    i = 0
    while L.passed + L.failed - L.vacuous < n and L.total < max_tries * n:
        mname = mnames[i % 2]
        i += 1
        e, env, vs, ws, tau = next(gens[mname])
        q = DistQuery(None, None, tau, quantale=_QUANT[mname], monad=mname, budget=budget,
                      iters=4, probe_depth=probe_depth)
        with laws.timed("preservation") as L:
            holds, lhs, rhs, stab = metric_preservation_check(e, env, vs, ws, q)
            L.record(holds if stab else None,
                     lambda: f"{mname}: {e} env={env} vs={vs} ws={ws}: {lhs} vs {rhs}",
                     vacuous=lhs == get_quantale(q.quantale).bottom)
    return laws.results()


SUITES = {
    "quantale": quantale_suite,
    "relators": relator_suite,
    "strong": strong_suite,
    "monad": monad_suite,
    "eval": eval_suite,
    "transport": transport_suite,
    "adequacy": adequacy_suite,
    "kernel": kernel_suite,
    "distance": distance_suite,
    "compat": compat_suite,
    "metric": metric_suite,
}


def run_suite(name: str, seed: int = 0, **kw) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(name)
    rng = random.Random(f"{name}:{seed}")
    return SuiteReport(name, seed, SUITES[name](rng, **kw))
