"""V-relations and relators lifting them to monadic values.

A relator here is an object with ``lift(alpha, m, n)`` where ``alpha`` is any
callable ``(x, y) -> raw quantale value``.  Lifting is lazy: ``alpha`` is
only queried on the supports of ``m`` and ``n``, which is what lets the
distance engine drive it with memoized recursive calls.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .effects import Partial, Pow, StateKernel, SubDist
from .quantale import BOOL, UNIT, Quantale, get_quantale
from .transport import solve_transport


class RelatorError(ValueError):
    pass


# -- V-relations ---------------------------------------------------------------

class VRelation:
    """``X x Y -> V`` given by a table with an explicit default, or a function."""

    def __init__(self, quantale, table: Optional[dict] = None, default=None,
                 fn: Optional[Callable] = None):
        self.q: Quantale = get_quantale(quantale)
        if fn is None and default is None:
            raise RelatorError("a table-backed relation needs an explicit default")
        self.table = dict(table or {})
        self.default = default
        self.fn = fn

    def __call__(self, x, y):
        if self.fn is not None:
            return self.fn(x, y)
        return self.table.get((x, y), self.default)

    def dual(self) -> "VRelation":
        return VRelation(self.q, fn=lambda y, x: self(x, y))


def rel_dual(alpha: VRelation) -> VRelation:
    return alpha.dual()


def rel_compose(beta: VRelation, alpha: VRelation, middle: Iterable) -> VRelation:
    """``(beta . alpha)(x, z) = join_y alpha(x, y) (x) beta(y, z)``."""
    if beta.q is not alpha.q:
        raise RelatorError("composing relations over different quantales")
    q = alpha.q
    middle = list(middle)
    return VRelation(q, fn=lambda x, z: q.join(q.tensor(alpha(x, y), beta(y, z)) for y in middle))


def rel_id(quantale) -> VRelation:
    q = get_quantale(quantale)
    return VRelation(q, fn=lambda x, y: q.unit if x == y else q.bottom)


def rel_graph(f: Callable, quantale) -> VRelation:
    q = get_quantale(quantale)
    return VRelation(q, fn=lambda x, y: q.unit if f(x) == y else q.bottom)


# -- relators -------------------------------------------------------------------

class Relator:
    name: str
    monad: str
    conversive: bool = False

    def __init__(self, quantale):
        self.q: Quantale = get_quantale(quantale)

    def lift(self, alpha: Callable, m, n):
        raise NotImplementedError

    def relation(self, alpha: Callable) -> VRelation:
        return VRelation(self.q, fn=lambda m, n: self.lift(alpha, m, n))

    def __repr__(self):
        return f"{self.name}[{self.q.name}]"


class PartialRelator(Relator):
    """``alpha_bot``: bottom on the left relates to everything."""

    name = "partial"
    monad = "partial"

    def lift(self, alpha, m: Partial, n: Partial):
        if m.value is None:
            return self.q.unit
        if n.value is None:
            return self.q.bottom
        return alpha(m.value, n.value)


class HausdorffRelator(Relator):
    """``H alpha(X, Y) = meet_{x in X} join_{y in Y} alpha(x, y)``."""

    name = "hausdorff"
    monad = "powerset"

    def lift(self, alpha, m: Pow, n: Pow):
        q = self.q
        out = q.unit
        for x in m:
            out = q.meet2(out, q.join(alpha(x, y) for y in n))
            if out == q.bottom:
                break
        return out


def _require_unit(q: Quantale, who: str):
    if q is not UNIT:
        raise RelatorError(f"{who} requires the unit-interval quantale")


class WassersteinRelator(Relator):
    """Optimal transport between distributions of equal mass."""

    name = "wasserstein"
    monad = "dist"

    def __init__(self, quantale=UNIT):
        super().__init__(quantale)
        _require_unit(self.q, "the Wasserstein lifting")

    def lift(self, alpha, m: SubDist, n: SubDist):
        if m.mass != n.mass:
            raise RelatorError("the Wasserstein lifting needs equal masses; use W_bot")
        if m.mass == 0:
            return Fraction(0)
        xs, ys = m.support(), n.support()
        cost = [[alpha(x, y) for y in ys] for x in xs]
        return solve_transport([m[x] for x in xs], [n[y] for y in ys], cost).cost


_BOT = object()  # the extra atom carrying divergence mass


def wasserstein_bot(alpha, m: SubDist, n: SubDist):
    """W composed with partiality, by totalising both sides with a bottom atom."""
    if m.mass == 0:
        return Fraction(0)
    xs, ys = m.support(), n.support()
    a = [m[x] for x in xs]
    b = [n[y] for y in ys]
    if m.mass < 1:
        xs.append(_BOT)
        a.append(1 - m.mass)
    if n.mass < 1:
        ys.append(_BOT)
        b.append(1 - n.mass)

    def c(x, y):
        if x is _BOT:
            return Fraction(0)
        if y is _BOT:
            return Fraction(1)
        return alpha(x, y)

    if len(xs) == 1 and len(ys) == 1:
        return c(xs[0], ys[0])
    return solve_transport(a, b, [[c(x, y) for y in ys] for x in xs]).cost


class WassersteinBotRelator(Relator):
    name = "wasserstein_bot"
    monad = "dist"

    def __init__(self, quantale=UNIT):
        super().__init__(quantale)
        _require_unit(self.q, "the W_bot lifting")

    def lift(self, alpha, m: SubDist, n: SubDist):
        return wasserstein_bot(alpha, m, n)


class StateRelator(Relator):
    """``sup_b W_bot(id_S + alpha)(m(b), n(b))``."""

    name = "state"
    monad = "state"

    def __init__(self, quantale=UNIT, states=None):
        super().__init__(quantale)
        _require_unit(self.q, "the state relator")
        self.states = states

    def lift(self, alpha, m: StateKernel, n: StateKernel):
        def beta(p, r):
            (b1, x), (b2, y) = p, r
            return alpha(x, y) if b1 == b2 else Fraction(1)

        states = self.states if self.states is not None else list(m.table)
        out = Fraction(0)
        for b in states:
            out = max(out, wasserstein_bot(beta, m(b), n(b)))
            if out == 1:
                break
        return out


class ConversiveMeet(Relator):
    """``(G meet G°) alpha (m, n) = G alpha (m, n) meet G (alpha°) (n, m)``."""

    conversive = True

    def __init__(self, inner: Relator):
        super().__init__(inner.q)
        self.inner = inner
        self.name = f"conversive({inner.name})"
        self.monad = inner.monad

    def lift(self, alpha, m, n):
        a = self.inner.lift(alpha, m, n)
        if a == self.q.bottom:
            return a
        b = self.inner.lift(lambda y, x: alpha(x, y), n, m)
        return self.q.meet2(a, b)


class KernelRelator(Relator):
    """``phi . G(psi . R)``: a boolean relator extracted from ``G``."""

    def __init__(self, inner: Relator):
        super().__init__(BOOL)
        self.inner = inner
        self.name = f"kernel({inner.name})"
        self.monad = inner.monad
        self.conversive = inner.conversive

    def lift(self, rel, m, n):
        q = self.inner.q
        val = self.inner.lift(lambda x, y: q.unit if rel(x, y) else q.bottom, m, n)
        return val == q.unit


def kernel_relator(gamma: Relator, rel: Callable, m, n) -> bool:
    return KernelRelator(gamma).lift(rel, m, n)


# -- configuration ------------------------------------------------------------------

# "wasserstein" names the bottom-aware lifting, since evaluation produces
# subdistributions; the plain lifting on full distributions is "wasserstein_full"
RELATOR_TAGS = ("auto", "partial", "partial_sym", "hausdorff", "hausdorff_sym",
                "wasserstein", "wasserstein_bot", "wasserstein_full", "state")

_AUTO = {"partial": "partial", "powerset": "hausdorff", "dist": "wasserstein_bot",
         "state": "state"}


@dataclass(frozen=True)
class RelatorCfg:
    tag: str = "auto"
    conversive: bool = False  # wrap in the conversive meet

    def make(self, quantale, monad: str, states=None) -> Relator:
        q = get_quantale(quantale)
        tag = self.tag
        if tag == "auto":
            tag = _AUTO[monad]
        base = {"partial_sym": "partial", "hausdorff_sym": "hausdorff",
                "wasserstein": "wasserstein_bot"}.get(tag, tag)
        sym = self.conversive or tag in ("partial_sym", "hausdorff_sym")
        ctor = {
            "partial": PartialRelator,
            "hausdorff": HausdorffRelator,
            "wasserstein_full": WassersteinRelator,
            "wasserstein_bot": WassersteinBotRelator,
            "state": lambda qq: StateRelator(qq, states),
        }.get(base)
        if ctor is None:
            raise RelatorError(f"unknown relator {self.tag!r}")
        r = ctor(q)
        if r.monad != monad:
            raise RelatorError(f"relator {r.name} is for the {r.monad} monad, not {monad}")
        return ConversiveMeet(r) if sym else r


# public aliases
def lift_partial(alpha: VRelation) -> VRelation:
    return PartialRelator(alpha.q).relation(alpha)


def lift_partial_sym(alpha: VRelation) -> VRelation:
    return ConversiveMeet(PartialRelator(alpha.q)).relation(alpha)


def lift_hausdorff(alpha: VRelation) -> VRelation:
    return HausdorffRelator(alpha.q).relation(alpha)


def lift_hausdorff_sym(alpha: VRelation) -> VRelation:
    return ConversiveMeet(HausdorffRelator(alpha.q)).relation(alpha)


def lift_wasserstein(alpha: VRelation) -> VRelation:
    return WassersteinRelator(alpha.q).relation(alpha)


def lift_wasserstein_bot(alpha: VRelation) -> VRelation:
    return WassersteinBotRelator(alpha.q).relation(alpha)


def lift_state(alpha: VRelation, states=None) -> VRelation:
    return StateRelator(alpha.q, states).relation(alpha)
