"""Quantales, change-of-base endofunctors and Sigma-operation interpretations.

Elements are kept *raw* inside the engine (``bool`` for the boolean quantale,
``Fraction`` or :data:`INF` otherwise) and every :class:`Quantale` instance
knows how to combine them.  :class:`QuantaleElem` wraps a raw value together
with the name of its quantale for the public, mismatch-checked API.

All arithmetic is exact.  The only non-rational value is ``math.inf``, used
for the bottom element of the Lawvere quantales and the scalar ``inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

INF = math.inf

Scalar = Union[Fraction, float]  # float only ever as INF
Raw = Union[bool, Fraction, float]


class QuantaleError(ValueError):
    """Raised on quantale mismatches and out-of-carrier values."""


# -- extended nonnegative arithmetic --------------------------------------

def as_scalar(x) -> Scalar:
    """Coerce ``x`` to an exact extended nonnegative rational."""
    if isinstance(x, float):
        if x == INF:
            return INF
        raise QuantaleError(f"inexact scalar {x!r}; use Fraction or 'inf'")
    if isinstance(x, str):
        if x.strip() in ("inf", "∞"):
            return INF
        x = Fraction(x.strip())
    if isinstance(x, bool):
        raise QuantaleError("booleans are not scalars")
    x = Fraction(x)
    if x < 0:
        raise QuantaleError(f"negative scalar {x}")
    return x


def ext_mul(a: Scalar, b: Scalar) -> Scalar:
    # 0 * inf = 0
    if a == 0 or b == 0:
        return Fraction(0)
    if a == INF or b == INF:
        return INF
    return a * b


def ext_add(a: Scalar, b: Scalar) -> Scalar:
    if a == INF or b == INF:
        return INF
    return a + b


def ext_monus(c: Scalar, a: Scalar) -> Scalar:
    """Truncated subtraction ``max(c - a, 0)`` on ``[0, inf]``."""
    if a == INF:
        return Fraction(0)
    if c == INF:
        return INF
    return max(c - a, Fraction(0))


def format_scalar(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if x == INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# -- quantales ------------------------------------------------------------

class Quantale:
    """A commutative integral quantale acting on raw values."""

    name: str
    unit: Raw
    bottom: Raw
    #: True when elements read as distances (order is reversed real order).
    metric: bool = False
    #: True when scalar actions are truncated, so composing them is not
    #: multiplying the scalars.
    truncated: bool = False

    def contains(self, a) -> bool:
        raise NotImplementedError

    def coerce(self, a) -> Raw:
        raise NotImplementedError

    def leq(self, a: Raw, b: Raw) -> bool:
        raise NotImplementedError

    def tensor(self, a: Raw, b: Raw) -> Raw:
        raise NotImplementedError

    def residual(self, a: Raw, c: Raw) -> Raw:
        raise NotImplementedError

    def join2(self, a: Raw, b: Raw) -> Raw:
        return b if self.leq(a, b) else a

    def meet2(self, a: Raw, b: Raw) -> Raw:
        return a if self.leq(a, b) else b

    def join(self, items: Iterable[Raw]) -> Raw:
        out = self.bottom
        for a in items:
            out = self.join2(out, a)
        return out

    def meet(self, items: Iterable[Raw]) -> Raw:
        out = self.unit
        for a in items:
            out = self.meet2(out, a)
            if out == self.bottom:
                break
        return out

    def tensor_all(self, items: Iterable[Raw]) -> Raw:
        out = self.unit
        for a in items:
            out = self.tensor(out, a)
        return out

    def scale(self, c: Scalar, a: Raw) -> Raw:
        """Apply the scalar change-of-base endofunctor ``c`` to ``a``."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<quantale {self.name}>"


class BoolQuantale(Quantale):
    name = "bool"
    unit = True
    bottom = False

    def contains(self, a):
        return isinstance(a, bool)

    def coerce(self, a):
        if isinstance(a, bool):
            return a
        if a in ("true", "false"):
            return a == "true"
        raise QuantaleError(f"{a!r} is not a boolean")

    def leq(self, a, b):
        return (not a) or b

    def tensor(self, a, b):
        return a and b

    def residual(self, a, c):
        return (not a) or c

    def join(self, items):
        return any(items)

    def meet(self, items):
        return all(items)

    def scale(self, c, a):
        # constant-true at 0, identity otherwise (inf keeps false at false)
        if c == 0:
            return True
        return a


class LawvereQuantale(Quantale):
    """``([0, inf], >=, +, 0)``."""

    name = "lawvere"
    unit = Fraction(0)
    bottom = INF
    metric = True
    upper: Scalar = INF

    def contains(self, a):
        if isinstance(a, bool):
            return False
        if a == INF:
            return self.upper == INF
        return isinstance(a, (int, Fraction)) and 0 <= a <= self.upper

    def coerce(self, a):
        a = as_scalar(a)
        if not self.contains(a):
            raise QuantaleError(f"{format_scalar(a)} outside the carrier of {self.name}")
        return a

    def leq(self, a, b):
        return a >= b

    def join2(self, a, b):
        return min(a, b)

    def meet2(self, a, b):
        return max(a, b)

    def join(self, items):
        return min(items, default=self.bottom)

    def meet(self, items):
        return max(items, default=self.unit)

    def tensor(self, a, b):
        return ext_add(a, b)

    def residual(self, a, c):
        # largest b (smallest real) with a + b >= c
        return ext_monus(c, a)

    def scale(self, c, a):
        return ext_mul(c, a)


class UnitIntervalQuantale(LawvereQuantale):
    """``([0, 1], >=, truncated +, 0)``."""

    name = "unit"
    bottom = Fraction(1)
    upper = Fraction(1)
    truncated = True

    def tensor(self, a, b):
        return min(a + b, Fraction(1))

    def residual(self, a, c):
        return max(c - a, Fraction(0))

    def scale(self, c, a):
        return min(ext_mul(c, a), Fraction(1))


class UltraQuantale(LawvereQuantale):
    """``([0, inf], >=, max, 0)``."""

    name = "ultra"

    def tensor(self, a, b):
        return max(a, b)

    def residual(self, a, c):
        return Fraction(0) if a >= c else c


class TNormQuantale(Quantale):
    """``([0, 1], <=, *, 1)`` for a left-continuous t-norm ``*``."""

    unit = Fraction(1)
    bottom = Fraction(0)
    KINDS = ("product", "lukasiewicz", "goedel")

    def __init__(self, kind: str):
        if kind not in self.KINDS:
            raise QuantaleError(f"unknown t-norm {kind!r}")
        self.kind = kind
        self.name = f"tnorm:{kind}"

    def contains(self, a):
        return isinstance(a, (int, Fraction)) and not isinstance(a, bool) and 0 <= a <= 1

    def coerce(self, a):
        a = as_scalar(a)
        if not self.contains(a):
            raise QuantaleError(f"{format_scalar(a)} outside [0,1]")
        return a

    def leq(self, a, b):
        return a <= b

    def join(self, items):
        return max(items, default=self.bottom)

    def meet(self, items):
        return min(items, default=self.unit)

    def tensor(self, a, b):
        if self.kind == "product":
            return a * b
        if self.kind == "lukasiewicz":
            return max(a + b - 1, Fraction(0))
        return min(a, b)

    def residual(self, a, c):
        if a <= c:
            return Fraction(1)
        if self.kind == "product":
            return c / a
        if self.kind == "lukasiewicz":
            return min(Fraction(1), 1 - a + c)
        return c

    def scale(self, c, a):
        if c == 0:
            return self.unit
        if c == INF:
            return self.unit if a == self.unit else self.bottom
        if Fraction(c).denominator != 1:
            raise QuantaleError("t-norm quantales only support integer scalars, 0 and inf")
        out = self.unit
        for _ in range(int(c)):
            out = self.tensor(out, a)
        return out


BOOL = BoolQuantale()
LAWVERE = LawvereQuantale()
UNIT = UnitIntervalQuantale()
ULTRA = UltraQuantale()

_REGISTRY = {
    "bool": BOOL,
    "lawvere": LAWVERE,
    "unit": UNIT,
    "ultra": ULTRA,
    **{f"tnorm:{k}": TNormQuantale(k) for k in TNormQuantale.KINDS},
}


def get_quantale(name) -> Quantale:
    if isinstance(name, Quantale):
        return name
    try:
        return _REGISTRY[name]
    except KeyError:
        raise QuantaleError(
            f"unknown quantale {name!r}; expected one of {', '.join(_REGISTRY)}") from None


def quantale_names() -> list[str]:
    return list(_REGISTRY)


# -- public element API ---------------------------------------------------

@dataclass(frozen=True)
class QuantaleElem:
    quantale: str
    value: Raw

    def __post_init__(self):
        q = get_quantale(self.quantale)
        object.__setattr__(self, "value", q.coerce(self.value))

    @property
    def q(self) -> Quantale:
        return get_quantale(self.quantale)

    def __str__(self) -> str:
        return format_scalar(self.value)


def elem(quantale, value) -> QuantaleElem:
    return QuantaleElem(get_quantale(quantale).name, value)


def _same(*elems: QuantaleElem) -> Quantale:
    names = {e.quantale for e in elems}
    if len(names) > 1:
        raise QuantaleError(f"quantale mismatch: {sorted(names)}")
    return get_quantale(names.pop())


def _collect(items, quantale) -> tuple[Quantale, list]:
    items = list(items)
    if not items:
        if quantale is None:
            raise QuantaleError("empty join/meet needs an explicit quantale")
        return get_quantale(quantale), []
    q = _same(*items)
    if quantale is not None and get_quantale(quantale) is not q:
        raise QuantaleError(f"quantale mismatch: {q.name} vs {quantale}")
    return q, [e.value for e in items]


def tensor(a: QuantaleElem, b: QuantaleElem) -> QuantaleElem:
    q = _same(a, b)
    return QuantaleElem(q.name, q.tensor(a.value, b.value))


def join(items: Iterable[QuantaleElem], quantale=None) -> QuantaleElem:
    q, raw = _collect(items, quantale)
    return QuantaleElem(q.name, q.join(raw))


def meet(items: Iterable[QuantaleElem], quantale=None) -> QuantaleElem:
    q, raw = _collect(items, quantale)
    return QuantaleElem(q.name, q.meet(raw))


def residual(a: QuantaleElem, c: QuantaleElem) -> QuantaleElem:
    q = _same(a, c)
    return QuantaleElem(q.name, q.residual(a.value, c.value))


def leq(a: QuantaleElem, b: QuantaleElem) -> bool:
    q = _same(a, b)
    return q.leq(a.value, b.value)


def unit_of(quantale) -> QuantaleElem:
    q = get_quantale(quantale)
    return QuantaleElem(q.name, q.unit)


def bottom_of(quantale) -> QuantaleElem:
    q = get_quantale(quantale)
    return QuantaleElem(q.name, q.bottom)


def phi(a: QuantaleElem) -> bool:
    """Kernel map to the boolean quantale: only the unit is true."""
    return a.value == a.q.unit


def psi(b: bool, quantale) -> QuantaleElem:
    q = get_quantale(quantale)
    return QuantaleElem(q.name, q.unit if b else q.bottom)


# -- change-of-base endofunctors -------------------------------------------

@dataclass(frozen=True, order=False)
class Cbe:
    """A scalar change-of-base endofunctor ``c * -`` with ``c`` in ``[0, inf]``."""

    scalar: Scalar

    def __post_init__(self):
        object.__setattr__(self, "scalar", as_scalar(self.scalar))

    def __call__(self, a: QuantaleElem) -> QuantaleElem:
        return cbe_apply(self, a)

    def __str__(self) -> str:
        return format_scalar(self.scalar)


ZERO = Cbe(0)
ONE = Cbe(1)
INFTY = Cbe(INF)


def cbe_apply(s: Cbe, a: QuantaleElem) -> QuantaleElem:
    q = a.q
    return QuantaleElem(q.name, q.scale(s.scalar, a.value))


def cbe_leq(s: Cbe, r: Cbe) -> bool:
    """CBE order: ``s <= r`` iff ``s`` demands at least as much as ``r``."""
    return s.scalar >= r.scalar


def cbe_compose(r: Cbe, s: Cbe) -> Cbe:
    return Cbe(ext_mul(r.scalar, s.scalar))


def cbe_tensor(r: Cbe, s: Cbe) -> Cbe:
    return Cbe(ext_add(r.scalar, s.scalar))


def cbe_meet(r: Cbe, s: Cbe) -> Cbe:
    return Cbe(max(r.scalar, s.scalar))


# -- Sigma-quantale operations -------------------------------------------

@dataclass(frozen=True)
class SigmaOpInterp:
    """Interpretation of an ``arity``-ary operation symbol on quantales.

    ``kind`` is ``"affine"`` (weighted sum, real reading), ``"meet"`` or
    ``"tensor"``.  Only these are closed on scalar CBEs.
    """

    name: str
    arity: int
    kind: str = "meet"
    weights: tuple = ()

    def __post_init__(self):
        if self.arity < 1:
            raise QuantaleError("operations need positive arity")
        if self.kind not in ("affine", "meet", "tensor"):
            raise QuantaleError(f"unknown operation kind {self.kind!r}")
        if self.kind == "affine":
            w = tuple(Fraction(x) for x in self.weights)
            if len(w) != self.arity or any(x < 0 for x in w) or sum(w) != 1:
                raise QuantaleError("affine weights must be a probability vector of length arity")
            object.__setattr__(self, "weights", w)

    def eval_raw(self, q: Quantale, args: Sequence[Raw]) -> Raw:
        if len(args) != self.arity:
            raise QuantaleError(f"{self.name} expects {self.arity} arguments")
        if self.kind == "meet":
            return q.meet(args)
        if self.kind == "tensor":
            return q.tensor_all(args)
        if isinstance(q, BoolQuantale):
            # positive weights: the mixture is the unit iff every argument is
            return all(a for w, a in zip(self.weights, args) if w > 0)
        total = Fraction(0)
        for w, a in zip(self.weights, args):
            total = ext_add(total, ext_mul(w, a))
        if isinstance(q, TNormQuantale) or q.upper != INF:
            return min(total, Fraction(1)) if total != INF else q.bottom
        return total

    def eval(self, args: Sequence[QuantaleElem]) -> QuantaleElem:
        q = _same(*args)
        return QuantaleElem(q.name, self.eval_raw(q, [a.value for a in args]))


def choice_op(p=Fraction(1, 2)) -> SigmaOpInterp:
    p = Fraction(p)
    return SigmaOpInterp(f"op+[{format_scalar(p)}]", 2, "affine", (p, 1 - p))


def cbe_op(op: SigmaOpInterp, scalars: Sequence[Cbe]) -> Cbe:
    if len(scalars) != op.arity:
        raise QuantaleError(f"{op.name} expects {op.arity} CBEs, got {len(scalars)}")
    xs = [s.scalar for s in scalars]
    if op.kind == "affine":
        total = Fraction(0)
        for w, x in zip(op.weights, xs):
            total = ext_add(total, ext_mul(w, x))
        return Cbe(total)
    if op.kind == "meet":
        return Cbe(max(xs))
    if op.kind == "tensor":
        total = Fraction(0)
        for x in xs:
            total = ext_add(total, x)
        return Cbe(total)
    raise QuantaleError(f"{op.name}: closure not expressible as a scalar")


def sample_values(q: Quantale, rng, n: int, denominators=(1, 2, 3, 4, 6)) -> list[Raw]:
    """Draw ``n`` random exact elements of ``q`` (used by the law suites)."""
    out = []
    for _ in range(n):
        if isinstance(q, BoolQuantale):
            out.append(rng.random() < 0.5)
            continue
        d = rng.choice(denominators)
        if q.metric and q.upper == INF:
            r = rng.random()
            if r < 0.1:
                out.append(INF)
            elif r < 0.2:
                out.append(Fraction(0))
            else:
                out.append(Fraction(rng.randint(0, 4 * d), d))
        else:
            out.append(Fraction(rng.randint(0, d), d))
    return out


