"""Pretty-printer producing text the parser reads back."""
from __future__ import annotations

from .quantale import format_scalar
from .syntax import (
    NAT, STAR, UNIT, ZERO, App, Bang, BangV, Case, CaseBang, CaseFold, Fold,
    Inj, Lam, Let, Lolli, Mu, Op, Return, Sum, TVar, Var, as_numeral,
)


def _name(x: str) -> str:
    return x


def show_type(t, prec: int = 0) -> str:
    if t == UNIT:
        return "unit"
    if t == NAT:
        return "nat"
    if t == ZERO:
        return "0"
    if isinstance(t, TVar):
        return _name(t.name)
    if isinstance(t, Sum):
        return "sum{" + ", ".join(show_type(x) for x in t.items) + "}"
    if isinstance(t, Bang):
        return f"!_{format_scalar(t.scale.scalar)} {show_type(t.body, 2)}"
    if isinstance(t, Lolli):
        s = f"{show_type(t.dom, 1)} -o {show_type(t.cod, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, Mu):
        s = f"mu {_name(t.var)}. {show_type(t.body, 0)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(f"not a type: {t!r}")


def show_value(v, atomic: bool = False) -> str:
    n = as_numeral(v)
    if n is not None:
        return str(n)
    if v == STAR:
        return "*"
    if isinstance(v, Var):
        return _name(v.name)
    if isinstance(v, Lam):
        s = f"\\{_name(v.var)}:{show_type(v.ty)}. {show_term(v.body)}"
        return f"({s})" if atomic else s
    if isinstance(v, Inj):
        s = f"inj_{v.index}[{show_type(v.ty)}] {show_value(v.value, True)}"
        return f"({s})" if atomic else s
    if isinstance(v, Fold):
        s = f"fold[{show_type(v.ty)}] {show_value(v.value, True)}"
        return f"({s})" if atomic else s
    if isinstance(v, BangV):
        tag = "!" if v.scale is None else f"!_{format_scalar(v.scale.scalar)} "
        return tag + show_value(v.value, True)
    raise TypeError(f"not a value: {v!r}")


def show_term(e) -> str:
    if isinstance(e, Return):
        return f"return {show_value(e.value, True)}"
    if isinstance(e, App):
        return f"{show_value(e.fn, True)} {show_value(e.arg, True)}"
    if isinstance(e, Case):
        bs = " ".join(f"inj_{i} {_name(x)} -> {show_term(b)};"
                      for i, (x, b) in enumerate(e.branches, 1))
        return f"case {show_value(e.scrut, True)} of {{{(' ' + bs + ' ') if bs else ''}}}"
    if isinstance(e, Let):
        return f"let {_name(e.var)} = {show_term(e.bound)} in {show_term(e.body)}"
    if isinstance(e, CaseBang):
        return f"case! {show_value(e.scrut, True)} of !{_name(e.var)} -> {show_term(e.body)}"
    if isinstance(e, CaseFold):
        return f"casefold {show_value(e.scrut, True)} of fold {_name(e.var)} -> {show_term(e.body)}"
    if isinstance(e, Op):
        head = e.symbol
        if e.param is not None:
            p = e.param
            head += f"[{format_scalar(p) if e.symbol == 'op+' else p}]"
        return f"{head}({', '.join(show_term(a) for a in e.args)})"
    raise TypeError(f"not a term: {e!r}")


def show(n) -> str:
    from .syntax import is_term, is_type, is_value
    if is_type(n):
        return show_type(n)
    if is_value(n):
        return show_value(n)
    if is_term(n):
        return show_term(n)
    raise TypeError(f"cannot print {n!r}")
