"""Tokenizer and recursive-descent parser for the surface syntax.

Besides the core grammar the parser accepts a few conveniences: integer
literals in value position denote numerals, ``*`` is the unit value,
``!_s v`` annotates a bang with its scaling, ``case v of {}`` eliminates
the empty sum, parentheses group values and terms, and ``#`` starts a
comment running to the end of the line.  ``I[T]`` and ``Omega[T]`` in term
position expand to the identity computation at ``T -o T`` and the divergent
term at ``T``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .quantale import INF, Cbe
from .syntax import (
    NAT, STAR, UNIT, ZERO, App, Bang, BangV, Case, CaseBang, CaseFold, Fold,
    Inj, Lam, Let, Lolli, Mu, Op, Return, Sum, TVar, Var, numeral, term_I, term_Omega,
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    pos: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<inj>inj_\d+(?![A-Za-z0-9_']))
  | (?P<sym>case!|-o|->|!_|op\+|[!\\λ{}()\[\],;:.=*])
  | (?P<num>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)

KEYWORDS = {"return", "case", "of", "let", "in", "casefold", "fold", "mu",
            "unit", "nat", "sum", "inf", "get", "set0", "set1"}


def tokenize(text: str) -> list[Tok]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            line, col = _linecol(text, pos)
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind != "ws":
            t = m.group()
            if kind == "ident" and t in KEYWORDS:
                kind = "kw"
            if t == "λ":
                t = "\\"
            out.append(Tok(kind, t, pos))
        pos = m.end()
    out.append(Tok("eof", "", len(text)))
    return out


def _linecol(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    # -- helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Tok = None):
        tok = tok or self.tok
        line, col = _linecol(self.text, tok.pos)
        found = tok.text or "end of input"
        raise ParseError(f"{msg} (found {found!r})", line, col)

    def at(self, *texts) -> bool:
        return self.tok.text in texts and self.tok.kind in ("sym", "kw")

    def eat(self, text: str) -> Tok:
        if not self.at(text):
            self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error("expected an identifier")
        t = self.tok.text
        self.i += 1
        return t

    def scalar(self) -> Cbe:
        t = self.tok
        if t.kind == "kw" and t.text == "inf":
            self.i += 1
            return Cbe(INF)
        if t.kind == "num":
            self.i += 1
            return Cbe(Fraction(t.text))
        self.error("expected a scalar")

    # -- types
    def type_(self):
        dom = self.type_prefix()
        if self.at("-o"):
            self.i += 1
            return Lolli(dom, self.type_())
        return dom

    def type_prefix(self):
        if self.at("mu"):
            self.i += 1
            v = self.ident()
            self.eat(".")
            return Mu(v, self.type_())
        if self.at("!_"):
            self.i += 1
            s = self.scalar()
            return Bang(s, self.type_prefix())
        return self.type_atom()

    def type_atom(self):
        t = self.tok
        if self.at("unit"):
            self.i += 1
            return UNIT
        if self.at("nat"):
            self.i += 1
            return NAT
        if t.kind == "num" and t.text == "0":
            self.i += 1
            return ZERO
        if t.kind == "ident":
            self.i += 1
            return TVar(t.text)
        if self.at("sum"):
            self.i += 1
            self.eat("{")
            items = []
            if not self.at("}"):
                items.append(self.type_())
                while self.at(","):
                    self.i += 1
                    items.append(self.type_())
            self.eat("}")
            return Sum(tuple(items))
        if self.at("("):
            self.i += 1
            ty = self.type_()
            self.eat(")")
            return ty
        self.error("expected a type")

    # -- values
    def starts_value(self) -> bool:
        t = self.tok
        return (t.kind in ("ident", "inj", "num")
                or (t.kind == "sym" and t.text in ("\\", "!", "!_", "*", "("))
                or self.at("fold"))

    def value(self):
        t = self.tok
        if t.kind == "ident":
            self.i += 1
            return Var(t.text)
        if t.kind == "num":
            if "/" in t.text:
                self.error("expected a value")
            self.i += 1
            return numeral(int(t.text))
        if self.at("*"):
            self.i += 1
            return STAR
        if self.at("\\"):
            self.i += 1
            x = self.ident()
            self.eat(":")
            ty = self.type_()
            self.eat(".")
            return Lam(x, ty, self.term())
        if t.kind == "inj":
            self.i += 1
            idx = int(t.text[4:])
            self.eat("[")
            ty = self.type_()
            self.eat("]")
            if not isinstance(ty, Sum):
                self.error("injection annotation must be a sum type", t)
            if not 1 <= idx <= len(ty.items):
                self.error(f"injection index {idx} out of range for {len(ty.items)} summands", t)
            return Inj(idx, ty, self.value())
        if self.at("fold"):
            self.i += 1
            self.eat("[")
            ty = self.type_()
            self.eat("]")
            if not isinstance(ty, Mu):
                self.error("fold annotation must be a recursive type", t)
            return Fold(ty, self.value())
        if self.at("!"):
            self.i += 1
            return BangV(self.value())
        if self.at("!_"):
            self.i += 1
            s = self.scalar()
            return BangV(self.value(), s)
        if self.at("("):
            self.i += 1
            v = self.value()
            self.eat(")")
            return v
        self.error("expected a value")

    # -- terms
    def term(self):
        if self.at("return"):
            self.i += 1
            return Return(self.value())
        if self.at("let"):
            self.i += 1
            x = self.ident()
            self.eat("=")
            e = self.term()
            self.eat("in")
            return Let(x, e, self.term())
        if self.at("case!"):
            self.i += 1
            v = self.value()
            self.eat("of")
            self.eat("!")
            x = self.ident()
            self.eat("->")
            return CaseBang(v, x, self.term())
        if self.at("casefold"):
            self.i += 1
            v = self.value()
            self.eat("of")
            self.eat("fold")
            x = self.ident()
            self.eat("->")
            return CaseFold(v, x, self.term())
        if self.at("case"):
            return self.case_sum()
        if self.at("op+", "get", "set0", "set1"):
            return self.op()
        if self.tok.text in ("I", "Omega") and self.tok.kind == "ident" \
                and self.toks[self.i + 1].text == "[":
            name = self.tok.text
            self.i += 2
            ty = self.type_()
            self.eat("]")
            return term_I(ty) if name == "I" else term_Omega(ty)
        if self.at("("):
            save = self.i
            try:
                return self.application(strict=True)
            except (ParseError, _Backtrack):
                self.i = save
            self.i += 1
            e = self.term()
            self.eat(")")
            return e
        if self.starts_value():
            return self.application()
        self.error("expected a term")

    def application(self, strict: bool = False):
        fn = self.value()
        if not self.starts_value():
            if strict:
                raise _Backtrack()
            self.error("expected an argument (a bare value is not a term; use 'return')")
        return App(fn, self.value())

    def case_sum(self):
        start = self.eat("case")
        v = self.value()
        self.eat("of")
        self.eat("{")
        branches = {}
        while self.tok.kind == "inj":
            bt = self.tok
            idx = int(bt.text[4:])
            self.i += 1
            x = self.ident()
            self.eat("->")
            e = self.term()
            if idx in branches:
                self.error(f"duplicate branch inj_{idx}", bt)
            branches[idx] = (x, e)
            if self.at(";"):
                self.i += 1
            else:
                break
        self.eat("}")
        if sorted(branches) != list(range(1, len(branches) + 1)):
            self.error("case branches must cover inj_1 .. inj_n", start)
        return Case(v, tuple(branches[i] for i in range(1, len(branches) + 1)))

    def op(self):
        name = self.tok.text
        self.i += 1
        param = None
        if self.at("["):
            self.i += 1
            if name == "op+":
                s = self.scalar().scalar
                if s == INF or s > 1:
                    self.error("choice probability must lie in [0,1]")
                param = s
            else:
                t = self.tok
                if t.kind not in ("ident", "num"):
                    self.error("expected a location")
                self.i += 1
                param = t.text
            self.eat("]")
        elif name != "op+":
            self.error(f"{name} needs a location")
        self.eat("(")
        args = [self.term()]
        while self.at(","):
            self.i += 1
            args.append(self.term())
        self.eat(")")
        arity = 2 if name in ("op+", "get") else 1
        if len(args) != arity:
            self.error(f"{name} takes {arity} argument(s), got {len(args)}")
        return Op(name, tuple(args), param)

    def finish(self):
        if self.tok.kind != "eof":
            self.error("unexpected trailing input")


def parse_type(text: str):
    p = Parser(text)
    t = p.type_()
    p.finish()
    return t


def parse_value(text: str):
    p = Parser(text)
    v = p.value()
    p.finish()
    return v


def parse_term(text: str):
    p = Parser(text)
    e = p.term()
    p.finish()
    return e


def parse(text: str):
    """Parse a program: a term, or failing that a value."""
    try:
        return parse_term(text)
    except ParseError as err:
        try:
            return parse_value(text)
        except ParseError:
            raise err from None


def parse_file(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
