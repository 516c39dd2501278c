"""Recursive-descent parser for the plain-text formula grammar.

    formula := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := '!' unary | '(' formula ')' | atom
    atom    := 'v(' term ')' cmp 'v(' term ')'        cmp in <= >= < > = !=
             | 'v(' term ')' ('=' | '!=') 'inf'
             | 'IsInf(' term ')'
             | 'R_' m '(v(' term '))'
             | term ('=' | '!=') term
    term    := ['-'] mono (('+' | '-') mono)*
    mono    := [int '*'] ('x' | name | literal) | int
    literal := 'q(' comp (';' comp)* ')'   comp := a ',' e | a ',' p '^' e | '0'
             | 'e(' level ',' slot ')'

Sugar (>=, <, >, value equality, group equality, !=) is rewritten into the
three atom kinds, so printing a parsed formula gives its canonical form.
"""
from __future__ import annotations

import re
from typing import Mapping, Optional

from ..group_core import (
    ElemAbelianElement,
    GroupDescriptor,
    GroupElement,
    GroupError,
    PruferTuple,
    scalar_mul,
)
from .ast import And, Formula, GroupTerm, IsInf, Not, Or, Rm, ValueLeq


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        where = f" at position {pos}"
        if text:
            where += f": {text[:pos]}<!>{text[pos:]}"
        super().__init__(message + where)


class UnknownParameterError(FormulaSyntaxError):
    pass


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|"
                    r"(?P<op><=|>=|!=|[<>=()!&|+\-*,;^]))")

_RESERVED = {"x", "v", "q", "e", "inf", "IsInf"}


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.toks = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
            kind = m.lastgroup
            start = m.start(kind)
            self.toks.append((kind, m.group(kind), start))
            pos = m.end()
        self.i = 0

    def peek(self, ahead: int = 0):
        j = self.i + ahead
        if j < len(self.toks):
            return self.toks[j]
        return ("eof", "", len(self.text))

    def pos(self) -> int:
        return self.peek()[2]

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def accept(self, value: str) -> bool:
        if self.peek()[1] == value and self.peek()[0] != "eof":
            self.i += 1
            return True
        return False

    def expect(self, value: str):
        if not self.accept(value):
            kind, got, pos = self.peek()
            raise FormulaSyntaxError(f"expected {value!r}, found {got or 'end of input'!r}",
                                     pos, self.text)

    def expect_int(self) -> int:
        kind, val, pos = self.next()
        if kind != "int":
            raise FormulaSyntaxError(f"expected an integer, found {val or 'end of input'!r}",
                                     pos, self.text)
        return int(val)


class _Parser:
    def __init__(self, text: str, group: GroupDescriptor, params: Mapping[str, GroupElement]):
        self.t = _Tokens(text)
        self.g = group
        self.params = dict(params or {})
        self.notes: list = []
        for name, val in self.params.items():
            if val.group != group:
                raise GroupError(f"parameter {name} is not an element of {group}")

    def error(self, msg, pos=None):
        return FormulaSyntaxError(msg, self.t.pos() if pos is None else pos, self.t.text)

    # -- formulas ------------------------------------------------------------
    def formula(self) -> Formula:
        args = [self.conj()]
        while self.t.accept("|"):
            args.append(self.conj())
        return args[0] if len(args) == 1 else Or(tuple(_flatten(Or, args)))

    def conj(self) -> Formula:
        args = [self.unary()]
        while self.t.accept("&"):
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(_flatten(And, args)))

    def unary(self) -> Formula:
        if self.t.accept("!"):
            return Not(self.unary())
        if self.t.peek()[1] == "(":
            self.t.next()
            phi = self.formula()
            self.t.expect(")")
            return phi
        return self.atom()

    def atom(self) -> Formula:
        kind, val, pos = self.t.peek()
        if kind == "name" and val == "v" and self.t.peek(1)[1] == "(":
            self.t.next()
            left = self.paren_term()
            op = self.t.next()
            if op[1] not in ("<=", ">=", "<", ">", "=", "!="):
                raise self.error(f"expected a comparison after v(...), found {op[1]!r}", op[2])
            if op[1] in ("=", "!=") and self.t.peek()[1] == "inf":
                self.t.next()
                phi = IsInf(left)
                return Not(phi) if op[1] == "!=" else phi
            if not (self.t.peek()[1] == "v" and self.t.peek(1)[1] == "("):
                raise self.error("expected v(...) or inf on the right of a value comparison")
            self.t.next()
            right = self.paren_term()
            return _compare(op[1], left, right)
        if kind == "name" and val == "IsInf":
            self.t.next()
            return IsInf(self.paren_term())
        if kind == "name" and val.startswith("R_"):
            m_text = val[2:]
            if not m_text.isdigit() or int(m_text) < 1:
                raise self.error(f"R_m needs a positive integer index, got {val!r}", pos)
            self.t.next()
            self.t.expect("(")
            vpos = self.t.pos()
            if not self.t.accept("v"):
                raise self.error("R_m takes an argument of the form v(term)", vpos)
            term = self.paren_term()
            self.t.expect(")")
            return Rm(int(m_text), term)
        left = self.term()
        op = self.t.next()
        if op[1] not in ("=", "!="):
            raise self.error(f"expected '=' or '!=' after a group term, found {op[1]!r}", op[2])
        right = self.term()
        diff = self._term(left.coeff - right.coeff, left.offset - right.offset)
        return IsInf(diff) if op[1] == "=" else Not(IsInf(diff))

    # -- terms ---------------------------------------------------------------
    def paren_term(self) -> GroupTerm:
        self.t.expect("(")
        term = self.term()
        self.t.expect(")")
        return term

    def _term(self, coeff: int, offset: GroupElement) -> GroupTerm:
        if self.g.is_elem and not 0 <= coeff < self.g.p:
            self.notes.append(f"coefficient {coeff} of x normalized to {coeff % self.g.p} "
                              f"(mod {self.g.p})")
            coeff %= self.g.p
        return GroupTerm(coeff, offset)

    def term(self) -> GroupTerm:
        sign = -1 if self.t.accept("-") else 1
        coeff, offset = 0, self.g.zero()
        while True:
            c, h = self.mono()
            coeff += sign * c
            if h is not None:
                offset = offset + scalar_mul(sign, h)
            if self.t.accept("+"):
                sign = 1
            elif self.t.accept("-"):
                sign = -1
            else:
                break
        return self._term(coeff, offset)

    def mono(self):
        """(coefficient of x, offset element or None)."""
        kind, val, pos = self.t.peek()
        k = 1
        if kind == "int":
            self.t.next()
            k = int(val)
            if not self.t.accept("*"):
                if k != 0:
                    raise self.error(f"bare integer {k} is not a group element; use 0 or k*...",
                                     pos)
                return 0, None
            kind, val, pos = self.t.peek()
        if kind != "name":
            raise self.error(f"expected x, a parameter or a literal, found {val or 'end'!r}", pos)
        if val == "x":
            self.t.next()
            return k, None
        if val == "q" and self.t.peek(1)[1] == "(":
            return 0, scalar_mul(k, self.prufer_literal())
        if val == "e" and self.t.peek(1)[1] == "(":
            return 0, scalar_mul(k, self.elem_literal())
        if val in _RESERVED or val.startswith("R_"):
            raise self.error(f"{val!r} cannot appear inside a term", pos)
        self.t.next()
        if val not in self.params:
            raise UnknownParameterError(f"unknown parameter {val!r}", pos, self.t.text)
        return 0, scalar_mul(k, self.params[val])

    def prufer_literal(self) -> GroupElement:
        pos = self.t.pos()
        if self.g.is_elem:
            raise self.error("q(...) literals need a Pruefer group", pos)
        self.t.next()
        self.t.expect("(")
        comps = [self.component()]
        while self.t.accept(";"):
            comps.append(self.component())
        self.t.expect(")")
        if len(comps) != self.g.d:
            raise self.error(f"expected {self.g.d} components in q(...), got {len(comps)}", pos)
        return PruferTuple.from_pairs(self.g, comps)

    def component(self):
        a = self.t.expect_int()
        if not self.t.accept(","):
            if a != 0:
                raise self.error("a component is 'a, e', 'a, p^e' or '0'")
            return (0, 0)
        pos = self.t.pos()
        e = self.t.expect_int()
        if self.t.accept("^"):
            if e != self.g.p:
                raise self.error(f"denominator base must be p={self.g.p}, got {e}", pos)
            e = self.t.expect_int()
        return (a, e)

    def elem_literal(self) -> GroupElement:
        pos = self.t.pos()
        if not self.g.is_elem:
            raise self.error("e(...) literals need an elementary abelian group", pos)
        self.t.next()
        self.t.expect("(")
        level = self.t.expect_int()
        self.t.expect(",")
        slot = self.t.expect_int()
        self.t.expect(")")
        return ElemAbelianElement.basis(self.g, level, slot)


def _flatten(cls, args):
    for a in args:
        if isinstance(a, cls):
            yield from a.args
        else:
            yield a


def _compare(op: str, left: GroupTerm, right: GroupTerm) -> Formula:
    if op == "<=":
        return ValueLeq(left, right)
    if op == ">=":
        return ValueLeq(right, left)
    if op == "<":
        return Not(ValueLeq(right, left))
    if op == ">":
        return Not(ValueLeq(left, right))
    both = And((ValueLeq(left, right), ValueLeq(right, left)))
    return both if op == "=" else Not(both)


def parse_with_notes(text: str, group: GroupDescriptor,
                     params: Optional[Mapping[str, GroupElement]] = None):
    p = _Parser(text, group, params or {})
    phi = p.formula()
    kind, val, pos = p.t.peek()
    if kind != "eof":
        raise FormulaSyntaxError(f"unexpected {val!r} after a complete formula", pos, text)
    return phi, p.notes


def parse(text: str, group: GroupDescriptor,
          params: Optional[Mapping[str, GroupElement]] = None) -> Formula:
    return parse_with_notes(text, group, params)[0]


def parse_element(text: str, group: GroupDescriptor,
                  params: Optional[Mapping[str, GroupElement]] = None) -> GroupElement:
    """A closed term (no x), e.g. ``q(1,2)`` or ``e(0,0) + e(3,1)``."""
    p = _Parser(text, group, params or {})
    term = p.term()
    kind, val, pos = p.t.peek()
    if kind != "eof":
        raise FormulaSyntaxError(f"unexpected {val!r} after an element", pos, text)
    if term.coeff:
        raise FormulaSyntaxError("an element literal cannot mention x", 0, text)
    return term.offset
