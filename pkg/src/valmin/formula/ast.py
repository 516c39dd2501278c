"""Quantifier-free formulas in one group variable x.

Atoms talk about values of linear terms n*x + h:

* ``ValueLeq(t, s)``  v(t) <= v(s)
* ``IsInf(t)``        v(t) = inf, i.e. t = 0
* ``Rm(m, t)``        R_m(v(t))

and are closed under ``Not``, ``And``, ``Or``.  ``to_text`` prints the
canonical form accepted back by the parser.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from ..group_core import GroupDescriptor, GroupElement


@dataclass(frozen=True)
class GroupTerm:
    coeff: int
    offset: GroupElement

    @property
    def group(self) -> GroupDescriptor:
        return self.offset.group

    def __str__(self):
        return term_text(self)


@dataclass(frozen=True)
class ValueLeq:
    left: GroupTerm
    right: GroupTerm


@dataclass(frozen=True)
class IsInf:
    term: GroupTerm


@dataclass(frozen=True)
class Rm:
    m: int
    term: GroupTerm


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


Atom = Union[ValueLeq, IsInf, Rm]
Formula = Union[ValueLeq, IsInf, Rm, Not, And, Or]


def make_term(group: GroupDescriptor, coeff: int, offset: GroupElement | None = None) -> GroupTerm:
    if group.is_elem:
        coeff %= group.p
    return GroupTerm(coeff, group.zero() if offset is None else offset)


def terms(phi: Formula) -> Iterator[GroupTerm]:
    """Group terms of phi in left-to-right order (with repetitions)."""
    if isinstance(phi, ValueLeq):
        yield phi.left
        yield phi.right
    elif isinstance(phi, (IsInf, Rm)):
        yield phi.term
    elif isinstance(phi, Not):
        yield from terms(phi.arg)
    else:
        for a in phi.args:
            yield from terms(a)


def atoms(phi: Formula) -> Iterator[Atom]:
    if isinstance(phi, (ValueLeq, IsInf, Rm)):
        yield phi
    elif isinstance(phi, Not):
        yield from atoms(phi.arg)
    else:
        for a in phi.args:
            yield from atoms(a)


def depth(phi: Formula) -> int:
    if isinstance(phi, (ValueLeq, IsInf, Rm)):
        return 0
    if isinstance(phi, Not):
        return 1 + depth(phi.arg)
    return 1 + max(depth(a) for a in phi.args)


def negate(phi: Formula) -> Formula:
    return phi.arg if isinstance(phi, Not) else Not(phi)


# -- canonical printing ---------------------------------------------------------

def literal_text(h: GroupElement) -> str:
    """Grammar literal for a group element: q(...) or a sum of e(...)."""
    g = h.group
    if h.is_zero():
        return "0"
    if g.is_elem:
        parts = []
        for (k, s), c in h.support:
            parts.append(f"e({k},{s})" if c == 1 else f"{c}*e({k},{s})")
        return " + ".join(parts)
    comps = ["0" if e == 0 else f"{a},{e}" for a, e in h.components]
    return "q(" + "; ".join(comps) + ")"


def term_text(t: GroupTerm) -> str:
    xs = ""
    if t.coeff == 1:
        xs = "x"
    elif t.coeff == -1:
        xs = "-x"
    elif t.coeff:
        xs = f"{t.coeff}*x"
    if t.offset.is_zero():
        return xs or "0"
    lit = literal_text(t.offset)
    return f"{xs} + {lit}" if xs else lit


def to_text(phi: Formula) -> str:
    if isinstance(phi, ValueLeq):
        return f"v({term_text(phi.left)}) <= v({term_text(phi.right)})"
    if isinstance(phi, IsInf):
        return f"v({term_text(phi.term)}) = inf"
    if isinstance(phi, Rm):
        return f"R_{phi.m}(v({term_text(phi.term)}))"
    if isinstance(phi, Not):
        return "!" + _wrapped(phi.arg)
    sep = " & " if isinstance(phi, And) else " | "
    return "(" + sep.join(to_text(a) for a in phi.args) + ")"


def _wrapped(phi: Formula) -> str:
    if isinstance(phi, (ValueLeq, IsInf, Rm)):
        return "(" + to_text(phi) + ")"
    return to_text(phi)
