"""Exact arithmetic in F_p^(omega) and in finite products of Pruefer p-groups.

Elements are immutable and always stored in canonical form, so equality and
hashing are structural.  Elementary abelian elements are finite maps from a
basis index ``(level, slot)`` to a nonzero coefficient mod p; Pruefer
elements are tuples of reduced fractions ``a / p**e`` taken mod 1.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union


class GroupError(ValueError):
    """Raised on structurally invalid operands (e.g. mixing two groups)."""


class UnboundedEnumerationError(GroupError):
    """Raised when an infinite set is requested without a truncation bound."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def p_adic_valuation(n: int, p: int) -> int:
    """Exponent of p in the nonzero integer n."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    n = abs(n)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


class Kind(enum.Enum):
    ELEM_ABELIAN = "elem"
    PRUFER = "prufer"


@dataclass(frozen=True)
class GroupDescriptor:
    p: int
    kind: Kind
    d: int = 1

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise GroupError(f"p={self.p!r} is not a prime")
        if self.kind is Kind.PRUFER and (not isinstance(self.d, int) or self.d < 1):
            raise GroupError(f"factor count must be >= 1, got {self.d!r}")
        if self.kind is Kind.ELEM_ABELIAN and self.d != 1:
            object.__setattr__(self, "d", 1)

    @classmethod
    def elem(cls, p: int) -> "GroupDescriptor":
        return cls(p, Kind.ELEM_ABELIAN)

    @classmethod
    def prufer(cls, p: int, d: int = 1) -> "GroupDescriptor":
        return cls(p, Kind.PRUFER, d)

    @property
    def is_elem(self) -> bool:
        return self.kind is Kind.ELEM_ABELIAN

    def zero(self) -> "GroupElement":
        if self.is_elem:
            return ElemAbelianElement(self, ())
        return PruferTuple(self, ((0, 0),) * self.d)

    def __str__(self):
        if self.is_elem:
            return f"F_{self.p}^(omega)"
        return f"Z({self.p}^inf)^{self.d}"


def _check_same(a: "GroupElement", b: "GroupElement"):
    if not isinstance(b, _Element) or a.group != b.group:
        raise GroupError(f"descriptor mismatch: {a.group} vs {getattr(b, 'group', b)}")


class _Element:
    group: GroupDescriptor

    def __add__(self, other):
        return add(self, other)

    def __neg__(self):
        return negate(self)

    def __sub__(self, other):
        return add(self, negate(other))

    def __rmul__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        return scalar_mul(n, self)

    def is_zero(self) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class ElemAbelianElement(_Element):
    group: GroupDescriptor
    # sorted ((level, slot), coeff) pairs with coeff in 1..p-1
    support: tuple = field(default=())

    @classmethod
    def from_map(cls, group: GroupDescriptor, coeffs: Mapping) -> "ElemAbelianElement":
        if not group.is_elem:
            raise GroupError(f"{group} is not elementary abelian")
        items = []
        for (k, s), c in coeffs.items():
            if k < 0 or s < 0:
                raise GroupError(f"basis index ({k},{s}) must be non-negative")
            c %= group.p
            if c:
                items.append(((int(k), int(s)), c))
        return cls(group, tuple(sorted(items)))

    @classmethod
    def basis(cls, group: GroupDescriptor, level: int, slot: int = 0) -> "ElemAbelianElement":
        return cls.from_map(group, {(level, slot): 1})

    def is_zero(self) -> bool:
        return not self.support

    def as_map(self) -> dict:
        return dict(self.support)

    def sort_key(self):
        return tuple((k, s, c) for (k, s), c in reversed(self.support))

    def __str__(self):
        return "[" + ", ".join(f"({k},{s}):{c}" for (k, s), c in self.support) + "]"


@dataclass(frozen=True)
class PruferTuple(_Element):
    group: GroupDescriptor
    # one (a, e) per factor, standing for a / p**e mod 1, reduced
    components: tuple = field(default=())

    @classmethod
    def from_pairs(cls, group: GroupDescriptor, pairs: Iterable) -> "PruferTuple":
        if group.is_elem:
            raise GroupError(f"{group} is not a Pruefer product")
        comps = tuple(_reduce_component(int(a), int(e), group.p) for a, e in pairs)
        if len(comps) != group.d:
            raise GroupError(f"expected {group.d} components, got {len(comps)}")
        return cls(group, comps)

    @classmethod
    def from_fractions(cls, group: GroupDescriptor, fracs: Iterable) -> "PruferTuple":
        pairs = []
        for f in fracs:
            f = Fraction(f)
            den = f.denominator
            e = 0
            while den % group.p == 0:
                den //= group.p
                e += 1
            if den != 1:
                raise GroupError(f"{f} does not have a {group.p}-power denominator")
            pairs.append((f.numerator, e))
        return cls.from_pairs(group, pairs)

    def is_zero(self) -> bool:
        return all(e == 0 for _, e in self.components)

    def fractions(self) -> tuple:
        p = self.group.p
        return tuple(Fraction(a, p**e) for a, e in self.components)

    def exponents(self) -> tuple:
        return tuple(e for _, e in self.components)

    def sort_key(self):
        return tuple((e, a) for a, e in self.components)

    def __str__(self):
        p = self.group.p
        return "(" + ", ".join("0" if e == 0 else f"{a}/{p}^{e}" for a, e in self.components) + ")"


GroupElement = Union[ElemAbelianElement, PruferTuple]


def _reduce_component(a: int, e: int, p: int) -> tuple:
    if e < 0:
        raise GroupError(f"negative exponent {e}")
    a %= p**e
    while e > 0 and a % p == 0:
        a //= p
        e -= 1
    if a == 0:
        e = 0
    return (a, e)


def add(a: GroupElement, b: GroupElement) -> GroupElement:
    _check_same(a, b)
    g = a.group
    if g.is_elem:
        coeffs = a.as_map()
        for idx, c in b.support:
            coeffs[idx] = coeffs.get(idx, 0) + c
        return ElemAbelianElement.from_map(g, coeffs)
    p = g.p
    comps = []
    for (x, ex), (y, ey) in zip(a.components, b.components):
        e = max(ex, ey)
        comps.append(_reduce_component(x * p ** (e - ex) + y * p ** (e - ey), e, p))
    return PruferTuple(g, tuple(comps))


def negate(a: GroupElement) -> GroupElement:
    return scalar_mul(-1, a)


def scalar_mul(n: int, a: GroupElement) -> GroupElement:
    g = a.group
    if g.is_elem:
        return ElemAbelianElement.from_map(g, {idx: n * c for idx, c in a.support})
    return PruferTuple(g, tuple(_reduce_component(n * x, e, g.p) for x, e in a.components))


def element_order(a: GroupElement) -> int:
    """Least n >= 1 with n*a == 0 (always a power of p here)."""
    if a.is_zero():
        return 1
    if a.group.is_elem:
        return a.group.p
    return a.group.p ** max(a.exponents())


def divide(n: int, a: GroupElement) -> set:
    """All solutions y of n*y == a in the whole group.

    Raises UnboundedEnumerationError when the solution set is infinite
    (elementary abelian, p | n, a == 0).
    """
    if not isinstance(n, int) or n <= 0:
        raise GroupError(f"divisor must be a positive integer, got {n!r}")
    g = a.group
    p = g.p
    if g.is_elem:
        if n % p:
            return {scalar_mul(pow(n, -1, p), a)}
        if a.is_zero():
            raise UnboundedEnumerationError(f"{n}*y = 0 has infinitely many solutions in {g}")
        return set()
    j = 0
    u = n
    while u % p == 0:
        u //= p
        j += 1
    # per component: y = b / p**(e+j) with u*b = a (mod p**e)
    per_comp = []
    for x, e in a.components:
        b0 = (x * pow(u, -1, p**e)) % p**e if e else 0
        per_comp.append([(b0 + t * p**e, e + j) for t in range(p**j)])
    return {PruferTuple.from_pairs(g, combo) for combo in itertools.product(*per_comp)}


def torsion_subgroup(group: GroupDescriptor, n: int, within: Iterable | None = None) -> set:
    """G[n] = {x : n*x == 0}.

    For an elementary abelian group with p | n this is the whole (infinite)
    group, so ``within`` (a finite truncation) must be supplied.
    """
    if n <= 0:
        raise GroupError(f"n must be positive, got {n}")
    if within is not None:
        return {x for x in within if scalar_mul(n, x).is_zero()}
    if group.is_elem and n % group.p == 0:
        raise UnboundedEnumerationError(f"{group}[{n}] is infinite; pass a truncation")
    return divide(n, group.zero())


def canonical_sorted(elements: Iterable[GroupElement]) -> list:
    return sorted(elements, key=lambda x: x.sort_key())
