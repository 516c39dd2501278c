"""Valuations given by filtrations G_0 < G_1 < ... of finite subgroups.

v(x) is Level(k) for the least k with x in G_k, and infinity for x = 0.  The
value set is ordered in reverse: Level(k) < Level(j) iff k > j, so Level(0)
is the largest finite value and deeper levels are smaller.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .group_core import (
    ElemAbelianElement,
    GroupDescriptor,
    GroupElement,
    GroupError,
    PruferTuple,
    UnboundedEnumerationError,
    divide,
    torsion_subgroup,
)


class SpecError(ValueError):
    """A filtration description violates its invariants."""


class EnumerationBudgetError(GroupError):
    """An exhaustive enumeration would exceed the configured element budget."""


DEFAULT_BUDGET = 1 << 22
_INF_RANK = 1 << 40


@functools.total_ordering
@dataclass(frozen=True)
class Value:
    """An element of Gamma: ``Value(k)`` is Level(k), ``Value(None)`` is infinity."""

    k: Optional[int]

    @property
    def rank(self) -> int:
        return _INF_RANK if self.k is None else -self.k

    @property
    def is_inf(self) -> bool:
        return self.k is None

    def __lt__(self, other):
        if not isinstance(other, Value):
            return NotImplemented
        return self.rank < other.rank

    def __str__(self):
        return "inf" if self.k is None else f"Level({self.k})"

    __repr__ = __str__


def Level(k: int) -> Value:
    if k < 0:
        raise ValueError(f"levels are natural numbers, got {k}")
    return Value(k)


INF = Value(None)


def value_from_level(lv: int) -> Value:
    """Kernel encoding (-1 for the zero element) to a Value."""
    return INF if lv < 0 else Value(int(lv))


@dataclass(frozen=True)
class FiltrationSpec:
    """Finite description of a filtration: explicit prefix, then a tail.

    Schedules are multiplicities (new basis slots) for elementary abelian
    groups and nonempty sets of factors to deepen by one power of p for
    Pruefer products.  The tail is either a periodic list of schedules or,
    for elementary abelian groups only, an affine multiplicity rule
    ``m_k = slope * (k - len(prefix)) + intercept`` with slope >= 1.
    """

    descriptor: GroupDescriptor
    prefix: tuple = ()
    eventual: tuple = ()
    affine: Optional[tuple] = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        g = self.descriptor
        norm = _normalize_schedule_list
        object.__setattr__(self, "prefix", norm(self.prefix, g, "prefix"))
        object.__setattr__(self, "eventual", norm(self.eventual, g, "eventual"))
        if self.affine is not None:
            if not g.is_elem:
                raise SpecError("affine multiplicity mode is only available for elementary "
                                "abelian groups (Pruefer jumps stay bounded)")
            if self.eventual:
                raise SpecError("give either a periodic tail or an affine rule, not both")
            slope, intercept = (int(t) for t in self.affine)
            if slope < 1 or intercept < 1:
                raise SpecError("affine rule needs slope >= 1 and intercept >= 1")
            object.__setattr__(self, "affine", (slope, intercept))
        elif not self.eventual:
            raise SpecError("eventual schedule must have period length >= 1")
        if not g.is_elem:
            covered = set().union(*self.eventual)
            missing = set(range(g.d)) - covered
            if missing:
                raise SpecError(f"factors {sorted(missing)} are never deepened in the eventual "
                                "period, so the union of the G_k would not be the whole group")

    @property
    def p(self) -> int:
        return self.descriptor.p

    @property
    def period(self) -> int:
        return 1 if self.affine is not None else len(self.eventual)

    def schedule(self, k: int):
        if k < 0:
            raise ValueError(f"negative level {k}")
        n = len(self.prefix)
        if k < n:
            return self.prefix[k]
        if self.affine is not None:
            slope, intercept = self.affine
            return slope * (k - n) + intercept
        return self.eventual[(k - n) % len(self.eventual)]

    # -- Pruefer depth bookkeeping ------------------------------------------
    def depths(self, k: int) -> tuple:
        """Exponents D_i(k): G_k is the product of the p**-D_i(k) Z / Z."""
        return _depths(self, k)

    def level_for_exponents(self, exps) -> int:
        """Least k whose depths dominate exps (-1 if all exps are 0)."""
        return max((_need(self, i, e) for i, e in enumerate(exps)), default=-1)

    # -- elementary abelian bookkeeping -------------------------------------
    def multiplicity(self, k: int) -> int:
        return self.schedule(k)

    def __str__(self):
        return self.label or f"{self.descriptor} filtration"


def _normalize_schedule_list(items, g: GroupDescriptor, where: str) -> tuple:
    out = []
    for idx, s in enumerate(items):
        if g.is_elem:
            if isinstance(s, bool) or not isinstance(s, int) or s < 1:
                raise SpecError(f"{where}[{idx}]: multiplicity must be an integer >= 1, got {s!r}")
            out.append(int(s))
        else:
            fs = frozenset(int(t) for t in s)
            if not fs:
                raise SpecError(f"{where}[{idx}]: a level must deepen at least one factor")
            bad = [t for t in fs if not 0 <= t < g.d]
            if bad:
                raise SpecError(f"{where}[{idx}]: factor indices {bad} out of range 0..{g.d - 1}")
            out.append(fs)
    return tuple(out)


_DEPTH_TABLES: dict = {}


def _depths(spec: FiltrationSpec, k: int) -> tuple:
    if k < 0:
        return (0,) * spec.descriptor.d
    table = _DEPTH_TABLES.setdefault(spec, [])
    while len(table) <= k:
        prev = table[-1] if table else (0,) * spec.descriptor.d
        s = spec.schedule(len(table))
        table.append(tuple(D + (1 if i in s else 0) for i, D in enumerate(prev)))
    return table[k]


@functools.lru_cache(maxsize=None)
def _need(spec: FiltrationSpec, i: int, e: int) -> int:
    """Least level k with D_i(k) >= e."""
    if e == 0:
        return -1
    k = 0
    while _depths(spec, k)[i] < e:
        k += 1
    return k


def horizon(spec: FiltrationSpec) -> int:
    """Level from which the tail regime governs: prefix length plus one period."""
    return len(spec.prefix) + spec.period


# -- values -----------------------------------------------------------------

def _check_member(spec: FiltrationSpec, a: GroupElement):
    if a.group != spec.descriptor:
        raise GroupError(f"descriptor mismatch: element of {a.group}, spec over {spec.descriptor}")


def level_of(spec: FiltrationSpec, a: GroupElement) -> int:
    """Level index of a, -1 for zero."""
    _check_member(spec, a)
    if spec.descriptor.is_elem:
        top = -1
        for (k, s), _ in a.support:
            if s >= spec.multiplicity(k):
                raise GroupError(f"basis index ({k},{s}) is not in this filtration "
                                 f"(level {k} has {spec.multiplicity(k)} slots)")
            top = max(top, k)
        return top
    return spec.level_for_exponents(a.exponents())


def value_of(spec: FiltrationSpec, a: GroupElement) -> Value:
    return value_from_level(level_of(spec, a))


# -- truncations ------------------------------------------------------------

class Truncation:
    """Coordinate encoding of the finite group G_K.

    Coordinate j ranges over Z/p**depth[j].  For elementary abelian groups
    there is one coordinate per basis slot (level, slot) with level <= K;
    for Pruefer products one coordinate per factor, where a/p**e is stored
    as a * p**(D_i(K) - e).
    """

    def __init__(self, spec: FiltrationSpec, K: int, budget: int = DEFAULT_BUDGET):
        if K < 0:
            raise ValueError("truncation level must be >= 0")
        self.spec = spec
        self.K = K
        self.budget = budget
        g = spec.descriptor
        p = g.p
        self.p = p
        need, offs = [], []
        if g.is_elem:
            self.slots = [(k, s) for k in range(K + 1) for s in range(spec.multiplicity(k))]
            self._slot_index = {ks: j for j, ks in enumerate(self.slots)}
            depth = [1] * len(self.slots)
            for k, _ in self.slots:
                offs.append(len(need))
                need.extend([-1, k])
        else:
            depth = list(spec.depths(K))
            for i, D in enumerate(depth):
                offs.append(len(need))
                need.extend(_need(spec, i, e) for e in range(D + 1))
        self.depth = np.array(depth, dtype=np.int64)
        if any(p**D >= 1 << 62 for D in depth):
            raise EnumerationBudgetError("coordinate modulus exceeds 62 bits")
        self.moduli = np.array([p**D for D in depth], dtype=np.int64)
        self.need = np.array(need, dtype=np.int64)
        self.offs = np.array(offs, dtype=np.int64)
        # slots are listed by level, so the last nonzero coordinate decides
        self.monotone = g.is_elem

    @property
    def ncoords(self) -> int:
        return len(self.depth)

    def _steps(self, level: int):
        """Per-coordinate (count, step) describing G_level inside G_K."""
        spec, p = self.spec, self.p
        if spec.descriptor.is_elem:
            return [(p, 1) if k <= level else (1, 0) for k, _ in self.slots]
        if level < 0:
            return [(1, 0)] * self.ncoords
        Dl = spec.depths(level)
        return [(p**dl, p ** (int(D) - dl)) for dl, D in zip(Dl, self.depth)]

    def ball_size(self, level: int) -> int:
        """|G_level| (1 for level -1)."""
        if level > self.K:
            raise ValueError(f"level {level} beyond truncation K={self.K}")
        n = 1
        for c, _ in self._steps(level):
            n *= c
        return n

    def rows(self, level: Optional[int] = None) -> np.ndarray:
        """All elements of G_level (default G_K) as coordinate rows, canonical order."""
        level = self.K if level is None else level
        size = self.ball_size(level)
        if size > self.budget:
            raise EnumerationBudgetError(
                f"|G_{level}| = {size} exceeds the enumeration budget {self.budget}")
        out = np.zeros((size, self.ncoords), dtype=np.int64)
        idx = np.arange(size, dtype=np.int64)
        stride = 1
        for j, (c, step) in enumerate(self._steps(level)):
            if c > 1:
                out[:, j] = ((idx // stride) % c) * step
                stride *= c
        return out

    def row_index(self, rows: np.ndarray, level: Optional[int] = None) -> np.ndarray:
        """Positions of rows (elements of G_level) within ``self.rows(level)``."""
        level = self.K if level is None else level
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.ncoords)
        idx = np.zeros(rows.shape[0], dtype=np.int64)
        stride = 1
        for j, (c, step) in enumerate(self._steps(level)):
            if c > 1:
                idx += (rows[:, j] // step) * stride
                stride *= c
        return idx

    def fibre_rows(self, level: int) -> np.ndarray:
        rows = self.rows(level)
        return rows[self.levels(rows) == level]

    def levels(self, rows: np.ndarray) -> np.ndarray:
        return _kernels.levels(rows, self.p, self.depth, self.need, self.offs, self.monotone)

    def affine_levels(self, rows: np.ndarray, mult: int, shift: np.ndarray) -> np.ndarray:
        if self.ncoords and abs(mult) * int(self.moduli.max()) * 2 >= 1 << 62:
            raise EnumerationBudgetError("coefficient too large for 64-bit kernel arithmetic")
        return _kernels.affine_levels(rows, int(mult), shift, self.moduli, self.p,
                                      self.depth, self.need, self.offs, self.monotone)

    def encode(self, a: GroupElement) -> np.ndarray:
        spec = self.spec
        lv = level_of(spec, a)
        if lv > self.K:
            raise GroupError(f"{a} lies at level {lv}, outside G_{self.K}")
        row = np.zeros(self.ncoords, dtype=np.int64)
        if spec.descriptor.is_elem:
            for ks, c in a.support:
                row[self._slot_index[ks]] = c
        else:
            for j, (x, e) in enumerate(a.components):
                row[j] = x * self.p ** (int(self.depth[j]) - e)
        return row

    def decode(self, row) -> GroupElement:
        g = self.spec.descriptor
        if g.is_elem:
            return ElemAbelianElement.from_map(
                g, {self.slots[j]: int(c) for j, c in enumerate(row) if c})
        return PruferTuple.from_pairs(g, [(int(c), int(D)) for c, D in zip(row, self.depth)])

    def decode_all(self, rows) -> list:
        return [self.decode(r) for r in rows]

    def transfer(self, rows: np.ndarray, other: "Truncation") -> np.ndarray:
        """Re-encode rows of this truncation in the coordinates of ``other``.

        The rows must lie in G_(other.K).
        """
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.ncoords)
        out = np.zeros((rows.shape[0], other.ncoords), dtype=np.int64)
        if self.spec.descriptor.is_elem:
            for j, ks in enumerate(self.slots):
                i = other._slot_index.get(ks)
                if i is not None:
                    out[:, i] = rows[:, j]
                elif rows[:, j].any():
                    raise GroupError(f"rows reach slot {ks}, outside G_{other.K}")
            return out
        for j, (ds, do) in enumerate(zip(self.depth, other.depth)):
            if do >= ds:
                out[:, j] = rows[:, j] * self.p ** int(do - ds)
            else:
                q, r = np.divmod(rows[:, j], self.p ** int(ds - do))
                if r.any():
                    raise GroupError(f"rows lie outside G_{other.K}")
                out[:, j] = q
        return out


def enumerate_ball(spec: FiltrationSpec, k: int, budget: int = DEFAULT_BUDGET) -> list:
    """Elements of G_k as GroupElements (G_{-1} = {0})."""
    if k < 0:
        return [spec.descriptor.zero()]
    t = Truncation(spec, k, budget)
    return t.decode_all(t.rows())


def enumerate_fibre(spec: FiltrationSpec, k: int, budget: int = DEFAULT_BUDGET) -> list:
    t = Truncation(spec, k, budget)
    return t.decode_all(t.fibre_rows(k))


# -- balls, jumps, R_m, f_n -------------------------------------------------

def ball(spec: FiltrationSpec, gamma: Value, closed: bool = True,
         budget: int = DEFAULT_BUDGET) -> set:
    """Closed ball {v >= gamma} or open ball {v > gamma}, enumerated exactly."""
    if gamma.is_inf:
        if closed:
            return {spec.descriptor.zero()}
        return set()
    k = gamma.k if closed else gamma.k - 1
    return set(enumerate_ball(spec, k, budget))


def jump_size(spec: FiltrationSpec, k: int) -> int:
    """|G_k / G_{k-1}|."""
    if k < 0:
        raise ValueError(f"negative level {k}")
    s = spec.schedule(k)
    if spec.descriptor.is_elem:
        return spec.p ** s
    return spec.p ** len(s)


def r_m(spec: FiltrationSpec, m: int, gamma: Value) -> bool:
    if gamma.is_inf:
        raise ValueError("R_m is evaluated at finite values only")
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    return jump_size(spec, gamma.k) > m


def r_m_total(spec: FiltrationSpec, m: int, gamma: Value) -> bool:
    """R_m extended to infinity by falsity (B(inf)/B(inf) is trivial)."""
    return False if gamma.is_inf else r_m(spec, m, gamma)


@functools.lru_cache(maxsize=4096)
def f_n_eval(spec: FiltrationSpec, n: int, gamma: Value,
             budget: int = DEFAULT_BUDGET) -> Optional[Value]:
    """f_n(gamma) = v(n x) for v(x) = gamma, or None when not well defined.

    Coprime n acts as the identity and p | n kills an elementary abelian
    group; otherwise the whole fibre over gamma is scanned.
    """
    if n == 0:
        return INF
    if gamma.is_inf:
        return INF
    p = spec.p
    if n % p:
        return gamma
    if spec.descriptor.is_elem:
        return INF
    t = Truncation(spec, gamma.k, budget)
    rows = t.fibre_rows(gamma.k)
    lv = np.unique(t.affine_levels(rows, n, np.zeros(t.ncoords, dtype=np.int64)))
    if lv.size != 1:
        return None
    return value_from_level(int(lv[0]))


def shift_of(spec: FiltrationSpec, k: int) -> Optional[int]:
    """ell with f_p(Level(k)) = Level(k - ell), or None if not a finite shift."""
    f = f_n_eval(spec, spec.p, Level(k))
    if f is None or f.is_inf:
        return None
    return k - f.k


# -- axioms -------------------------------------------------------------------

@dataclass
class AxiomStatus:
    status: str  # "holds" | "holds_generically" | "fails"
    exceptions: list = field(default_factory=list)
    witness: Optional[tuple] = None
    violations: int = 0

    def __str__(self):
        if self.status == "fails":
            return f"fails (witness {self.witness[0]}, {self.witness[1]}; {self.violations} pairs)"
        if self.status == "holds_generically":
            return f"holds generically ({self.violations} exceptional pairs inside the prefix)"
        return "holds"


@dataclass
class AxiomReport:
    horizon: int
    K: int
    axioms: dict

    @property
    def ok(self) -> bool:
        return all(s.status != "fails" for s in self.axioms.values())


def _status(t: Truncation, total: int, wit, lv, hz: int, elems) -> AxiomStatus:
    if total == 0:
        return AxiomStatus("holds")
    pairs = [(int(i), int(k)) for i, k in wit]
    outside = [(i, k) for i, k in pairs if lv[i] >= hz or lv[k] >= hz]
    if outside or len(pairs) < total:
        i, k = outside[0] if outside else pairs[-1]
        return AxiomStatus("fails", witness=(elems(i), elems(k)), violations=int(total))
    return AxiomStatus("holds_generically", exceptions=[(elems(i), elems(k)) for i, k in pairs],
                       violations=int(total))


def check_axioms(spec: FiltrationSpec, K: int, budget: int = DEFAULT_BUDGET,
                 cap: int = 4096) -> AxiomReport:
    """Exhaustively check axioms (1)-(5) over G_K for the prime p.

    Exceptions to (3)-(5) are tolerated when both elements of the pair lie
    below the horizon; anything else is reported as a failure with a witness.
    Axioms (1) and (2) admit no exceptions.
    """
    hz = horizon(spec)
    if K < hz:
        raise ValueError(f"K={K} is below the horizon {hz}")
    t = Truncation(spec, K, budget)
    rows = t.rows()
    n = rows.shape[0]
    if n * n > budget * 64:
        raise EnumerationBudgetError(f"{n}^2 pairs exceed the pair budget")
    p = spec.p
    zero = np.zeros(t.ncoords, dtype=np.int64)
    lv = t.levels(rows)
    lvp = t.affine_levels(rows, p, zero)
    elems = lambda i: t.decode(rows[i])  # noqa: E731
    rank = np.where(lv < 0, _INF_RANK, -lv)
    rank_p = np.where(lvp < 0, _INF_RANK, -lvp)
    out = {}

    mismatch = np.flatnonzero((lv < 0) != ~(rows != 0).any(axis=1))
    if mismatch.size:
        bad = elems(int(mismatch[0]))
        out["1"] = AxiomStatus("fails", witness=(bad, bad), violations=int(mismatch.size))
    else:
        out["1"] = AxiomStatus("holds")

    counts, wit = _kernels.pair_scan(rows, t.moduli, p, t.depth, t.need, t.offs, t.monotone)
    if counts[0]:
        i, k = wit[0]
        out["2"] = AxiomStatus("fails", witness=(elems(i), elems(k)), violations=int(counts[0]))
    else:
        out["2"] = AxiomStatus("holds")

    none = np.zeros(n, dtype=np.uint8)
    # (3) v(px) < v(py) -> v(x) < v(y)
    total, w = _kernels.implication_scan(rank_p, rank_p, rank, rank, none, cap)
    out["3"] = _status(t, total, w, lv, hz, elems)
    # (4) v(x) < v(y) -> v(px) < v(py) or px = 0
    total, w = _kernels.implication_scan(rank, rank, rank_p, rank_p,
                                         (lvp < 0).astype(np.uint8), cap)
    out["4"] = _status(t, total, w, lv, hz, elems)
    # (5) v(x) < v(py) or x is p-divisible in G
    divisible = np.array([_p_divisible(spec, t.decode(r)) for r in rows], dtype=np.uint8)
    lo = np.zeros(n, dtype=np.int64)
    hi = np.ones(n, dtype=np.int64)
    total, w = _kernels.implication_scan(lo, hi, rank, rank_p, divisible, cap)
    out["5"] = _status(t, total, w, lv, hz, elems)
    return AxiomReport(horizon=hz, K=K, axioms=out)


def _p_divisible(spec, x) -> bool:
    try:
        return bool(divide(spec.p, x))
    except UnboundedEnumerationError:  # 0 in an elementary abelian group
        return True


def p_torsion_size(spec: FiltrationSpec) -> int:
    """|G[p]| for Pruefer products (p**d)."""
    return len(torsion_subgroup(spec.descriptor, spec.p))


def quotient_by_p_image(spec: FiltrationSpec, k: int) -> int:
    """|B(v(g)) / B(v(pg))| for v(g) = Level(k), from ball sizes (None if f_p undefined)."""
    f = f_n_eval(spec, spec.p, Level(k))
    if f is None:
        return None
    t = Truncation(spec, k)
    below = 1 if f.is_inf else t.ball_size(f.k)
    return t.ball_size(k) // below


__all__ = [
    "AxiomReport", "AxiomStatus", "EnumerationBudgetError", "FiltrationSpec", "INF", "Level",
    "SpecError", "Truncation", "Value", "ball", "check_axioms", "enumerate_ball",
    "enumerate_fibre", "f_n_eval", "horizon", "jump_size", "level_of", "p_torsion_size",
    "quotient_by_p_image", "r_m", "r_m_total", "shift_of", "value_from_level", "value_of",
]
