"""Orders from valuations and valuations from orders, plus two example orders.

Orders here are finite: a carrier list and a strict relation stored as a
boolean matrix, checked to be irreflexive and transitive on construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Optional, Sequence

import numpy as np

from .group_core import GroupElement, _Element
from .valuation import FiltrationSpec, Truncation, Value, value_from_level, value_of


def _composes(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Boolean relation product: out[i, k] iff a[i, j] and b[j, k] for some j."""
    # float32 matmul runs on BLAS; counts stay far below 2**24, so it is exact
    return (a.astype(np.float32) @ b.astype(np.float32)) > 0


class OrderError(ValueError):
    pass


class NotAlmostLinearError(OrderError):
    def __init__(self, message: str, witness: tuple):
        super().__init__(message)
        self.witness = witness


@dataclass
class OrderView:
    carrier: list
    less: np.ndarray  # less[i, j] iff carrier[i] < carrier[j]
    provenance: str  # "from_valuation" | "example" | "modified"
    spec: Optional[FiltrationSpec] = None
    trunc: Optional[Truncation] = field(default=None, repr=False)  # carrier = decoded rows
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.carrier)
        if self.less.shape != (n, n):
            raise OrderError("relation matrix does not match the carrier")
        self.index = {x: i for i, x in enumerate(self.carrier)}
        if self.less.diagonal().any():
            i = int(np.flatnonzero(self.less.diagonal())[0])
            raise OrderError(f"relation is not irreflexive at {self.carrier[i]}")
        two_step = _composes(self.less, self.less)
        bad = np.argwhere(two_step & ~self.less)
        if bad.size:
            i, k = bad[0]
            j = int(np.flatnonzero(self.less[i] & self.less[:, k])[0])
            raise OrderError("relation is not transitive: "
                             f"{self.carrier[i]} < {self.carrier[j]} < {self.carrier[k]}")

    @classmethod
    def from_relation(cls, carrier: Sequence[Hashable], less: Callable, provenance="example",
                      spec=None) -> "OrderView":
        carrier = list(carrier)
        n = len(carrier)
        mat = np.zeros((n, n), dtype=bool)
        for i, x in enumerate(carrier):
            for j, y in enumerate(carrier):
                mat[i, j] = bool(less(x, y))
        return cls(carrier, mat, provenance, spec)

    @classmethod
    def from_rank(cls, carrier: Sequence[Hashable], rank: Callable,
                  provenance="example") -> "OrderView":
        """x < y iff rank(x) < rank(y), for integer-valued rank."""
        carrier = list(carrier)
        r = np.array([rank(x) for x in carrier], dtype=np.int64)
        return cls(carrier, r[:, None] < r[None, :], provenance)

    @property
    def is_group_carrier(self) -> bool:
        return bool(self.carrier) and all(isinstance(x, _Element) for x in self.carrier)

    def with_relation(self, less: np.ndarray, provenance: str = "modified") -> "OrderView":
        out = OrderView(self.carrier, less, provenance, self.spec, self.trunc)
        if "_diff" in self.__dict__:
            out.__dict__["_diff"] = self.__dict__["_diff"]
        return out

    def difference_table(self) -> np.ndarray:
        """diff[i, j] = index of carrier[i] - carrier[j], or -1 if it is not in the carrier."""
        if "_diff" not in self.__dict__:
            if not self.is_group_carrier:
                raise OrderError("differences need a group carrier")
            n = len(self.carrier)
            if self.trunc is not None:
                t = self.trunc
                rows = t.rows()
                diff = np.empty((n, n), dtype=np.int64)
                for i in range(n):
                    d = (rows[i][None, :] - rows) % t.moduli[None, :]
                    diff[i] = t.row_index(d)
            else:
                diff = np.array([[self.index.get(x - y, -1) for y in self.carrier]
                                 for x in self.carrier], dtype=np.int64).reshape(n, n)
            self.__dict__["_diff"] = diff
        return self.__dict__["_diff"]

    def is_subgroup(self, mask: np.ndarray) -> bool:
        """Whether the carrier elements selected by mask form a subgroup."""
        cache = self.__dict__.setdefault("_closure_cache", {})
        key = np.packbits(mask).tobytes()
        if key not in cache:
            idx = np.flatnonzero(mask)
            sub = self.difference_table()[np.ix_(idx, idx)]
            cache[key] = bool(idx.size) and bool((sub >= 0).all()) and bool(mask[sub].all())
        return cache[key]

    def lt(self, x, y) -> bool:
        return bool(self.less[self.index[x], self.index[y]])

    def incomparable_matrix(self) -> np.ndarray:
        return ~(self.less | self.less.T)

    def incomparable(self, x, y) -> bool:
        return not (self.lt(x, y) or self.lt(y, x))

    def transitivity_witness(self) -> Optional[tuple]:
        """(a, b, c) with a ~ b, b ~ c, a !~ c, or None if ~ is an equivalence."""
        inc = self.incomparable_matrix()
        two = _composes(inc, inc)
        bad = np.argwhere(two & ~inc)
        if not bad.size:
            return None
        i, k = bad[0]
        j = int(np.flatnonzero(inc[i] & inc[:, k])[0])
        return self.carrier[i], self.carrier[j], self.carrier[k]

    def classes(self) -> list:
        """~-classes in increasing order; requires ~ to be an equivalence and the quotient linear."""
        w = self.transitivity_witness()
        if w is not None:
            raise NotAlmostLinearError(f"incomparability is not transitive: {w}", w)
        inc = self.incomparable_matrix()
        seen = np.zeros(len(self.carrier), dtype=bool)
        groups = []
        for i in range(len(self.carrier)):
            if not seen[i]:
                members = np.flatnonzero(inc[i])
                seen[members] = True
                groups.append(members)
        # number of elements strictly below a class orders the quotient
        groups.sort(key=lambda m: int(self.less[:, m[0]].sum()))
        return [[self.carrier[i] for i in m] for m in groups]


def order_from_valuation(spec: FiltrationSpec, K: int) -> OrderView:
    """Carrier G_K with x < y iff v(x) > v(y)."""
    t = Truncation(spec, K)
    rows = t.rows()
    lv = t.levels(rows)
    rank = np.where(lv < 0, 1 << 40, -lv)
    less = rank[:, None] > rank[None, :]
    return OrderView(t.decode_all(rows), less, "from_valuation", spec, t)


def h_subgroup(view: OrderView, g: GroupElement) -> tuple:
    """(H_g, is_subgroup) with H_g = {x : not g < x}."""
    if not view.is_group_carrier:
        raise OrderError("H_g needs a group carrier")
    mask = ~view.less[view.index[g]]
    H = frozenset(view.carrier[j] for j in np.flatnonzero(mask))
    return H, view.is_subgroup(mask)


@dataclass
class RoundTripReport:
    levels: dict  # element -> Value
    modifications: list
    axiom1: bool
    axiom2: bool
    round_trip: bool
    view: OrderView  # the (possibly modified) order the levels come from


def canonical_modification(view: OrderView) -> tuple:
    """Make 0 the unique minimum, then merge an initial segment so every H_g is a subgroup."""
    if not view.is_group_carrier:
        raise OrderError("valuation_from_order needs a group carrier")
    less = view.less.copy()
    log = []
    zero = view.carrier[0].group.zero()
    if zero not in view.index:
        raise OrderError("carrier does not contain 0")
    z = view.index[zero]
    others = np.arange(len(view.carrier)) != z
    if not (less[z, others].all() and not less[others, z].any()):
        less[z, :] = others
        less[:, z] = False
        log.append("made 0 the unique minimal element")
    cur = view.with_relation(less)
    bad = [g for i, g in enumerate(cur.carrier) if not cur.is_subgroup(~cur.less[i])]
    if bad:
        bad_idx = [cur.index[g] for g in bad]
        # least elements above every bad g
        above = np.ones(len(cur.carrier), dtype=bool)
        for b in bad_idx:
            above &= less[b]
        cand = np.flatnonzero(above)
        if not cand.size:
            raise OrderError("no element lies above all elements with non-subgroup H_g")
        g0 = min(cand, key=lambda j: int(less[:, j].sum()))
        seg = [j for j in np.flatnonzero(~less[g0]) if j != z]
        for a in seg:
            for b in seg:
                less[a, b] = False
        # keep transitivity: anything above one merged element is above all of them
        for a in seg:
            for c in range(len(cur.carrier)):
                if any(less[b, c] for b in seg) and c not in seg:
                    less[a, c] = True
        log.append(f"made the {len(seg)} nonzero elements of H_g0 pairwise incomparable "
                   f"(g0 = {cur.carrier[g0]})")
        cur = view.with_relation(less)
    return cur, log


def valuation_from_order(view: OrderView) -> RoundTripReport:
    """Levels from the ~-classes: the class of 0 is inf, the next one up Level(0), and so on."""
    if not view.is_group_carrier:
        raise OrderError("valuation_from_order needs a group carrier")
    w = view.transitivity_witness()
    if w is not None:
        raise NotAlmostLinearError(f"incomparability is not transitive: {w}", w)
    mod, log = canonical_modification(view)
    classes = mod.classes()
    levels = {}
    for pos, cls in enumerate(classes):
        for x in cls:
            levels[x] = value_from_level(pos - 1)
    zero = view.carrier[0].group.zero()
    axiom1 = all(levels[x].is_inf == (x == zero) for x in mod.carrier)
    rank = np.array([levels[x].rank for x in mod.carrier])
    diff = mod.difference_table()
    closed = diff >= 0
    axiom2 = bool(closed.all()) and bool(
        (rank[diff] >= np.minimum(rank[:, None], rank[None, :])).all())
    rebuilt = rank[:, None] > rank[None, :]
    return RoundTripReport(levels, log, axiom1, axiom2, bool((rebuilt == mod.less).all()), mod)


# -- example structures ------------------------------------------------------------

@dataclass(frozen=True, order=True)
class JagiellaPoint:
    n: int
    side: str  # "l" | "r"

    def __post_init__(self):
        if self.side not in ("l", "r") or self.n < 0:
            raise ValueError(f"bad point ({self.n}, {self.side})")

    def __str__(self):
        return f"({self.n},{self.side})"


def jagiella_less(x: JagiellaPoint, y: JagiellaPoint) -> bool:
    if x.side == y.side:
        return x.n < y.n
    return x.n + 2 <= y.n


def jagiella_f(x: JagiellaPoint) -> JagiellaPoint:
    """The largest element incomparable to x (search over the window around x)."""
    window = [JagiellaPoint(m, s) for m in range(max(0, x.n - 3), x.n + 4) for s in "lr"]
    inc = [y for y in window if y != x and not jagiella_less(x, y) and not jagiella_less(y, x)]
    tops = [y for y in inc if not any(jagiella_less(y, z) for z in inc)]
    if len(tops) != 1:
        raise OrderError(f"no unique maximal incomparable element for {x}: {tops}")
    return tops[0]


def jagiella_derived_less(x: JagiellaPoint, y: JagiellaPoint) -> bool:
    return jagiella_less(x, y) or y == jagiella_f(x)


def quotient_class(x: JagiellaPoint) -> int:
    return x.n


def jagiella_points(bound: int) -> list:
    return [JagiellaPoint(n, s) for n in range(bound + 1) for s in "lr"]


def jagiella_a(n: int) -> JagiellaPoint:
    return JagiellaPoint(n, "l" if n % 2 == 0 else "r")


@dataclass(frozen=True, order=True)
class TrianglePoint:
    n: int
    m: int

    def __post_init__(self):
        if not 0 <= self.m <= self.n:
            raise ValueError(f"triangle point needs 0 <= m <= n, got ({self.n},{self.m})")

    def __str__(self):
        return f"({self.n},{self.m})"


def triangle_less(x: TrianglePoint, y: TrianglePoint) -> bool:
    return x.n < y.n


def triangle_quotient(x: TrianglePoint) -> int:
    return x.n


def triangle_points(bound: int) -> list:
    return [TrianglePoint(n, m) for n in range(bound + 1) for m in range(n + 1)]


def quotient_is_initial_omega(view: OrderView, class_index: Callable) -> bool:
    """The ~-quotient is linear and class_index is an isomorphism onto {0, ..., N}."""
    classes = view.classes()
    for pos, cls in enumerate(classes):
        if {class_index(x) for x in cls} != {pos}:
            return False
    idx = [[view.index[x] for x in cls] for cls in classes]
    return all(view.less[np.ix_(a, b)].all() for a, b in zip(idx, idx[1:]))


def example_suite(name: str, bound: int) -> list:
    """(property, passed) pairs for the named example structure."""
    if name == "jagiella":
        pts = jagiella_points(bound)
        base = OrderView.from_relation(pts, jagiella_less)
        derived = OrderView.from_relation(pts, jagiella_derived_less)
        a = [jagiella_a(n) for n in range(bound + 1)]
        derived_classes = derived.classes()
        return [
            ("a_n ~ a_(n+1) for all n < bound",
             all(base.incomparable(a[n], a[n + 1]) for n in range(bound))),
            ("a_n and a_(n+2) comparable for all n <= bound - 2",
             all(not base.incomparable(a[n], a[n + 2]) for n in range(bound - 1))),
            ("incomparability of < is not transitive", base.transitivity_witness() is not None),
            ("<' is a strict partial order", True),
            ("<'-classes are exactly {(n,l),(n,r)}",
             sorted(map(sorted, derived_classes)) ==
             [[JagiellaPoint(n, "l"), JagiellaPoint(n, "r")] for n in range(bound + 1)]),
            ("<' quotient is an initial segment of (omega,<)",
             quotient_is_initial_omega(derived, quotient_class)),
        ]
    if name == "triangle":
        pts = triangle_points(bound)
        # triangle_less compares first coordinates, i.e. the quotient map
        view = OrderView.from_rank(pts, triangle_quotient)
        return [
            ("< is a strict partial order", True),
            ("incomparability is transitive", view.transitivity_witness() is None),
            ("quotient is an initial segment of (omega,<)",
             quotient_is_initial_omega(view, triangle_quotient)),
        ]
    raise OrderError(f"unknown example {name!r} (expected 'jagiella' or 'triangle')")


def fibre_census(spec: FiltrationSpec, K: int) -> list:
    """[(value, class size)] for the ~-classes of G_K, zero first."""
    view = order_from_valuation(spec, K)
    out = []
    for cls in view.classes():
        out.append((value_of(spec, cls[0]), len(cls)))
    return out


__all__ = [
    "JagiellaPoint", "NotAlmostLinearError", "OrderError", "OrderView", "RoundTripReport",
    "TrianglePoint", "Value", "example_suite", "fibre_census", "h_subgroup", "jagiella_a",
    "jagiella_derived_less", "jagiella_f", "jagiella_less", "jagiella_points",
    "order_from_valuation", "quotient_class", "quotient_is_initial_omega", "triangle_less",
    "triangle_points", "triangle_quotient", "valuation_from_order",
]
