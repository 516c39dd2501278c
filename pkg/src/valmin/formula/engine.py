"""Evaluation and finite/cofinite decision for one-variable formulas.

``extension`` is the brute-force oracle: scan G_K and evaluate every atom.
``reduce``/``classify`` follow the normal-form argument instead: outside a
finite exceptional set X (where some v(n_i x) >= v(h_i)) and the prefix
region Y, the value v(n_i x + h_i) equals f_{n_i}(v(x)), so truth depends on
the level of x only and is eventually periodic in it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..group_core import GroupElement, p_adic_valuation
from ..valuation import (
    DEFAULT_BUDGET,
    FiltrationSpec,
    Level,
    Truncation,
    Value,
    f_n_eval,
    horizon,
    jump_size,
    level_of,
    r_m_total,
    shift_of,
    value_of,
)
from .ast import And, Formula, GroupTerm, IsInf, Not, Rm, ValueLeq, atoms, terms

_INF_RANK = 1 << 40


class SpecIntegrityError(ValueError):
    """f_n is not well defined beyond the horizon of the spec."""


class NotEventuallyConstantError(ValueError):
    """The reduced level condition is periodic but not constant: neither finite nor cofinite."""

    def __init__(self, message: str, reduction: "Reduction"):
        super().__init__(message)
        self.reduction = reduction


# -- pointwise and vectorised evaluation ----------------------------------------

def _eval_tree(phi: Formula, atom_value: Callable, vector: bool):
    if isinstance(phi, (ValueLeq, IsInf, Rm)):
        return atom_value(phi)
    if isinstance(phi, Not):
        v = _eval_tree(phi.arg, atom_value, vector)
        return ~v if vector else not v
    vals = [_eval_tree(a, atom_value, vector) for a in phi.args]
    out = vals[0]
    for v in vals[1:]:
        out = (out & v) if isinstance(phi, And) else (out | v)
    return out


def term_value(spec: FiltrationSpec, t: GroupTerm, a: GroupElement) -> Value:
    return value_of(spec, t.coeff * a + t.offset)


def eval_point(phi: Formula, a: GroupElement, spec: FiltrationSpec) -> bool:
    """Truth of phi at x = a, computed directly from value_of and R_m."""
    def atom(at):
        if isinstance(at, ValueLeq):
            return term_value(spec, at.left, a) <= term_value(spec, at.right, a)
        if isinstance(at, IsInf):
            return term_value(spec, at.term, a).is_inf
        return r_m_total(spec, at.m, term_value(spec, at.term, a))
    return bool(_eval_tree(phi, atom, vector=False))


def _working_truncation(spec: FiltrationSpec, phi: Formula, K: int, budget: int) -> Truncation:
    top = max([K] + [level_of(spec, t.offset) for t in terms(phi)])
    return Truncation(spec, top, budget)


def eval_rows(phi: Formula, spec: FiltrationSpec, trunc: Truncation, rows: np.ndarray) -> np.ndarray:
    """Boolean mask of phi over coordinate rows of ``trunc``."""
    cache = {}
    jumps = {}

    def rank(t: GroupTerm):
        key = (t.coeff, t.offset)
        if key not in cache:
            lv = trunc.affine_levels(rows, t.coeff, trunc.encode(t.offset))
            cache[key] = lv
        return cache[key]

    def r_table(m, lv):
        top = int(lv.max()) if lv.size else -1
        key = (m, top)
        if key not in jumps:
            jumps[key] = np.array([False] + [jump_size(spec, k) > m for k in range(top + 1)])
        return jumps[key][lv + 1]

    def atom(at):
        if isinstance(at, ValueLeq):
            a, b = rank(at.left), rank(at.right)
            ra = np.where(a < 0, _INF_RANK, -a)
            rb = np.where(b < 0, _INF_RANK, -b)
            return ra <= rb
        if isinstance(at, IsInf):
            return rank(at.term) < 0
        return r_table(at.m, rank(at.term))

    if rows.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    out = _eval_tree(phi, atom, vector=True)
    return np.broadcast_to(np.asarray(out, dtype=bool), (rows.shape[0],)).copy()


def eval_elements(phi: Formula, spec: FiltrationSpec, elements) -> list:
    elements = list(elements)
    if not elements:
        return []
    top = max(level_of(spec, a) for a in elements)
    trunc = _working_truncation(spec, phi, max(top, 0), DEFAULT_BUDGET)
    rows = np.array([trunc.encode(a) for a in elements], dtype=np.int64).reshape(
        len(elements), trunc.ncoords)
    return list(eval_rows(phi, spec, trunc, rows))


def extension_mask(phi: Formula, spec: FiltrationSpec, K: int, budget: int = DEFAULT_BUDGET):
    """(truncation, rows of G_K, mask) from an exhaustive scan."""
    trunc = _working_truncation(spec, phi, K, budget)
    rows = trunc.rows(K)
    return trunc, rows, eval_rows(phi, spec, trunc, rows)


def extension(phi: Formula, spec: FiltrationSpec, K: int, budget: int = DEFAULT_BUDGET) -> set:
    """{a in G_K : phi(a)} by exhaustive scan."""
    trunc, rows, mask = extension_mask(phi, spec, K, budget)
    return set(trunc.decode_all(rows[mask]))


# -- reduction ----------------------------------------------------------------------

@dataclass
class Reduction:
    """Normal form of phi outside a finite set.

    ``table[k]`` is the truth value of the reduced condition at level k for
    horizon <= k < k_star + period; beyond that it repeats with the period.
    X and Y are kept as masks over ``special_rows``, all of G_(special_trunc.K).
    """

    phi: Formula
    spec: FiltrationSpec
    special_trunc: Truncation = field(repr=False)
    special_rows: np.ndarray = field(repr=False)
    x_mask: np.ndarray = field(repr=False)
    y_mask: np.ndarray = field(repr=False)
    horizon: int
    k_star: int
    period: int
    f_values: dict  # (n, k) -> Value
    table: dict
    condition: str

    def holds_at_level(self, k: int) -> bool:
        if k < self.horizon:
            raise ValueError(f"level {k} is inside the prefix region")
        if k >= self.k_star:
            k = self.k_star + (k - self.k_star) % self.period
        return self.table[k]

    @property
    def eventual_values(self) -> list:
        return [self.table[k] for k in range(self.k_star, self.k_star + self.period)]

    @property
    def special_mask(self) -> np.ndarray:
        return self.x_mask | self.y_mask

    @property
    def exceptional(self) -> frozenset:
        """X as a set of elements."""
        return frozenset(self.special_trunc.decode_all(self.special_rows[self.x_mask]))

    @property
    def prefix_region(self) -> frozenset:
        """Y as a set of elements."""
        return frozenset(self.special_trunc.decode_all(self.special_rows[self.y_mask]))


def _coeff(spec: FiltrationSpec, t: GroupTerm) -> int:
    return t.coeff % spec.p if spec.descriptor.is_elem else t.coeff


def _exceptional_top(spec: FiltrationSpec, n: int, L: int, H: int) -> int:
    """Deepest level holding a g with v(n g) >= Level(L).

    G_L is always inside; past the horizon v(n g) only moves away from
    Level(L) as v(g) shrinks, so the scan stops at the first clean fibre there.
    """
    top, M = L, L + 1
    while True:
        t = Truncation(spec, M)
        fib = t.fibre_rows(M)
        hit = (t.affine_levels(fib, n, np.zeros(t.ncoords, dtype=np.int64)) <= L).any()
        if hit:
            top = M
        elif M >= H:
            return top
        M += 1


def _special_masks(spec: FiltrationSpec, phi: Formula, H: int):
    """(truncation, rows, X mask, Y mask) with X u Y inside the rows.

    X = {g : v(n g) >= v(h) for some term n*x + h with n != 0}; Y = G_(H-1).
    """
    parts = set()
    for t in terms(phi):
        n = _coeff(spec, t)
        if n:
            # balls are subgroups, so the sign of n does not matter
            parts.add((abs(n), level_of(spec, t.offset)))
    tops = [_exceptional_top(spec, n, L, H) for n, L in sorted(parts) if L >= 0]
    param_top = max([level_of(spec, t.offset) for t in terms(phi)] + [0])
    trunc = Truncation(spec, max(tops + [H - 1, param_top, 0]))
    rows = trunc.rows()
    lv = trunc.levels(rows)
    zero = np.zeros(trunc.ncoords, dtype=np.int64)
    x_mask = np.zeros(rows.shape[0], dtype=bool)
    for n, L in sorted(parts):
        x_mask |= trunc.affine_levels(rows, n, zero) <= L
    return trunc, rows, x_mask, lv <= H - 1


def _condition_text(phi: Formula, spec: FiltrationSpec) -> str:
    def tv(t: GroupTerm) -> str:
        n = _coeff(spec, t)
        if n == 0:
            return str(value_of(spec, t.offset))
        return "v(x)" if n == 1 else f"f_{n}(v(x))"

    def go(f):
        if isinstance(f, ValueLeq):
            return f"{tv(f.left)} <= {tv(f.right)}"
        if isinstance(f, IsInf):
            return f"{tv(f.term)} = inf"
        if isinstance(f, Rm):
            return f"R_{f.m}({tv(f.term)})"
        if isinstance(f, Not):
            return f"!({go(f.arg)})"
        sep = " & " if isinstance(f, And) else " | "
        return "(" + sep.join(go(a) for a in f.args) + ")"
    return go(phi)


def _shift_and_nu(spec: FiltrationSpec, phi: Formula) -> tuple:
    """(eventual shift of f_p, largest p-adic valuation of a coefficient in phi)."""
    if spec.descriptor.is_elem:
        return 1, 0
    ell = shift_of(spec, horizon(spec)) or spec.period
    nu = max([p_adic_valuation(t.coeff, spec.p) for t in terms(phi) if t.coeff] + [0])
    return ell, nu


def safe_horizon(spec: FiltrationSpec, phi: Formula) -> int:
    """K* beyond which the reduced condition is periodic with the spec's period."""
    param_top = max([level_of(spec, t.offset) for t in terms(phi)] + [0])
    base = max(param_top, len(spec.prefix))
    ell, max_nu = _shift_and_nu(spec, phi)
    k_star = base + ell * (1 + max_nu) + 2 * spec.period
    if spec.affine is not None:
        ms = [at.m for at in atoms(phi) if isinstance(at, Rm)]
        if ms:
            # R_m is eventually true once the jump exceeds every m in phi
            k = len(spec.prefix)
            while jump_size(spec, k) <= max(ms):
                k += 1
            k_star = max(k_star, k + 1)
    return k_star


def reduce(phi: Formula, spec: FiltrationSpec) -> Reduction:
    H0 = horizon(spec)
    k_star = safe_horizon(spec, phi)
    P = spec.period
    ell, nu = _shift_and_nu(spec, phi)
    coeffs = sorted({_coeff(spec, t) for t in terms(phi)} - {0})
    f_values = {}
    H = H0
    for n in coeffs:
        for k in range(H0, k_star + P):
            f = f_n_eval(spec, abs(n), Level(k))
            if f is not None:
                f_values[(n, k)] = f
            elif k < H0 + ell * nu:
                # p^j x for x just past the horizon can land back in the prefix
                H = max(H, k + 1)
            else:
                raise SpecIntegrityError(
                    f"f_{abs(n)} is not well defined at Level({k}), beyond the horizon {H0}")
    trunc, rows, x_mask, y_mask = _special_masks(spec, phi, H)

    def level_value(t: GroupTerm, k: int) -> Value:
        n = _coeff(spec, t)
        if n == 0:
            return value_of(spec, t.offset)
        return f_values[(n, k)]

    table = {}
    for k in range(H, k_star + P):
        def atom(at, k=k):
            if isinstance(at, ValueLeq):
                return level_value(at.left, k) <= level_value(at.right, k)
            if isinstance(at, IsInf):
                return level_value(at.term, k).is_inf
            return r_m_total(spec, at.m, level_value(at.term, k))
        table[k] = bool(_eval_tree(phi, atom, vector=False))
    return Reduction(phi=phi, spec=spec, special_trunc=trunc, special_rows=rows,
                     x_mask=x_mask, y_mask=y_mask, horizon=H,
                     k_star=k_star, period=P, f_values=f_values, table=table,
                     condition=_condition_text(phi, spec))


# -- verdicts -------------------------------------------------------------------------

@dataclass
class Verdict:
    kind: str  # "Finite" | "Cofinite"
    elements: list  # members (Finite) or non-members (Cofinite), canonical order
    reduction: Reduction = field(repr=False)

    @property
    def is_finite(self) -> bool:
        return self.kind == "Finite"

    def __contains__(self, a: GroupElement) -> bool:
        return (a in self._set) == self.is_finite

    @property
    def _set(self) -> frozenset:
        s = self.__dict__.get("_frozen")
        if s is None:
            s = self.__dict__["_frozen"] = frozenset(self.elements)
        return s

    def trace(self) -> dict:
        r = self.reduction
        return {
            "exceptional_set_size": int(r.x_mask.sum()),
            "prefix_region_size": int(r.y_mask.sum()),
            "horizon": r.horizon,
            "safe_horizon": r.k_star,
            "eventual_value": r.eventual_values[0],
            "reduced_condition": r.condition,
        }

    def __str__(self):
        return f"{self.kind}({len(self.elements)})"


def classify(phi: Formula, spec: FiltrationSpec, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Decide whether phi defines a finite or cofinite set, with explicit lists."""
    red = reduce(phi, spec)
    ev = red.eventual_values
    if len(set(ev)) != 1:
        raise NotEventuallyConstantError(
            f"reduced condition {red.condition} takes values {ev} over one period beyond "
            f"level {red.k_star}", red)
    eventual = ev[0]
    T, rows = red.special_trunc, red.special_rows
    special = red.special_mask
    lv = T.levels(rows)
    # exceptions: points of X u Y on the minority side ...
    listed = special & (eval_rows(phi, spec, T, rows) != eventual)
    # ... and whole fibres outside X u Y whose level condition disagrees
    bad_levels = [k for k in range(red.horizon, red.k_star) if red.table[k] != eventual]
    listed |= ~special & np.isin(lv, [k for k in bad_levels if k <= T.K])
    found = [(T, rows[listed])]
    for k in (k for k in bad_levels if k > T.K):
        t = Truncation(spec, k, budget)
        found.append((t, t.fibre_rows(k)))
    # one truncation holds every listed element; canonical order is (level, sort_key)
    top = max(t.K for t, _ in found)
    out_t = T if top == T.K else Truncation(spec, top, budget)
    out_rows = np.concatenate([t.transfer(r, out_t) for t, r in found])
    elems = out_t.decode_all(out_rows)
    out_lv = out_t.levels(out_rows)
    order = sorted(range(len(elems)), key=lambda i: (int(out_lv[i]), elems[i].sort_key()))
    kind = "Cofinite" if eventual else "Finite"
    v = Verdict(kind, [elems[i] for i in order], red)
    v.__dict__["_rows"] = (out_t, out_rows[order] if order else out_rows)
    return v


def _rows_in(verdict: Verdict, spec: FiltrationSpec, trunc: Truncation, K: int) -> np.ndarray:
    """Listed elements of level <= K, encoded in ``trunc``."""
    if "_rows" in verdict.__dict__:
        src, rows = verdict.__dict__["_rows"]
        return src.transfer(rows[src.levels(rows) <= K], trunc)
    inside = [a for a in verdict.elements if level_of(spec, a) <= K]
    return np.array([trunc.encode(a) for a in inside], dtype=np.int64).reshape(-1, trunc.ncoords)


def verdict_mask(verdict: Verdict, spec: FiltrationSpec, trunc: Truncation, K: int) -> np.ndarray:
    """Membership of the verdict over ``trunc.rows(K)``."""
    hit = np.zeros(trunc.ball_size(K), dtype=bool)
    inside = _rows_in(verdict, spec, trunc, K)
    if inside.shape[0]:
        hit[trunc.row_index(inside, K)] = True
    return hit if verdict.is_finite else ~hit


def rewrite_mismatches(red: Reduction, K: int, budget: int = DEFAULT_BUDGET) -> list:
    """Elements of G_K outside X u Y where phi and the reduced level condition differ."""
    trunc, rows, mask = extension_mask(red.phi, red.spec, K, budget)
    lv = trunc.levels(rows)
    special = np.zeros(rows.shape[0], dtype=bool)
    S, srows = red.special_trunc, red.special_rows[red.special_mask]
    srows = srows[S.levels(srows) <= K]
    if srows.shape[0]:
        special[trunc.row_index(S.transfer(srows, trunc), K)] = True
    by_level = np.array([k >= red.horizon and red.holds_at_level(k) for k in range(K + 1)])
    predicted = by_level[np.maximum(lv, 0)]
    bad = ~special & (lv >= red.horizon) & (predicted != mask)
    return trunc.decode_all(rows[bad])
