"""Minimality of a filtered group, decided from its schedule.

A valued group with infinite value set is minimal exactly when Gamma has
order type omega*, the fibres of v are finite, and either

* G is elementary abelian and the jumps are eventually constant (case 3a)
  or every jump size occurs only finitely often (case 3b), or
* G is a finite product of Pruefer groups, f_p is eventually a well-defined
  right shift preserving every R_m, and the jumps are eventually constant
  (case 4).

The first two conditions hold for every filtration by finite subgroups with
strictly growing levels, so the work is in the last two.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .formula.ast import Rm, make_term, to_text
from .formula.corpus import FormulaSampler
from .formula.engine import classify, extension_mask, verdict_mask
from .group_core import p_adic_valuation
from .valuation import (
    DEFAULT_BUDGET,
    FiltrationSpec,
    Level,
    Truncation,
    f_n_eval,
    horizon,
    jump_size,
)

DEFAULT_SEED = 20240601
CORROBORATION_ROWS = 1 << 17


class PreconditionError(ValueError):
    pass


class InconsistencyError(RuntimeError):
    """The decision procedure and the brute-force scan disagree."""

    def __init__(self, message: str, formula: str = ""):
        super().__init__(message)
        self.formula = formula


@dataclass
class ClassificationReport:
    spec_label: str
    verdict: str  # "Minimal" | "NotMinimal"
    case: Optional[str]  # "3a" | "3b" | "4" | None
    n0: Optional[int] = None
    ell: Optional[int] = None
    violated_condition: Optional[str] = None
    witness: Optional[dict] = None
    conditions: dict = field(default_factory=dict)
    corroboration: Optional[dict] = None

    @property
    def minimal(self) -> bool:
        return self.verdict == "Minimal"

    def to_dict(self) -> dict:
        return {
            "spec": self.spec_label,
            "verdict": self.verdict,
            "case": self.case,
            "n0": self.n0,
            "ell": self.ell,
            "violated_condition": self.violated_condition,
            "witness": self.witness,
            "conditions": self.conditions,
            "corroboration": self.corroboration,
        }

    def to_text(self) -> str:
        lines = [f"spec: {self.spec_label}", f"verdict: {self.verdict}",
                 f"case: {self.case or 'none'}"]
        if self.n0 is not None:
            lines.append(f"n0: {self.n0}")
        if self.ell is not None:
            lines.append(f"ell: {self.ell}")
        for key, text in sorted(self.conditions.items()):
            lines.append(f"condition ({key}): {text}")
        if self.violated_condition:
            lines.append(f"violated condition: ({self.violated_condition})")
        if self.witness:
            for key, val in self.witness.items():
                lines.append(f"witness.{key}: {val}")
        if self.corroboration is not None:
            for key, val in self.corroboration.items():
                lines.append(f"corroboration.{key}: {val}")
        return "\n".join(lines)


def _exponent(spec: FiltrationSpec, k: int) -> int:
    return p_adic_valuation(jump_size(spec, k), spec.p)


def _rm_witness(spec: FiltrationSpec, lo: int, hi: int) -> dict:
    """R_m with m = p^(least jump exponent) splits [lo, hi) into two nonempty parts."""
    exps = {k: _exponent(spec, k) for k in range(lo, hi)}
    low = min(exps.values())
    m = spec.p ** low
    return {
        "kind": "R_m",
        "m": m,
        "formula": f"R_{m}(v(x))",
        "true_levels": [k for k, e in exps.items() if e > low],
        "false_levels": [k for k, e in exps.items() if e == low],
        "period": spec.period,
    }


def _structural_conditions(spec: FiltrationSpec) -> dict:
    return {
        "1": "holds: levels Level(0) > Level(1) > ... have order type omega*",
        "2": "holds: each fibre G_k \\ G_(k-1) is finite and nonempty",
    }


def _fp_witness(spec: FiltrationSpec, k: int) -> dict:
    """Two elements at level k whose p-multiples have different values."""
    t = Truncation(spec, k)
    rows = t.fibre_rows(k)
    lv = t.affine_levels(rows, spec.p, np.zeros(t.ncoords, dtype=np.int64))
    j = int(np.flatnonzero(lv != lv[0])[0])
    x, y = t.decode(rows[0]), t.decode(rows[j])
    return {
        "kind": "f_p undefined",
        "level": k,
        "x": str(x),
        "y": str(y),
        "v(px)": str(Level(int(lv[0])) if lv[0] >= 0 else "inf"),
        "v(py)": str(Level(int(lv[j])) if lv[j] >= 0 else "inf"),
    }


def classify_spec(spec: FiltrationSpec, window: int = 10) -> ClassificationReport:
    """Decide minimality from the tail of the schedule (one period suffices;
    ``window`` extra levels are inspected as a consistency margin)."""
    H = horizon(spec)
    P = spec.period
    conds = _structural_conditions(spec)
    rep = ClassificationReport(spec.label, "NotMinimal", None, conditions=conds)
    span = range(H, H + max(window, 3 * P))

    if spec.descriptor.is_elem:
        conds["4"] = "not applicable: elementary abelian"
        if spec.affine is not None:
            exps = [_exponent(spec, k) for k in span]
            if all(a < b for a, b in zip(exps, exps[1:])):
                rep.verdict, rep.case = "Minimal", "3b"
                conds["3"] = ("holds (b): jump exponents grow strictly "
                              f"({', '.join(map(str, exps[:4]))}, ...), so each occurs finitely often")
                return rep
            raise PreconditionError("affine schedule does not grow strictly beyond the horizon")
        exps = {_exponent(spec, k) for k in span}
        if len(exps) == 1:
            c = exps.pop()
            rep.verdict, rep.case, rep.n0 = "Minimal", "3a", c - 1
            conds["3"] = (f"holds (a): jump eventually {spec.p}^{c}, so R_{spec.p ** (c - 1)} "
                          f"and not R_{spec.p ** c} cofinitely")
            return rep
        rep.violated_condition = "3"
        rep.witness = _rm_witness(spec, H, H + P)
        conds["3"] = (f"fails: the periodic jumps take {len(exps)} distinct values, so "
                      f"{rep.witness['formula']} is infinite and coinfinite")
        return rep

    conds["3"] = "not applicable: product of Pruefer groups"
    shifts = {}
    for k in span:
        f = f_n_eval(spec, spec.p, Level(k))
        if f is None:
            rep.violated_condition = "4"
            rep.witness = _fp_witness(spec, k)
            conds["4"] = f"fails: f_{spec.p} is not well defined at Level({k})"
            return rep
        shifts[k] = None if f.is_inf else k - f.k
    distinct = set(shifts.values())
    if len(distinct) != 1 or None in distinct:
        rep.violated_condition = "4"
        rep.witness = {"kind": "f_p not a shift", "shifts": {str(k): s for k, s in shifts.items()}}
        conds["4"] = f"fails: f_{spec.p} does not act as a constant right shift"
        return rep
    ell = distinct.pop()
    for k in span:
        if k - ell >= H and jump_size(spec, k) != jump_size(spec, k - ell):
            rep.violated_condition = "4"
            rep.witness = {"kind": "R_m not preserved by f_p", "level": k,
                           "jump": jump_size(spec, k), "jump_after_shift": jump_size(spec, k - ell)}
            conds["4"] = f"fails: f_{spec.p} does not preserve R_m at Level({k})"
            return rep
    exps = {_exponent(spec, k) for k in span}
    if len(exps) != 1:
        rep.violated_condition = "4"
        rep.witness = _rm_witness(spec, H, H + P)
        conds["4"] = (f"fails: f_{spec.p} is a shift by {ell} but the jumps are not eventually "
                      f"constant, so {rep.witness['formula']} is infinite and coinfinite")
        return rep
    c = exps.pop()
    rep.verdict, rep.case, rep.n0, rep.ell = "Minimal", "4", c - 1, ell
    conds["4"] = (f"holds: f_{spec.p} is a right shift by {ell} preserving R_m, "
                  f"and the jump is eventually {spec.p}^{c}")
    return rep


def default_level(spec: FiltrationSpec, cap: int = 10, max_rows: int = CORROBORATION_ROWS) -> int:
    """Largest K <= cap with |G_K| <= max_rows (at least 0)."""
    size, K = 1, -1
    while K < cap:
        nxt = size * jump_size(spec, K + 1)
        if nxt > max_rows:
            break
        size, K = nxt, K + 1
    return max(K, 0)


def corroborate(spec: FiltrationSpec, trials: int, seed: int = DEFAULT_SEED,
                K: Optional[int] = None) -> dict:
    """Compare classify against an exhaustive scan of G_K on random formulas."""
    if not classify_spec(spec).minimal:
        raise PreconditionError(f"{spec.label or 'spec'} is not minimal; nothing to corroborate")
    K = default_level(spec) if K is None else K
    summary = {"trials": trials, "agreed": 0, "level": K, "seed": seed}
    if trials == 0:
        return summary
    sampler = FormulaSampler(spec, seed)
    for _ in range(trials):
        phi = sampler.formula()
        trunc, _rows, mask = extension_mask(phi, spec, K)
        verdict = classify(phi, spec)
        if not np.array_equal(verdict_mask(verdict, spec, trunc, K), mask):
            raise InconsistencyError(f"classify and the scan of G_{K} disagree on "
                                     f"{to_text(phi)}", to_text(phi))
        summary["agreed"] += 1
    return summary


@dataclass
class NonMinimalWitness:
    formula: Optional[object]  # an Rm atom, or None for structural failures
    text: str
    structural: Optional[dict]
    census: list  # [(K, members, non-members)]
    grows: bool


def witness_nonminimal(spec: FiltrationSpec, K: int = 8,
                       budget: int = DEFAULT_BUDGET) -> NonMinimalWitness:
    """An infinite, coinfinite definable set, checked to grow on both sides
    between G_K and G_(K + 2 * period)."""
    rep = classify_spec(spec)
    if rep.minimal:
        raise PreconditionError(f"{spec.label or 'spec'} is minimal (case {rep.case})")
    w = rep.witness
    if w.get("kind") != "R_m":
        return NonMinimalWitness(None, "", w, [], False)
    phi = Rm(w["m"], make_term(spec.descriptor, 1))
    census = []
    for level in (K, K + 2 * spec.period):
        _t, _rows, mask = extension_mask(phi, spec, level, budget)
        census.append((level, int(mask.sum()), int((~mask).sum())))
    (_, a0, b0), (_, a1, b1) = census
    return NonMinimalWitness(phi, to_text(phi), None, census, a1 > a0 and b1 > b0)


__all__ = [
    "ClassificationReport", "DEFAULT_SEED", "InconsistencyError", "NonMinimalWitness",
    "PreconditionError", "classify_spec", "corroborate", "default_level", "witness_nonminimal",
]
