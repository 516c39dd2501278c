"""Seeded random formulas for oracle comparisons."""
from __future__ import annotations

import random
from typing import Optional, Sequence

from ..group_core import GroupElement
from ..valuation import FiltrationSpec, enumerate_ball
from .ast import And, Formula, GroupTerm, IsInf, Not, Or, Rm, ValueLeq, make_term


class FormulaSampler:
    """Random formulas with |coefficient| <= max_coeff, AST depth <= max_depth,
    offsets drawn from G_param_level and R_m indices m <= p^3."""

    def __init__(self, spec: FiltrationSpec, seed: int, *, max_coeff: int = 8,
                 max_depth: int = 4, param_level: int = 6,
                 params: Optional[Sequence[GroupElement]] = None):
        self.spec = spec
        self.rng = random.Random(seed)
        self.max_coeff = max_coeff
        self.max_depth = max_depth
        self.params = list(params) if params is not None else enumerate_ball(spec, param_level)
        self.max_m = spec.p ** 3

    def term(self) -> GroupTerm:
        rng = self.rng
        coeff = rng.randint(-self.max_coeff, self.max_coeff)
        offset = None if rng.random() < 0.3 else rng.choice(self.params)
        return make_term(self.spec.descriptor, coeff, offset)

    def atom(self) -> Formula:
        r = self.rng.random()
        if r < 0.5:
            return ValueLeq(self.term(), self.term())
        if r < 0.65:
            return IsInf(self.term())
        return Rm(self.rng.randint(1, self.max_m), self.term())

    def formula(self, depth: Optional[int] = None) -> Formula:
        depth = self.max_depth if depth is None else depth
        rng = self.rng
        if depth == 0 or rng.random() < 0.35:
            return self.atom()
        r = rng.random()
        if r < 0.25:
            return Not(self.formula(depth - 1))
        args = tuple(self.formula(depth - 1) for _ in range(rng.randint(2, 3)))
        return And(args) if r < 0.625 else Or(args)

    def __iter__(self):
        while True:
            yield self.formula()

    def take(self, n: int) -> list:
        return [self.formula() for _ in range(n)]


def random_formulas(spec: FiltrationSpec, n: int, seed: int, **kw) -> list:
    return FormulaSampler(spec, seed, **kw).take(n)
