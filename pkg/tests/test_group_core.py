from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle import frac_add, frac_scale
from valmin.group_core import (
    ElemAbelianElement,
    GroupDescriptor,
    GroupError,
    PruferTuple,
    UnboundedEnumerationError,
    add,
    divide,
    element_order,
    negate,
    scalar_mul,
    torsion_subgroup,
)

Z2 = GroupDescriptor.prufer(2)
Z2_2 = GroupDescriptor.prufer(2, 2)
Z3_2 = GroupDescriptor.prufer(3, 2)
F2 = GroupDescriptor.elem(2)
F3 = GroupDescriptor.elem(3)


def q(*fracs, group=Z2):
    return PruferTuple.from_fractions(group, [Fraction(f) for f in fracs])


def e(level, slot=0, group=F2):
    return ElemAbelianElement.basis(group, level, slot)


def prufer_elements(group, max_e=6):
    p = group.p

    def comp():
        return st.integers(0, max_e).flatmap(
            lambda ex: st.integers(0, p**ex - 1).map(lambda a: Fraction(a, p**ex)))
    return st.lists(comp(), min_size=group.d, max_size=group.d).map(
        lambda fs: PruferTuple.from_fractions(group, fs))


def elem_elements(group, max_level=6, max_slot=2):
    key = st.tuples(st.integers(0, max_level), st.integers(0, max_slot))
    return st.dictionaries(key, st.integers(0, group.p - 1), max_size=6).map(
        lambda m: ElemAbelianElement.from_map(group, m))


any_prufer = st.sampled_from([Z2, Z2_2, Z3_2]).flatmap(prufer_elements)
any_elem = st.sampled_from([F2, F3]).flatmap(elem_elements)


class TestDescriptor:
    def test_rejects_composite_prime(self):
        with pytest.raises(GroupError):
            GroupDescriptor.prufer(4)

    def test_rejects_zero_factors(self):
        with pytest.raises(GroupError):
            GroupDescriptor.prufer(2, 0)

    def test_mismatched_groups_do_not_add(self):
        with pytest.raises(GroupError):
            add(q("1/2"), e(0))
        with pytest.raises(GroupError):
            add(q("1/2"), q("1/2", "0", group=Z2_2))


class TestExamples:
    def test_half_plus_half(self):
        assert add(q("1/2"), q("1/2")).is_zero()

    def test_basis_doubled(self):
        assert add(e(0), e(0)).is_zero()

    def test_quarter_plus_three_eighths(self):
        assert add(q("1/4"), q("3/8")) == q("5/8")
        assert frac_add((Fraction(1, 4),), (Fraction(3, 8),)) == (Fraction(5, 8),)

    def test_scalar_examples(self):
        assert scalar_mul(3, q("1/8")) == q("3/8")
        assert scalar_mul(2, e(3)).is_zero()
        assert scalar_mul(0, q("5/16")).is_zero()

    def test_orders(self):
        assert element_order(q("3/8")) == 8
        assert element_order(Z2.zero()) == 1
        a = q("1/2", "1/4", group=Z2_2)
        assert element_order(a) == 4
        n = 1
        while not scalar_mul(n, a).is_zero():
            n += 1
        assert n == 4

    def test_divide_examples(self):
        assert divide(2, q("1/2")) == {q("1/4"), q("3/4")}
        brute = {q(Fraction(a, 4)) for a in range(4) if frac_scale(2, (Fraction(a, 4),)) ==
                 (Fraction(1, 2),)}
        assert divide(2, q("1/2")) == brute
        assert divide(2, e(0)) == set()
        assert divide(3, q("1/2")) == {q("1/2")}

    def test_divide_zero_in_elem_is_unbounded(self):
        with pytest.raises(UnboundedEnumerationError):
            divide(2, F2.zero())

    def test_divide_coprime_in_elem(self):
        a = ElemAbelianElement.from_map(F3, {(0, 0): 1, (2, 1): 2})
        (y,) = divide(2, a)
        assert scalar_mul(2, y) == a

    def test_torsion_examples(self):
        assert torsion_subgroup(Z2, 2) == {Z2.zero(), q("1/2")}
        assert len(torsion_subgroup(Z2_2, 2)) == 4
        assert torsion_subgroup(Z2, 3) == {Z2.zero()}

    def test_torsion_of_elem_needs_truncation(self):
        with pytest.raises(UnboundedEnumerationError):
            torsion_subgroup(F2, 2)
        within = [F2.zero(), e(0), e(1), add(e(0), e(1))]
        assert torsion_subgroup(F2, 2, within) == set(within)

    def test_rendering(self):
        assert str(q("3/8")) == "(3/2^3)"
        assert str(ElemAbelianElement.from_map(F3, {(0, 0): 1, (4, 1): 2})) == "[(0,0):1, (4,1):2]"

    def test_canonical_form(self):
        assert PruferTuple.from_pairs(Z2, [(2, 3)]) == q("1/4")
        assert PruferTuple.from_pairs(Z2, [(8, 3)]).components == ((0, 0),)
        assert ElemAbelianElement.from_map(F3, {(1, 0): 3}).is_zero()


@settings(max_examples=200, deadline=None)
@given(a=any_prufer)
def test_negation_cancels_prufer(a):
    assert add(a, negate(a)).is_zero()
    assert PruferTuple.from_pairs(a.group, a.components) == a


@settings(max_examples=200, deadline=None)
@given(a=any_elem)
def test_negation_cancels_elem(a):
    assert add(a, negate(a)).is_zero()
    assert ElemAbelianElement.from_map(a.group, a.as_map()) == a


@settings(max_examples=150, deadline=None)
@given(a=st.one_of(any_prufer, any_elem), n=st.integers(0, 20))
def test_scalar_mul_is_repeated_addition(a, n):
    acc = a.group.zero()
    for _ in range(n):
        acc = add(acc, a)
    assert scalar_mul(n, a) == acc


@settings(max_examples=150, deadline=None)
@given(a=any_prufer, b=any_prufer)
def test_addition_matches_fraction_oracle(a, b):
    if a.group != b.group:
        return
    assert add(a, b).fractions() == frac_add(a.fractions(), b.fractions())


@settings(max_examples=200, deadline=None)
@given(a=st.one_of(any_prufer, any_elem), n=st.integers(1, 40))
def test_order_of_multiple(a, n):
    from math import gcd
    o = element_order(a)
    assert element_order(scalar_mul(n, a)) == o // gcd(o, n)


def test_divide_by_p_has_p_to_the_d_solutions():
    for g in (Z2, Z2_2, GroupDescriptor.prufer(3)):
        p = g.p
        bound = 6 if g.d == 1 else 3
        comps = [[(a, ex) for ex in range(bound + 1) for a in range(p**ex) if ex == 0 or a % p]]
        from itertools import product
        for combo in product(*(comps * g.d)):
            a = PruferTuple.from_pairs(g, combo)
            sols = divide(p, a)
            assert len(sols) == p**g.d
            assert all(scalar_mul(p, y) == a for y in sols)


@settings(max_examples=100, deadline=None)
@given(a=any_prufer, n=st.integers(1, 12))
def test_divide_solutions_are_exact(a, n):
    sols = divide(n, a)
    assert all(scalar_mul(n, y) == a for y in sols)
    # n*y = a has exactly |G[n]| solutions when solvable (divisible group)
    assert len(sols) == len(torsion_subgroup(a.group, n))
