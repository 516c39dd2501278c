import random

import pytest

from valmin import catalog
from valmin.classifier import (
    InconsistencyError,
    PreconditionError,
    classify_spec,
    corroborate,
    default_level,
    witness_nonminimal,
)
from valmin.group_core import GroupDescriptor
from valmin.valuation import FiltrationSpec, Level, f_n_eval, horizon, jump_size


def perturbed(spec, rng):
    """Same tail, fresh random prefix."""
    g = spec.descriptor
    n = rng.randint(1, 5)
    if g.is_elem:
        prefix = tuple(rng.randint(1, 3) for _ in range(n))
    else:
        subsets = [s for s in ({i for i in range(g.d) if rng.random() < 0.6} for _ in range(4 * n)) if s]
        prefix = tuple(subsets[:n]) or ({0},)
    return FiltrationSpec(g, prefix, spec.eventual, affine=spec.affine, label=spec.label + "~")


@pytest.mark.parametrize("name", catalog.NAMES)
def test_catalog_verdicts(name):
    rep = classify_spec(catalog.load(name))
    want = catalog.EXPECTED[name]
    assert (rep.verdict, rep.case, rep.n0, rep.ell) == want
    assert rep.minimal == (rep.case is not None)
    if not rep.minimal:
        assert rep.witness and rep.violated_condition


@pytest.mark.parametrize("name", catalog.NAMES)
def test_prefix_perturbations_keep_verdict(name):
    spec = catalog.load(name)
    base = classify_spec(spec)
    rng = random.Random(name)
    for _ in range(8):
        rep = classify_spec(perturbed(spec, rng))
        assert (rep.verdict, rep.case, rep.n0, rep.ell) == (base.verdict, base.case, base.n0, base.ell)


@pytest.mark.parametrize("name", ["prufer_std", "prufer_rr2", "prufer_rr2_perturbed"])
def test_case4_shift_over_eleven_levels(name):
    spec = catalog.load(name)
    rep = classify_spec(spec)
    H = horizon(spec)
    for k in range(H, H + 11):
        if k - rep.ell >= 0:
            assert f_n_eval(spec, spec.p, Level(k)) == Level(k - rep.ell)


def test_alternating_witness_is_r2():
    spec = catalog.load("elem_alternating")
    rep = classify_spec(spec)
    assert rep.violated_condition == "3"
    assert rep.witness["m"] == 2
    assert set(rep.witness["true_levels"]) == {k for k in range(horizon(spec), horizon(spec) + 2)
                                               if jump_size(spec, k) == 4}
    w = witness_nonminimal(spec)
    assert w.text == "R_2(v(x))"
    assert w.grows and [k for k, _a, _b in w.census] == [8, 12]


def test_structural_witness_for_undefined_fp():
    spec = FiltrationSpec(GroupDescriptor.prufer(2, 2), (), ({0}, {0}, {1}), label="unbal")
    rep = classify_spec(spec)
    assert not rep.minimal and rep.violated_condition == "4"
    w = witness_nonminimal(spec)
    assert w.formula is None and w.structural


def test_more_shapes():
    z3 = FiltrationSpec(GroupDescriptor.prufer(3), (), ({0},))
    assert (classify_spec(z3).case, classify_spec(z3).ell) == ("4", 1)
    both = classify_spec(FiltrationSpec(GroupDescriptor.prufer(2, 2), (), ({0, 1},)))
    assert (both.case, both.n0, both.ell) == ("4", 1, 1)
    f3 = classify_spec(FiltrationSpec(GroupDescriptor.elem(3), (), (2,)))
    assert (f3.case, f3.n0) == ("3a", 1)


def test_minimal_spec_has_no_witness():
    with pytest.raises(PreconditionError):
        witness_nonminimal(catalog.load("elem_const"))


class TestCorroborate:
    def test_standard(self):
        spec = catalog.load("prufer_std")
        out = corroborate(spec, 25, seed=1)
        assert out["agreed"] == 25 and out["level"] == default_level(spec)

    def test_zero_trials(self):
        out = corroborate(catalog.load("prufer_std"), 0)
        assert out["trials"] == 0 and out["agreed"] == 0

    def test_not_minimal_rejected(self):
        with pytest.raises(PreconditionError):
            corroborate(catalog.load("elem_alternating"), 3)

    def test_disagreement_is_reported(self, monkeypatch):
        import valmin.classifier as cl
        real = cl.verdict_mask
        monkeypatch.setattr(cl, "verdict_mask", lambda *a: ~real(*a))
        with pytest.raises(InconsistencyError) as exc:
            corroborate(catalog.load("prufer_std"), 1)
        assert exc.value.formula


def test_default_level_respects_row_cap():
    for name in catalog.NAMES:
        spec = catalog.load(name)
        K = default_level(spec)
        size = 1
        for k in range(K + 1):
            size *= jump_size(spec, k)
        assert size <= 1 << 17


def test_report_rendering():
    rep = classify_spec(catalog.load("prufer_rr2"))
    d = rep.to_dict()
    assert {"verdict", "case", "n0", "ell", "witness", "corroboration"} <= set(d)
    text = rep.to_text()
    assert "verdict: Minimal" in text and "ell: 2" in text
