"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (the lines are repeated in the terminal summary) or
directly with ``python tests/test_acceptance.py``.
"""
import functools
import random
import subprocess
import sys
import time

import numpy as np

import oracle
from valmin import catalog
from valmin.classifier import classify_spec, witness_nonminimal
from valmin.formula import (
    NotEventuallyConstantError,
    classify,
    extension_mask,
    reduce,
    rewrite_mismatches,
    to_text,
    verdict_mask,
)
from valmin.formula.corpus import FormulaSampler
from valmin.group_core import add, divide, scalar_mul, torsion_subgroup
from valmin.order_bridge import (
    JagiellaPoint,
    OrderView,
    example_suite,
    h_subgroup,
    jagiella_a,
    jagiella_less,
    jagiella_points,
    order_from_valuation,
    valuation_from_order,
)
from valmin.valuation import (
    FiltrationSpec,
    Level,
    Truncation,
    enumerate_ball,
    enumerate_fibre,
    f_n_eval,
    horizon,
    level_of,
    value_of,
)

RESULTS = {}
ACCEPTANCE_SEED = 20240601
BIG = 1 << 40


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            start = time.perf_counter()
            try:
                detail = fn()
            except Exception as exc:
                line = f"FAIL [{number}] {title}: {type(exc).__name__}: {exc}"
                RESULTS[number] = line
                print(line)
                raise
            line = f"PASS [{number}] {title} ({detail}; {time.perf_counter() - start:.2f}s)"
            RESULTS[number] = line
            print(line)
        return run
    return wrap


def check(cond, message):
    if not cond:
        raise AssertionError(message)


def as_oracle(a):
    return oracle.to_frozen(a) if a.group.is_elem else oracle.to_fractions(a)


def oracle_level(spec, a):
    g = spec.descriptor
    if g.is_elem:
        return oracle.elem_level(oracle.to_frozen(a))
    return oracle.prufer_level(g.p, spec.prefix, spec.eventual, g.d, a.fractions())


def oracle_ball(spec, k):
    g = spec.descriptor
    if g.is_elem:
        return oracle.elem_ball(g.p, spec.prefix, spec.eventual, spec.affine, k)
    return oracle.prufer_ball(g.p, spec.prefix, spec.eventual, g.d, k)


class Table:
    """G_K with oracle-checked levels and index tables for sums and differences."""

    def __init__(self, spec, K):
        self.spec = spec
        t = self.t = Truncation(spec, K)
        self.rows = t.rows()
        elems = t.decode_all(self.rows)
        check({as_oracle(a) for a in elems} == oracle_ball(spec, K), f"G_{K} differs from the oracle")
        self.level = np.array([oracle_level(spec, a) for a in elems])
        check(np.array_equal(self.level, t.levels(self.rows)), "kernel levels differ from the oracle")
        self.rank = np.where(self.level < 0, BIG, -self.level)
        self.size = len(elems)

    def combo(self, sg, sh):
        """combo[i, j] = index of sg*x_i + sh*x_j."""
        m = self.t.moduli[None, :]
        out = np.empty((self.size, self.size), dtype=np.int64)
        for i in range(self.size):
            out[i] = self.t.row_index((sg * self.rows[i][None, :] + sh * self.rows) % m)
        return out

    def negation(self):
        return self.t.row_index((-self.rows) % self.t.moduli[None, :])


@criterion(1, "ultrametric suite on G_6")
def test_criterion_1_ultrametric():
    start = time.perf_counter()
    pairs = 0
    for spec in map(catalog.load, catalog.NAMES):
        tab = Table(spec, 6)
        zero = (tab.rows == 0).all(axis=1)
        check(np.array_equal(tab.level < 0, zero), f"{spec.label}: v(x) = inf iff x = 0 fails")
        check(np.array_equal(tab.rank[tab.negation()], tab.rank), f"{spec.label}: v(-x) != v(x)")
        r = tab.rank
        lo = np.minimum(r[:, None], r[None, :])
        rd = r[tab.combo(1, -1)]
        check((rd >= lo).all(), f"{spec.label}: v(x-y) < min")
        differ = r[:, None] != r[None, :]
        check((rd[differ] == lo[differ]).all(), f"{spec.label}: v(x-y) != min for v(x) != v(y)")
        pairs += tab.size ** 2
    elapsed = time.perf_counter() - start
    check(elapsed < 10, f"took {elapsed:.1f}s (limit 10s)")
    return f"6 specs, {pairs} pairs"


@criterion(2, "bounded quotient and right shift beyond the horizon")
def test_criterion_2_bounded():
    start = time.perf_counter()
    for name, gp, ell in (("prufer_std", 2, 1), ("prufer_rr2", 4, 2)):
        spec = catalog.load(name)
        p = spec.p
        check(len(torsion_subgroup(spec.descriptor, p)) == gp, f"{name}: |G[p]| != {gp}")
        H = horizon(spec)
        for k in range(H, H + 5):
            outer = {as_oracle(a) for a in enumerate_ball(spec, k)}
            for g in enumerate_fibre(spec, k):
                pg = scalar_mul(p, g)
                check(value_of(spec, pg) == Level(k - ell), f"{name}: v({p}*{g}) != Level({k - ell})")
                inner = {as_oracle(a) for a in enumerate_ball(spec, level_of(spec, pg))}
                check(inner <= outer and len(outer) % len(inner) == 0, f"{name}: balls not nested")
                check(len(outer) // len(inner) == gp, f"{name}: quotient at Level({k}) != {gp}")
            check(f_n_eval(spec, p, Level(k)) == Level(k - ell), f"{name}: f_p is not a shift by {ell}")
    elapsed = time.perf_counter() - start
    check(elapsed < 5, f"took {elapsed:.1f}s (limit 5s)")
    return "Z(2^inf): 2 and shift 1, Z(2^inf)^2: 4 and shift 2, 5 levels each"


@criterion(3, "H_g = closed ball on G_5 and exact round trip")
def test_criterion_3_h_subgroup():
    count = 0
    for spec in map(catalog.load, catalog.NAMES):
        view = order_from_valuation(spec, 5)
        balls = {k: oracle_ball(spec, k) for k in range(-1, 6)}
        for g in view.carrier:
            H, closed = h_subgroup(view, g)
            check(closed, f"{spec.label}: H_{g} is not a subgroup")
            check({as_oracle(a) for a in H} == balls[oracle_level(spec, g)],
                  f"{spec.label}: H_{g} != closed ball of v(g)")
            count += 1
        rep = valuation_from_order(view)
        check(rep.round_trip and not rep.modifications, f"{spec.label}: round trip not exact")
        check(all(rep.levels[x] == value_of(spec, x) for x in view.carrier),
              f"{spec.label}: recovered levels differ")
    return f"{count} elements"


@criterion(4, "newlemma on G_6, n-1sim on G_5, lincom shadow")
def test_criterion_4_section4():
    rng = random.Random(ACCEPTANCE_SEED)
    divisions = 0
    for spec in map(catalog.load, catalog.NAMES):
        tab = Table(spec, 6)
        r = tab.rank
        deeper = r[None, :] > r[:, None]  # [i, j]: v(x_j) > v(x_i)
        for sg in (1, -1):
            for sh in (1, -1):
                rs = r[tab.combo(sg, sh)]
                check((rs[deeper] == np.broadcast_to(r[:, None], rs.shape)[deeper]).all(),
                      f"{spec.label}: v({sg}g{sh:+}h) != v(g)")

        H = horizon(spec)
        ns = [n for n in (2, 3, 4) if n % spec.p or not spec.descriptor.is_elem]
        for g in enumerate_ball(spec, 5):
            if g.is_zero() or level_of(spec, g) < H:
                continue
            for n in ns:
                vals = {value_of(spec, y) for y in divide(n, g)}
                check(len(vals) == 1, f"{spec.label}: (1/{n}){g} meets {len(vals)} classes")
                divisions += 1

        K = 5
        inner = enumerate_ball(spec, K - 1)
        inner_set = set(inner)
        check(all(add(x, scalar_mul(-1, y)) in inner_set for x in inner for y in inner),
              f"{spec.label}: open ball not closed under subtraction")
        top = enumerate_fibre(spec, K)
        for _ in range(500):
            g = rng.choice(top)
            acc = spec.descriptor.zero()
            for _ in range(rng.randint(1, 6)):
                acc = add(acc, scalar_mul(rng.randint(-50, 50), rng.choice(inner)))
            check(acc != g, f"{spec.label}: {g} is a combination of its open ball")
    return f"6 specs, {divisions} divisions checked, 3000 combinations sampled"


def _oracle_run(spec, want, K=10):
    """(verdicts checked, undecided formulas) for at least ``want`` verdicts."""
    sampler = FormulaSampler(spec, ACCEPTANCE_SEED)
    done = undecided = 0
    while done < want:
        phi = sampler.formula()
        try:
            v = classify(phi, spec)
        except NotEventuallyConstantError:
            bad = rewrite_mismatches(reduce(phi, spec), K)
            check(not bad, f"{spec.label}: reduced condition wrong on {len(bad)} elements of "
                           f"G_{K} for {to_text(phi)}")
            undecided += 1
            continue
        trunc, _rows, mask = extension_mask(phi, spec, K)
        check(np.array_equal(verdict_mask(v, spec, trunc, K), mask),
              f"{spec.label}: classify and extension differ on {to_text(phi)}")
        done += 1
    return done, undecided


@criterion(5, "formula engine vs exhaustive scan at K = 10")
def test_criterion_5_oracle_equivalence():
    start = time.perf_counter()
    total = undecided = 0
    for spec in map(catalog.load, catalog.NAMES):
        d, u = _oracle_run(spec, 100)
        total += d
        undecided += u
    elapsed = time.perf_counter() - start
    check(elapsed < 60, f"took {elapsed:.1f}s (limit 60s)")
    return (f"{total} verdicts agree, {undecided} undecided formulas on the non-minimal spec "
            "checked by rewrite")


def _perturb(spec, rng):
    g = spec.descriptor
    n = rng.randint(1, 5)
    if g.is_elem:
        prefix = tuple(rng.randint(1, 3) for _ in range(n))
    else:
        prefix = tuple({i for i in range(g.d) if rng.random() < 0.5} or {rng.randrange(g.d)}
                       for _ in range(n))
    return FiltrationSpec(g, prefix, spec.eventual, affine=spec.affine)


@criterion(6, "classifier catalog and prefix perturbations")
def test_criterion_6_classifier():
    rng = random.Random(ACCEPTANCE_SEED)
    for name in catalog.NAMES:
        spec = catalog.load(name)
        rep = classify_spec(spec)
        got = (rep.verdict, rep.case, rep.n0, rep.ell)
        check(got == catalog.EXPECTED[name], f"{name}: {got} != {catalog.EXPECTED[name]}")
        for _ in range(10):
            alt = classify_spec(_perturb(spec, rng))
            check((alt.verdict, alt.case, alt.n0, alt.ell) == got, f"{name}: perturbation changed verdict")
    w = witness_nonminimal(catalog.load("elem_alternating"))
    check(w.text == "R_2(v(x))" and w.grows, "R_2 witness does not grow on both sides")
    (k0, a0, b0), (k1, a1, b1) = w.census
    return f"6 specs, 60 perturbations; R_2 members {a0}->{a1}, non-members {b0}->{b1} (G_{k0}->G_{k1})"


@criterion(7, "Jagiella and triangle orders for n <= 50")
def test_criterion_7_examples():
    start = time.perf_counter()
    base = OrderView.from_relation(jagiella_points(50), jagiella_less)
    check(all(base.incomparable(jagiella_a(n), jagiella_a(n + 1)) for n in range(50)),
          "a_n and a_(n+1) comparable")
    w = base.transitivity_witness()
    check(w is not None, "incomparability of < is transitive")
    results = example_suite("jagiella", 50) + example_suite("triangle", 50)
    failed = [prop for prop, ok in results if not ok]
    check(not failed, f"failed: {failed}")
    elapsed = time.perf_counter() - start
    check(elapsed < 1, f"took {elapsed:.2f}s (limit 1s)")
    x, y, z = w
    check(isinstance(x, JagiellaPoint), "witness is not a triple of points")
    return f"{len(results) + 2} properties; non-transitive witness {x} ~ {y} ~ {z}"


def _cli(argv):
    return subprocess.run([sys.executable, "-m", "valmin.cli", *argv], capture_output=True,
                          check=False).stdout


@criterion(8, "byte-identical CLI reports across two runs")
def test_criterion_8_determinism():
    runs = []
    for name in catalog.NAMES:
        runs.append(["classify", "--config", name, "--seed", "7", "--trials", "10"])
        runs.append(["classify", "--config", name, "--seed", "7", "--trials", "10",
                     "--format", "machine"])
    runs.append(["order-table", "--config", "prufer_rr2", "--level", "4"])
    runs.append(["examples", "jagiella", "--bound", "50"])
    for argv in runs:
        a, b = _cli(argv), _cli(argv)
        check(a and a == b, f"reports differ: {' '.join(argv)}")
    return f"{len(runs)} commands, full catalog"


if __name__ == "__main__":
    failures = 0
    for fn in (test_criterion_1_ultrametric, test_criterion_2_bounded, test_criterion_3_h_subgroup,
               test_criterion_4_section4, test_criterion_5_oracle_equivalence,
               test_criterion_6_classifier, test_criterion_7_examples, test_criterion_8_determinism):
        try:
            fn()
        except Exception:
            failures += 1
    sys.exit(1 if failures else 0)
