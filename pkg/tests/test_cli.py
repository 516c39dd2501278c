import json
import os
from pathlib import Path

import pytest

from valmin import catalog
from valmin.cli import EXIT_DISAGREE, EXIT_INPUT, EXIT_OK, main
from valmin.config import ConfigError, SpecConfig, fingerprint, spec_text

GOLDEN = Path(__file__).parent / "golden"
UPDATE = os.environ.get("VALMIN_UPDATE_GOLDEN") == "1"

# (file stem, argv) pairs whose reports are pinned byte for byte
GOLDEN_RUNS = [
    *[(f"classify_{n}", ["classify", "--config", n, "--trials", "5"]) for n in catalog.NAMES],
    ("eval_doubling", ["eval", "--config", "prufer_std", "--formula", "v(2*x) >= v(q(1,4))",
                       "--level", "6"]),
    ("eval_zero", ["eval", "--config", "prufer_std", "--formula", "v(x) = inf", "--level", "4"]),
    ("eval_nonzero", ["eval", "--config", "prufer_std", "--formula", "!(v(x) = inf)"]),
    ("eval_param_machine", ["eval", "--config", "prufer_rr2", "--formula", "R_1(v(x + h)) & v(x) <= v(h)",
                            "--param", "h=q(1,2;0)", "--format", "machine"]),
    ("order_table_std", ["order-table", "--config", "prufer_std", "--level", "4"]),
    ("axioms_elem_const", ["axioms", "--config", "elem_const", "--level", "8"]),
    ("examples_jagiella", ["examples", "jagiella", "--bound", "50"]),
    ("examples_triangle", ["examples", "triangle", "--bound", "50"]),
]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("stem,argv", GOLDEN_RUNS, ids=[s for s, _ in GOLDEN_RUNS])
def test_golden_report(stem, argv, capsys):
    code, out, _err = run(argv, capsys)
    assert code == EXIT_OK
    path = GOLDEN / f"{stem}.txt"
    if UPDATE:
        path.write_text(out, encoding="utf-8")
    assert out == path.read_text(encoding="utf-8")
    if "--format" not in argv:
        assert "DISAGREE" not in out


def test_classify_reports():
    # spot-check the content the golden files pin
    std = (GOLDEN / "classify_prufer_std.txt").read_text()
    assert "verdict: Minimal" in std and "case: 4" in std
    alt = (GOLDEN / "classify_elem_alternating.txt").read_text()
    assert "verdict: NotMinimal" in alt and "R_2(v(x))" in alt


def test_eval_examples(capsys):
    _c, out, _e = run(["eval", "--config", "prufer_std", "--formula", "!(v(x) = inf)"], capsys)
    assert "verdict: Cofinite(1)" in out and "AGREE" in out


def test_machine_output_fields(capsys):
    code, out, _e = run(["classify", "--config", "prufer_rr2", "--format", "machine",
                         "--trials", "2"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert {"verdict", "case", "n0", "ell", "witness", "corroboration"} <= set(doc["result"])
    assert doc["result"]["ell"] == 2


def test_deterministic_with_seed(capsys):
    argv = ["classify", "--config", "prufer_std", "--trials", "8", "--seed", "7"]
    a = run(argv, capsys)[1]
    b = run(argv, capsys)[1]
    assert a == b
    c = run(["classify", "--config", "prufer_std", "--trials", "8", "--seed", "8"], capsys)[1]
    assert c != a


def test_output_file(tmp_path, capsys):
    dest = tmp_path / "r.txt"
    assert run(["examples", "triangle", "--bound", "5", "--output", str(dest)], capsys)[1] == ""
    assert dest.read_text().startswith("command: valmin examples triangle")


def test_timing_is_opt_in(capsys):
    out = run(["examples", "triangle", "--bound", "5"], capsys)[1]
    assert "timing" not in out
    out = run(["examples", "triangle", "--bound", "5", "--timing"], capsys)[1]
    assert "timing:" in out


class TestInputErrors:
    def write(self, tmp_path, text):
        p = tmp_path / "s.cfg"
        p.write_text(text)
        return str(p)

    def test_malformed_prime_names_field(self, tmp_path, capsys):
        path = self.write(tmp_path, "[group]\nkind = prufer\nprime = four\n\n[filtration]\neventual = {0}\n")
        code, _o, err = run(["classify", "--config", path], capsys)
        assert code == EXIT_INPUT and "group.prime" in err

    def test_composite_prime(self, tmp_path):
        with pytest.raises(ConfigError) as exc:
            SpecConfig.from_text("[group]\nkind = elem\nprime = 6\n\n[filtration]\neventual = 1\n")
        assert "group.prime" in str(exc.value)

    def test_missing_section(self):
        with pytest.raises(ConfigError) as exc:
            SpecConfig.from_text("[group]\nkind = elem\nprime = 2\n")
        assert "filtration" in str(exc.value)

    def test_bad_formula(self, capsys):
        code, _o, err = run(["eval", "--config", "prufer_std", "--formula", "v(x) <="], capsys)
        assert code == EXIT_INPUT and "position" in err

    def test_unknown_example(self, capsys):
        code, _o, err = run(["examples", "square"], capsys)
        assert code == EXIT_INPUT and "square" in err

    def test_missing_config_file(self, capsys):
        assert run(["classify", "--config", "/nonexistent.cfg"], capsys)[0] == EXIT_INPUT

    def test_negative_level(self, capsys):
        assert run(["order-table", "--config", "prufer_std", "--level", "-1"], capsys)[0] == EXIT_INPUT

    def test_not_minimal_is_success(self, capsys):
        assert run(["classify", "--config", "elem_alternating", "--trials", "3"], capsys)[0] == EXIT_OK


def test_disagreement_exit_code(monkeypatch, capsys):
    import valmin.cli as cli
    monkeypatch.setattr(cli, "verdict_mask", lambda v, s, t, K: ~_real_mask(v, s, t, K))
    code, out, _e = run(["eval", "--config", "prufer_std", "--formula", "v(x) = inf",
                         "--level", "3"], capsys)
    assert code == EXIT_DISAGREE and "DISAGREE" in out


def _real_mask(*a):
    from valmin.formula.engine import verdict_mask
    return verdict_mask(*a)


@pytest.mark.parametrize("name", catalog.NAMES)
def test_config_round_trip(name):
    spec = catalog.load(name)
    again = SpecConfig.from_text(spec_text(spec)).spec
    assert fingerprint(again) == fingerprint(spec)
