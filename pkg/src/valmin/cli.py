"""Command-line workbench.

    valmin classify    --config FILE [--trials N] [--seed S]
    valmin eval        --config FILE --formula TEXT [--level K] [--param NAME=LITERAL ...]
    valmin order-table --config FILE [--level K]
    valmin axioms      --config FILE [--level K]
    valmin examples    {jagiella,triangle} [--bound N]

``--config`` also accepts a catalog name such as ``prufer_std``.  Every
command that can be cross-checked ends with an AGREE or DISAGREE banner.
Exit status: 0 success (a NotMinimal verdict is a success), 2 invalid input,
3 disagreement with the brute-force oracle.  Reports carry no timing unless
``--timing`` is given, so identical runs give identical bytes.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, catalog
from .classifier import (
    DEFAULT_SEED,
    InconsistencyError,
    PreconditionError,
    classify_spec,
    corroborate,
    witness_nonminimal,
)
from .config import ConfigError, SpecConfig, fingerprint
from .formula import (
    FormulaSyntaxError,
    NotEventuallyConstantError,
    SpecIntegrityError,
    classify,
    extension_mask,
    parse_element,
    parse_with_notes,
    rewrite_mismatches,
    to_text,
    verdict_mask,
)
from .group_core import GroupError
from .order_bridge import (
    OrderError,
    example_suite,
    h_subgroup,
    order_from_valuation,
    valuation_from_order,
)
from .valuation import (
    EnumerationBudgetError,
    SpecError,
    ball,
    check_axioms,
    horizon,
    value_of,
)

EXIT_OK, EXIT_INPUT, EXIT_DISAGREE = 0, 2, 3


class InputError(ValueError):
    pass


@dataclass
class RunReport:
    command: str
    spec: Optional[str]
    fingerprint: Optional[str]
    seed: Optional[int]
    lines: list  # text rendering of the payload
    payload: dict
    agree: Optional[bool] = None
    banner: str = ""
    timing: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "spec": self.spec,
            "fingerprint": self.fingerprint,
            "seed": self.seed,
            "result": self.payload,
            "agree": self.agree,
        }
        if self.timing is not None:
            out["timing_seconds"] = round(self.timing, 3)
        return out

    def to_text(self) -> str:
        head = [f"command: {self.command}"]
        if self.spec is not None:
            head.append(f"spec: {self.spec} sha256:{self.fingerprint}")
        if self.seed is not None:
            head.append(f"seed: {self.seed}")
        if self.timing is not None:
            head.append(f"timing: {self.timing:.3f}s")
        body = head + ["---"] + self.lines
        if self.agree is not None:
            body += ["---", ("AGREE" if self.agree else "DISAGREE") + f": {self.banner}"]
        return "\n".join(body) + "\n"


def _load(ref: str) -> SpecConfig:
    if ref in catalog.NAMES and not Path(ref).exists():
        return catalog.load_config(ref)
    return SpecConfig.from_path(ref)


def _echo(args) -> str:
    parts = ["valmin", args.command]
    for key in ("name", "config", "formula", "level", "bound", "trials", "param"):
        val = getattr(args, key, None)
        if val is None or val == []:
            continue
        if key == "name":
            parts.append(val)
        elif key == "param":
            parts += [f"--param {p}" for p in val]
        else:
            parts.append(f"--{key} {json.dumps(val) if key == 'formula' else val}")
    if getattr(args, "seed_used", False):
        parts.append(f"--seed {args.seed}")
    return " ".join(parts)


def _report(args, cfg: Optional[SpecConfig], lines, payload, agree=None, banner="",
            seed=None) -> RunReport:
    spec = cfg.spec if cfg else None
    return RunReport(_echo(args), spec.label if spec else None,
                     fingerprint(spec) if spec else None, seed, lines, payload, agree, banner)


# -- commands -------------------------------------------------------------------------

def cmd_classify(args) -> RunReport:
    cfg = _load(args.config)
    spec = cfg.spec
    args.seed_used = True
    rep = classify_spec(spec)
    agree, banner = None, ""
    if rep.minimal:
        try:
            rep.corroboration = corroborate(spec, args.trials, args.seed)
            c = rep.corroboration
            agree = True
            banner = (f"{c['agreed']}/{c['trials']} random formulas classified as the "
                      f"scan of G_{c['level']} says")
        except InconsistencyError as exc:
            rep.corroboration = {"trials": args.trials, "failure": str(exc)}
            agree, banner = False, str(exc)
    else:
        w = witness_nonminimal(spec)
        if w.formula is not None:
            rep.corroboration = {
                "witness_formula": w.text,
                "census": [{"level": k, "members": a, "non_members": b} for k, a, b in w.census],
            }
            agree = w.grows
            (k0, a0, b0), (k1, a1, b1) = w.census
            banner = (f"{w.text} has {a0}->{a1} members and {b0}->{b1} non-members "
                      f"from G_{k0} to G_{k1}")
        else:
            rep.corroboration = {"structural_witness": w.structural}
    return _report(args, cfg, rep.to_text().splitlines(), rep.to_dict(), agree, banner,
                   seed=args.seed)


def _params(args, group) -> dict:
    out = {}
    for item in args.param or []:
        name, sep, lit = item.partition("=")
        if not sep or not name.strip():
            raise InputError(f"--param expects NAME=LITERAL, got {item!r}")
        out[name.strip()] = parse_element(lit, group, out)
    return out


def cmd_eval(args) -> RunReport:
    cfg = _load(args.config)
    spec = cfg.spec
    K = 6 if args.level is None else args.level
    phi, notes = parse_with_notes(args.formula, spec.descriptor, _params(args, spec.descriptor))
    lines = [f"formula: {to_text(phi)}"] + [f"note: {n}" for n in notes]
    payload = {"formula": to_text(phi), "notes": notes, "level": K}
    trunc, rows, mask = extension_mask(phi, spec, K)
    census = int(mask.sum())
    size = int(mask.size)
    try:
        verdict = classify(phi, spec)
    except NotEventuallyConstantError as exc:
        bad = rewrite_mismatches(exc.reduction, K)
        lines += [f"verdict: none ({exc})",
                  f"reduced condition: {exc.reduction.condition}",
                  f"census at G_{K}: {census} of {size} elements satisfy the formula"]
        payload.update({"verdict": None, "reason": str(exc),
                        "reduced_condition": exc.reduction.condition,
                        "census": {"members": census, "size": size},
                        "rewrite_mismatches": [str(a) for a in bad]})
        return _report(args, cfg, lines, payload, not bad,
                       f"reduced condition matches the scan of G_{K} outside the exceptional "
                       f"set ({len(bad)} mismatches)")
    listed = [str(a) for a in verdict.elements]
    label = "members" if verdict.is_finite else "complement"
    lines += [f"verdict: {verdict}",
              f"{label}: {{{', '.join(listed)}}}"]
    lines += [f"trace.{k}: {v}" for k, v in verdict.trace().items()]
    vm = verdict_mask(verdict, spec, trunc, K)
    agree = bool(np.array_equal(vm, mask))
    lines.append(f"census at G_{K}: {census} of {size} elements satisfy the formula")
    payload.update({"verdict": verdict.kind, "count": len(listed), label: listed,
                    "trace": verdict.trace(), "census": {"members": census, "size": size}})
    banner = (f"verdict and exhaustive scan of G_{K} agree on all {size} elements" if agree
              else f"verdict and exhaustive scan of G_{K} differ on "
                   f"{int((vm != mask).sum())} elements")
    return _report(args, cfg, lines, payload, agree, banner)


def cmd_order_table(args) -> RunReport:
    cfg = _load(args.config)
    spec = cfg.spec
    K = 4 if args.level is None else args.level
    view = order_from_valuation(spec, K)
    classes = view.classes()
    lines, table = [], []
    h_ok = True
    for cls in classes:
        val = value_of(spec, cls[0])
        g = cls[0]
        H, closed = h_subgroup(view, g)
        same = H == set(ball(spec, val)) if not val.is_inf else H == {g}
        h_ok &= same and closed
        members = sorted(cls, key=lambda a: a.sort_key())
        lines.append(f"{val}: size {len(cls)}: " + ", ".join(str(a) for a in members))
        table.append({"value": str(val), "size": len(cls), "members": [str(a) for a in members],
                      "h_equals_ball": same, "h_is_subgroup": closed})
    rt = valuation_from_order(view)
    lines.append(f"classes: {len(classes)} (zero class listed first)")
    lines.append(f"H_g = closed ball of v(g) for every g: {h_ok}")
    lines.append(f"round trip order -> valuation -> order exact: {rt.round_trip}")
    if rt.modifications:
        lines += [f"modification: {m}" for m in rt.modifications]
    payload = {"level": K, "classes": table, "h_identity": h_ok, "round_trip": rt.round_trip,
               "modifications": rt.modifications}
    agree = h_ok and rt.round_trip and rt.axiom1 and rt.axiom2
    return _report(args, cfg, lines, payload, agree,
                   f"order table of G_{K} matches the valuation ({len(view.carrier)} elements)")


def cmd_axioms(args) -> RunReport:
    cfg = _load(args.config)
    spec = cfg.spec
    K = max(8, horizon(spec)) if args.level is None else args.level
    if K < horizon(spec):
        raise InputError(f"--level {K} is below the horizon {horizon(spec)} of {spec.label}")
    rep = check_axioms(spec, K)
    lines = [f"horizon: {rep.horizon}", f"level: {rep.K}"]
    payload = {"horizon": rep.horizon, "level": rep.K, "axioms": {}}
    for key, st in rep.axioms.items():
        lines.append(f"axiom ({key}): {st}")
        entry = {"status": st.status, "violations": st.violations}
        if st.exceptions:
            entry["exceptions"] = [[str(a), str(b)] for a, b in st.exceptions]
            lines += [f"  exception: ({a}, {b})" for a, b in st.exceptions]
        if st.witness:
            entry["witness"] = [str(a) for a in st.witness]
        payload["axioms"][key] = entry
    return _report(args, cfg, lines, payload, rep.ok,
                   f"axioms checked exhaustively on G_{K}; exceptions confined to the prefix")


def cmd_examples(args) -> RunReport:
    bound = 50 if args.bound is None else args.bound
    results = example_suite(args.name, bound)
    lines = [f"{'PASS' if ok else 'FAIL'}  {prop}" for prop, ok in results]
    payload = {"example": args.name, "bound": bound,
               "properties": [{"property": p, "pass": ok} for p, ok in results]}
    ok = all(r for _, r in results)
    return _report(args, None, lines, payload, ok,
                   f"{sum(r for _, r in results)}/{len(results)} properties hold up to n = {bound}")


COMMANDS = {
    "classify": cmd_classify,
    "eval": cmd_eval,
    "order-table": cmd_order_table,
    "axioms": cmd_axioms,
    "examples": cmd_examples,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "machine"), default="text")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"seed for random corroboration (default {DEFAULT_SEED})")
    common.add_argument("--timing", action="store_true",
                        help="include wall-clock time (makes reports run-dependent)")
    common.add_argument("--output", help="write the report here instead of stdout")

    def with_config(p, required=True):
        p.add_argument("--config", required=required,
                       help="config file, or a catalog name: " + ", ".join(catalog.NAMES))

    ap = argparse.ArgumentParser(prog="valmin", description="valued abelian group workbench")
    ap.add_argument("--version", action="version", version=f"valmin {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="decide minimality of a filtration")
    with_config(p)
    p.add_argument("--trials", type=int, default=20)

    p = sub.add_parser("eval", parents=[common], help="classify the set defined by a formula")
    with_config(p)
    p.add_argument("--formula", required=True)
    p.add_argument("--level", type=int, help="truncation for the brute-force census (default 6)")
    p.add_argument("--param", action="append", default=[], metavar="NAME=LITERAL")

    p = sub.add_parser("order-table", parents=[common], help="incomparability classes of G_K")
    with_config(p)
    p.add_argument("--level", type=int, help="truncation level (default 4)")

    p = sub.add_parser("axioms", parents=[common], help="check the valuation axioms on G_K")
    with_config(p)
    p.add_argument("--level", type=int, help="truncation level (default max(8, horizon))")

    p = sub.add_parser("examples", parents=[common], help="property suite of an example order")
    p.add_argument("name", help="jagiella or triangle")
    p.add_argument("--bound", "--level", dest="bound", type=int, help="largest n (default 50)")
    return ap


def _write(args, text: str):
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for key in ("level", "bound", "trials"):
        val = getattr(args, key, None)
        if val is not None and val < 0:
            print(f"valmin: error: --{key} must be non-negative", file=sys.stderr)
            return EXIT_INPUT
    start = time.perf_counter()
    try:
        report = COMMANDS[args.command](args)
    except (ConfigError, FormulaSyntaxError, SpecError, GroupError, InputError, OrderError,
            PreconditionError, EnumerationBudgetError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) else str(exc)
        print(f"valmin: error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except (InconsistencyError, SpecIntegrityError) as exc:
        print(f"valmin: inconsistency: {exc}", file=sys.stderr)
        return EXIT_DISAGREE
    if args.timing:
        report.timing = time.perf_counter() - start
    if args.format == "machine":
        text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    else:
        text = report.to_text()
    _write(args, text)
    return EXIT_DISAGREE if report.agree is False else EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
