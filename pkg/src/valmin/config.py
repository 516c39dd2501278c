"""Declarative filtration configs.

A config is an INI document::

    [group]
    kind = prufer          ; prufer | elem
    prime = 2
    factors = 2            ; prufer only, default 1

    [filtration]
    prefix = {0} {0}       ; elem: multiplicities, e.g. "2 1 3"
    eventual = {1} {0}     ; periodic tail, one schedule per level
    affine = 1 1           ; elem only, instead of eventual: slope intercept

    [meta]
    label = prufer_rr2_perturbed
    description = free text

Prufer schedules are factor sets written ``{0}`` or ``{0,1}``.  Every
validation failure names the offending field as ``section.key``.
"""
from __future__ import annotations

import configparser
import hashlib
import re
from dataclasses import dataclass
from pathlib import Path

from .group_core import GroupDescriptor, GroupError
from .valuation import FiltrationSpec, SpecError


class ConfigError(ValueError):
    def __init__(self, path: str, message: str, source: str = ""):
        self.path = path
        where = f"{source}: " if source else ""
        super().__init__(f"{where}{path}: {message}")


_SET = re.compile(r"\{([^{}]*)\}")


def _ints(text: str, path: str, source: str) -> list:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(path, f"expected integers, got {text!r}", source) from None


def _sets(text: str, path: str, source: str) -> list:
    rest = _SET.sub("", text).strip()
    if rest:
        raise ConfigError(path, f"expected factor sets like {{0}} or {{0,1}}, found {rest!r}",
                          source)
    out = []
    for body in _SET.findall(text):
        members = _ints(body, path, source)
        if not members:
            raise ConfigError(path, "empty factor set", source)
        out.append(frozenset(members))
    return out


@dataclass(frozen=True)
class SpecConfig:
    spec: FiltrationSpec
    description: str = ""
    source: str = ""

    @property
    def label(self) -> str:
        return self.spec.label

    @classmethod
    def from_text(cls, text: str, source: str = "") -> "SpecConfig":
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            cp.read_string(text, source=source or "<config>")
        except configparser.Error as exc:
            raise ConfigError("<document>", str(exc).splitlines()[0], source) from None
        if not cp.has_section("group"):
            raise ConfigError("group", "missing section", source)
        if not cp.has_section("filtration"):
            raise ConfigError("filtration", "missing section", source)
        grp, fil = cp["group"], cp["filtration"]

        kind = grp.get("kind", "").strip().lower()
        if kind not in ("prufer", "elem"):
            raise ConfigError("group.kind", f"expected 'prufer' or 'elem', got {kind!r}", source)
        try:
            prime = int(grp.get("prime", ""))
        except ValueError:
            raise ConfigError("group.prime", f"expected an integer, got {grp.get('prime')!r}",
                              source) from None
        factors_text = grp.get("factors", "1")
        try:
            factors = int(factors_text)
        except ValueError:
            raise ConfigError("group.factors", f"expected an integer, got {factors_text!r}",
                              source) from None
        if kind == "elem" and "factors" in grp:
            raise ConfigError("group.factors", "only meaningful for kind = prufer", source)
        try:
            desc = (GroupDescriptor.elem(prime) if kind == "elem"
                    else GroupDescriptor.prufer(prime, factors))
        except GroupError as exc:
            field = "group.prime" if "prime" in str(exc) else "group.factors"
            raise ConfigError(field, str(exc), source) from None

        parse = _ints if kind == "elem" else _sets
        prefix = parse(fil.get("prefix", ""), "filtration.prefix", source)
        eventual = parse(fil.get("eventual", ""), "filtration.eventual", source)
        affine = None
        if "affine" in fil:
            affine = _ints(fil["affine"], "filtration.affine", source)
            if len(affine) != 2:
                raise ConfigError("filtration.affine", "expected 'slope intercept'", source)
        label = cp.get("meta", "label", fallback="") or Path(source).stem
        description = cp.get("meta", "description", fallback="")
        try:
            spec = FiltrationSpec(desc, tuple(prefix), tuple(eventual),
                                  tuple(affine) if affine else None, label)
        except SpecError as exc:
            msg = str(exc)
            field = ("filtration.affine" if "affine" in msg
                     else "filtration.prefix" if "prefix" in msg else "filtration.eventual")
            raise ConfigError(field, msg, source) from None
        return cls(spec, description, source)

    @classmethod
    def from_path(cls, path) -> "SpecConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}", str(path)) from None
        return cls.from_text(text, str(path))


def spec_text(spec: FiltrationSpec) -> str:
    """Canonical config document for a spec (labels and comments dropped)."""
    g = spec.descriptor

    def sched(s):
        return str(s) if g.is_elem else "{" + ",".join(map(str, sorted(s))) + "}"

    lines = ["[group]", f"kind = {g.kind.value}", f"prime = {g.p}"]
    if not g.is_elem:
        lines.append(f"factors = {g.d}")
    lines += ["", "[filtration]"]
    if spec.prefix:
        lines.append("prefix = " + " ".join(sched(s) for s in spec.prefix))
    if spec.affine is not None:
        lines.append("affine = {} {}".format(*spec.affine))
    else:
        lines.append("eventual = " + " ".join(sched(s) for s in spec.eventual))
    return "\n".join(lines) + "\n"


def fingerprint(spec: FiltrationSpec) -> str:
    return hashlib.sha256(spec_text(spec).encode()).hexdigest()
