"""The bundled example filtrations."""
from __future__ import annotations

from importlib import resources

from .config import SpecConfig
from .valuation import FiltrationSpec

NAMES = (
    "prufer_std",
    "prufer_rr2",
    "elem_const",
    "elem_growing",
    "elem_alternating",
    "prufer_rr2_perturbed",
)

# (verdict, case, n0, ell)
EXPECTED = {
    "prufer_std": ("Minimal", "4", 0, 1),
    "prufer_rr2": ("Minimal", "4", 0, 2),
    "elem_const": ("Minimal", "3a", 0, None),
    "elem_growing": ("Minimal", "3b", None, None),
    "elem_alternating": ("NotMinimal", None, None, None),
    "prufer_rr2_perturbed": ("Minimal", "4", 0, 2),
}


def fixture_path(name: str):
    return resources.files("valmin") / "fixtures" / f"{name}.cfg"


def load_config(name: str) -> SpecConfig:
    if name not in NAMES:
        raise KeyError(f"unknown catalog spec {name!r}; choose from {', '.join(NAMES)}")
    path = fixture_path(name)
    return SpecConfig.from_text(path.read_text(encoding="utf-8"), f"{name}.cfg")


def load(name: str) -> FiltrationSpec:
    return load_config(name).spec


def all_specs() -> dict:
    return {name: load(name) for name in NAMES}
