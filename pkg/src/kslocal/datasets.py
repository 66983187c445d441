"""Bundled vector sets shipped with the package."""

from __future__ import annotations

import json
from importlib import resources

from .diagram import Diagram, build_diagram, load_vectors

BUNDLED = ("table1.json", "cabello18.json")


def bundled_payload(name: str) -> dict:
    if not name.endswith(".json"):
        name += ".json"
    if name not in BUNDLED:
        raise FileNotFoundError(f"no bundled data file {name!r}; have {', '.join(BUNDLED)}")
    with resources.files("kslocal").joinpath("data").joinpath(name).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def bundled_diagram(name: str) -> Diagram:
    vectors, labels = load_vectors(bundled_payload(name))
    return build_diagram(vectors, labels)


def table1() -> Diagram:
    """The 37-observable localising set in exact arithmetic."""
    return bundled_diagram("table1.json")


def cabello18() -> Diagram:
    """The 18-observable, 9-context set in dimension 4."""
    return bundled_diagram("cabello18.json")
