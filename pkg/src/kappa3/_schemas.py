"""Loading and checking against the JSON schemas shipped in ``schemas/``."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema
from referencing import Registry, Resource


@lru_cache(maxsize=None)
def _registry() -> Registry:
    root = resources.files("kappa3").joinpath("schemas")
    pairs = []
    for entry in root.iterdir():
        if entry.name.endswith(".schema.json"):
            pairs.append((entry.name, Resource.from_contents(json.loads(entry.read_text()))))
    return Registry().with_resources(pairs)


def load(name: str) -> dict:
    return _registry()[name].contents


def validate(data: object, name: str) -> None:
    """Raise jsonschema.ValidationError unless ``data`` matches schema ``name``."""
    schema = load(name)
    cls = jsonschema.validators.validator_for(schema)
    cls(schema, registry=_registry()).validate(data)
