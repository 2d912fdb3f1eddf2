"""Bundled example networks.

The JSON fixtures under ergmkit/data are synthetic reconstructions of
classic teaching datasets (see data/PROVENANCE.md). They reproduce the
published summary statistics that the test suite checks but are not the
original field data.
"""

from __future__ import annotations

import json
from importlib import resources

from .errors import NetworkError
from .network import Network, network_from_json


def _data_root():
    return resources.files("ergmkit") / "data"


def dataset_names() -> list[str]:
    """Names accepted by load_dataset, sorted."""
    root = _data_root()
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_dataset(name: str) -> Network:
    path = _data_root() / f"{name}.json"
    try:
        text = path.read_text(encoding="utf-8")
    except (FileNotFoundError, OSError):
        known = ", ".join(dataset_names())
        raise NetworkError(f"no bundled dataset {name!r} (available: {known})") from None
    return network_from_json(json.loads(text))
