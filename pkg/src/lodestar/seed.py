"""Bundled starter content: the seed catalog, advisor graphs, and the Cars
dataset offered in the dataset drop-down on a fresh install."""

from __future__ import annotations

import json
from importlib import resources

from .catalog import Catalog, parse_catalog
from .graph import RecommendationGraph, build_graph
from .mining import BlockSequence

SEED_ADVISORS = ("expert", "crowd")


def _data_text(filename: str) -> str:
    return resources.files("lodestar.data").joinpath(filename).read_text(encoding="utf-8")


def load_seed_catalog() -> Catalog:
    return parse_catalog(json.loads(_data_text("seed_catalog.json")))


def load_seed_sequences() -> dict[str, list[BlockSequence]]:
    doc = json.loads(_data_text("seed_sequences.json"))
    return {
        advisor_id: [
            BlockSequence(source_id=f"{advisor_id}-{i}", steps=tuple(steps))
            for i, steps in enumerate(doc[advisor_id])
        ]
        for advisor_id in doc
    }


def build_seed_advisors() -> dict[str, RecommendationGraph]:
    sequences = load_seed_sequences()
    return {
        advisor_id: build_graph(seqs, advisor_id=advisor_id)
        for advisor_id, seqs in sequences.items()
    }


def cars_csv_bytes() -> bytes:
    return resources.files("lodestar.data").joinpath("cars.csv").read_bytes()
