"""Generate a small synthetic notebook corpus for demos and evaluation.

The corpus imitates the shape of real exploratory notebooks at desk scale:
every notebook follows one of a few workflow patterns (load, inspect,
clean, summarize, visualize, model), each step drawn from a bank of cell
templates whose API-call profiles are distinctive per step kind. Mining it
with k equal to the number of step kinds recovers the planted structure,
which makes the corpus a convenient ground truth for the pipeline.

Generation is deterministic for a fixed (notebooks, seed) pair.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

# each template bank holds interchangeable cells with the same call profile
CELL_BANK: dict[str, list[str]] = {
    "load": [
        'import pandas as pd\n\ndf = pd.read_csv("data.csv")',
        'import pandas as pd\n\nframe = pd.read_csv("measurements.csv")',
        'import pandas as pd\n\ndf = pd.read_csv("survey_results.csv")',
    ],
    "inspect": [
        "df.head()\ndf.info()",
        "frame.head()\nframe.info()",
        "df.head(20)\ndf.info()",
    ],
    "clean": [
        'df = df.dropna()\ndf = df.fillna(0)',
        'frame = frame.dropna()\nframe = frame.fillna(-1)',
        'clean = df.dropna()\nclean = clean.fillna("missing")',
    ],
    "stats": [
        "df.describe()\ndf.corr()",
        "frame.describe()\nframe.corr()",
        "summary = df.describe()\ndf.corr()",
    ],
    "viz": [
        'import matplotlib.pyplot as plt\n\nplt.scatter(df["a"], df["b"])\nplt.show()',
        'import matplotlib.pyplot as plt\n\nplt.scatter(frame["x"], frame["y"])\nplt.show()',
        'import matplotlib.pyplot as plt\n\nplt.scatter(df["height"], df["weight"])\nplt.show()',
    ],
    "model": [
        "from sklearn.linear_model import LinearRegression\n"
        "from sklearn.model_selection import train_test_split\n\n"
        "X_train, X_test, y_train, y_test = train_test_split(X, y)\n"
        "model = LinearRegression()\nmodel.fit(X_train, y_train)\nmodel.score(X_test, y_test)",
        "from sklearn.linear_model import LinearRegression\n"
        "from sklearn.model_selection import train_test_split\n\n"
        "X_train, X_test, y_train, y_test = train_test_split(features, target)\n"
        "reg = LinearRegression()\nreg.fit(X_train, y_train)\nreg.score(X_test, y_test)",
    ],
}

STEP_KINDS = tuple(sorted(CELL_BANK))

WORKFLOW_PATTERNS = [
    ["load", "inspect", "clean", "stats", "viz", "model"],
    ["load", "inspect", "stats", "viz"],
    ["load", "clean", "stats", "model"],
    ["load", "inspect", "viz"],
]

MARKDOWN_NOTES = [
    "# Exploring the dataset",
    "Let's look at the raw values first.",
    "## Cleaning",
    "Now the interesting part:",
]


def _code_cell(source: str, as_list: bool) -> dict:
    if as_list:
        lines = source.splitlines(keepends=True)
        return {"cell_type": "code", "metadata": {}, "outputs": [], "source": lines}
    return {"cell_type": "code", "metadata": {}, "outputs": [], "source": source}


def _markdown_cell(text: str) -> dict:
    return {"cell_type": "markdown", "metadata": {}, "source": text}


def demo_notebook(rng: random.Random, index: int) -> tuple[dict, list[str]]:
    """One synthetic notebook document plus its planted step-kind sequence."""
    pattern = WORKFLOW_PATTERNS[index % len(WORKFLOW_PATTERNS)]
    cells: list[dict] = []
    if rng.random() < 0.5:
        cells.append(_markdown_cell(rng.choice(MARKDOWN_NOTES)))
    for kind in pattern:
        source = rng.choice(CELL_BANK[kind])
        if kind == "inspect" and rng.random() < 0.2:
            # corpus code is often broken; the miner must cope
            source += "\nprint(df.shape"
        cells.append(_code_cell(source, as_list=rng.random() < 0.5))
        if rng.random() < 0.2:
            cells.append(_markdown_cell(rng.choice(MARKDOWN_NOTES)))
    notebook = {
        "nbformat": 4,
        "nbformat_minor": 5,
        "metadata": {"kernelspec": {"name": "python3", "language": "python"}},
        "cells": cells,
    }
    return notebook, list(pattern)


def write_demo_corpus(
    corpus_dir: str | Path, notebooks: int = 20, seed: int = 0
) -> dict[str, list[str]]:
    """Write ``notebooks`` synthetic .ipynb files; returns the planted
    step-kind sequence per file name."""
    corpus_dir = Path(corpus_dir)
    corpus_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    planted = {}
    for i in range(notebooks):
        notebook, pattern = demo_notebook(rng, i)
        name = f"nb_{i:02d}.ipynb"
        (corpus_dir / name).write_text(json.dumps(notebook, indent=1), encoding="utf-8")
        planted[name] = pattern
    return planted
