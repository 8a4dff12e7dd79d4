"""The library of curated, executable analysis blocks.

Every block is a single Python function named ``analyze`` that takes one
data frame and returns a data frame. Figures are written as PNG files into
the directory named by the kernel-provided ``ARTIFACT_DIR`` variable, never
displayed inline, and blocks carry no print statements. Tags place each
block in the analysis workflow and let advisors find synonymous states in
each other's graphs.
"""

from __future__ import annotations

import ast
import builtins
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicateId, InvalidBlock, UnknownBlock
from .graph import RecommendationGraph

DEFAULT_TAGS = frozenset(
    {
        "statistical-sampling",
        "visualization",
        "data-organization",
        "data-cleaning",
        "data-formatting",
        "statistical-summary",
        "train-model",
        "test-model",
    }
)

ENTRY_FUNCTION = "analyze"

# names the kernel injects into a block's namespace before running it
KERNEL_PROVIDED = frozenset({"ARTIFACT_DIR"})

# conventional short names, used to phrase missing-import violations
WELL_KNOWN_ALIASES = {
    "pd": "pandas",
    "np": "numpy",
    "plt": "matplotlib.pyplot",
    "sns": "seaborn",
    "sm": "statsmodels.api",
    "tf": "tensorflow",
}

_BUILTIN_NAMES = frozenset(dir(builtins))


@dataclass(frozen=True)
class DataRequirements:
    """Declarative executability requirements checked against a dataset."""

    min_numeric_columns: int = 0
    min_categorical_columns: int = 0
    min_rows: int = 0

    def satisfied_by(self, schema: list[tuple[str, str]], row_count: int) -> bool:
        numeric = sum(1 for _, kind in schema if kind == "numeric")
        categorical = sum(1 for _, kind in schema if kind == "categorical")
        return (
            numeric >= self.min_numeric_columns
            and categorical >= self.min_categorical_columns
            and row_count >= self.min_rows
        )


@dataclass(frozen=True)
class AnalysisBlock:
    block_id: str
    name: str
    description: str
    code: str
    tags: frozenset[str]
    advisor_origin: str  # "expert" | "crowd"
    requirements: DataRequirements = DataRequirements()


def _bound_names(tree: ast.AST) -> set[str]:
    bound: set[str] = set(_BUILTIN_NAMES) | set(KERNEL_PROVIDED)
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for item in node.names:
                bound.add(item.asname or item.name.split(".")[0])
        elif isinstance(node, ast.ImportFrom):
            for item in node.names:
                if item.name != "*":
                    bound.add(item.asname or item.name)
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            bound.add(node.name)
            if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                args = node.args
                for arg in [
                    *args.posonlyargs,
                    *args.args,
                    *args.kwonlyargs,
                    *filter(None, [args.vararg, args.kwarg]),
                ]:
                    bound.add(arg.arg)
        elif isinstance(node, ast.Name) and isinstance(node.ctx, (ast.Store, ast.Del)):
            bound.add(node.id)
    return bound


def _call_name_bases(tree: ast.AST) -> set[str]:
    """Names used as the base of an attribute call, e.g. pd in pd.read_csv()."""
    bases: set[str] = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Attribute):
            inner = node.func
            while isinstance(inner, ast.Attribute):
                inner = inner.value
            if isinstance(inner, ast.Name):
                bases.add(inner.id)
    return bases


def validate_block(
    block: AnalysisBlock, allowed_tags: frozenset[str] = DEFAULT_TAGS
) -> list[str]:
    """All contract violations of a block; an empty list means compliant."""
    violations: list[str] = []

    if not block.tags:
        violations.append("tags must be non-empty")
    for tag in sorted(block.tags - allowed_tags):
        violations.append(f"unknown tag: {tag}")
    if block.advisor_origin not in ("expert", "crowd"):
        violations.append(f"bad advisor origin: {block.advisor_origin!r}")
    if min(
        block.requirements.min_numeric_columns,
        block.requirements.min_categorical_columns,
        block.requirements.min_rows,
    ) < 0:
        violations.append("requirements must be non-negative")

    try:
        tree = ast.parse(block.code)
    except SyntaxError as exc:
        violations.append(f"code does not parse: {exc.msg}")
        return violations

    functions = [n for n in tree.body if isinstance(n, ast.FunctionDef)]
    if len(functions) != 1:
        violations.append(f"expected exactly one entry function, found {len(functions)}")
    else:
        entry = functions[0]
        if entry.name != ENTRY_FUNCTION:
            violations.append(f"entry function must be named {ENTRY_FUNCTION!r}")
        positional = entry.args.posonlyargs + entry.args.args
        n_required = len(positional) - len(entry.args.defaults)
        if n_required != 1:
            violations.append("entry function must take exactly one required argument")
        if not any(
            isinstance(n, ast.Return) and n.value is not None for n in ast.walk(entry)
        ):
            violations.append("entry function must return a data frame")

    for node in ast.walk(tree):
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            if node.func.id == "print":
                violations.append("print statement present")
            elif node.func.id == "display":
                violations.append("display call present")

    bound = _bound_names(tree)
    for name in sorted(_call_name_bases(tree) - bound):
        violations.append(f"missing import: {WELL_KNOWN_ALIASES.get(name, name)}")

    return violations


@dataclass
class Catalog:
    """Immutable-after-load collection of analysis blocks, keyed by id."""

    blocks: dict[str, AnalysisBlock] = field(default_factory=dict)
    allowed_tags: frozenset[str] = DEFAULT_TAGS

    def __len__(self) -> int:
        return len(self.blocks)

    def __contains__(self, block_id: str) -> bool:
        return block_id in self.blocks

    def __iter__(self):
        return iter(sorted(self.blocks.values(), key=lambda b: b.block_id))

    def get(self, block_id: str) -> AnalysisBlock:
        try:
            return self.blocks[block_id]
        except KeyError:
            raise UnknownBlock(f"no catalog block with id {block_id!r}") from None


def jaccard(a: frozenset[str] | set[str], b: frozenset[str] | set[str]) -> float:
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def lookup_by_tags(catalog: Catalog, tags: set[str] | frozenset[str]) -> list[AnalysisBlock]:
    """Blocks overlapping the query tags, best Jaccard first, ties by id."""
    scored = [
        (jaccard(block.tags, tags), block)
        for block in catalog
        if jaccard(block.tags, tags) > 0
    ]
    scored.sort(key=lambda item: (-item[0], item[1].block_id))
    return [block for _, block in scored]


def _parse_block(entry: dict) -> AnalysisBlock:
    requirements = entry.get("requirements") or {}
    return AnalysisBlock(
        block_id=str(entry["id"]),
        name=str(entry["name"]),
        description=str(entry["description"]),
        code=str(entry["code"]),
        tags=frozenset(entry["tags"]),
        advisor_origin=str(entry["origin"]),
        requirements=DataRequirements(
            min_numeric_columns=int(requirements.get("min_numeric_columns", 0)),
            min_categorical_columns=int(requirements.get("min_categorical_columns", 0)),
            min_rows=int(requirements.get("min_rows", 0)),
        ),
    )


def parse_catalog(doc: dict, extra_tags: frozenset[str] = frozenset()) -> Catalog:
    allowed = DEFAULT_TAGS | extra_tags
    catalog = Catalog(allowed_tags=allowed)
    for entry in doc.get("blocks", []):
        try:
            block = _parse_block(entry)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidBlock(str(entry.get("id", "<missing id>")), [f"bad field: {exc}"])
        if block.block_id in catalog.blocks:
            raise DuplicateId(f"duplicate block id {block.block_id!r}")
        violations = validate_block(block, allowed)
        if violations:
            raise InvalidBlock(block.block_id, violations)
        catalog.blocks[block.block_id] = block
    return catalog


def load_catalog(path: str | Path, extra_tags: frozenset[str] = frozenset()) -> Catalog:
    """Load and validate a catalog JSON file."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return parse_catalog(doc, extra_tags)


def check_graph_integrity(graph: RecommendationGraph, catalog: Catalog) -> list[str]:
    """State ids in the graph with no catalog block behind them."""
    return sorted(state for state in graph.states if state not in catalog)
