"""Per-session advisor cursors and recommendation panels.

Each advisor walks its own graph: the cursor starts at the BOOTSTRAP
sentinel (the panel then shows sequence-opening states) and moves to the
state of whatever the user selects. When the user picks a block from one
advisor, every other advisor is advanced to the state whose block's tags
best overlap the chosen block's tags, so all advisors stay roughly in the
same phase of the analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .catalog import AnalysisBlock, Catalog, jaccard
from .errors import UnknownBlock
from .graph import RecommendationGraph, bootstrap, top_k

PANEL_SIZE = 5

BOOTSTRAP = "__bootstrap__"

CATALOG_ADVISOR = "catalog"  # pseudo-advisor id for drop-down selections


@dataclass(frozen=True)
class AdvisorCursor:
    advisor_id: str
    state: str = BOOTSTRAP

    @property
    def is_bootstrap(self) -> bool:
        return self.state == BOOTSTRAP


@dataclass
class RecommendationPanel:
    panel_index: int
    per_advisor: dict[str, list[tuple[str, float]]]
    selected: str | None = None
    selected_advisor: str | None = None


def _requirement_filter(
    ranked: list[tuple[str, float]],
    catalog: Catalog,
    schema: list[tuple[str, str]],
    row_count: int,
) -> list[tuple[str, float]]:
    kept = []
    for block_id, prob in ranked:
        if block_id not in catalog:
            continue
        if catalog.get(block_id).requirements.satisfied_by(schema, row_count):
            kept.append((block_id, prob))
    return kept


def panel_for_cursors(
    cursors: list[AdvisorCursor],
    graphs: dict[str, RecommendationGraph],
    catalog: Catalog,
    schema: list[tuple[str, str]],
    row_count: int,
    panel_index: int,
) -> RecommendationPanel:
    """Recommendation lists for the given cursors: up to five per advisor,
    ordered by probability, minus blocks the dataset cannot satisfy."""
    per_advisor: dict[str, list[tuple[str, float]]] = {}
    for cursor in cursors:
        graph = graphs[cursor.advisor_id]
        if cursor.is_bootstrap:
            ranked = bootstrap(graph, PANEL_SIZE)
        else:
            ranked = top_k(graph, cursor.state, PANEL_SIZE)
        per_advisor[cursor.advisor_id] = _requirement_filter(
            ranked, catalog, schema, row_count
        )
    return RecommendationPanel(panel_index=panel_index, per_advisor=per_advisor)


def initial_panel(
    graphs: dict[str, RecommendationGraph],
    catalog: Catalog,
    schema: list[tuple[str, str]],
    row_count: int,
) -> tuple[list[AdvisorCursor], RecommendationPanel]:
    cursors = [AdvisorCursor(advisor_id=aid) for aid in sorted(graphs)]
    panel = panel_for_cursors(cursors, graphs, catalog, schema, row_count, panel_index=0)
    return cursors, panel


def sync_advisor(
    graph: RecommendationGraph,
    catalog: Catalog,
    tags: frozenset[str] | set[str],
    current: AdvisorCursor,
) -> AdvisorCursor:
    """Move a cursor to the graph state whose block tags best match ``tags``.

    Ties prefer the state with more observed incoming transitions, then the
    lexicographically smaller id. If nothing overlaps at all the cursor
    stays where it is.
    """
    best: tuple[float, int, str] | None = None
    for state in graph.states:
        if state not in catalog:
            continue
        overlap = jaccard(catalog.get(state).tags, tags)
        if overlap <= 0:
            continue
        key = (-overlap, -graph.incoming_count(state), state)
        if best is None or key < best:
            best = key
    if best is None:
        return current
    return replace(current, state=best[2])


def select_step(
    cursors: list[AdvisorCursor],
    chosen_advisor: str,
    block: AnalysisBlock,
    graphs: dict[str, RecommendationGraph],
    catalog: Catalog,
) -> list[AdvisorCursor]:
    """Advance all cursors after the user picks ``block`` from one advisor.

    The chosen advisor's cursor jumps straight to the block's state; the
    others follow by tag sync. A selection from the catalog drop-down (or a
    block missing from the chosen advisor's graph) advances every advisor
    by the exact-state-if-present-else-tag-sync rule.
    """
    if block.block_id not in catalog:
        raise UnknownBlock(f"{block.block_id!r} is not a catalog block")
    if chosen_advisor != CATALOG_ADVISOR and chosen_advisor not in graphs:
        raise ValueError(f"no advisor {chosen_advisor!r}")

    exact = (
        chosen_advisor != CATALOG_ADVISOR
        and block.block_id in graphs[chosen_advisor].states
    )
    updated = []
    for cursor in cursors:
        graph = graphs[cursor.advisor_id]
        if exact and cursor.advisor_id == chosen_advisor:
            updated.append(replace(cursor, state=block.block_id))
        elif not exact and block.block_id in graph.states:
            updated.append(replace(cursor, state=block.block_id))
        else:
            updated.append(sync_advisor(graph, catalog, block.tags, cursor))
    return updated


def select_from_catalog(
    cursors: list[AdvisorCursor],
    block: AnalysisBlock,
    graphs: dict[str, RecommendationGraph],
    catalog: Catalog,
) -> list[AdvisorCursor]:
    """Advance every advisor after a drop-down selection: exact state when
    the block lives in that advisor's graph, tag sync otherwise."""
    return select_step(cursors, CATALOG_ADVISOR, block, graphs, catalog)
