"""Next-step recommendations for data analysis.

Mines corpora of computational notebooks into Markov-chain recommendation
graphs, one per advisor, and drives a linear notebook session in which each
selected analysis step executes on the running data frame and refreshes the
recommendations underneath it.
"""

from .advisor import (
    BOOTSTRAP,
    CATALOG_ADVISOR,
    AdvisorCursor,
    RecommendationPanel,
    initial_panel,
    select_from_catalog,
    select_step,
    sync_advisor,
)
from .catalog import (
    DEFAULT_TAGS,
    AnalysisBlock,
    Catalog,
    DataRequirements,
    check_graph_integrity,
    load_catalog,
    lookup_by_tags,
    parse_catalog,
    validate_block,
)
from .cluster import ClusterAssignment, assign_to_nearest, cluster_blocks
from .errors import LodestarError
from .graph import (
    RecommendationGraph,
    bootstrap,
    build_graph,
    deserialize,
    load_graph,
    save_graph,
    serialize,
    top_k,
)
from .harness import max_out_degree, replay, run_mine
from .kernel import (
    ExecutionResult,
    KernelManager,
    MockKernelHandle,
    MockKernelServer,
    TablePreview,
    start_kernel,
)
from .mining import (
    BlockSequence,
    MiningConfig,
    extract_sequences,
    filter_corpus,
    mine_corpus,
    select_representative,
)
from .notebooks import NotebookDocument, parse_notebook, read_corpus_dir
from .session import NotebookCell, Session, recover_block_sequence
from .tabular import DatasetHandle, inspect_csv
from .vectors import ApiCallVocab, TermVector, build_term_vectors
from .apicalls import AliasContext, extract_api_calls

__version__ = "0.1.0"

__all__ = [
    "AdvisorCursor",
    "AliasContext",
    "AnalysisBlock",
    "ApiCallVocab",
    "BOOTSTRAP",
    "BlockSequence",
    "CATALOG_ADVISOR",
    "Catalog",
    "ClusterAssignment",
    "DEFAULT_TAGS",
    "DataRequirements",
    "DatasetHandle",
    "ExecutionResult",
    "KernelManager",
    "LodestarError",
    "MiningConfig",
    "MockKernelHandle",
    "MockKernelServer",
    "NotebookCell",
    "NotebookDocument",
    "RecommendationGraph",
    "RecommendationPanel",
    "Session",
    "TablePreview",
    "TermVector",
    "assign_to_nearest",
    "bootstrap",
    "build_graph",
    "build_term_vectors",
    "check_graph_integrity",
    "cluster_blocks",
    "deserialize",
    "extract_api_calls",
    "extract_sequences",
    "filter_corpus",
    "initial_panel",
    "inspect_csv",
    "load_catalog",
    "load_graph",
    "lookup_by_tags",
    "max_out_degree",
    "mine_corpus",
    "parse_catalog",
    "parse_notebook",
    "read_corpus_dir",
    "recover_block_sequence",
    "replay",
    "run_mine",
    "save_graph",
    "select_from_catalog",
    "select_representative",
    "select_step",
    "serialize",
    "start_kernel",
    "sync_advisor",
    "top_k",
    "validate_block",
]
