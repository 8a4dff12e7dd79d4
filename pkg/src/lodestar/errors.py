"""Exception types shared across the lodestar package."""

from __future__ import annotations


class LodestarError(Exception):
    """Base class for all lodestar errors."""


class MalformedNotebook(LodestarError):
    """The input is not a notebook file we can read (bad JSON, no cells array)."""


class EmptyCorpus(LodestarError):
    """A mining or graph-building step received no usable input."""


class InsufficientBlocks(LodestarError):
    """Requested more clusters than there are usable (non-zero) vectors."""

    def __init__(self, k: int, usable: int):
        super().__init__(f"k={k} exceeds the {usable} usable vector(s)")
        self.k = k
        self.usable = usable


class UnknownState(LodestarError):
    """A queried state id is not part of the recommendation graph."""


class SchemaViolation(LodestarError):
    """A serialized artifact does not match its documented JSON schema."""


class InvalidBlock(LodestarError):
    """An analysis block violates the catalog contract."""

    def __init__(self, block_id: str, violations: list[str]):
        super().__init__(f"block {block_id!r}: " + "; ".join(violations))
        self.block_id = block_id
        self.violations = violations


class DuplicateId(LodestarError):
    """Two catalog blocks share the same id."""


class UnknownBlock(LodestarError):
    """A referenced block id does not exist in the catalog."""


class KernelUnavailable(LodestarError):
    """The kernel sidecar could not be started."""


class KernelError(LodestarError):
    """The kernel sidecar misbehaved (crash, protocol error)."""


class BadCsv(LodestarError):
    """A CSV upload could not be parsed into a table."""


class EmptySession(LodestarError):
    """Export requested on a session with no cells."""


class CellErrored(LodestarError):
    """Requested output from a cell whose execution failed."""


class StalePanel(LodestarError):
    """A step request cited a panel index past the end of the notebook."""


class StaleSession(LodestarError):
    """A restored session has no live kernel frames; replay it first."""
