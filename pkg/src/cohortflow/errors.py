"""Exception types shared across the toolkit."""


class CohortflowError(Exception):
    """Base class for all toolkit errors."""


class MalformedRecord(CohortflowError):
    """A raw input line could not be turned into a valid record."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class MissingField(CohortflowError):
    """A required field is absent from an input record."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing field: {name}")


class EmptyDataset(CohortflowError):
    """An operation that needs at least one record or interaction got none."""


class NodeNotFound(CohortflowError):
    """A per-node metric was requested for a node absent from the graph."""


class InsufficientData(CohortflowError):
    """Too few periods or cohorts to classify discourse dynamics."""


class InvalidSpec(CohortflowError):
    """Synthetic generator parameters violate their invariants."""
