"""Exception hierarchy shared across the package."""


class ReportQAError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ReportQAError):
    """Caller-supplied input violates a documented precondition."""


class NotFoundError(ReportQAError):
    """Lookup of a passage, document, or report id failed."""


class IntegrityError(ReportQAError):
    """Stored or transmitted data violates a structural invariant
    (dimension mismatch, malformed token spans, index mode mismatch)."""


class BackendError(ReportQAError):
    """A pluggable backend (embedder or reader) failed.

    ``component`` names the failing backend so service responses can
    attribute the outage.
    """

    def __init__(self, message: str, component: str = ""):
        super().__init__(message)
        self.component = component


class StorageError(ReportQAError):
    """Persistence failed; carries the doc_id being written when known."""

    def __init__(self, message: str, doc_id: str = ""):
        super().__init__(message)
        self.doc_id = doc_id
