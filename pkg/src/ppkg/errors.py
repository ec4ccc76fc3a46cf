"""Exception types shared across the toolkit."""


class PpkgError(Exception):
    """Base class for all toolkit errors."""


class MalformedXml(PpkgError):
    """Input bytes are not parseable GraphML/XML."""


class DuplicateNodeId(PpkgError):
    """A node id appears more than once in one GraphML document."""


class DanglingEdge(PpkgError):
    """An edge references a node id that was never declared."""


class EmptyGraph(PpkgError):
    """Operation requires at least one node."""


class MissingNode(PpkgError):
    """A requested node id is absent from a position mapping."""


class RaggedDimensions(PpkgError):
    """Position vectors do not share a single dimensionality."""


class DegenerateInput(PpkgError):
    """Too little data for the requested decomposition."""


class TooFewPoints(PpkgError):
    """Fewer points than the method requires."""


class EmptyVocabulary(PpkgError):
    """No tokens survive tokenization across the whole corpus."""


class LengthMismatch(PpkgError):
    """Two label sequences differ in length."""


class DuplicateCell(PpkgError):
    """The same (clustering, reduction) cell was reported twice."""


class UndefinedMetric(PpkgError):
    """Validity metric not applicable (fewer than 2 clusters or 3 points).

    Signals "not applicable" rather than failure; report builders catch it
    and render the cell as undefined.
    """


class NoValidInputs(PpkgError):
    """A corpus run found no parseable input file."""


class InvalidConfig(PpkgError):
    """A run configuration field failed validation; names the field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class BindFailure(PpkgError):
    """The HTTP service could not bind its address."""
