"""Exception hierarchy shared across the package."""


class RfirError(Exception):
    """Base class for all errors raised by this package."""


# --- embedding store ---------------------------------------------------------

class BadMagic(RfirError):
    """File does not start with the expected magic bytes."""


class DimMismatch(RfirError):
    """Declared shape disagrees with the payload, or a vector has wrong dim."""


class ZeroVector(RfirError):
    """A vector has (near-)zero norm; cosine similarity is undefined for it."""

    def __init__(self, row_ids):
        self.row_ids = list(row_ids)
        super().__init__(f"zero-norm vectors at rows: {self.row_ids}")


class DuplicateId(RfirError):
    """The same item id appears more than once."""


class MissingField(RfirError):
    """A manifest record lacks a required field or violates a field invariant."""


class PairingError(RfirError):
    """A feature store and a corpus do not describe the same item set."""


# --- retrieval engine --------------------------------------------------------

class EmptyStore(RfirError):
    """Retrieval requested against an empty feature store."""


class EmptyFeedback(RfirError):
    """A preference classifier needs at least one feedback entry."""


# --- harness -----------------------------------------------------------------

class EmptyAfterFilter(RfirError):
    """Corpus filtering removed every item."""


class StratumTooSmall(RfirError):
    """A stratum is too small to split at the required ratio."""


class SeparationInfeasible(RfirError):
    """Could not place class means with the requested pairwise separation."""


# --- metrics -----------------------------------------------------------------

class UndefinedForZeroR(RfirError):
    """MAP@R is undefined when the test database holds no positives."""


class DegenerateVariance(RfirError):
    """Correlation undefined because one coordinate is constant."""
