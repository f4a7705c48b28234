"""Exception types shared across the package."""

from __future__ import annotations


class Kappa3Error(Exception):
    """Base class for every error raised by this package."""


class EmptyGraph(Kappa3Error):
    pass


class BadVertex(Kappa3Error):
    pass


class TooSmall(Kappa3Error):
    pass


class BadGraph(Kappa3Error):
    """Raised for loops, duplicate edges or malformed edge-list input."""


class BadProbability(Kappa3Error):
    pass


class TooManyEdges(Kappa3Error):
    pass


class OutOfDomain(Kappa3Error):
    """An asymptotic formula was evaluated where it is undefined."""


class OracleTooLarge(Kappa3Error):
    pass


class CapExceeded(Kappa3Error):
    """A desk-scale size cap refused the request."""


class NoCrossing(Kappa3Error):
    pass


class InfeasibleSpec(Kappa3Error):
    """A sweep requested a property that cannot be computed at that size."""


class PackerFailure(Kappa3Error):
    """The constructive packer could not finish.

    ``stage`` is one of classification, growth, pairing, assembly,
    reduction; ``detail`` carries stage specific diagnostics and
    ``achieved`` the number of trees built before giving up.
    """

    def __init__(self, stage: str, message: str, achieved: int = 0, **detail):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.achieved = achieved
        self.detail = detail
