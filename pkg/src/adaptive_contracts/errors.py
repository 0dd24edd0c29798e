"""Exception types shared across solvers and the command line."""


class AdaptiveContractError(Exception):
    """Base class for package errors."""


class EnumerationTooLarge(AdaptiveContractError):
    """An exhaustive enumeration would exceed its configured guard."""


class SearchGuardExceeded(AdaptiveContractError):
    """A randomized-policy search was asked for too many signals."""


class PreconditionViolated(AdaptiveContractError):
    """The instance lacks a structural property the algorithm requires."""


class InfeasibleTarget(AdaptiveContractError):
    """No contract in the searched family makes the target a best response."""
