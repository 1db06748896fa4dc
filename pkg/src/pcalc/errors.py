"""Exception hierarchy shared by every pcalc module."""

from __future__ import annotations


class PcalcError(Exception):
    """Base class; ``witness`` carries a machine-readable counterexample."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class InputError(PcalcError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class InvalidPoset(InputError):
    pass


class MissingCoverMap(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class CommutativityViolation(InputError):
    pass


class NaturalityViolation(InputError):
    pass


class NotComparable(InputError):
    pass


class NotAnInterval(InputError):
    pass


class NotAPairwiseCover(InputError):
    pass


class PreconditionFailed(PcalcError):
    """A mathematical hypothesis of an operation does not hold (exit code 3)."""


class NoSplitting(PreconditionFailed):
    pass


class NotDistributive(PreconditionFailed):
    pass


class CostCapExceeded(PreconditionFailed):
    pass


class PosetUnsupported(PcalcError):
    """The index poset is outside the class an operation handles (exit code 4)."""


class Inconsistent(PcalcError):
    """A linear system ``A X = B`` has no solution.

    ``certificate`` is a row vector ``y`` with ``y A = 0`` and ``y B != 0``.
    """

    def __init__(self, certificate):
        super().__init__("linear system is inconsistent", witness=certificate)
        self.certificate = certificate


class NotFree(PcalcError):
    pass


class NotCofree(PcalcError):
    pass


class InternalCheckFailed(PcalcError):
    """Two independent computations that must agree did not."""
