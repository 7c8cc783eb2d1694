"""Exception hierarchy.

Every rejection raised by the library derives from :class:`LocalizeError`,
which is itself a ``ValueError`` so plain ``except ValueError`` keeps working.
"""

from __future__ import annotations


class LocalizeError(ValueError):
    """Base class for input rejections and failed consistency checks."""


class OrderingViolation(LocalizeError):
    pass


class DegenerateSpectrum(LocalizeError):
    pass


class NonPositiveRho(LocalizeError):
    pass


class KindMismatch(LocalizeError):
    pass


class OutOfChart(LocalizeError):
    pass


class StepTooLarge(LocalizeError):
    pass


class DivergentRegime(LocalizeError):
    """The geometric trace does not converge absolutely for this T."""


class SingularPhi(LocalizeError):
    pass


class BudgetExhausted(LocalizeError):
    pass


class TailDominates(LocalizeError):
    pass


class WeightOverflow(LocalizeError):
    """Importance weights have infinite variance under the unit-rate proposal."""


class InsufficientNodes(LocalizeError):
    pass


class ConsistencyError(LocalizeError):
    """Two routes to the same exact quantity disagree beyond rounding."""
