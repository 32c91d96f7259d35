"""Exception hierarchy.

Two families map onto CLI exit codes: :class:`DomainProblem` (bad inputs or
parameters outside an operation's domain, exit code 2) and
:class:`NumericalFailure` (a computation that could not be completed, exit
code 3).
"""

from __future__ import annotations


class DystroError(Exception):
    exit_code = 1


class DomainProblem(DystroError, ValueError):
    exit_code = 2


class NumericalFailure(DystroError, ArithmeticError):
    exit_code = 3


class InvalidParameter(DomainProblem):
    pass


class DomainError(DomainProblem):
    """A state or argument lies outside the admissible set."""


class ThresholdDegenerate(DomainProblem):
    """Theta vanishes to within tolerance; the regime is not decidable."""


class NoInvasion(DomainProblem):
    """The healthy state is stable (Theta >= 0); no invasion front exists."""


class OutOfBranch(DomainProblem):
    """gamma is outside (0, gamma_cutoff) where the positive speed branch lives."""


class NotAttained(NumericalFailure):
    """The infimum of the speed branch sits at an end of the interval."""


class StiffnessError(NumericalFailure):
    pass


class StepTooLarge(NumericalFailure):
    pass


class SimulationDiverged(NumericalFailure):
    def __init__(self, message: str, time: float | None = None, field=None):
        super().__init__(message)
        self.time = time
        self.field = field


class NoFront(NumericalFailure):
    pass


class InsufficientData(NumericalFailure):
    pass


class MultiFrontWarning(UserWarning):
    """More than one downward crossing was found; the rightmost was used."""
