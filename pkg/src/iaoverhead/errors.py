"""Exception types raised by the alignment and CSI-acquisition routines."""


class InfeasibleConfigError(ValueError):
    """Network configuration cannot support the requested alignment."""


class NonConvergenceError(RuntimeError):
    """Iterative solver hit its iteration cap above the leakage tolerance.

    Carries the best solution found so far in ``solution`` (may be None).
    """

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class RankDeficiencyError(ValueError):
    """Interference occupies the full receive space; zero-forcing impossible."""


class PilotLengthError(ValueError):
    """Training/feedback interval too short for orthogonal pilots."""
