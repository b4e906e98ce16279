"""Exception hierarchy. Every error the package raises derives from MscError."""


class MscError(Exception):
    pass


class DimensionError(MscError, ValueError):
    pass


class SingularMatrixError(MscError, ArithmeticError):
    pass


class ConvergenceError(MscError, ArithmeticError):
    """An iterative solver ran out of its iteration budget."""


class GraphError(MscError, ValueError):
    pass


class DisconnectedGraph(GraphError):
    pass


class Indefinite(MscError, ValueError):
    """A scaling matrix is neither positive nor negative definite."""


class LemmaViolation(MscError):
    """The spectrum of the scaled Laplacian contradicts the expected structure.

    Seeing this means either a bug or an invalid scaling set (e.g. a wrong sign).
    """


class UnstableGain(MscError, ValueError):
    pass


class StepTooLarge(MscError, ValueError):
    pass


class NonFinite(MscError, ArithmeticError):
    pass


class ConsistencyError(MscError):
    """Agent-local and matrix-form evaluations of the dynamics disagree."""


class ScenarioError(MscError, ValueError):
    """A scenario file failed validation; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
