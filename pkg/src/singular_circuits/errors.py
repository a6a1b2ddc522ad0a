"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable ``code`` used by the CLI when it
writes the error record into a run summary.
"""


class CircuitError(Exception):
    code = "error"


class DegenerateInputError(CircuitError, ValueError):
    code = "degenerate-input"


class InconsistentCrossingsError(CircuitError, ValueError):
    code = "inconsistent-crossings"


class NoAsymptoticInductanceError(CircuitError, ValueError):
    code = "no-asymptotic-inductance"


class GridMismatchError(CircuitError, ValueError):
    code = "grid-mismatch"


class ModelDomainError(CircuitError, ValueError):
    code = "model-domain"


class AmbiguousBranchError(CircuitError, ValueError):
    code = "ambiguous-branch"


class DegenerateLoopError(CircuitError, ValueError):
    code = "degenerate-loop"


class NoSolutionError(CircuitError):
    code = "no-solution"


class MultipleSolutionsError(CircuitError):
    code = "multiple-solutions"

    def __init__(self, message, brackets=()):
        super().__init__(message)
        self.brackets = list(brackets)


class AssumptionViolatedError(CircuitError):
    code = "assumption-violated"


class ConvergenceError(CircuitError):
    code = "no-convergence"


class CrossingCountMismatchError(CircuitError):
    code = "crossing-count-mismatch"


class TransientNotSettledError(CircuitError):
    code = "transient-not-settled"


class ResonanceError(CircuitError, ZeroDivisionError):
    code = "resonance"


class StepTooLargeError(CircuitError):
    code = "step-too-large"


class ZenoError(CircuitError):
    code = "zeno"


class DivergenceError(CircuitError):
    code = "divergence"


class ConfigError(CircuitError, ValueError):
    code = "config"
