"""Exception hierarchy.

Every domain error carries a stable ``name`` used by the CLI for one-line
diagnostics.
"""


class MixturaError(Exception):
    name = "MixturaError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.name)


class InvariantViolation(MixturaError):
    name = "InvariantViolation"


class NotHermitian(InvariantViolation):
    name = "NotHermitian"


class NotNormalized(InvariantViolation):
    name = "NotNormalized"


class WeightsNotNormalized(InvariantViolation):
    name = "WeightsNotNormalized"


class DuplicateKet(InvariantViolation):
    name = "DuplicateKet"


class DimensionMismatch(MixturaError):
    name = "DimensionMismatch"


class MarginalsDiffer(MixturaError):
    name = "MarginalsDiffer"


class NotADecomposition(MixturaError):
    name = "NotADecomposition"


class AncillaTooSmall(MixturaError):
    name = "AncillaTooSmall"


class ZeroVector(MixturaError):
    name = "ZeroVector"


class DegenerateWeights(MixturaError):
    name = "DegenerateWeights"


class MarginalMismatch(MixturaError):
    name = "MarginalMismatch"


class StateFileSyntaxError(MixturaError):
    """Malformed state file; ``line`` and ``column`` are 1-based."""

    name = "SyntaxError"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")
