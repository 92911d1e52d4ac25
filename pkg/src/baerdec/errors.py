"""Exception hierarchy; the CLI maps these onto its exit codes."""


class BaerdecError(Exception):
    """Base class for all errors raised by this package."""


class InputError(BaerdecError):
    """Invalid input: malformed matrices, dimension mismatches, bad arguments,
    violated preconditions."""


class MatrixFileError(InputError):
    """Malformed matrix file; carries the offending line and column (1-based)."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class FixtureError(InputError):
    """A generator's construction-time audit rejected the supplied blocks."""


class InternalConsistencyError(BaerdecError):
    """A mathematically guaranteed identity failed numerically.

    Usually indicates a rank misdecision; the engine retries once with a
    tightened rank cutoff before letting this surface.
    """


class NumericalInstabilityError(InternalConsistencyError):
    """Subspace iteration failed to stabilize; carries the dimension trace."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)
