"""
Exception hierarchy for seRNN Lab.

Input problems subclass ValueError so callers that only know about the
standard library still catch them.
"""


class LabError(Exception):
    """Base class for all lab errors."""


class InvalidInputError(LabError, ValueError):
    """Bad shapes, non-finite values, or out-of-range arguments."""


class DegenerateVarianceError(InvalidInputError):
    """A correlation was requested on a constant series."""


class UndefinedEntropyError(InvalidInputError):
    """Entropy of an all-zero distribution."""


class ConvergenceError(LabError):
    """An iterative solver ran out of its iteration budget."""


class DivergenceError(LabError):
    """Training produced non-finite activations, losses or gradients."""


class CheckpointError(LabError):
    """A checkpoint bundle is missing, corrupt, or inconsistent."""


class EmptySelectionError(LabError):
    """Filtering left nothing to aggregate."""


class CalibrationError(LabError):
    """No probed regularisation strength produced passing networks."""
