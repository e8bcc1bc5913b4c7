"""Exception types shared across the package.

The CLI maps these onto its exit-code contract, so new error conditions
should reuse one of the classes below (or subclass it) rather than raising
bare exceptions.
"""


class HartreeSpectrumError(Exception):
    """Base class for all package-specific errors."""


class ConvergenceError(HartreeSpectrumError):
    """An iterative solver failed to reach its tolerance.

    Carries the last iterate and its residual so callers can inspect or
    restart from it.
    """

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class SingularJacobianError(ConvergenceError):
    """The Newton Jacobian is numerically singular at the current iterate."""


class EllipticityError(HartreeSpectrumError):
    """The linearization at the rest point is not a stable elliptic block.

    Raised when the stability matrix has eigenvalues with a real part
    beyond tolerance, or when a mode cannot be normalized because its
    symplectic signature is negative.
    """


class DegenerateModesError(HartreeSpectrumError):
    """Two mode frequencies coincide within the pairing tolerance."""


class PositivityError(HartreeSpectrumError):
    """The uncertainty matrix lost positive semidefiniteness during a run."""

    def __init__(self, message, time=None, margin=None):
        super().__init__(message)
        self.time = time
        self.margin = margin


class NormalizationError(HartreeSpectrumError):
    """An internally-real quantity came out complex beyond tolerance.

    This signals broken mode normalization or pairing, not bad user input.
    """


class ConfigError(HartreeSpectrumError):
    """The run configuration is missing, malformed, or inconsistent."""
