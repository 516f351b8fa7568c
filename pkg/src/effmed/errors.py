"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: configuration problems -> 2,
domain errors (contrast outside the analyticity region, ellipticity
violations, poles) -> 3, numerical-consistency failures -> 4.
"""


class EffmedError(Exception):
    """Base class for all package errors."""


class ConfigurationError(EffmedError):
    """Invalid parameters, malformed config files, incompatible shapes."""


class DomainError(EffmedError):
    """Inputs outside the mathematical domain of an evaluation path."""


class AnalyticityError(DomainError):
    """Contrast ratio h = sigma1/sigma2 on the negative real axis (or 0)."""


class PoleProximityError(DomainError):
    """Spectral variable too close to the spectral interval [0, 1]."""


class ConsistencyError(EffmedError):
    """Two supposedly equivalent computations disagree beyond tolerance."""


class SpectrumError(ConsistencyError):
    """Eigenvalues escaped [0, 1] by more than the clamping tolerance."""


class SolverError(EffmedError):
    """Linear solver failed or produced an unacceptable residual."""


class DegenerateProjectionError(DomainError):
    """The projected source field vanishes identically; measure undefined."""
