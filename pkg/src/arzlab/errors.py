"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the region where a quantity is defined."""


class ConfigurationError(ValueError):
    """Inconsistent or incomplete parameters."""


class SubcharacteristicError(ConfigurationError):
    """The base state violates the sub-characteristic condition."""


class PreconditionError(ValueError):
    """A hypothesis required by a check is not met."""


class UnsupportedOrderError(ValueError):
    """A derivative order outside the supported range was requested."""


class MapInvalidError(RuntimeError):
    """The straightening map is not a near-identity diffeomorphism."""


class InversionError(RuntimeError):
    """Newton inversion of the straightening map did not converge."""


class FitError(ValueError):
    """Not enough usable samples to fit a decay rate."""


class ResolutionWarning(UserWarning):
    """Input data is under-resolved on the requested grid."""


class StabilityWarning(UserWarning):
    """A time step was reduced to satisfy a CFL bound."""
