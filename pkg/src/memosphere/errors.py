"""Exception types shared across the package."""


class MemosphereError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(MemosphereError):
    """A run or experiment configuration is invalid or unsatisfiable."""


class ExperimentError(MemosphereError):
    """A multi-run experiment failed partway; see the partial manifest."""
