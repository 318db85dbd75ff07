"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameter value or malformed experiment configuration."""


class SingularDesignError(RuntimeError):
    """Kernel matrix factorization failed even after jitter escalation."""


class InfiniteMomentError(ConfigurationError):
    """Noise model has no finite second moment, so norm-growth bounds are vacuous."""


class SingularGramWarning(UserWarning):
    """Gram matrix is (near-)singular, e.g. duplicate points with zero jitter."""
