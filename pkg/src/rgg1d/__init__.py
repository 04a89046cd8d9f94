"""One-dimensional exponential random geometric graphs: exact connectivity,
component and redundancy distributions, limits, and Monte Carlo checks."""

__version__ = "0.1.0"

from .core import ConsistencyError, ModelParams, ParameterError, Variant, validate_params  # noqa: E402

__all__ = ["ConsistencyError", "ModelParams", "ParameterError", "Variant", "validate_params", "__version__"]
