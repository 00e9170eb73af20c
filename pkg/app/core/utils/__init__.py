from .exceptions import (
    ConfigurationError,
    DataFormatError,
    DimensionMismatchError,
    DivergedTrainingError,
    EmptySelectionError,
    FreqFedError,
    InsufficientModelsError,
    NonFiniteInputError,
    RoundFailedError,
    SweepFailedError,
    ZeroNormFingerprintError,
)
from .seeding import derive_seed, make_rng

__all__ = [
    "FreqFedError",
    "ConfigurationError",
    "DataFormatError",
    "DimensionMismatchError",
    "DivergedTrainingError",
    "EmptySelectionError",
    "InsufficientModelsError",
    "NonFiniteInputError",
    "RoundFailedError",
    "SweepFailedError",
    "ZeroNormFingerprintError",
    "derive_seed",
    "make_rng",
]
