"""Low-rank parity-check codes over Galois rings."""

from .errors import (
    ConstructionFailure,
    DecompositionFailure,
    LrpcError,
    NonUnitError,
    NoSolution,
    ParameterError,
    ProfileTooLarge,
    SamplingError,
)
from .rings import GaloisRing, ext_to_matrix, make_ring, make_rng, make_tower, matrix_to_ext

__version__ = "0.1.0"
