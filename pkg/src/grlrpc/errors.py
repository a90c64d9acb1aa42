"""Exception types shared across the package."""

from __future__ import annotations


class LrpcError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(LrpcError, ValueError):
    """Parameters violate a documented precondition."""


class NonUnitError(LrpcError, ArithmeticError):
    """Tried to invert an element of positive valuation."""


class NoSolution(LrpcError):
    """A linear system over a Galois ring is inconsistent."""


class ProfileTooLarge(ParameterError):
    """Requested rank profile does not fit the ambient dimensions."""


class SamplingError(LrpcError):
    """A rejection sampler exhausted its attempt budget."""


class ConstructionFailure(LrpcError):
    """Code construction did not succeed within the retry cap."""


class DecompositionFailure(LrpcError):
    """A parity-check entry does not lie in the span of the F-basis."""
