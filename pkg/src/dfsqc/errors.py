"""Exception hierarchy for dfsqc."""


class DfsqcError(Exception):
    """Base class for all dfsqc errors."""


class DimensionError(DfsqcError, ValueError):
    """Operands have incompatible dimensions, or a tensor product would
    exceed the configured dimension cap."""


class ValidationError(DfsqcError, ValueError):
    """A matrix or vector violates a numerical contract (non-Hermitian
    input, non-normalized state, negative probabilities, ...)."""


class LayoutError(DfsqcError, ValueError):
    """A gate targets ions or logical qubits that the register layout
    does not support (for example a phase gate on non-adjacent pairs)."""


class EmptySubspaceError(DfsqcError, ValueError):
    """The state has (numerically) no weight inside the protected
    subspace, so the renormalized logical state is undefined.

    The measured subspace weight is still available as ``permanence``.
    """

    def __init__(self, message: str, permanence: float = 0.0):
        super().__init__(message)
        self.permanence = permanence


class TruncationError(DfsqcError, RuntimeError):
    """Population reached the top of the truncated oscillator basis,
    invalidating the simulation."""


class ClosureError(DfsqcError, RuntimeError):
    """Residual spin-motion entanglement at the requested time is too
    large to read off a spin-only gate."""


class CoverageError(DfsqcError, ValueError):
    """A tomography dataset does not contain the complete measurement
    setting set required for reconstruction."""


class ConditioningError(DfsqcError, RuntimeError):
    """A reconstruction linear system is numerically singular."""


class ConfigError(DfsqcError, ValueError):
    """An experiment configuration failed schema validation."""
