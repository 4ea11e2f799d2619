"""Exception types shared across the package."""


class SubspaceMismatchError(Exception):
    """Base class for every error raised by this package."""


class NonSquareError(SubspaceMismatchError):
    """A square matrix was required."""


class AsymmetryTooLargeError(SubspaceMismatchError):
    """Input is too far from symmetric to be safely symmetrized."""


class NumericalFailureError(SubspaceMismatchError):
    """A dense factorization failed to converge."""


class NotOrthonormalError(SubspaceMismatchError):
    """Columns were expected to be orthonormal."""


class NotPsdError(SubspaceMismatchError):
    """Matrix has an eigenvalue below the PSD tolerance."""


class NotPdError(SubspaceMismatchError):
    """Matrix is not positive definite."""


class CsvFormatError(SubspaceMismatchError):
    """Malformed matrix or dataset CSV."""


class AmbientMismatchError(SubspaceMismatchError):
    """Subspaces live in different ambient dimensions."""


class TrivialSubspaceError(SubspaceMismatchError):
    """Operation requires a nontrivial subspace."""


class NotContainedError(SubspaceMismatchError):
    """Claimed subspace containment does not hold."""


class RankTooLargeError(SubspaceMismatchError):
    """Requested rank exceeds what the data or ambient dimension supports."""


class EmptySampleSetError(SubspaceMismatchError):
    """Estimation was asked to run on zero samples."""


class DimensionMismatchError(SubspaceMismatchError):
    """Vector length does not match the model's ambient dimension."""


class NonpositiveNoiseError(SubspaceMismatchError):
    """Noise variance must be strictly positive."""


class DegenerateMismatchedRankError(SubspaceMismatchError):
    """Admissible tilting range is undefined for a rank-0 mismatched model."""


class SigmaNotPdError(SubspaceMismatchError):
    """Pairwise tilt matrix is not positive definite; take the trivial bound."""


class ConditionsFailError(SubspaceMismatchError):
    """Low-noise expansion requested for a pair that fails its premises."""


class KernelDetNonpositiveError(SubspaceMismatchError):
    """Compressed determinant came out nonpositive; numerically degenerate."""


class NotOrthogonalError(SubspaceMismatchError):
    """Matrix was expected to be orthogonal."""


class DegenerateOverlapError(SubspaceMismatchError):
    """Rotated mismatched subspaces are fully orthogonal to the signal."""


class InsufficientPointsError(SubspaceMismatchError):
    """Not enough usable grid points for a fit."""


class InsufficientSamplesError(SubspaceMismatchError):
    """Dataset cannot support the requested split or rank."""


class DiagonalityViolatedError(SubspaceMismatchError):
    """Diagonal-model check called on non-diagonal covariances."""
