"""Dense real linear-algebra kernels used by every other module.

Matrices are plain 2-D float64 numpy arrays.  All operations are pure
functions; symmetric solvers average the input with its transpose before
factoring, since covariance estimates routinely carry roundoff asymmetry.
Ambient dimensions are small (a few hundred at most), so everything uses
dense LAPACK paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetryTooLargeError,
    CsvFormatError,
    NonSquareError,
    NotOrthonormalError,
    NotPdError,
    NotPsdError,
    NumericalFailureError,
)

# Default relative tolerance for numerical rank decisions, well below any
# modeled eigenvalue at double precision.
RANK_REL_TOL = 1e-10

_ASYM_REL_TOL = 1e-8
_ORTHO_TOL = 1e-8
_PSD_REL_TOL = 1e-10


@dataclass(frozen=True)
class SpectralDecomposition:
    """Symmetric eigendecomposition with eigenvalues sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns aligned with ``eigenvalues``

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


@dataclass(frozen=True)
class Svd:
    """Thin singular value decomposition A = left @ diag(s) @ right.T."""

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite 2-D float64 array."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if m.size and not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def sym_eig(a) -> SpectralDecomposition:
    """Eigendecompose a symmetric matrix, eigenvalues descending.

    The input is symmetrized as (A + A^T)/2 first; asymmetry beyond
    1e-8 relative to the largest entry is rejected.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise NonSquareError(f"matrix is {m.shape[0]}x{m.shape[1]}")
    scale = max(1.0, float(np.abs(m).max()) if m.size else 1.0)
    if m.size and float(np.abs(m - m.T).max()) > _ASYM_REL_TOL * scale:
        raise AsymmetryTooLargeError("input is not symmetric within tolerance")
    try:
        w, v = np.linalg.eigh(symmetrize(m))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(str(exc)) from exc
    return SpectralDecomposition(w[::-1].copy(), np.ascontiguousarray(v[:, ::-1]))


def svd(a) -> Svd:
    """Thin SVD with singular values descending (LAPACK order)."""
    m = as_matrix(a)
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(str(exc)) from exc
    return Svd(u, s, vh.T)


def rank_with_tol(values, rel_tol: float = RANK_REL_TOL) -> int:
    """Count entries strictly above rel_tol times the leading entry.

    ``values`` must be nonnegative and sorted descending; an empty or
    all-zero sequence has rank 0.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    v = np.asarray(values, dtype=float)
    if v.size == 0 or v[0] <= 0:
        return 0
    return int(np.count_nonzero(v > rel_tol * v[0]))


def orthonormal_complement(b) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of im(B).

    B must have orthonormal columns.  Returns an N x (N-k) matrix such
    that [B | result] is an orthonormal basis of R^N; k = N yields an
    N x 0 matrix.
    """
    m = as_matrix(b)
    n, k = m.shape
    if k > n:
        raise NotOrthonormalError("more columns than rows")
    if k == 0:
        return np.eye(n)
    gram = m.T @ m
    if float(np.abs(gram - np.eye(k)).max()) > _ORTHO_TOL:
        raise NotOrthonormalError("columns are not orthonormal within 1e-8")
    if k == n:
        return np.zeros((n, 0))
    q, _ = np.linalg.qr(m, mode="complete")
    return np.ascontiguousarray(q[:, k:])


def _psd_eigenvalues(a) -> np.ndarray:
    """Descending eigenvalues of a symmetric PSD matrix, clamped at zero."""
    w = sym_eig(a).eigenvalues
    if w.size == 0:
        return w
    if w[-1] < -_PSD_REL_TOL * max(float(w[0]), 0.0):
        raise NotPsdError(f"eigenvalue {w[-1]:.3e} below PSD tolerance")
    return np.maximum(w, 0.0)


def pdet(a, rel_tol: float = RANK_REL_TOL) -> float:
    """Pseudo-determinant: product of eigenvalues above rel_tol * lambda_max.

    The all-zero matrix maps to 1 (empty product), which keeps downstream
    expansion constants well-defined on degenerate inputs.
    """
    w = _psd_eigenvalues(a)
    r = rank_with_tol(w, rel_tol)
    if r == 0:
        return 1.0
    return float(np.prod(w[:r]))


def logdet_pd(a) -> float:
    """Log-determinant of a symmetric positive definite matrix."""
    w = sym_eig(a).eigenvalues
    if w.size == 0:
        return 0.0
    if w[-1] <= 0:
        raise NotPdError(f"smallest eigenvalue {w[-1]:.3e} is not positive")
    return float(np.sum(np.log(w)))


def is_pd(a, abs_tol: float | None = None) -> bool:
    """True iff the smallest eigenvalue exceeds abs_tol.

    Default tolerance is 1e-12 * max(1, lambda_max); inputs are
    symmetrized silently.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise NonSquareError(f"matrix is {m.shape[0]}x{m.shape[1]}")
    if m.shape[0] == 0:
        return True
    w = np.linalg.eigvalsh(symmetrize(m))
    if abs_tol is None:
        abs_tol = 1e-12 * max(1.0, float(w[-1]))
    return bool(w[0] > abs_tol)


def min_eig_sym(a) -> float:
    """Smallest eigenvalue of the symmetrized input."""
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise NonSquareError(f"matrix is {m.shape[0]}x{m.shape[1]}")
    if m.shape[0] == 0:
        raise ValueError("empty matrix has no eigenvalues")
    try:
        w = np.linalg.eigvalsh(symmetrize(m))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(str(exc)) from exc
    return float(w[0])


def read_matrix_csv(path) -> np.ndarray:
    """Read a matrix from headerless comma-separated text, one row per line."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise CsvFormatError(f"{path}: no rows")
    rows = []
    width = None
    for ln in lines:
        fields = ln.split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise CsvFormatError(f"{path}: ragged row with {len(fields)} fields, expected {width}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise CsvFormatError(f"{path}: {exc}") from exc
    return as_matrix(rows)


def write_matrix_csv(path, a) -> None:
    m = as_matrix(a)
    with open(path, "w", encoding="utf-8") as fh:
        for row in m:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")
