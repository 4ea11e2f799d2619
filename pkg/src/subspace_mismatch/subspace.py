"""Subspace geometry: principal angles, correlation distances, intersections
and relative complements.

A classification problem with mismatched models hinges on how the true
signal subspace of each class sits relative to the mismatched subspaces of
its own class and of the rival classes.  Every derived subspace needed by
the bound machinery is produced here:

* the intersection of two mismatched class subspaces and the leftover
  "unique" parts of each class (``pair_decomposition``),
* the split of a true class subspace into the part orthogonal to the
  class's unique mismatched directions and its complement
  (``mismatch_geometry``).

The trivial subspace {0} is a first-class value (zero columns), not an
error, because degenerate overlaps legitimately occur.  Exact-arithmetic
subspace identities need a tolerance band in floating point: singular
values within ``cos_tol`` of 1 count as intersection directions, and
within ``cos_tol`` of 0 as kernel directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbientMismatchError,
    NotContainedError,
    NotOrthonormalError,
    TrivialSubspaceError,
)

#: Band around exact 0/1 cosines; separates cleanly from generic angles
#: at the dimensions this package targets.
INTERSECT_COS_TOL = 1e-9

_ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of R^N given by an orthonormal basis (N x k).

    k may be zero, representing the trivial subspace {0}.
    """

    basis: np.ndarray

    def __post_init__(self):
        b = np.ascontiguousarray(np.asarray(self.basis, dtype=float))
        if b.ndim != 2:
            raise ValueError("basis must be a 2-D array")
        n, k = b.shape
        if k > n:
            raise NotOrthonormalError(f"{k} columns cannot be orthonormal in R^{n}")
        if b.size and not np.all(np.isfinite(b)):
            raise ValueError("basis entries must be finite")
        if k:
            gram = b.T @ b
            if float(np.abs(gram - np.eye(k)).max()) > _ORTHO_TOL:
                raise NotOrthonormalError("basis columns are not orthonormal")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def is_trivial(self) -> bool:
        return self.dim == 0

    @classmethod
    def trivial(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0)))

    @classmethod
    def from_span(cls, columns, rel_tol: float = 1e-12) -> "Subspace":
        """Orthonormal basis of the column span, via rank-revealing SVD."""
        m = np.asarray(columns, dtype=float)
        if m.ndim != 2:
            raise ValueError("expected a 2-D array of spanning columns")
        if m.shape[1] == 0:
            return cls.trivial(m.shape[0])
        u, s, _ = np.linalg.svd(m, full_matrices=False)
        r = int(np.count_nonzero(s > rel_tol * s[0])) if s.size and s[0] > 0 else 0
        return cls(u[:, :r])

    def projector(self) -> np.ndarray:
        """The orthogonal projector B B^T (N x N)."""
        return self.basis @ self.basis.T


@dataclass(frozen=True)
class PrincipalAngles:
    """Canonical angles between two subspaces.

    ``cosines`` descend (singular values of Y^T Z clamped into [0, 1]);
    ``angles`` are the matching radians, ascending.
    """

    cosines: np.ndarray
    angles: np.ndarray


def _check_ambient(y: Subspace, z: Subspace) -> None:
    if y.ambient_dim != z.ambient_dim:
        raise AmbientMismatchError(
            f"ambient dimensions differ: {y.ambient_dim} vs {z.ambient_dim}"
        )


def principal_angles(y: Subspace, z: Subspace) -> PrincipalAngles:
    """Principal angles via the SVD of the basis cross-product."""
    _check_ambient(y, z)
    if y.is_trivial or z.is_trivial:
        raise TrivialSubspaceError("principal angles need nontrivial subspaces")
    s = np.linalg.svd(y.basis.T @ z.basis, compute_uv=False)
    cosines = np.clip(s, 0.0, 1.0)
    return PrincipalAngles(cosines, np.arccos(cosines))


def _principal_sines(y: Subspace, z: Subspace) -> np.ndarray:
    """Sines of the principal angles, descending.

    Computed from the SVD of the projection residual (I - P)B with the
    smaller-dimensional basis projected onto the larger span; unlike
    arccos of near-unit cosines this keeps full precision at tiny angles.
    """
    _check_ambient(y, z)
    if y.is_trivial or z.is_trivial:
        raise TrivialSubspaceError("correlation distances need nontrivial subspaces")
    small, big = (z, y) if z.dim <= y.dim else (y, z)
    resid = small.basis - big.basis @ (big.basis.T @ small.basis)
    s = np.linalg.svd(resid, compute_uv=False)
    return np.clip(s, 0.0, 1.0)


def d_max(y: Subspace, z: Subspace) -> float:
    """Max correlation distance: sine of the smallest principal angle."""
    return float(_principal_sines(y, z)[-1])


def d_min(y: Subspace, z: Subspace) -> float:
    """Min correlation distance: sine of the largest principal angle."""
    return float(_principal_sines(y, z)[0])


def intersect(y: Subspace, z: Subspace, cos_tol: float = INTERSECT_COS_TOL) -> Subspace:
    """Orthonormal basis of im(Y) intersected with im(Z).

    Directions are the left singular vectors of Y^T Z whose singular value
    is within ``cos_tol`` of 1, mapped back through Y.
    """
    _check_ambient(y, z)
    if y.is_trivial or z.is_trivial:
        return Subspace.trivial(y.ambient_dim)
    h, s, _ = np.linalg.svd(y.basis.T @ z.basis)
    m = int(np.count_nonzero(s >= 1.0 - cos_tol))
    return Subspace.from_span(y.basis @ h[:, :m])


def complement_within(y: Subspace, s: Subspace) -> Subspace:
    """Orthogonal complement of im(S) inside im(Y), for S contained in Y.

    The result has dimension dim(Y) - dim(S) exactly: containment pins the
    leading singular values of S^T Y at 1, so the trailing right singular
    vectors span the complement.
    """
    _check_ambient(y, s)
    if s.is_trivial:
        return y
    if s.dim > y.dim:
        raise NotContainedError("candidate subspace is larger than its container")
    resid = s.basis - y.basis @ (y.basis.T @ s.basis)
    if float(np.linalg.norm(resid, 2)) > 1e-8:
        raise NotContainedError("subspace does not lie inside the container")
    if s.dim == y.dim:
        return Subspace.trivial(y.ambient_dim)
    _, _, vh = np.linalg.svd(s.basis.T @ y.basis, full_matrices=True)
    g = vh[s.dim:, :].T  # dim(Y) - dim(S) trailing right singular vectors
    return Subspace.from_span(y.basis @ g)


def intersect_with_kernel(
    y: Subspace, t: Subspace, cos_tol: float = INTERSECT_COS_TOL
) -> Subspace:
    """Orthonormal basis of {x in im(Y) : T^T x = 0}.

    Uses the right singular vectors of T^T Y with singular value at most
    ``cos_tol``.  A trivial T imposes no constraint and returns Y.
    """
    _check_ambient(y, t)
    if y.is_trivial or t.is_trivial:
        return y
    _, s, vh = np.linalg.svd(t.basis.T @ y.basis, full_matrices=True)
    s_full = np.zeros(y.dim)
    s_full[: s.size] = s
    keep = s_full <= cos_tol
    if not np.any(keep):
        return Subspace.trivial(y.ambient_dim)
    return Subspace.from_span(y.basis @ vh[keep, :].T)


def pair_decomposition(
    u_i: Subspace, u_j: Subspace, cos_tol: float = INTERSECT_COS_TOL
) -> tuple[Subspace, Subspace, Subspace]:
    """Split im(U_i) + im(U_j) into (intersection, unique-to-i, unique-to-j).

    Dimension bookkeeping is exact: dim(U_i) = dim(cap) + dim(unique_i)
    and symmetrically for j.
    """
    _check_ambient(u_i, u_j)
    cap = intersect(u_i, u_j, cos_tol)
    unique_i = complement_within(u_i, cap)
    unique_j = complement_within(u_j, cap)
    return cap, unique_i, unique_j


def mismatch_geometry(
    u_true: Subspace, unique_mis: Subspace, cos_tol: float = INTERSECT_COS_TOL
) -> tuple[Subspace, Subspace]:
    """Split a true class subspace against its unique mismatched directions.

    Returns (W, V): W is the part of im(u_true) orthogonal to
    im(unique_mis); V is the complement of W inside im(u_true), the part
    that keeps a foothold on the class's own unique mismatched directions.
    """
    w = intersect_with_kernel(u_true, unique_mis, cos_tol)
    v = complement_within(u_true, w)
    return w, v
