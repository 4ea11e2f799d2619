"""Chernoff-style upper bound on the mismatched classifier's error.

For each ordered class pair (i, j) a tilting parameter alpha > 0 turns the
pairwise misclassification probability into a Gaussian integral that
converges exactly when

    S_ij = (Cov_i + s I)^{-1} + alpha (MisCov_j + s I)^{-1}
                              - alpha (MisCov_i + s I)^{-1}        (s = sigma2)

is positive definite, in which case

    log Pbar(e_ij) = alpha (log mp_j - log mp_i)
                   + (alpha/2) (logdet(MisCov_i + s I) - logdet(MisCov_j + s I))
                   - 1/2 logdet(Cov_i + s I) - 1/2 logdet(S_ij).

The overall bound is the prior-weighted union sum, clamped at 1; if any
pair's S_ij fails positive definiteness the trivial bound 1 is reported.

S_ij splits as L_ij + (1/s) K_ij where L collects the finite parts of the
factored inverses and K the kernel projectors; K_ij also has a projector
form K_i + alpha (Pu_ij - Pu_ji) built from the unique-direction
projectors of the pair geometry.  Both routes are exposed so they can
cross-check each other.

The admissible tilting range (0, alpha0) depends on whether the true class
subspace keeps a foothold on its own unique mismatched directions
(s_v > 0, with the dominance margin c0) or not (s_v = 0):

    s_v > 0: alpha0 = min(lam_min_mis / (lam_max_true + 1),
                          c0 / (1 + c0 (1 + 1/lam_min_mis)), 1)
    s_v = 0: alpha0 = min(lam_min_mis / (lam_max_true + 1),
                          lam_min_mis / (lam_min_mis + 1), 1)

and guarantees S_ij > 0 for all s in (0, min(1, lam_min_mis (1-alpha)/alpha)).
All determinants are handled as log-dets; raw determinant ratios underflow
at the noise levels of interest.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import numlin, subspace as sub
from .errors import (
    DegenerateMismatchedRankError,
    NonpositiveNoiseError,
    SigmaNotPdError,
)
from .model import ClassModel, ProblemInstance

#: Spectral-norm slack for the orthogonality condition on W_ij.
NEC_TOL = 1e-7

#: Positive-definiteness margin for the dominance matrix / angle gaps.
COND_MARGIN = 1e-10


@dataclass(frozen=True)
class AlphaPolicy:
    """How to pick the tilting parameter inside (0, alpha0).

    Equal mismatched ranks: alpha = fraction * alpha0.  Unequal ranks:
    alpha = fraction * min(alpha0, 1 / (2 |gap|)), which also keeps alpha
    inside (0, 1/|gap|) so the decay exponent's sign is rank-driven.
    Pairs with an undefined alpha0 fall back to a tiny fixed alpha so
    sweeps can still display the resulting floor.
    """

    fraction: float = 0.5
    fallback: float = 1e-3

    def __post_init__(self):
        if not (0.0 < self.fraction < 1.0):
            raise ValueError("fraction must lie in (0, 1)")
        if self.fallback <= 0:
            raise ValueError("fallback must be positive")

    def choose(self, alpha0: float | None, rank_mis_i: int, rank_mis_j: int) -> float:
        if alpha0 is None or alpha0 <= 0:
            return self.fallback
        gap = abs(rank_mis_j - rank_mis_i)
        if gap == 0:
            return self.fraction * alpha0
        return self.fraction * min(alpha0, 1.0 / (2.0 * gap))


DEFAULT_ALPHA_POLICY = AlphaPolicy()


@dataclass(frozen=True)
class PairGeometry:
    """Everything the bound needs about one ordered class pair (i, j)."""

    i: int
    j: int
    u_true_i: sub.Subspace
    u_mis_i: sub.Subspace
    u_mis_j: sub.Subspace
    cap: sub.Subspace        # intersection of the two mismatched subspaces
    unique_i: sub.Subspace   # mismatched directions only class i has
    unique_j: sub.Subspace   # mismatched directions only class j has
    w: sub.Subspace          # part of the true class-i subspace orthogonal to unique_i
    v: sub.Subspace          # complement of w inside the true class-i subspace
    c0: float | None         # min eigenvalue of the dominance matrix (s_v > 0 only)
    nec_norm: float          # spectral overlap of w with unique_j
    alpha0: float | None     # admissible tilting supremum; None when undefined
    alpha: float             # tilting value actually used

    @property
    def s_w(self) -> int:
        return self.w.dim

    @property
    def s_v(self) -> int:
        return self.v.dim

    @property
    def r_cap(self) -> int:
        return self.cap.dim

    @property
    def r_unique_i(self) -> int:
        return self.unique_i.dim

    @property
    def r_unique_j(self) -> int:
        return self.unique_j.dim

    @property
    def nec_holds(self) -> bool:
        return self.nec_norm <= NEC_TOL

    @property
    def suff_holds(self) -> bool:
        return self.s_v == 0 or (self.c0 is not None and self.c0 > COND_MARGIN)

    @property
    def conditions_hold(self) -> bool:
        return self.nec_holds and self.suff_holds


def alpha_max(geom: PairGeometry, lambda_max_true: float, lambda_min_mis: float) -> float:
    """Supremum of the admissible tilting range for one pair.

    ``lambda_max_true`` is the largest true eigenvalue of class i and
    ``lambda_min_mis`` the smallest mismatched one.  For s_v > 0 the
    dominance margin c0 must be available on the geometry.
    """
    if lambda_min_mis is None or lambda_min_mis <= 0:
        raise DegenerateMismatchedRankError(
            "mismatched model of the source class has no positive eigenvalue"
        )
    first = lambda_min_mis / (lambda_max_true + 1.0)
    if geom.s_v > 0:
        c0 = geom.c0 if geom.c0 is not None else 0.0
        second = c0 / (1.0 + c0 * (1.0 + 1.0 / lambda_min_mis))
    else:
        second = lambda_min_mis / (lambda_min_mis + 1.0)
    return float(min(first, second, 1.0))


def pair_geometry(
    instance: ProblemInstance,
    i: int,
    j: int,
    policy: AlphaPolicy | None = None,
    cos_tol: float = sub.INTERSECT_COS_TOL,
) -> PairGeometry:
    """Compute the full geometric decomposition for ordered pair (i, j)."""
    if i == j:
        raise ValueError("pair indices must differ")
    policy = policy or DEFAULT_ALPHA_POLICY
    true_i = instance.true_models[i]
    mis_i = instance.mismatched_models[i]
    mis_j = instance.mismatched_models[j]

    cap, unique_i, unique_j = sub.pair_decomposition(
        mis_i.eig_basis, mis_j.eig_basis, cos_tol
    )
    w, v = sub.mismatch_geometry(true_i.eig_basis, unique_i, cos_tol)

    if v.dim > 0:
        a = unique_i.basis.T @ v.basis
        b = unique_j.basis.T @ v.basis
        c0 = numlin.min_eig_sym(a.T @ a - b.T @ b)
    else:
        c0 = None

    if w.dim == 0 or unique_j.dim == 0:
        nec_norm = 0.0
    else:
        nec_norm = float(np.linalg.norm(unique_j.basis.T @ w.basis, 2))

    geom = PairGeometry(
        i=i,
        j=j,
        u_true_i=true_i.eig_basis,
        u_mis_i=mis_i.eig_basis,
        u_mis_j=mis_j.eig_basis,
        cap=cap,
        unique_i=unique_i,
        unique_j=unique_j,
        w=w,
        v=v,
        c0=c0,
        nec_norm=nec_norm,
        alpha0=None,
        alpha=policy.fallback,
    )
    alpha0 = None
    if geom.conditions_hold and mis_i.rank >= 1:
        alpha0 = alpha_max(
            geom,
            float(true_i.eig_values[0]) if true_i.rank else 0.0,
            float(mis_i.eig_values[-1]),
        )
        if alpha0 <= 0:
            alpha0 = None
    alpha = policy.choose(alpha0, mis_i.rank, mis_j.rank)
    return replace(geom, alpha0=alpha0, alpha=alpha)


def all_pair_geometries(
    instance: ProblemInstance,
    policy: AlphaPolicy | None = None,
    cos_tol: float = sub.INTERSECT_COS_TOL,
) -> dict[tuple[int, int], PairGeometry]:
    return {
        (i, j): pair_geometry(instance, i, j, policy, cos_tol)
        for (i, j) in instance.ordered_pairs()
    }


# ---------------------------------------------------------------------------
# Matrix constructions

def _inverse_factored(model: ClassModel, sigma2: float) -> np.ndarray:
    """(Cov + sigma2 I)^{-1} assembled from the truncated eigen-factors."""
    n = model.ambient_dim
    out = np.eye(n) / sigma2
    if model.rank:
        v = model.eig_basis.basis
        diff = 1.0 / (model.eig_values + sigma2) - 1.0 / sigma2
        out += (v * diff) @ v.T
    return out


def _l_factor(model: ClassModel, sigma2: float | None) -> np.ndarray:
    """Finite part U diag(1/(lam + sigma2)) U^T; sigma2=None gives the limit."""
    n = model.ambient_dim
    if model.rank == 0:
        return np.zeros((n, n))
    v = model.eig_basis.basis
    lam = model.eig_values if sigma2 is None else model.eig_values + sigma2
    return (v / lam) @ v.T


def sigma_ij(
    instance: ProblemInstance, i: int, j: int, alpha: float, sigma2: float
) -> np.ndarray:
    """The pairwise tilt matrix S_ij, built from eigen-factored inverses."""
    if i == j:
        raise ValueError("pair indices must differ")
    if sigma2 <= 0:
        raise NonpositiveNoiseError(f"sigma2 must be positive, got {sigma2}")
    out = _inverse_factored(instance.true_models[i], sigma2)
    out = out + alpha * (
        _inverse_factored(instance.mismatched_models[j], sigma2)
        - _inverse_factored(instance.mismatched_models[i], sigma2)
    )
    return numlin.symmetrize(out)


def k_ij_matrix(instance: ProblemInstance, geom: PairGeometry) -> np.ndarray:
    """Kernel-side part of S_ij in projector form.

    K_ij = (I - P_true_i) + alpha (P_unique_i - P_unique_j); under the
    expansion conditions it is PSD with rank N + s_v - r_i.
    """
    n = instance.ambient_dim
    k = np.eye(n) - instance.true_models[geom.i].eig_basis.projector()
    k = k + geom.alpha * (geom.unique_i.projector() - geom.unique_j.projector())
    return numlin.symmetrize(k)


def l_ij_matrix(
    instance: ProblemInstance, geom: PairGeometry, sigma2: float
) -> np.ndarray:
    """Finite-side part of S_ij: L_i + alpha (Lmis_j - Lmis_i)."""
    out = _l_factor(instance.true_models[geom.i], sigma2)
    out = out + geom.alpha * (
        _l_factor(instance.mismatched_models[geom.j], sigma2)
        - _l_factor(instance.mismatched_models[geom.i], sigma2)
    )
    return numlin.symmetrize(out)


def l0_ij_matrix(instance: ProblemInstance, geom: PairGeometry) -> np.ndarray:
    """Zero-noise limit of l_ij_matrix."""
    out = _l_factor(instance.true_models[geom.i], None)
    out = out + geom.alpha * (
        _l_factor(instance.mismatched_models[geom.j], None)
        - _l_factor(instance.mismatched_models[geom.i], None)
    )
    return numlin.symmetrize(out)


# ---------------------------------------------------------------------------
# Theorem-1 style bound evaluation

def _logdet_plus_noise(model: ClassModel, sigma2: float) -> float:
    n = model.ambient_dim
    tail = (n - model.rank) * np.log(sigma2)
    if model.rank == 0:
        return float(tail)
    return float(np.sum(np.log(model.eig_values + sigma2)) + tail)


def theorem1_pair_bound(
    instance: ProblemInstance,
    i: int,
    j: int,
    alpha: float,
    sigma2: float,
    pd_tol: float | None = None,
) -> float:
    """log of the pairwise error bound term; raises if S_ij is not PD."""
    smat = sigma_ij(instance, i, j, alpha, sigma2)
    w = np.linalg.eigvalsh(smat)
    tol = pd_tol if pd_tol is not None else 1e-12 * max(1.0, float(w[-1]))
    if w[0] <= tol:
        raise SigmaNotPdError(
            f"pair ({i},{j}) tilt matrix has min eigenvalue {w[0]:.3e}"
        )
    logdet_s = float(np.sum(np.log(w)))
    mis_i = instance.mismatched_models[i]
    mis_j = instance.mismatched_models[j]
    return float(
        alpha * (np.log(mis_j.prior) - np.log(mis_i.prior))
        + 0.5 * alpha * (_logdet_plus_noise(mis_i, sigma2) - _logdet_plus_noise(mis_j, sigma2))
        - 0.5 * _logdet_plus_noise(instance.true_models[i], sigma2)
        - 0.5 * logdet_s
    )


@dataclass(frozen=True)
class BoundCurvePoint:
    """Union bound at one noise level."""

    sigma2: float
    bound: float          # in (0, 1]
    log10_bound: float
    pair_log_terms: dict  # (i, j) -> natural-log pair term; +inf if not PD
    degenerate: bool      # True when some pair forced the trivial bound


def theorem1_bound(
    instance: ProblemInstance,
    sigma2: float,
    policy: AlphaPolicy | None = None,
    geometries: dict | None = None,
    pd_tol: float | None = None,
) -> BoundCurvePoint:
    """Prior-weighted union bound over all ordered pairs, clamped at 1.

    Any pair whose tilt matrix fails positive definiteness degrades the
    whole point to the trivial bound 1; that is a reported value, not an
    error, so noise sweeps can display floors.
    """
    if sigma2 <= 0:
        raise NonpositiveNoiseError(f"sigma2 must be positive, got {sigma2}")
    geoms = geometries if geometries is not None else all_pair_geometries(instance, policy)
    terms: dict[tuple[int, int], float] = {}
    degenerate = False
    for (i, j), geom in geoms.items():
        try:
            terms[(i, j)] = theorem1_pair_bound(
                instance, i, j, geom.alpha, sigma2, pd_tol=pd_tol
            )
        except SigmaNotPdError:
            terms[(i, j)] = np.inf
            degenerate = True
    if degenerate:
        return BoundCurvePoint(sigma2, 1.0, 0.0, terms, True)
    # log-domain union sum with a max shift
    shift = max(terms.values())
    total = sum(
        instance.true_models[i].prior * np.exp(term - shift)
        for (i, j), term in terms.items()
    )
    log_bound = shift + np.log(total)
    if log_bound >= 0.0:
        return BoundCurvePoint(sigma2, 1.0, 0.0, terms, False)
    return BoundCurvePoint(
        sigma2, float(np.exp(log_bound)), float(log_bound / np.log(10.0)), terms, False
    )
