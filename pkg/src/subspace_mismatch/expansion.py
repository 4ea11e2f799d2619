"""Low-noise expansion of the error bound and the reliability checkers.

As the noise variance s goes to zero the union bound either levels off at
a floor or vanishes like A * s^d.  Which case applies is decided per
ordered class pair by two geometric conditions:

* orthogonality: the part of the true class-i subspace that is orthogonal
  to its own unique mismatched directions must also be orthogonal to the
  rival's unique mismatched directions (spectral overlap <= 1e-7);
* dominance: on the complement V of that part, projections onto the
  class's own unique mismatched directions must strictly dominate
  projections onto the rival's (matrix positive definite with margin
  1e-10), vacuous when V is trivial.

When every pair passes, the decay exponent is

    d = min over pairs of  (s_v + alpha (rank_mis_j - rank_mis_i)) / 2

and the leading constant sums, over the pairs attaining d, the
prior-weighted pair constants

    A_ij = (mp_j / mp_i)^alpha * (pdet(MisCov_i)/pdet(MisCov_j))^(alpha/2)
           * (pdet(Cov_i) * v_ij)^(-1/2),

with v_ij the leading coefficient of det(L_ij + K_ij / s): the full
determinant of K_ij when K_ij has full rank, otherwise the
pseudo-determinant of K_ij times the determinant of L0_ij compressed onto
the kernel of K_ij.

Floor verdicts distinguish failed conditions from a nonpositive exponent,
because the two call for different repairs (fix the geometry vs fix the
mismatched rank ordering).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import numlin, subspace as sub
from .bounds import (
    COND_MARGIN,
    AlphaPolicy,
    PairGeometry,
    all_pair_geometries,
    k_ij_matrix,
    l0_ij_matrix,
)
from .errors import (
    ConditionsFailError,
    DegenerateOverlapError,
    DiagonalityViolatedError,
    KernelDetNonpositiveError,
    NotOrthogonalError,
)
from .model import ProblemInstance, model_from_basis
from .subspace import Subspace


class Verdict(enum.Enum):
    NO_FLOOR = "no-floor"
    FLOOR_CONDITIONS_FAIL = "floor-conditions-fail"
    FLOOR_NONPOSITIVE_D = "floor-nonpositive-d"


@dataclass(frozen=True)
class ConditionReport:
    """Pass/fail record of the per-pair expansion conditions."""

    pair: tuple[int, int]
    nec_holds: bool
    suff_holds: bool
    corollary2_holds: bool
    suff_margin: float | None   # min eigenvalue of the dominance matrix
    angle_margin: float | None  # d_max(U_i, MisU_j) - d_min(U_i, MisU_i)


def _padded_cosine_gap(geom: PairGeometry) -> tuple[float, float]:
    """Worst own-class cosine vs best rival cosine over the true subspace.

    The floor cosine is min over unit x in im(U_i) of the projection onto
    the own mismatched subspace; when the mismatched rank falls short of
    the true rank that minimum is zero (a quarter-turn direction exists),
    which the min-dimension principal-angle convention would miss.
    """
    u = geom.u_true_i.basis
    floor_s = np.linalg.svd(geom.u_mis_i.basis.T @ u, compute_uv=False)
    cos_floor = float(floor_s.min()) if geom.u_mis_i.dim >= geom.u_true_i.dim else 0.0
    ceil_s = np.linalg.svd(geom.u_mis_j.basis.T @ u, compute_uv=False)
    cos_ceil = float(ceil_s.max()) if ceil_s.size else 0.0
    return min(cos_floor, 1.0), min(cos_ceil, 1.0)


def check_conditions(geom: PairGeometry) -> ConditionReport:
    """Evaluate both expansion conditions and the angle-gap shortcut.

    The angle-gap certificate compares the largest angle between the true
    subspace and its own mismatched subspace (padded with quarter turns
    for any rank deficit) against the smallest angle to the rival's
    mismatched subspace; when it passes it forces both expansion
    conditions, so it can be used as a cheap sufficient check.
    """
    angle_margin = None
    cor2 = False
    if (
        geom.s_v > 0
        and not geom.u_true_i.is_trivial
        and not geom.u_mis_i.is_trivial
        and not geom.u_mis_j.is_trivial
    ):
        cos_floor, cos_ceil = _padded_cosine_gap(geom)
        angle_margin = float(
            np.sqrt(max(0.0, 1.0 - cos_ceil**2)) - np.sqrt(max(0.0, 1.0 - cos_floor**2))
        )
        # the squared-cosine gap lower-bounds the dominance eigenvalue, so
        # requiring the margin there makes the implication airtight
        cor2 = cos_floor**2 - cos_ceil**2 > COND_MARGIN
    return ConditionReport(
        pair=(geom.i, geom.j),
        nec_holds=geom.nec_holds,
        suff_holds=geom.suff_holds,
        corollary2_holds=cor2,
        suff_margin=geom.c0,
        angle_margin=angle_margin,
    )


def d_exponent(geom: PairGeometry, rank_mis_i: int, rank_mis_j: int) -> float:
    """Pair decay exponent (s_v + alpha * rank gap) / 2."""
    return 0.5 * (geom.s_v + geom.alpha * (rank_mis_j - rank_mis_i))


def _log_pdet_values(values: np.ndarray) -> float:
    return float(np.sum(np.log(values))) if values.size else 0.0


def expansion_constant(instance: ProblemInstance, geom: PairGeometry, i: int, j: int) -> float:
    """The pair constant A_ij of the low-noise expansion (unweighted).

    Requires the pair to pass both conditions with alpha strictly inside
    the admissible range; evaluated in the log domain.
    """
    if (i, j) != (geom.i, geom.j):
        raise ValueError("pair indices do not match the geometry")
    if not geom.conditions_hold:
        raise ConditionsFailError(f"pair ({i},{j}) fails the expansion conditions")
    if geom.alpha0 is None or not (0.0 < geom.alpha < geom.alpha0):
        raise ConditionsFailError(
            f"alpha {geom.alpha!r} is outside the admissible range of pair ({i},{j})"
        )
    n = instance.ambient_dim
    dec = numlin.sym_eig(k_ij_matrix(instance, geom))
    rank_k = numlin.rank_with_tol(np.maximum(dec.eigenvalues, 0.0))
    log_pdet_k = float(np.sum(np.log(dec.eigenvalues[:rank_k]))) if rank_k else 0.0
    if rank_k == n:
        log_v_ij = log_pdet_k
    else:
        kernel = dec.eigenvectors[:, rank_k:]
        compressed = kernel.T @ l0_ij_matrix(instance, geom) @ kernel
        sign, logdet_c = np.linalg.slogdet(compressed)
        if sign <= 0:
            raise KernelDetNonpositiveError(
                f"compressed determinant of pair ({i},{j}) is not positive"
            )
        log_v_ij = log_pdet_k + float(logdet_c)
    true_i = instance.true_models[i]
    mis_i = instance.mismatched_models[i]
    mis_j = instance.mismatched_models[j]
    log_a = (
        geom.alpha * (np.log(mis_j.prior) - np.log(mis_i.prior))
        + 0.5 * geom.alpha * (_log_pdet_values(mis_i.eig_values) - _log_pdet_values(mis_j.eig_values))
        - 0.5 * (_log_pdet_values(true_i.eig_values) + log_v_ij)
    )
    return float(np.exp(log_a))


@dataclass(frozen=True)
class ExpansionReport:
    """Outcome of the low-noise expansion over all ordered pairs."""

    verdict: Verdict
    d: float | None
    per_pair_d: dict
    constant: float | None          # prior-weighted sum of A_ij over argmin pairs
    argmin_pairs: tuple
    failing_pairs: tuple            # (i, j, reason) triples
    conditions: dict                # (i, j) -> ConditionReport
    geometries: dict                # (i, j) -> PairGeometry

    def to_json_dict(self) -> dict:
        pairs = []
        for (i, j), geom in sorted(self.geometries.items()):
            rep = self.conditions[(i, j)]
            pairs.append(
                {
                    "i": i,
                    "j": j,
                    "d_ij": self.per_pair_d.get((i, j)),
                    "nec": rep.nec_holds,
                    "suff": rep.suff_holds,
                    "c0": rep.suff_margin,
                    "alpha0": geom.alpha0,
                    "alpha": geom.alpha,
                    "suff_margin": rep.suff_margin,
                    "angle_margin": rep.angle_margin,
                    "in_argmin": [i, j] in [list(p) for p in self.argmin_pairs],
                }
            )
        return {
            "verdict": self.verdict.value,
            "d": self.d,
            "A": self.constant,
            "pairs": pairs,
            "failing_pairs": [
                {"i": i, "j": j, "reason": reason} for (i, j, reason) in self.failing_pairs
            ],
        }


def expand(instance: ProblemInstance, policy: AlphaPolicy | None = None) -> ExpansionReport:
    """Classify the instance's low-noise behavior and compute (d, A).

    Verdicts: conditions failing for some pair, a nonpositive exponent, or
    no floor with the expansion d and leading constant A.
    """
    geoms = all_pair_geometries(instance, policy)
    conditions = {pair: check_conditions(geom) for pair, geom in geoms.items()}
    per_pair_d = {
        (i, j): d_exponent(
            geoms[(i, j)],
            instance.mismatched_models[i].rank,
            instance.mismatched_models[j].rank,
        )
        for (i, j) in geoms
    }

    failing = []
    for (i, j), rep in sorted(conditions.items()):
        if not rep.nec_holds:
            failing.append(
                (
                    i,
                    j,
                    f"directions of class {i} hidden from its own unique mismatched "
                    f"subspace overlap the unique mismatched subspace of class {j} "
                    f"(spectral overlap {geoms[(i, j)].nec_norm:.3e})",
                )
            )
        if not rep.suff_holds:
            failing.append(
                (
                    i,
                    j,
                    f"projections of class {i} signals onto its own unique mismatched "
                    f"directions do not dominate those onto class {j}'s "
                    f"(min eigenvalue {rep.suff_margin:.3e})",
                )
            )
    if failing:
        return ExpansionReport(
            Verdict.FLOOR_CONDITIONS_FAIL,
            None,
            per_pair_d,
            None,
            (),
            tuple(failing),
            conditions,
            geoms,
        )

    d = min(per_pair_d.values())
    argmin = tuple(sorted(p for p, dp in per_pair_d.items() if dp <= d + 1e-12))
    if d <= 0:
        return ExpansionReport(
            Verdict.FLOOR_NONPOSITIVE_D,
            float(d),
            per_pair_d,
            None,
            argmin,
            (),
            conditions,
            geoms,
        )
    total = 0.0
    for (i, j) in argmin:
        total += instance.true_models[i].prior * expansion_constant(
            instance, geoms[(i, j)], i, j
        )
    return ExpansionReport(
        Verdict.NO_FLOOR,
        float(d),
        per_pair_d,
        float(total),
        argmin,
        (),
        conditions,
        geoms,
    )


# ---------------------------------------------------------------------------
# Corollary-style sufficient conditions

def _rank_gap_condition(instance: ProblemInstance, geoms: dict) -> bool:
    """s_v > 0 for every pair whose mismatched rank does not increase."""
    for (i, j), geom in geoms.items():
        gap = instance.mismatched_models[j].rank - instance.mismatched_models[i].rank
        if gap <= 0 and geom.s_v == 0:
            return False
    return True


def check_corollary1(instance: ProblemInstance) -> bool:
    """Both expansion conditions for all pairs, plus the rank-gap condition."""
    geoms = all_pair_geometries(instance)
    if not all(g.conditions_hold for g in geoms.values()):
        return False
    return _rank_gap_condition(instance, geoms)


def check_corollary2(instance: ProblemInstance) -> bool:
    """Angle-gap shortcut: d_min(U_i, MisU_i) < d_max(U_i, MisU_j), s_v > 0."""
    geoms = all_pair_geometries(instance)
    for geom in geoms.values():
        rep = check_conditions(geom)
        if not rep.corollary2_holds:
            return False
    return True


def check_corollary3(instance: ProblemInstance) -> bool:
    """Diagonal-covariance specialization: orthogonality plus rank gaps.

    All covariances must be diagonal; the dominance condition then holds
    automatically and only the orthogonality and rank-gap conditions
    remain.
    """
    for fam in (instance.true_models, instance.mismatched_models):
        for mdl in fam:
            cov = mdl.covariance
            off = cov - np.diag(np.diag(cov))
            scale = max(1.0, float(np.abs(np.diag(cov)).max()) if cov.size else 1.0)
            if cov.size and float(np.abs(off).max()) > 1e-10 * scale:
                raise DiagonalityViolatedError("covariances are not diagonal")
    geoms = all_pair_geometries(instance)
    if not all(g.nec_holds for g in geoms.values()):
        return False
    return _rank_gap_condition(instance, geoms)


# ---------------------------------------------------------------------------
# Rotated-subspace mismatch check

@dataclass(frozen=True)
class RotationCheck:
    decision: bool
    delta: float   # largest squared-cosine proxy between the two true subspaces
    eps_1: float   # spectral distance of the first rotation from identity
    eps_2: float


def rotation_mismatch_check(
    u_1: Subspace,
    u_2: Subspace,
    q_1,
    q_2,
    strict: bool = False,
) -> RotationCheck:
    """Two-class reliability test when mismatch is a rotation of each basis.

    The mismatched bases are Q_i U_i.  With eps_i the spectral norm of
    I - Q_i and delta = sqrt(1 - d_min(U_1, U_2)^2), reliable low-noise
    classification is guaranteed when 1 - delta > eps_1 + eps_2.  The
    ``strict`` variant multiplies the right-hand side by the ambient
    dimension.
    """
    n = u_1.ambient_dim
    qs = []
    for q in (q_1, q_2):
        qm = numlin.as_matrix(q)
        if qm.shape != (n, n):
            raise NotOrthogonalError(f"rotation must be {n}x{n}")
        if float(np.abs(qm.T @ qm - np.eye(n)).max()) > 1e-8:
            raise NotOrthogonalError("matrix is not orthogonal within 1e-8")
        qs.append(qm)
    if u_1.is_trivial or u_2.is_trivial:
        raise DegenerateOverlapError("true subspaces must be nontrivial")

    mis_1 = Subspace.from_span(qs[0] @ u_1.basis)
    mis_2 = Subspace.from_span(qs[1] @ u_2.basis)
    for u, mis in ((u_1, mis_1), (u_2, mis_2)):
        overlap = np.linalg.svd(u.basis.T @ mis.basis, compute_uv=False)
        if not np.any(overlap > 1e-9):
            raise DegenerateOverlapError(
                "a rotated mismatched subspace is orthogonal to its signal subspace"
            )
    eps_1 = float(np.linalg.norm(np.eye(n) - qs[0], 2))
    eps_2 = float(np.linalg.norm(np.eye(n) - qs[1], 2))
    dmin = sub.d_min(u_1, u_2)
    delta = float(np.sqrt(max(0.0, 1.0 - dmin * dmin)))
    rhs = (eps_1 + eps_2) * (n if strict else 1.0)
    return RotationCheck(bool(1.0 - delta > rhs), delta, eps_1, eps_2)
