"""Shared construction helpers for the test suite."""

import numpy as np

from subspace_mismatch import ProblemInstance, Subspace, model_from_basis
from subspace_mismatch.model import from_covariance


def rand_orthonormal(rng, n, k):
    """Random N x k matrix with orthonormal columns."""
    q, _ = np.linalg.qr(rng.standard_normal((n, max(k, 1))))
    return q[:, :k]


def axis_basis(n, cols):
    return np.eye(n)[:, list(cols)]


def two_class(n, u1, u2, m1, m2, priors=(0.5, 0.5)):
    return ProblemInstance(
        n,
        (model_from_basis(priors[0], u1), model_from_basis(priors[1], u2)),
        (model_from_basis(priors[0], m1), model_from_basis(priors[1], m2)),
    )


def matched_instance(instance):
    """Same true models on both sides (the mismatch removed)."""
    return ProblemInstance(instance.ambient_dim, instance.true_models, instance.true_models)


def _random_models(rng, n, count, diagonal=False):
    models = []
    raw_priors = rng.uniform(0.5, 1.5, size=count)
    priors = raw_priors / raw_priors.sum()
    # nudge the float sum onto 1 exactly
    priors[-1] = 1.0 - priors[:-1].sum()
    for prior in priors:
        r = int(rng.integers(1, min(3, n) + 1))
        vals = np.sort(rng.uniform(0.5, 2.0, size=r))[::-1]
        if diagonal:
            support = rng.permutation(n)[:r]
            cov = np.zeros((n, n))
            cov[support, support] = vals
            models.append(from_covariance(float(prior), cov, rank=r))
        else:
            basis = rand_orthonormal(rng, n, r)
            models.append(
                from_covariance(float(prior), (basis * vals) @ basis.T, rank=r)
            )
    return tuple(models)


def small_rotation(rng, n, scale=0.05):
    skew = rng.standard_normal((n, n)) * scale
    skew = skew - skew.T
    # Cayley transform of a skew matrix is orthogonal
    eye = np.eye(n)
    return np.linalg.solve(eye + skew, eye - skew)


def random_instance(rng, mode=None):
    """Random problem instance: N <= 8, ranks <= 3, 2 or 3 classes.

    Modes mix geometries where the no-floor conditions genuinely pass and
    fail: fully generic bases, axis-aligned diagonal covariances, matched
    models, and small rotations of the true models.
    """
    if mode is None:
        mode = rng.choice(["generic", "diagonal", "matched", "perturbed"])
    n = int(rng.integers(2, 9))
    c = int(rng.integers(2, 4))
    true_models = _random_models(rng, n, c, diagonal=(mode == "diagonal"))
    if mode == "matched":
        mis_models = true_models
    elif mode == "diagonal":
        mis_models = _random_models(rng, n, c, diagonal=True)
        mis_models = tuple(
            from_covariance(t.prior, m.covariance, rank=m.rank)
            for t, m in zip(true_models, mis_models)
        )
    elif mode == "perturbed":
        mis = []
        for mdl in true_models:
            q = small_rotation(rng, n)
            basis = Subspace.from_span(q @ mdl.eig_basis.basis)
            mis.append(model_from_basis(mdl.prior, basis, mdl.eig_values))
        mis_models = tuple(mis)
    else:
        mis_models = _random_models(rng, n, c)
        mis_models = tuple(
            from_covariance(t.prior, m.covariance, rank=m.rank)
            for t, m in zip(true_models, mis_models)
        )
    return ProblemInstance(n, true_models, mis_models)
