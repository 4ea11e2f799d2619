"""Class-conditional Gaussian models on low-rank subspaces.

A class is a zero-mean Gaussian with a (possibly) rank-deficient covariance;
observations add isotropic noise of variance sigma2 per coordinate.  A
problem instance carries two families over the same classes: the true
models that generate data and the mismatched models the classifier uses.

Estimation follows the zero-mean maximum-likelihood route: the second
moment (1/n) X^T X, eigendecomposed and truncated to a requested rank.  No
mean is subtracted, matching the zero-mean signal model.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from . import numlin
from .errors import (
    EmptySampleSetError,
    NonpositiveNoiseError,
    NotPsdError,
    RankTooLargeError,
)
from .subspace import Subspace


def make_stream(*entropy) -> np.random.Generator:
    """Seeded generator from a tuple of integers.

    Streams keyed on distinct tuples (seed, index, ...) are statistically
    independent, so batched work can be scheduled in any order without
    changing results.
    """
    return np.random.default_rng(tuple(int(x) for x in entropy))


@dataclass(frozen=True)
class ClassModel:
    """One class: prior, low-rank covariance, and its truncated eigenpairs.

    ``covariance`` always reconstructs as eig_basis @ diag(eig_values) @
    eig_basis^T; ``eig_values`` are positive and descending with length
    ``rank``.
    """

    prior: float
    covariance: np.ndarray
    rank: int
    eig_basis: Subspace
    eig_values: np.ndarray

    def __post_init__(self):
        cov = np.ascontiguousarray(np.asarray(self.covariance, dtype=float))
        vals = np.ascontiguousarray(np.asarray(self.eig_values, dtype=float))
        cov.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "eig_values", vals)
        if not (0.0 < self.prior <= 1.0):
            raise ValueError(f"prior must lie in (0, 1], got {self.prior}")
        if vals.size != self.rank or self.eig_basis.dim != self.rank:
            raise ValueError("rank does not match eigenpair count")
        if vals.size and (np.any(vals <= 0) or np.any(np.diff(vals) > 0)):
            raise ValueError("eigenvalues must be positive and descending")

    @property
    def ambient_dim(self) -> int:
        return self.covariance.shape[0]


def from_covariance(
    prior: float,
    cov,
    rank: int | None = None,
    rel_tol: float = numlin.RANK_REL_TOL,
) -> ClassModel:
    """Build a class model from a symmetric PSD covariance.

    Rank is either explicit or detected by ``rel_tol`` relative to the
    largest eigenvalue; roundoff-negative eigenvalues are clamped to zero
    before truncation.  The stored covariance is the rank-truncated
    reconstruction.
    """
    m = numlin.as_matrix(cov)
    dec = numlin.sym_eig(m)
    w = dec.eigenvalues
    if w.size and w[-1] < -1e-10 * max(float(w[0]), 0.0):
        raise NotPsdError(f"covariance eigenvalue {w[-1]:.3e} below PSD tolerance")
    w = np.maximum(w, 0.0)
    if rank is None:
        r = numlin.rank_with_tol(w, rel_tol)
    else:
        r = int(rank)
        if r > m.shape[0]:
            raise RankTooLargeError(f"rank {r} exceeds ambient dimension {m.shape[0]}")
        if r > 0 and (r > w.size or w[r - 1] <= 0):
            raise RankTooLargeError(f"rank {r} exceeds the positive spectrum")
    basis = Subspace(dec.eigenvectors[:, :r])
    vals = w[:r]
    truncated = (basis.basis * vals) @ basis.basis.T
    return ClassModel(float(prior), truncated, r, basis, vals)


def model_from_basis(prior: float, basis, eig_values=None) -> ClassModel:
    """Class model with a prescribed orthonormal signal basis.

    Defaults to unit eigenvalues; used for hand-constructed geometries
    where the basis itself is the specification.
    """
    sub = basis if isinstance(basis, Subspace) else Subspace(np.asarray(basis, float))
    vals = np.ones(sub.dim) if eig_values is None else np.asarray(eig_values, float)
    cov = (sub.basis * vals) @ sub.basis.T
    return ClassModel(float(prior), cov, sub.dim, sub, vals)


@dataclass(frozen=True)
class ProblemInstance:
    """True and mismatched model families over the same C classes."""

    ambient_dim: int
    true_models: tuple[ClassModel, ...]
    mismatched_models: tuple[ClassModel, ...]

    def __post_init__(self):
        object.__setattr__(self, "true_models", tuple(self.true_models))
        object.__setattr__(self, "mismatched_models", tuple(self.mismatched_models))
        if len(self.true_models) != len(self.mismatched_models):
            raise ValueError("true and mismatched families must have equal length")
        if len(self.true_models) < 2:
            raise ValueError("need at least two classes")
        for fam in (self.true_models, self.mismatched_models):
            for mdl in fam:
                if mdl.ambient_dim != self.ambient_dim:
                    raise ValueError("all covariances must be N x N")
            total = sum(mdl.prior for mdl in fam)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"priors sum to {total!r}, expected 1")

    @property
    def n_classes(self) -> int:
        return len(self.true_models)

    def ordered_pairs(self):
        c = self.n_classes
        return [(i, j) for i in range(c) for j in range(c) if i != j]


def sample_batch(
    instance: ProblemInstance, sigma2: float, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draw n labeled observations y = x + noise from the true models.

    Per batch the stream is consumed in a fixed order (labels, signal
    coefficients, noise), so results depend only on the generator state.
    """
    if sigma2 <= 0:
        raise NonpositiveNoiseError(f"sigma2 must be positive, got {sigma2}")
    models = instance.true_models
    priors = np.array([m.prior for m in models])
    labels = rng.choice(len(models), size=n, p=priors / priors.sum())
    r_max = max(m.rank for m in models)
    z = rng.standard_normal((n, r_max)) if r_max else np.zeros((n, 0))
    y = rng.standard_normal((n, instance.ambient_dim)) * np.sqrt(sigma2)
    for c, mdl in enumerate(models):
        if mdl.rank == 0:
            continue
        rows = labels == c
        if np.any(rows):
            coeff = z[rows, : mdl.rank] * np.sqrt(mdl.eig_values)
            y[rows] += coeff @ mdl.eig_basis.basis.T
    return labels.astype(np.int64), y


def sample(
    instance: ProblemInstance, sigma2: float, rng: np.random.Generator
) -> tuple[int, np.ndarray]:
    """Draw one labeled observation from the true models."""
    labels, ys = sample_batch(instance, sigma2, 1, rng)
    return int(labels[0]), ys[0]


def estimate_from_samples(samples, prior: float, rank: int) -> ClassModel:
    """Zero-mean ML covariance estimate truncated to the given rank.

    The second moment (1/n) X^T X is used directly; no mean subtraction.
    """
    x = numlin.as_matrix(samples)
    n = x.shape[0]
    if n == 0:
        raise EmptySampleSetError("no samples")
    if rank > min(n, x.shape[1]):
        raise RankTooLargeError(
            f"rank {rank} exceeds min(n={n}, N={x.shape[1]})"
        )
    second_moment = x.T @ x / n
    return from_covariance(prior, second_moment, rank=rank)


# ---------------------------------------------------------------------------
# Instance JSON and dataset CSV interfaces

_CLASS_KEYS = {
    "prior",
    "mismatched_prior",
    "true_cov",
    "mismatched_cov",
    "rank",
    "mismatched_rank",
}


def _cov_from_entry(entry, base_dir):
    if isinstance(entry, str):
        path = entry if os.path.isabs(entry) or base_dir is None else os.path.join(base_dir, entry)
        return numlin.read_matrix_csv(path)
    return numlin.as_matrix(entry)


def instance_from_dict(data: dict, base_dir=None) -> ProblemInstance:
    unknown = set(data) - {"ambient_dim", "classes"}
    if unknown:
        raise ValueError(f"unknown instance keys: {sorted(unknown)}")
    n = int(data["ambient_dim"])
    true_models = []
    mis_models = []
    for entry in data["classes"]:
        bad = set(entry) - _CLASS_KEYS
        if bad:
            raise ValueError(f"unknown class keys: {sorted(bad)}")
        prior = float(entry["prior"])
        mis_prior = float(entry.get("mismatched_prior", prior))
        true_cov = _cov_from_entry(entry["true_cov"], base_dir)
        mis_cov = _cov_from_entry(entry["mismatched_cov"], base_dir)
        rank = entry.get("rank")
        mis_rank = entry.get("mismatched_rank")
        true_models.append(from_covariance(prior, true_cov, rank=rank))
        mis_models.append(from_covariance(mis_prior, mis_cov, rank=mis_rank))
    return ProblemInstance(n, tuple(true_models), tuple(mis_models))


def instance_to_dict(instance: ProblemInstance) -> dict:
    classes = []
    for true_m, mis_m in zip(instance.true_models, instance.mismatched_models):
        entry = {
            "prior": true_m.prior,
            "true_cov": true_m.covariance.tolist(),
            "mismatched_cov": mis_m.covariance.tolist(),
            "rank": true_m.rank,
            "mismatched_rank": mis_m.rank,
        }
        if mis_m.prior != true_m.prior:
            entry["mismatched_prior"] = mis_m.prior
        classes.append(entry)
    return {"ambient_dim": instance.ambient_dim, "classes": classes}


def load_instance(path) -> ProblemInstance:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return instance_from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


def save_instance(instance: ProblemInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read (features, labels) from label-first CSV rows."""
    raw = numlin.read_matrix_csv(path)
    if raw.shape[1] < 2:
        raise ValueError("dataset rows need a label plus at least one feature")
    labels = raw[:, 0]
    if np.any(labels != np.round(labels)) or np.any(labels < 0):
        raise ValueError("labels must be nonnegative integers")
    return raw[:, 1:], labels.astype(np.int64)


def save_dataset_csv(path, features, labels) -> None:
    x = numlin.as_matrix(features)
    lab = np.asarray(labels, dtype=np.int64)
    if lab.shape[0] != x.shape[0]:
        raise ValueError("label count does not match row count")
    with open(path, "w", encoding="utf-8") as fh:
        for c, row in zip(lab, x):
            fh.write(str(int(c)) + "," + ",".join(repr(float(v)) for v in row))
            fh.write("\n")
