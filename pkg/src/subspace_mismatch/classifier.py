"""Quadratic Gaussian discriminants and Monte Carlo error estimation.

The decision rule scores each class i by

    log prior_i - 1/2 logdet(Cov_i + sigma2 I) - 1/2 y^T (Cov_i + sigma2 I)^{-1} y

and picks the argmax (the shared -(N/2) log 2pi constant is omitted).  The
inverse quadratic form is evaluated through the covariance eigen-factors,

    y^T y / sigma2 - sum_k (lam_k / (lam_k + sigma2)) (u_k^T y)^2 / sigma2,

which is exact for the rank-r-plus-isotropic structure and stays stable at
noise levels where the dense inverse is hopelessly ill-conditioned.

Error probabilities have no closed form; they are estimated by drawing
labeled observations from the true models and classifying them with the
mismatched ones.  Trials are processed in fixed-size batches whose random
streams are keyed by (master_seed, batch_index), so estimates are
reproducible and independent of how many worker threads run the batches.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, NonpositiveNoiseError
from .model import ClassModel, ProblemInstance, make_stream, sample_batch

#: Trials per RNG stream; fixed so thread count cannot change results.
BATCH_SIZE = 8192


def _logdet_plus_noise(model: ClassModel, sigma2: float) -> float:
    """log |Cov + sigma2 I| from the truncated eigenvalues."""
    n = model.ambient_dim
    tail = (n - model.rank) * np.log(sigma2)
    if model.rank == 0:
        return float(tail)
    return float(np.sum(np.log(model.eig_values + sigma2)) + tail)


class DiscriminantCache:
    """Per-class factors of the Gaussian scores at a fixed noise level."""

    def __init__(self, models, sigma2: float):
        if sigma2 <= 0:
            raise NonpositiveNoiseError(f"sigma2 must be positive, got {sigma2}")
        models = tuple(models)
        if not models:
            raise ValueError("need at least one class model")
        self.sigma2 = float(sigma2)
        self.ambient_dim = models[0].ambient_dim
        self.n_classes = len(models)
        self._log_prior = np.array([np.log(m.prior) for m in models])
        self._logdet = np.array([_logdet_plus_noise(m, sigma2) for m in models])
        self._bases = [m.eig_basis.basis for m in models]
        # lam/(lam+sigma2) weights of the low-rank correction
        self._weights = [m.eig_values / (m.eig_values + sigma2) for m in models]

    def quadratic_form(self, y: np.ndarray, c: int) -> float:
        """y^T (Cov_c + sigma2 I)^{-1} y via the factored inverse."""
        proj = self._bases[c].T @ y
        return float(
            (y @ y - np.dot(self._weights[c], proj * proj)) / self.sigma2
        )

    def scores(self, ys: np.ndarray) -> np.ndarray:
        """Score matrix (n_samples x n_classes) for a batch of rows."""
        ys = np.atleast_2d(np.asarray(ys, dtype=float))
        if ys.shape[1] != self.ambient_dim:
            raise DimensionMismatchError(
                f"vectors have length {ys.shape[1]}, models expect {self.ambient_dim}"
            )
        ynorm2 = np.einsum("ij,ij->i", ys, ys)
        out = np.empty((ys.shape[0], self.n_classes))
        for c in range(self.n_classes):
            proj = ys @ self._bases[c]
            quad = (ynorm2 - (proj * proj) @ self._weights[c]) / self.sigma2
            out[:, c] = self._log_prior[c] - 0.5 * self._logdet[c] - 0.5 * quad
        return out

    def classify(self, ys: np.ndarray) -> np.ndarray:
        """Argmax class per row; ties resolve to the smallest index."""
        return np.argmax(self.scores(ys), axis=1)


def discriminant(y, model: ClassModel, sigma2: float) -> float:
    """Score of one observation under one class model."""
    if sigma2 <= 0:
        raise NonpositiveNoiseError(f"sigma2 must be positive, got {sigma2}")
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != model.ambient_dim:
        raise DimensionMismatchError(
            f"vector has length {y.shape[0]}, model expects {model.ambient_dim}"
        )
    proj = model.eig_basis.basis.T @ y
    weights = model.eig_values / (model.eig_values + sigma2)
    quad = (y @ y - np.dot(weights, proj * proj)) / sigma2
    return float(np.log(model.prior) - 0.5 * _logdet_plus_noise(model, sigma2) - 0.5 * quad)


def classify(y, models, sigma2: float) -> int:
    """Class index with the largest discriminant (ties: smallest index)."""
    scores = [discriminant(y, m, sigma2) for m in models]
    return int(np.argmax(scores))


@dataclass(frozen=True)
class ErrorEstimate:
    """Monte Carlo misclassification summary."""

    trials: int
    overall_error: float
    per_class_error: np.ndarray
    confusion: np.ndarray  # counts, true class by predicted class
    std_error: float  # binomial standard error of overall_error

    def to_json_dict(self) -> dict:
        return {
            "trials": self.trials,
            "overall_error": self.overall_error,
            "std_error": self.std_error,
            "per_class_error": [float(e) for e in self.per_class_error],
            "confusion": [[int(v) for v in row] for row in self.confusion],
        }


def estimate_from_confusion(confusion: np.ndarray) -> ErrorEstimate:
    """Turn a confusion-count matrix into rates."""
    confusion = np.asarray(confusion, dtype=np.int64)
    trials = int(confusion.sum())
    correct = int(np.trace(confusion))
    overall = (trials - correct) / trials if trials else 0.0
    row_totals = confusion.sum(axis=1)
    per_class = np.zeros(confusion.shape[0])
    nonzero = row_totals > 0
    per_class[nonzero] = 1.0 - np.diag(confusion)[nonzero] / row_totals[nonzero]
    std_error = float(np.sqrt(overall * (1.0 - overall) / trials)) if trials else 0.0
    return ErrorEstimate(trials, float(overall), per_class, confusion, std_error)


def monte_carlo_error(
    instance: ProblemInstance,
    sigma2: float,
    trials: int,
    master_seed,
    threads: int = 1,
    batch_size: int = BATCH_SIZE,
) -> ErrorEstimate:
    """Estimate the mismatched-classifier error probability by simulation.

    Observations are drawn from the true models and classified with the
    mismatched ones.  ``master_seed`` may be an int or a tuple of ints;
    batch b uses the stream keyed by (*master_seed, b).  The reduction is
    an integer confusion-count sum, so any thread count yields identical
    results.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    seed_parts = master_seed if isinstance(master_seed, (tuple, list)) else (master_seed,)
    cache = DiscriminantCache(instance.mismatched_models, sigma2)
    c = instance.n_classes

    def run_batch(b: int) -> np.ndarray:
        start = b * batch_size
        count = min(batch_size, trials - start)
        rng = make_stream(*seed_parts, b)
        labels, ys = sample_batch(instance, sigma2, count, rng)
        predicted = cache.classify(ys)
        confusion = np.zeros((c, c), dtype=np.int64)
        np.add.at(confusion, (labels, predicted), 1)
        return confusion

    n_batches = (trials + batch_size - 1) // batch_size
    if threads > 1 and n_batches > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            confusions = list(pool.map(run_batch, range(n_batches)))
    else:
        confusions = [run_batch(b) for b in range(n_batches)]
    total = np.zeros((c, c), dtype=np.int64)
    for conf in confusions:
        total += conf
    return estimate_from_confusion(total)
