import json

import numpy as np
import pytest

from subspace_mismatch import model as mdl
from subspace_mismatch import subspace as sub
from subspace_mismatch.errors import (
    EmptySampleSetError,
    NonpositiveNoiseError,
    NotPsdError,
    RankTooLargeError,
)
from subspace_mismatch.model import (
    ProblemInstance,
    estimate_from_samples,
    from_covariance,
    instance_from_dict,
    instance_to_dict,
    load_dataset_csv,
    load_instance,
    make_stream,
    model_from_basis,
    sample,
    sample_batch,
    save_dataset_csv,
    save_instance,
)
from subspace_mismatch.subspace import Subspace

from helpers import axis_basis, rand_orthonormal, two_class


def test_from_covariance_rank_detection():
    m = from_covariance(0.5, np.diag([1.0, 1.0, 1.0, 0.0]))
    assert m.rank == 3
    want = Subspace(axis_basis(4, [0, 1, 2]))
    assert sub.d_min(m.eig_basis, want) <= 1e-10
    recon = (m.eig_basis.basis * m.eig_values) @ m.eig_basis.basis.T
    assert np.linalg.norm(recon - m.covariance, 2) <= 1e-8


def test_from_covariance_degenerate_and_forced_rank():
    z = from_covariance(1.0, np.zeros((3, 3)))
    assert z.rank == 0 and z.eig_basis.is_trivial
    forced = from_covariance(0.5, np.eye(4), rank=2)
    assert forced.rank == 2 and forced.eig_values.shape == (2,)
    with pytest.raises(RankTooLargeError):
        from_covariance(0.5, np.eye(3), rank=4)
    with pytest.raises(RankTooLargeError):
        from_covariance(0.5, np.diag([1.0, 0.0]), rank=2)


def test_from_covariance_rejects_indefinite():
    with pytest.raises(NotPsdError):
        from_covariance(0.5, np.diag([1.0, -0.5]))
    with pytest.raises(ValueError):
        from_covariance(0.0, np.eye(2))


def test_instance_validation():
    u1 = axis_basis(3, [0])
    u2 = axis_basis(3, [1])
    inst = two_class(3, u1, u2, u1, u2)
    assert inst.n_classes == 2
    assert inst.ordered_pairs() == [(0, 1), (1, 0)]
    with pytest.raises(ValueError):
        ProblemInstance(
            3,
            (model_from_basis(0.7, u1), model_from_basis(0.7, u2)),
            (model_from_basis(0.5, u1), model_from_basis(0.5, u2)),
        )


def test_sample_rank_zero_is_pure_noise():
    inst = ProblemInstance(
        3,
        (from_covariance(1.0 - 1e-12, np.zeros((3, 3))), from_covariance(1e-12, np.zeros((3, 3)))),
        (model_from_basis(0.5, axis_basis(3, [0])), model_from_basis(0.5, axis_basis(3, [1]))),
    )
    rng = make_stream(0)
    labels, ys = sample_batch(inst, 1e-4, 2000, rng)
    assert np.all(np.abs(ys) < 0.1)  # 1e-2 noise std, no signal component
    assert np.mean(ys**2) == pytest.approx(1e-4, rel=0.15)


def test_sample_concentrates_on_signal_direction():
    n = 4
    sigma2 = 1e-6
    inst = two_class(n, axis_basis(n, [0]), axis_basis(n, [1]), axis_basis(n, [0]), axis_basis(n, [1]))
    rng = make_stream(1)
    labels, ys = sample_batch(inst, sigma2, 10000, rng)
    rows = ys[labels == 0]
    resid = rows.copy()
    resid[:, 0] = 0.0
    # residual variance per sample concentrates around (N-1) sigma2
    assert np.mean(np.sum(resid**2, axis=1)) == pytest.approx((n - 1) * sigma2, rel=0.05)


def test_sample_determinism():
    inst = two_class(2, axis_basis(2, [0]), axis_basis(2, [1]), axis_basis(2, [0]), axis_basis(2, [1]))
    a = sample(inst, 1e-2, make_stream(7))
    b = sample(inst, 1e-2, make_stream(7))
    assert a[0] == b[0]
    assert np.array_equal(a[1], b[1])
    with pytest.raises(NonpositiveNoiseError):
        sample(inst, 0.0, make_stream(7))


def test_sampling_covariance_matches_model():
    rng = np.random.default_rng(11)
    basis = rand_orthonormal(rng, 5, 2)
    vals = np.array([2.0, 0.5])
    inst = ProblemInstance(
        5,
        (model_from_basis(0.5, basis, vals), model_from_basis(0.5, basis, vals)),
        (model_from_basis(0.5, basis, vals), model_from_basis(0.5, basis, vals)),
    )
    sigma2 = 0.01
    labels, ys = sample_batch(inst, sigma2, 100000, make_stream(2))
    emp = ys.T @ ys / ys.shape[0]
    target = (basis * vals) @ basis.T + sigma2 * np.eye(5)
    assert np.linalg.norm(emp - target, 2) <= 0.03 * np.linalg.norm(target, 2)


def test_label_frequencies_match_priors():
    inst = ProblemInstance(
        2,
        (model_from_basis(0.2, axis_basis(2, [0])), model_from_basis(0.8, axis_basis(2, [1]))),
        (model_from_basis(0.5, axis_basis(2, [0])), model_from_basis(0.5, axis_basis(2, [1]))),
    )
    labels, _ = sample_batch(inst, 1e-2, 100000, make_stream(3))
    freq = np.mean(labels == 0)
    se = np.sqrt(0.2 * 0.8 / labels.size)
    assert abs(freq - 0.2) <= 3 * se


def test_estimate_single_sample():
    x = np.array([[3.0, 0.0, 4.0]])
    m = estimate_from_samples(x, 1.0, 1)
    assert m.rank == 1
    assert m.eig_values[0] == pytest.approx(25.0)
    direction = m.eig_basis.basis[:, 0]
    assert np.allclose(np.abs(direction), np.abs(x[0] / 5.0))


def test_estimate_planar_samples():
    rng = np.random.default_rng(4)
    coeffs = rng.standard_normal((50, 2))
    x = np.zeros((50, 5))
    x[:, 0] = coeffs[:, 0]
    x[:, 1] = coeffs[:, 1]
    m = estimate_from_samples(x, 1.0, 2)
    assert sub.d_min(m.eig_basis, Subspace(axis_basis(5, [0, 1]))) <= 1e-10


def test_estimate_consistency_monte_carlo():
    basis = axis_basis(3, [0, 1])
    vals = np.array([2.0, 1.0])
    inst = ProblemInstance(
        3,
        (model_from_basis(0.5, basis, vals), model_from_basis(0.5, basis, vals)),
        (model_from_basis(0.5, basis, vals), model_from_basis(0.5, basis, vals)),
    )
    _, ys = sample_batch(inst, 1e-10, 10000, make_stream(5))
    m = estimate_from_samples(ys, 1.0, 2)
    assert m.eig_values[0] == pytest.approx(2.0, rel=0.05)
    assert m.eig_values[1] == pytest.approx(1.0, rel=0.05)


def test_estimate_errors():
    with pytest.raises(EmptySampleSetError):
        estimate_from_samples(np.zeros((0, 3)), 1.0, 1)
    with pytest.raises(RankTooLargeError):
        estimate_from_samples(np.ones((2, 3)), 1.0, 3)


def test_estimate_scale_equivariance():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((20, 4))
    a = estimate_from_samples(x, 1.0, 2)
    b = estimate_from_samples(2.0 * x, 1.0, 2)
    assert np.allclose(b.eig_values, 4.0 * a.eig_values, rtol=1e-12, atol=0.0)
    assert sub.d_min(a.eig_basis, b.eig_basis) <= 1e-10


def test_instance_json_roundtrip(tmp_path):
    inst = two_class(
        2,
        np.array([[0.0], [1.0]]),
        np.array([[np.cos(np.pi / 4)], [np.sin(np.pi / 4)]]),
        np.array([[np.cos(4 * np.pi / 6)], [np.sin(4 * np.pi / 6)]]),
        np.array([[np.cos(np.pi / 4)], [np.sin(np.pi / 4)]]),
    )
    path = tmp_path / "instance.json"
    save_instance(inst, path)
    back = load_instance(path)
    assert back.ambient_dim == inst.ambient_dim
    # reloading re-eigendecomposes, so covariances agree to roundoff
    for a, b in zip(inst.true_models + inst.mismatched_models,
                    back.true_models + back.mismatched_models):
        assert np.allclose(a.covariance, b.covariance, atol=1e-14, rtol=0)
        assert a.prior == b.prior and a.rank == b.rank


def test_instance_json_rejects_unknown_keys():
    data = {"ambient_dim": 2, "classes": [], "extra": 1}
    with pytest.raises(ValueError):
        instance_from_dict(data)
    data = {
        "ambient_dim": 2,
        "classes": [
            {"prior": 0.5, "true_cov": [[1, 0], [0, 0]], "mismatched_cov": [[1, 0], [0, 0]], "typo": 1},
            {"prior": 0.5, "true_cov": [[0, 0], [0, 1]], "mismatched_cov": [[0, 0], [0, 1]]},
        ],
    }
    with pytest.raises(ValueError):
        instance_from_dict(data)


def test_instance_json_accepts_csv_covariances(tmp_path):
    cov_path = tmp_path / "cov.csv"
    np.savetxt(cov_path, np.diag([1.0, 0.0]), delimiter=",")
    data = {
        "ambient_dim": 2,
        "classes": [
            {"prior": 0.5, "true_cov": "cov.csv", "mismatched_cov": "cov.csv"},
            {"prior": 0.5, "true_cov": [[0, 0], [0, 1]], "mismatched_cov": [[0, 0], [0, 1]]},
        ],
    }
    json_path = tmp_path / "inst.json"
    json_path.write_text(json.dumps(data))
    inst = load_instance(json_path)
    assert inst.true_models[0].rank == 1


def test_mismatched_prior_roundtrip():
    inst = ProblemInstance(
        2,
        (model_from_basis(0.5, axis_basis(2, [0])), model_from_basis(0.5, axis_basis(2, [1]))),
        (model_from_basis(0.3, axis_basis(2, [0])), model_from_basis(0.7, axis_basis(2, [1]))),
    )
    back = instance_from_dict(instance_to_dict(inst))
    assert back.mismatched_models[0].prior == 0.3
    assert back.true_models[0].prior == 0.5


def test_dataset_csv_roundtrip(tmp_path):
    x = np.array([[1.0, 2.0], [3.0, -4.0], [0.5, 0.25]])
    y = np.array([0, 2, 1])
    path = tmp_path / "data.csv"
    save_dataset_csv(path, x, y)
    xb, yb = load_dataset_csv(path)
    assert np.array_equal(x, xb)
    assert np.array_equal(y, yb)
