import numpy as np
import pytest

from qgdsim import oracle
from qgdsim.apps import (
    Dataset,
    assign_cluster,
    centroid_objective,
    first_argmax,
    fit_centroid,
    fit_clusters,
    svm_classify,
    svm_to_objective,
    train_svm,
)
from qgdsim.errors import EmptyCluster, Indeterminate, InvalidInput
from qgdsim.instances import clustered_points, toy_svm
from qgdsim.qgd import run_descent
from qgdsim.apps.common import full_step_schedule
from qgdsim.state_prep import encode_vector


def test_svm_objective_without_violators():
    data = Dataset([[0.5, 0.0]], [1.0], task="classification")
    spec = svm_to_objective(data, 1.0, active=[])
    theta = np.array([0.3, -0.2, 0.1])
    assert spec.total(theta) == pytest.approx(0.5 * (0.09 + 0.04))
    np.testing.assert_allclose(spec.gradient(np.zeros(3)), 0)


def test_svm_single_point_gradient():
    data = Dataset([[1.0, 0.0]], [1.0], task="classification")
    spec = svm_to_objective(data, 1.0, active=[0])
    for w1 in (0.0, 0.05, -0.1):
        assert oracle.analytic_gradient(spec, [w1, 0.0, 0.0])[0] == pytest.approx(w1 - 1)


def test_svm_rejects_bad_labels():
    with pytest.raises(InvalidInput):
        svm_to_objective(Dataset([[0.1, 0.2]], [0.5]), 1.0)


def test_toy_svm_trains_to_full_accuracy(rng):
    data, C = toy_svm()
    model = train_svm(data, C)
    aug = np.hstack([data.points, np.ones((data.M, 1))])
    assert np.all(np.sign(aug @ model.theta) == data.labels)
    for x in rng.uniform(-1, 1, (25, 2)):
        classical = model.w @ x + model.b
        if abs(classical) > 1e-9:
            assert svm_classify(model.encoded, x) == np.sign(classical)


def test_svm_classify_examples():
    assert svm_classify(encode_vector([0.5, 0.0, 0.0]), [0.5, 0.0]) == 1
    assert svm_classify(encode_vector([0.3, 0.2, -0.1]), [0.0, 0.0]) == -1
    with pytest.raises(Indeterminate):
        svm_classify(encode_vector([0.3, 0.0, 0.0]), [0.0, 0.0])


def test_svm_loss_monotone_with_fixed_active_set():
    data, C = toy_svm()
    spec = svm_to_objective(data, C, active=range(data.M))
    trace = run_descent(spec, full_step_schedule(spec, 15, np.zeros(3)))
    losses = [spec.total(it.encoded) for it in trace.iterates]
    assert all(b <= a + 1e-15 for a, b in zip(losses, losses[1:]))


def test_centroid_examples(rng):
    np.testing.assert_allclose(fit_centroid([[0.2, -0.3]]).centroid, [0.2, -0.3], atol=1e-9)
    np.testing.assert_allclose(fit_centroid([[0.1, 0.0], [0.3, 0.0]]).centroid, [0.2, 0.0], atol=1e-9)
    pts = rng.uniform(-0.45, 0.45, (5, 3))
    np.testing.assert_allclose(fit_centroid(pts).centroid, pts.mean(axis=0), atol=1e-6)
    with pytest.raises(EmptyCluster):
        centroid_objective(np.zeros((0, 2)))


def test_centroid_objective_is_mean_squared_distance(rng):
    pts = rng.uniform(-0.45, 0.45, (4, 2))
    spec = centroid_objective(pts)
    c = rng.uniform(-0.5, 0.5, 2)
    assert spec.total(c) == pytest.approx(np.mean(np.sum((pts - c) ** 2, axis=1)))


def test_assign_cluster_examples():
    cents = [encode_vector([0.1, 0.4]), encode_vector([0.4, -0.1]), encode_vector([-0.3, 0.2])]
    assert assign_cluster([0.4, -0.1], cents) == 1
    axes = [encode_vector([0.5, 0.0]), encode_vector([0.0, 0.5])]
    assert assign_cluster([1.0, 0.0], axes) == 0
    assert assign_cluster([0.3, 0.3], axes) == 0  # tie goes to the lowest index
    assert first_argmax([0.2, 0.5, 0.5 - 1e-14]) == 1


def test_three_cluster_assignments_match_classical(rng):
    data = clustered_points(rng, [[0.3, 0.3], [-0.3, 0.2], [0.0, -0.35]], 4)
    fits = fit_clusters(data)
    for f, lab in zip(fits, np.unique(data.labels)):
        np.testing.assert_allclose(f.centroid, data.points[data.labels == lab].mean(axis=0), atol=1e-6)
    for x in rng.uniform(-1, 1, (30, 2)):
        expected = first_argmax([f.centroid @ x for f in fits])
        assert assign_cluster(x, [f.encoded for f in fits]) == expected
