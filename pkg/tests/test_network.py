import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from qgdsim import oracle
from qgdsim.apps import (
    QUADRATIC_RELU,
    QUARTIC_RELU,
    Dataset,
    NetworkArch,
    encode_network_params,
    lsq_to_objective,
    nn_forward_encoded,
    nn_forward_quantum,
    nn_loss_objective,
    train_network,
)
from qgdsim.apps.network import peak_on_unit_interval, term_cap
from qgdsim.errors import ActivationOverflow, ExpansionTooLarge, InvalidInput, ShapeError
from qgdsim.instances import random_network
from qgdsim.objective import Family


def as_sympy(obj, symbols):
    theta = sympy.Matrix(symbols)
    expr = sympy.Float(obj.constant)
    for part in obj.parts:
        assert part.family is Family.PROD_AFFINE_POWERS
        term = sympy.Float(part.weight)
        for row, off, e in zip(part.coeff_rows, part.offsets, part.exponents):
            form = sum(sympy.Float(a) * s for a, s in zip(row, symbols)) + sympy.Float(off)
            term *= form**e
        expr += term
    return sympy.expand(expr)


def test_single_path_expansion_matches_symbolic_algebra():
    arch = NetworkArch(1, 1, 1)
    x, y = 0.5, 0.25
    w1, b1, w2, b2 = syms = sympy.symbols("w1 b1 w2 b2")
    z = w1 * sympy.Rational(1, 2) + b1
    relu = sympy.Rational(5, 8) * z**2 + sympy.Rational(1, 2) * z
    loss = sympy.expand((w2 * relu + b2 - sympy.Rational(1, 4)) ** 2)
    obj = nn_loss_objective(arch, Dataset([[x]], [y]))
    diff = sympy.expand(as_sympy(obj, syms) - loss)
    coeffs = sympy.Poly(diff, *syms).coeffs() if diff != 0 else []
    assert all(abs(float(c)) < 1e-12 for c in coeffs)


def test_no_hidden_layer_reduces_to_least_squares(rng):
    arch = NetworkArch(3, 0, 2)
    pts = rng.uniform(-1, 1, (4, 3))
    ys = rng.uniform(-1, 1, 4)
    obj = nn_loss_objective(arch, Dataset(pts, ys))
    lsq = lsq_to_objective(np.hstack([pts, np.ones((4, 1))]), ys)
    for theta in rng.uniform(-0.5, 0.5, (5, 4)):
        assert obj.total(theta) == pytest.approx(lsq.total(theta) / 4, abs=1e-12)


def test_expansion_matches_forward_mse(rng):
    arch = NetworkArch(2, 1, 2)
    data = Dataset(rng.uniform(-1, 1, (2, 2)), rng.uniform(-1, 1, 2))
    obj = nn_loss_objective(arch, data)
    for theta in rng.uniform(-0.5, 0.5, (20, arch.param_count)):
        mse = oracle.nn_mse(arch.unflatten(theta), data.points, data.labels, arch.activation)
        assert obj.total(theta) == pytest.approx(mse, abs=1e-9)
        np.testing.assert_allclose(
            obj.gradient(theta),
            oracle.fd_gradient(lambda t: oracle.nn_mse(arch.unflatten(t), data.points, data.labels, arch.activation), theta),
            atol=1e-6,
        )


def test_expansion_cap(monkeypatch):
    arch = NetworkArch(2, 2, 4)
    data = Dataset(np.zeros((10, 2)), np.zeros(10))
    assert arch.predicted_terms(10) == 10 * 4**4
    with pytest.raises(ExpansionTooLarge):
        nn_loss_objective(arch, data, cap=1000)
    monkeypatch.setenv("QGD_CAP_TERMS", "50")
    assert term_cap() == 50
    with pytest.raises(ExpansionTooLarge):
        nn_loss_objective(NetworkArch(1, 1, 2), Dataset(np.zeros((20, 1)), np.zeros(20)))


def test_expansion_needs_targets_and_matching_inputs():
    with pytest.raises(InvalidInput):
        nn_loss_objective(NetworkArch(1, 1, 1), Dataset([[0.1]]))
    with pytest.raises(ShapeError):
        nn_loss_objective(NetworkArch(2, 1, 1), Dataset([[0.1]], [0.0]))


def test_bias_only_readout():
    arch = NetworkArch(2, 1, 2)
    theta = np.zeros(arch.param_count)
    theta[-1] = 0.2
    res = nn_forward_encoded(arch, encode_network_params(arch, theta), [0.3, -0.4])
    assert res.output == pytest.approx(0.2, abs=1e-12)
    assert res.probability == pytest.approx((0.2 / 4) ** 2, abs=1e-15)


def test_single_path_forward():
    arch = NetworkArch(1, 1, 1)
    theta = np.array([0.8, 0.1, 0.6, -0.05])
    x = [0.7]
    expected = oracle.nn_forward(arch.unflatten(theta), x, QUADRATIC_RELU)
    assert nn_forward_quantum(arch, encode_network_params(arch, theta), x) == pytest.approx(expected, abs=1e-9)


@given(st.integers(1, 4), st.integers(1, 2), st.integers(0, 1), st.integers(0, 2**32 - 1))
def test_encoded_forward_matches_classical(n, m, p, seed):
    g = np.random.default_rng(seed)
    arch, theta = random_network(g, n, m, p)
    enc = encode_network_params(arch, theta)
    # Input encoding amplifies diag(x), so entries must stay below 1 - delta.
    for x in g.uniform(-0.85, 0.85, (3, n)):
        expected = oracle.nn_forward(arch.unflatten(theta), x, arch.activation)
        assert nn_forward_quantum(arch, enc, x) == pytest.approx(expected, abs=1e-9)


def test_forward_overflow_is_reported():
    arch = NetworkArch(2, 1, 1)
    theta = np.array([0.8, 0.8, 0.4, 0.8, 0.0])
    with pytest.raises(ActivationOverflow):
        nn_forward_quantum(arch, encode_network_params(arch, theta), [0.85, 0.85])


def test_surrogate_errors_are_finite():
    relu = lambda t: np.maximum(t, 0.0)  # noqa: E731
    quad = oracle.max_abs_error(oracle.poly_activation(QUADRATIC_RELU), relu)
    quart = oracle.max_abs_error(oracle.poly_activation(QUARTIC_RELU), relu)
    assert np.isfinite(quad) and np.isfinite(quart)
    assert quad == pytest.approx(0.125, abs=1e-3)
    assert peak_on_unit_interval(QUADRATIC_RELU) == pytest.approx(1.125)


def test_encoding_range_is_enforced():
    arch = NetworkArch(1, 0, 1)
    with pytest.raises(InvalidInput):
        encode_network_params(arch, [0.95, 0.0])
    with pytest.raises(InvalidInput):
        nn_forward_quantum(arch, encode_network_params(arch, [0.5, 0.0]), [0.95])


def test_training_lowers_the_loss(rng):
    arch = NetworkArch(2, 1, 2)
    data = Dataset(rng.uniform(-1, 1, (3, 2)), rng.uniform(-0.5, 0.5, 3))
    trace = train_network(arch, data, 8)
    losses = [trace.spec.total(it.encoded) for it in trace.iterates]
    assert losses[-1] < losses[0]
