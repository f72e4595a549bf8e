import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgdsim import oracle
from qgdsim.block_encoding import EncodedOperator, identity, scale_down, zero_operator
from qgdsim.errors import InvalidSchedule, NormBudgetExceeded, StepError, WrongFamily, ZeroVector
from qgdsim.instances import random_spec
from qgdsim.objective import DescentSchedule, Family, ObjectiveSpec
from qgdsim.qgd import (
    build_gradient,
    default_schedule,
    descent_step,
    extract_state,
    gradient_type1,
    gradient_type2,
    gradient_type3,
    initial_operator,
    run_descent,
)
from qgdsim.state_prep import encode_vector

SP, SA, PA = Family.SUM_POWERS, Family.SUM_AFFINE_POWERS, Family.PROD_AFFINE_POWERS


def square_1d(P=1.0):
    return ObjectiveSpec(SP, [[1.0]], exponents=[2], P=P)


def test_default_schedule_examples():
    assert default_schedule(ObjectiveSpec(SP, np.zeros((2, 1)), P=1), 5).eta == pytest.approx(0.05)
    assert default_schedule(ObjectiveSpec(SP, np.zeros((10, 1)), P=2), 1).eta == pytest.approx(0.05)
    s = default_schedule(ObjectiveSpec(SP, [[0.0]], P=1), 1)
    assert s.eta == pytest.approx(0.25) and s.scaled_identity


def test_initial_operator_examples():
    spec = ObjectiveSpec(SP, np.zeros((1, 4)), P=1.0)
    np.testing.assert_allclose(initial_operator(DescentSchedule(1 / 12, 3), spec).block, 0.25 * np.eye(4), atol=1e-15)
    np.testing.assert_allclose(initial_operator(DescentSchedule(1e-12, 1), spec).block, 0.5 * np.eye(4), atol=1e-11)
    np.testing.assert_allclose(initial_operator(DescentSchedule(0.1, 2), spec).block, 0.3 * np.eye(4), atol=1e-15)
    with pytest.raises(InvalidSchedule):
        initial_operator(DescentSchedule(0.3, 2), spec)


def test_initial_operator_pads_with_zeros():
    spec = ObjectiveSpec(SP, np.zeros((1, 3)), P=1.0)
    np.testing.assert_allclose(np.diag(initial_operator(DescentSchedule(0.1, 2), spec).block), [0.3, 0.3, 0.3, 0.0])


def test_gradient_type1_examples(rng):
    spec = ObjectiveSpec(SP, [[0.0, 0.0], [1.0, 0.0]])
    P = oracle.grad_bound_P(spec)
    assert P == pytest.approx(1.0)
    spec = spec.with_P(P)
    G = gradient_type1(spec, encode_vector([0.25, 0.0]))
    np.testing.assert_allclose(np.diag(G.block), np.array([0.5, 0.0]) / (2 * P), atol=1e-12)

    zero = ObjectiveSpec(SP, [[0, 0], [0.2, -0.1], [0.1, 0.1]], P=1)
    np.testing.assert_allclose(gradient_type1(zero, zero_operator(2)).block, 0, atol=1e-15)

    spec = random_spec(rng, SP, 4, 3)
    x = rng.uniform(-0.5, 0.5, 4)
    G = gradient_type1(spec, encode_vector(x))
    np.testing.assert_allclose(np.diag(G.block), oracle.analytic_gradient(spec, x) / (spec.K * spec.P), atol=1e-12)


def test_gradient_type2_examples(rng):
    spec = ObjectiveSpec(SA, [[0.5, 0.0]], exponents=[2], P=1.0)
    G = gradient_type2(spec, encode_vector([0.3, 0.1]))
    np.testing.assert_allclose(np.diag(G.block), [0.15, 0.0], atol=1e-12)

    b_only = ObjectiveSpec(SA, [[0.0, 0.0], [0.5, 0.0]], offsets=[0.3, 0.0], exponents=[2, 2], P=1.0)
    G = gradient_type2(b_only, encode_vector([0.3, 0.1]))
    np.testing.assert_allclose(np.diag(G.block), np.array([0.15, 0.0]) / 2, atol=1e-12)

    spec = random_spec(rng, SA, 4, 2)
    x = rng.uniform(-0.5, 0.5, 4)
    G = gradient_type2(spec, encode_vector(x))
    np.testing.assert_allclose(np.diag(G.block), oracle.analytic_gradient(spec, x) / (spec.K * spec.P), atol=1e-9)


def test_gradient_type2_second_version(rng):
    rows = rng.uniform(0, 0.2, (2, 3))
    spec = ObjectiveSpec(SA, rows, offsets=[0.05, -0.1], exponents=[3, 5], P=1.0)
    x = rng.uniform(-0.5, 0.5, 3)
    G = gradient_type2(spec, encode_vector(x), "v2")
    np.testing.assert_allclose(np.diag(G.block)[:3], oracle.analytic_gradient(spec, x) / 2, atol=1e-12)
    signed = ObjectiveSpec(SA, [[0.2, -0.1]], exponents=[3], P=1.0)
    with pytest.raises(ValueError):
        gradient_type2(signed, encode_vector([0.1, 0.1]), "v2")


def test_gradient_type3_examples(rng):
    one = ObjectiveSpec(PA, [[0.5, 0.0]], exponents=[2], P=1.0)
    two = ObjectiveSpec(SA, [[0.5, 0.0]], exponents=[2], P=1.0)
    X = encode_vector([0.3, 0.1])
    np.testing.assert_allclose(gradient_type3(one, X).block, gradient_type2(two, X).block, atol=1e-15)

    prod = ObjectiveSpec(PA, [[1.0, 0.0], [0.0, 1.0]], exponents=[1, 1], P=1.0)
    G = gradient_type3(prod, encode_vector([0.2, 0.3]))
    np.testing.assert_allclose(np.diag(G.block), np.array([0.3, 0.2]) / 2, atol=1e-12)

    spec = random_spec(rng, PA, 3, 2)
    x = rng.uniform(-0.5, 0.5, 3)
    G = gradient_type3(spec, encode_vector(x))
    fd = oracle.fd_gradient(spec, x, 1e-5)
    np.testing.assert_allclose(np.diag(G.block)[:3] * spec.K * spec.P, fd, atol=1e-7)


def test_wrong_family():
    spec = ObjectiveSpec(SA, [[0.5, 0.0]], P=1.0)
    with pytest.raises(WrongFamily):
        gradient_type1(spec, encode_vector([0.1, 0.1]))
    with pytest.raises(WrongFamily):
        gradient_type3(spec, encode_vector([0.1, 0.1]))


def test_descent_step_examples():
    sched = DescentSchedule(0.25, 1)
    X = encode_vector([0.25, 0.25])
    same = descent_step(X, zero_operator(2), 0.25, sched, 1.0)
    np.testing.assert_allclose(same.block, X.block, atol=1e-15)
    # G = I/2 with scale 2 encodes grad f = 1 = P everywhere.
    out = descent_step(X, scale_down(identity(2), 2), 0.25, sched, 2.0)
    np.testing.assert_allclose(out.block, 0, atol=1e-15)

    spec = square_1d()
    X = encode_vector([0.25])
    G, scale = build_gradient(spec, X)
    out = descent_step(X, G, 0.1, DescentSchedule(0.1, 1, budget="trajectory"), scale)
    assert out.block[0, 0] == pytest.approx(0.2, abs=1e-12)


def test_descent_step_norm_budget():
    sched = DescentSchedule(0.25, 1, budget="trajectory")
    with pytest.raises(NormBudgetExceeded):
        descent_step(encode_vector([0.45]), EncodedOperator(np.diag([-0.5])), 0.25, sched, 2.0)


def test_run_descent_examples():
    trace = run_descent(square_1d(), DescentSchedule(0.1, 3, x0=[0.25], budget="trajectory"))
    np.testing.assert_allclose([it.encoded[0] for it in trace.iterates], [0.25, 0.2, 0.16, 0.128], atol=1e-12)
    assert trace.solution[0] == pytest.approx(0.25 * 0.8**3, abs=1e-12)

    flat = ObjectiveSpec(SP, np.zeros((2, 3)), P=1.0)
    trace = run_descent(flat, default_schedule(flat, 4))
    for it in trace.iterates:
        np.testing.assert_allclose(it.encoded, trace.iterates[0].encoded, atol=1e-15)


def test_run_descent_strongly_convex_monotone():
    # f = sum_j c_j x_j^2 - sum_j d_j x_j, minimizer x*_j = d_j / (2 c_j)
    c = np.array([0.2, 0.25, 0.15, 0.1])
    d = np.array([0.04, -0.05, 0.03, 0.02])
    spec = ObjectiveSpec(SP, np.vstack([-d, c]), P=1.0)
    x_star = d / (2 * c)
    trace = run_descent(spec, DescentSchedule(0.5, 20, x0=np.zeros(4), budget="trajectory"))
    errs = [np.linalg.norm(it.encoded - x_star) for it in trace.iterates]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_run_descent_checks_budget_and_wraps_errors():
    spec = square_1d()
    with pytest.raises(InvalidSchedule):
        run_descent(spec, DescentSchedule(0.3, 2))
    # x0 = 0.45 with a negative-curvature term pushes the iterate past 1/2.
    grow = ObjectiveSpec(SP, [[-1.0]], exponents=[2], P=1.0)
    with pytest.raises(StepError) as info:
        run_descent(grow, DescentSchedule(0.25, 3, x0=[0.45], budget="trajectory"))
    assert info.value.step == 1 and isinstance(info.value.cause, NormBudgetExceeded)


def test_extract_state_examples():
    state, p0 = extract_state(encode_vector([0.5] * 4))
    np.testing.assert_allclose(state, [0.5] * 4)
    assert p0 == pytest.approx(0.25)
    state, p0 = extract_state(encode_vector([1.0, 0, 0, 0]))
    np.testing.assert_allclose(state, [1, 0, 0, 0])
    assert p0 == pytest.approx(0.25)
    _, p0 = extract_state(encode_vector([0.25] * 4), bound=(1 / 4) ** 2)
    assert p0 == pytest.approx(0.0625)
    with pytest.raises(ZeroVector):
        extract_state(zero_operator(4))


@given(st.sampled_from(list(Family)), st.sampled_from([2, 3, 4]), st.integers(1, 3), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_encoded_iterates_match_classical(fam, n, K, T, seed):
    spec = random_spec(np.random.default_rng(seed), fam, n, K)
    sched = default_schedule(spec, T)
    trace = run_descent(spec, sched)
    ref = oracle.classical_descent(spec, sched)
    for it in trace.iterates:
        assert np.max(np.abs(it.encoded - ref[it.t])) <= max(1e-9, it.X.eps)
        assert it.shadow_dev <= max(1e-9, it.X.eps)
        assert it.X.norm() <= 0.5 + 1e-9


@given(st.sampled_from(list(Family)), st.integers(0, 2**32 - 1))
def test_encoded_gradient_matches_finite_differences(fam, seed):
    g = np.random.default_rng(seed)
    spec = random_spec(g, fam, 3, 2)
    x = g.uniform(-0.5, 0.5, 3)
    G, scale = build_gradient(spec, encode_vector(x))
    np.testing.assert_allclose(np.real(np.diag(G.block))[:3] * scale, oracle.fd_gradient(spec, x), atol=1e-6)
