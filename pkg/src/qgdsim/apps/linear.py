"""Linear systems and least-squares fitting as descent problems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import numerics
from ..block_encoding import EncodedOperator, QueryLedger
from ..encoded_scalars import hadamard_density
from ..errors import InvalidInput, ShapeError
from ..objective import CompositeObjective, Family, ObjectiveSpec
from ..oracle import grad_bound_P
from ..qgd import DescentTrace, extract_state, require_P
from ..state_prep import power_state
from .common import contraction_steps, descend_from, quadratic_rate

# Rows of least-squares designs are scaled so ||c F_k||_1 / 2 stays below this.
ROW_HEADROOM = 0.8


@dataclass(frozen=True, eq=False)
class LinearSystem:
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = numerics.as_matrix(self.A, square=True).real
        b = numerics.as_vector(self.b).real
        if b.size != A.shape[0]:
            raise ShapeError("A and b sizes differ")
        if not numerics.is_hermitian(A, 1e-9):
            raise InvalidInput("A must be Hermitian")
        nb = float(np.linalg.norm(b))
        if nb != 0 and abs(nb - 1) > 1e-9:
            raise InvalidInput(f"b must have unit norm (or be zero), got {nb:.6g}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.b.size

    @property
    def sparsity(self) -> int:
        return int(np.max(np.count_nonzero(self.A, axis=1)))


def _quadratic_parts(rows: np.ndarray, linear: np.ndarray, half_norm: bool, weight: float) -> list[ObjectiveSpec]:
    n = rows.shape[1]
    t1 = [linear]
    exps = [1]
    if half_norm:
        t1.append(np.full(n, 0.5))
        exps.append(2)
    parts = [ObjectiveSpec(Family.SUM_POWERS, np.array(t1), exponents=exps)]
    live = rows[np.any(rows != 0, axis=1)]
    if live.size:
        parts.append(
            ObjectiveSpec(Family.SUM_AFFINE_POWERS, live, np.zeros(len(live)), [2] * len(live), weight=weight)
        )
    return parts


def linear_to_objective(sys: LinearSystem) -> CompositeObjective:
    """``|x|^2/2 + ||A x - b||^2`` as sum-of-powers rows plus one squared row per nonzero row of ``A``.

    The linear row is ``-2 A^T b``; the constant ``||b||^2`` is kept aside.
    """
    parts = _quadratic_parts(sys.A, -2 * sys.A.T @ sys.b, True, 1.0)
    obj = CompositeObjective(tuple(parts), constant=float(sys.b @ sys.b), meta={"task": "linear", "strongly_convex": True})
    return obj.with_P(grad_bound_P(obj))


@dataclass(frozen=True, eq=False)
class LinearSolveReport:
    solution: np.ndarray
    state: np.ndarray
    success_prob: float
    regularized_minimizer: np.ndarray
    distance_regularized: float
    distance_inverse: float | None
    rate: float
    trace: DescentTrace


def solve_linear(sys: LinearSystem, T: int | None = None, tol: float = 1e-4) -> LinearSolveReport:
    """Descend from ``x = 0`` with ``eta = 1/(K P)``.

    ``T`` defaults to the number of steps the quadratic's contraction factor
    needs to bring ``||x_t - x*||`` below ``tol`` from ``||x*||``.
    """
    spec = linear_to_objective(sys)
    H = np.eye(sys.n) + 2 * sys.A.T @ sys.A
    x_star = np.linalg.solve(H, 2 * sys.A.T @ sys.b)
    eta = 1.0 / (spec.K * require_P(spec))
    rho = quadratic_rate(H, eta)
    if T is None:
        T = contraction_steps(rho, tol, max(float(np.linalg.norm(x_star)), tol))
    trace = descend_from(spec, T, np.zeros(sys.n))
    x = trace.solution
    try:
        inv = np.linalg.solve(sys.A, sys.b)
        d_inv = float(np.linalg.norm(x - inv))
    except np.linalg.LinAlgError:
        d_inv = None
    if np.any(x):
        state, p0 = extract_state(trace.final.X, sys.n)
    else:
        state, p0 = np.zeros(sys.n), 0.0
    return LinearSolveReport(x, state, p0, x_star, float(np.linalg.norm(x - x_star)), d_inv, rho, trace)


def _row_scale(F: np.ndarray) -> float:
    widest = float(np.max(np.sum(np.abs(F), axis=1)))
    return min(1.0, 2 * ROW_HEADROOM / widest) if widest > 0 else 1.0


def lsq_to_objective(F, y, scale: float | None = None) -> CompositeObjective:
    """``||F lam - y||^2`` with rows entering as ``(c F_k . lam)^2 / c^2``.

    ``c`` keeps every scaled row's encoded inner product inside the
    amplification range over the box.
    """
    F = numerics.as_matrix(F).real
    y = numerics.as_vector(y).real
    if y.size != F.shape[0]:
        raise ShapeError("F and y sizes differ")
    c = _row_scale(F) if scale is None else float(scale)
    parts = _quadratic_parts(c * F, -2 * F.T @ y, False, 1.0 / c**2)
    gram = F.T @ F
    convex = bool(np.linalg.eigvalsh(gram)[0] > 1e-12)
    obj = CompositeObjective(
        tuple(parts), constant=float(y @ y), meta={"task": "least_squares", "strongly_convex": convex, "row_scale": c}
    )
    return obj.with_P(grad_bound_P(obj))


@dataclass(frozen=True, eq=False)
class FitReport:
    coefficients: np.ndarray
    residual: float
    trace: DescentTrace


def fit_least_squares(F, y, T: int | None = None, tol: float = 1e-6, max_T: int = 5000) -> FitReport:
    """Descend on ``||F lam - y||^2`` from zero; ``T`` from the contraction rate when omitted."""
    F = numerics.as_matrix(F).real
    y = numerics.as_vector(y).real
    spec = lsq_to_objective(F, y)
    if T is None:
        eta = 1.0 / (spec.K * require_P(spec))
        rho = quadratic_rate(2 * F.T @ F, eta)
        T = min(max_T, contraction_steps(rho, tol / 10, 1.0)) if rho < 1 else max_T
    trace = descend_from(spec, T, np.zeros(F.shape[1]))
    lam = trace.solution
    return FitReport(lam, float(np.linalg.norm(F @ lam - y)), trace)


def power_features(xs, degree: int) -> np.ndarray:
    """Design matrix with columns ``x, x**2, ..., x**degree``."""
    xs = numerics.as_vector(xs).real
    return np.stack([xs**i for i in range(1, degree + 1)], axis=1)


def predict_fit(lambda_enc: EncodedOperator, x: float, n: int) -> float:
    """``sum_i lam_i x**i`` (``i = 1..n``) from a Hadamard-test overlap.

    The overlap of the power state with ``diag(lam)`` equals
    ``sum_i lam_i x**i / sum_i x**i``; the known denominator is multiplied
    back in.
    """
    if not (0 < x <= 1):
        raise InvalidInput(f"prediction input must lie in (0, 1], got {x}")
    phi = power_state(x, n, label="U_power")
    if lambda_enc.dim != phi.padded_dim:
        raise ShapeError(f"coefficient encoding has dimension {lambda_enc.dim}, expected {phi.padded_dim}")
    amps = phi.amplitudes
    overlap = float(np.real(amps @ lambda_enc.block @ amps))
    source = lambda_enc.ledger + QueryLedger.primitive(phi.label, 2)
    rho = hadamard_density(overlap, source)
    p0, p1 = float(np.real(rho.block[0, 0])), float(np.real(rho.block[1, 1]))
    norm_sq = float(sum(x**i for i in range(1, n + 1)))
    return (p0 - p1) * norm_sq
