"""Classical reference computations.

Deliberately written with explicit loops over rows and coordinates and never
importing the encoded-operator code, so an agreement between the two paths
means something.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInput, NeedExplicitBound, ShapeError
from .objective import CompositeObjective, DescentSchedule, Family, Objective, ObjectiveSpec

FD_STEP = 1e-5
GRID_SAFETY = 1.5
GRID_MAX_N = 12
CORNER_MAX_N = 20


@dataclass(frozen=True, eq=False)
class OracleResult:
    value: float
    gradient: np.ndarray
    minimizer: np.ndarray | None = None
    eigenpairs: tuple[np.ndarray, np.ndarray] | None = None


# ------------------------------------------------------------- evaluation


def _affine_values(part: ObjectiveSpec, x: np.ndarray) -> list[float]:
    vals = []
    for i in range(part.K):
        s = float(part.offsets[i])
        for j in range(part.n):
            s += float(part.coeff_rows[i, j]) * float(x[j])
        vals.append(s)
    return vals


def _part_value(part: ObjectiveSpec, x: np.ndarray) -> float:
    if part.family is Family.SUM_POWERS:
        total = 0.0
        for i, e in enumerate(part.exponents):
            for j in range(part.n):
                total += float(part.coeff_rows[i, j]) * float(x[j]) ** e
    elif part.family is Family.SUM_AFFINE_POWERS:
        total = sum(s**e for s, e in zip(_affine_values(part, x), part.exponents))
    else:
        total = 1.0
        for s, e in zip(_affine_values(part, x), part.exponents):
            total *= s**e
    return part.weight * total


def _part_gradient(part: ObjectiveSpec, x: np.ndarray) -> np.ndarray:
    g = np.zeros(part.n)
    if part.family is Family.SUM_POWERS:
        for i, e in enumerate(part.exponents):
            for j in range(part.n):
                g[j] += e * float(part.coeff_rows[i, j]) * float(x[j]) ** (e - 1)
    elif part.family is Family.SUM_AFFINE_POWERS:
        for i, (s, e) in enumerate(zip(_affine_values(part, x), part.exponents)):
            outer = e * s ** (e - 1)
            for j in range(part.n):
                g[j] += outer * float(part.coeff_rows[i, j])
    else:
        s = _affine_values(part, x)
        for i, e in enumerate(part.exponents):
            outer = e * s[i] ** (e - 1)
            for k, ek in enumerate(part.exponents):
                if k != i:
                    outer *= s[k] ** ek
            for j in range(part.n):
                g[j] += outer * float(part.coeff_rows[i, j])
    return part.weight * g


def _as_point(spec: Objective, x) -> np.ndarray:
    v = np.asarray(x, dtype=float).ravel()
    if v.shape != (spec.n,):
        raise ShapeError(f"expected {spec.n} coordinates, got {v.size}")
    return v


def eval_objective(spec: Objective, x, include_constant: bool = False) -> float:
    """Exact value by direct summation and multiplication."""
    v = _as_point(spec, x)
    total = sum(_part_value(p, v) for p in spec.parts)
    if include_constant:
        total += spec.constant
        if isinstance(spec, CompositeObjective):
            total += sum(p.constant for p in spec.parts)
    return float(total)


def analytic_gradient(spec: Objective, x) -> np.ndarray:
    v = _as_point(spec, x)
    g = np.zeros(spec.n)
    for p in spec.parts:
        g += _part_gradient(p, v)
    return g


def fd_gradient(f: Callable[[np.ndarray], float] | Objective, x, h: float = FD_STEP) -> np.ndarray:
    """Central differences of a scalar function or of an objective."""
    fn = f if callable(f) else (lambda z: eval_objective(f, z))
    v = np.asarray(x, dtype=float).ravel()
    g = np.zeros(v.size)
    for j in range(v.size):
        up, down = v.copy(), v.copy()
        up[j] += h
        down[j] -= h
        g[j] = (fn(up) - fn(down)) / (2 * h)
    return g


def evaluate(spec: Objective, x) -> OracleResult:
    return OracleResult(eval_objective(spec, x), analytic_gradient(spec, x))


# ------------------------------------------------------------- descent


def classical_descent(spec: Objective, schedule: DescentSchedule, P: float | None = None) -> list[np.ndarray]:
    """``x_{t+1} = x_t - eta grad f(x_t)`` from the schedule's start; T+1 points."""
    if P is None:
        P = spec.P if spec.P is not None else grad_bound_P(spec)
    x = schedule.initial_point(spec.n, P)
    out = [x.copy()]
    for _ in range(schedule.T):
        x = x - schedule.eta * analytic_gradient(spec, x)
        out.append(x.copy())
    return out


# ------------------------------------------------------------- bounds


def coefficient_bound(spec: Objective) -> float:
    """Triangle-inequality bound on ``max ||grad f||_inf`` over the box."""
    total = np.zeros(spec.n)
    for part in spec.parts:
        a = np.abs(part.coeff_rows)
        e = np.array(part.exponents, dtype=float)
        w = abs(part.weight)
        if part.family is Family.SUM_POWERS:
            total += w * np.sum(e[:, None] * a * 0.5 ** (e[:, None] - 1), axis=0)
            continue
        R = a.sum(axis=1) * 0.5 + np.abs(part.offsets)
        if part.family is Family.SUM_AFFINE_POWERS:
            total += w * np.sum((e * R ** (e - 1))[:, None] * a, axis=0)
        else:
            for i in range(part.K):
                others = np.prod([R[k] ** e[k] for k in range(part.K) if k != i])
                total += w * e[i] * R[i] ** (e[i] - 1) * others * a[i]
    bound = float(np.max(total))
    return bound if bound > 0 else 1.0


def _univariate_max(coeffs: np.ndarray) -> float:
    """``max |p(t)|`` for ``t`` in the box, coefficients low to high."""
    p = np.polynomial.Polynomial(coeffs)
    cands = [-0.5, 0.5]
    for r in p.deriv().roots():
        if abs(r.imag) < 1e-12 and -0.5 <= r.real <= 0.5:
            cands.append(float(r.real))
    return max(abs(float(p(t))) for t in cands)


def _sum_powers_bound(spec: Objective) -> float:
    degree = max(max(p.exponents) for p in spec.parts)
    best = 0.0
    for j in range(spec.n):
        c = np.zeros(degree)
        for part in spec.parts:
            for i, e in enumerate(part.exponents):
                c[e - 1] += part.weight * e * part.coeff_rows[i, j]
        best = max(best, _univariate_max(c))
    return best


def _total_degree(part: ObjectiveSpec) -> int:
    if part.family is Family.PROD_AFFINE_POWERS:
        return sum(e for e, row in zip(part.exponents, part.coeff_rows) if np.any(row))
    return max(e for e, row in zip(part.exponents, part.coeff_rows) if np.any(row)) if np.any(part.coeff_rows) else 0


def _affine_gradient_bound(spec: Objective) -> float:
    g0 = analytic_gradient(spec, np.zeros(spec.n))
    H = np.zeros((spec.n, spec.n))
    for k in range(spec.n):
        e = np.zeros(spec.n)
        e[k] = 1.0
        H[:, k] = analytic_gradient(spec, e) - g0
    return float(np.max(np.abs(g0) + 0.5 * np.abs(H).sum(axis=1)))


def _is_multilinear(spec: Objective) -> bool:
    for part in spec.parts:
        if part.family is not Family.PROD_AFFINE_POWERS or any(e != 1 for e in part.exponents):
            return False
        if np.any((part.coeff_rows != 0).sum(axis=0) > 1):
            return False
    return True


def _vector_gradients(spec: Objective, pts: np.ndarray) -> np.ndarray:
    """Gradients at many points; rows of ``pts`` are points."""
    out = np.zeros_like(pts)
    for part in spec.parts:
        a = part.coeff_rows
        e = np.array(part.exponents)
        if part.family is Family.SUM_POWERS:
            for i in range(part.K):
                out += part.weight * e[i] * a[i][None, :] * pts ** (e[i] - 1)
            continue
        s = pts @ a.T + part.offsets[None, :]
        if part.family is Family.SUM_AFFINE_POWERS:
            out += part.weight * (e[None, :] * s ** (e[None, :] - 1)) @ a
        else:
            powered = s ** e[None, :]
            for i in range(part.K):
                others = np.prod(np.delete(powered, i, axis=1), axis=1)
                out += part.weight * (e[i] * s[:, i] ** (e[i] - 1) * others)[:, None] * a[i][None, :]
    return out


def _enumerate_max(spec: Objective, axis_points: Sequence[float], chunk: int = 1 << 16) -> float:
    best = 0.0
    batch = []
    for pt in itertools.product(axis_points, repeat=spec.n):
        batch.append(pt)
        if len(batch) == chunk:
            best = max(best, float(np.max(np.abs(_vector_gradients(spec, np.array(batch))))))
            batch = []
    if batch:
        best = max(best, float(np.max(np.abs(_vector_gradients(spec, np.array(batch))))))
    return best


def grad_bound_P(spec: Objective) -> float:
    """Upper bound on ``max ||grad f||_inf`` over ``[-1/2, 1/2]^n``.

    Exact for separable sums of powers, affine gradients and multilinear
    products (corner enumeration). Otherwise the max over a 5-point-per-axis
    grid times 1.5, limited to ``n <= 12``. A zero gradient returns 1.
    """
    if all(p.family is Family.SUM_POWERS for p in spec.parts):
        bound = _sum_powers_bound(spec)
    elif max(_total_degree(p) for p in spec.parts) <= 2:
        bound = _affine_gradient_bound(spec)
    elif _is_multilinear(spec) and spec.n <= CORNER_MAX_N:
        bound = _enumerate_max(spec, (-0.5, 0.5))
    elif spec.n <= GRID_MAX_N:
        bound = GRID_SAFETY * _enumerate_max(spec, np.linspace(-0.5, 0.5, 5))
    else:
        raise NeedExplicitBound(f"n = {spec.n} is too large for grid search; supply P")
    return bound if bound > 0 else 1.0


# ------------------------------------------------------------- linear algebra


def dense_eig(H) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and column eigenvectors of a Hermitian matrix."""
    m = np.asarray(H)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput("dense_eig needs a square matrix")
    if not np.all(np.isfinite(m)):
        raise InvalidInput("matrix has non-finite entries")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-10 * max(1.0, float(np.max(np.abs(m), initial=0.0))):
        raise InvalidInput("dense_eig needs a Hermitian matrix")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return w, v


def regularized_minimizer(A, b) -> np.ndarray:
    """Minimizer of ``|x|^2/2 + ||A x - b||^2``: ``(I + 2 A^T A)^-1 2 A^T b``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.linalg.solve(np.eye(A.shape[1]) + 2 * A.T @ A, 2 * A.T @ b)


def normal_equations(F, y) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    return np.linalg.solve(F.T @ F, F.T @ np.asarray(y, dtype=float))


def ising_hamiltonian(J: Sequence[float]) -> np.ndarray:
    """Dense ``sum_i J_i Z_i Z_{i+1}`` with site 1 the most significant bit."""
    N = len(J) + 1
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    H = np.zeros((2**N, 2**N))
    for i, Ji in enumerate(J):
        factors = [eye] * N
        factors[i] = z
        factors[i + 1] = z
        term = factors[0]
        for f in factors[1:]:
            term = np.kron(term, f)
        H += Ji * term
    return H


def rayleigh(H, v) -> float:
    v = np.asarray(v)
    return float(np.real(v.conj() @ H @ v) / np.real(v.conj() @ v))


# ------------------------------------------------------------- networks


def poly_activation(coeffs: Sequence[float]) -> Callable[[np.ndarray], np.ndarray]:
    c = np.asarray(coeffs, dtype=float)
    return lambda z: np.polynomial.polynomial.polyval(z, c)


def nn_forward(layers: Sequence[tuple[np.ndarray, np.ndarray]], x, activation: Sequence[float]) -> float:
    """Hidden layers apply the polynomial activation; the last layer is linear."""
    act = poly_activation(activation)
    h = np.asarray(x, dtype=float)
    for W, b in layers[:-1]:
        h = act(np.asarray(W) @ h + np.asarray(b))
    W, b = layers[-1]
    return float((np.asarray(W) @ h + np.asarray(b)).ravel()[0])


def nn_mse(layers, X, y, activation) -> float:
    X = np.asarray(X, dtype=float)
    preds = [nn_forward(layers, x, activation) for x in X]
    return float(np.mean((np.array(preds) - np.asarray(y, dtype=float)) ** 2))


def max_abs_error(f: Callable[[np.ndarray], np.ndarray], g: Callable[[np.ndarray], np.ndarray], points: int = 10_000) -> float:
    t = np.linspace(-1.0, 1.0, points)
    return float(np.max(np.abs(f(t) - g(t))))


def geometric_rate(errors: Sequence[float]) -> tuple[float, float]:
    """Least-squares fit of ``log e_t`` on ``t``: returns (rate, R^2)."""
    e = np.asarray(errors, dtype=float)
    t = np.arange(e.size)
    y = np.log(e)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return math.exp(slope), r2
