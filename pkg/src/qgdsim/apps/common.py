"""Shared plumbing for the application drivers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ..block_encoding import EncodedOperator
from ..encoded_scalars import inner_product_v1
from ..errors import InvalidInput, InvalidSchedule, ShapeError
from ..objective import DescentSchedule, Objective, SupportSet
from ..qgd import DescentTrace, require_P, run_descent
from ..state_prep import encode_vector

# Iterates of growth-type descents are kept below this magnitude.
GROWTH_CEILING = 0.45
SIGNAL_FLOOR = 1e-12
# Starts above this keep amplified rounding below 1e-9 over the whole run.
TRACKING_FLOOR = 1e-6
UNDERFLOW_FLOOR = 1e-250


@dataclass(frozen=True, eq=False)
class Dataset:
    points: np.ndarray
    labels: np.ndarray | None = None
    task: str = "generic"
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ShapeError("points must be a nonempty M x n array")
        if not np.all(np.isfinite(pts)):
            raise InvalidInput("points must be finite")
        if self.task == "classification" and np.any(np.abs(pts) > 1):
            raise InvalidInput("classification inputs must satisfy |x_i| <= 1")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.array(self.labels, dtype=float).ravel()
            if lab.shape != (pts.shape[0],):
                raise ShapeError("one label per point is required")
            object.__setattr__(self, "labels", lab)

    @property
    def M(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]


def contraction_steps(rho: float, tol: float, start: float = 1.0) -> int:
    """Smallest ``T`` with ``start * rho**T <= tol``."""
    if not (0 <= rho < 1):
        raise InvalidInput(f"contraction factor {rho} must lie in [0, 1)")
    if start <= tol:
        return 1
    if rho == 0:
        return 1
    return max(1, math.ceil(math.log(tol / start) / math.log(rho)))


def quadratic_rate(hessian: np.ndarray, eta: float) -> float:
    """Per-step contraction ``max |1 - eta * lambda|`` of gradient descent on a quadratic."""
    w = np.linalg.eigvalsh((hessian + hessian.T) / 2)
    return float(np.max(np.abs(1 - eta * w)))


def full_step_schedule(spec: Objective, T: int, x0, **kw) -> DescentSchedule:
    """``eta = 1/(K P)`` from an explicit start; relies on the per-step norm check."""
    eta = 1.0 / (spec.K * require_P(spec))
    return DescentSchedule(eta=eta, T=T, x0=np.asarray(x0, dtype=float), budget="trajectory", **kw)


def descend_from(spec: Objective, T: int, x0, **kw) -> DescentTrace:
    return run_descent(spec, full_step_schedule(spec, T, x0, **kw))


def growth_rate(spec: Objective, eta: float) -> float:
    """Spectral radius of one descent step on a quadratic (at least 1)."""
    return max(1.0, quadratic_rate(_hessian(spec), eta))


def growth_horizon(spec: Objective, eta: float | None = None, floor: float = SIGNAL_FLOOR) -> int:
    """Longest growth descent whose start stays above the rounding floor.

    Coupled Hessians need encoded inner products, whose absolute errors near
    1e-16 grow as fast as the signal; a start below ``SIGNAL_FLOOR`` would
    leave the box through noise alone. ``TRACKING_FLOOR`` additionally keeps
    the run within 1e-9 of exact arithmetic. Diagonal Hessians keep rounding
    relative and are only limited by ``UNDERFLOW_FLOOR``.
    """
    eta = 1.0 / (spec.K * require_P(spec)) if eta is None else eta
    H = _hessian(spec)
    rho = max(1.0, quadratic_rate(H, eta))
    if rho == 1.0:
        return 10**6
    if not np.any(H - np.diag(np.diag(H))):
        floor = UNDERFLOW_FLOOR
    return max(1, int(math.log(GROWTH_CEILING / (math.sqrt(spec.n) * floor)) / math.log(rho)))


def growth_descent(
    spec: Objective, T: int, direction, eta: float | None = None, floor: float = SIGNAL_FLOOR, **kw
) -> DescentTrace:
    """Descent on a concave quadratic started small enough to stay in the box.

    The gradient is linear with symmetric Hessian ``H``, so ``t`` steps map
    ``x`` to ``S^t x`` with ``S = I - eta H`` and
    ``|S^t u|_inf <= sqrt(n) rho^t |u|_inf`` for the spectral radius ``rho``.
    Starting at ``0.45 / (sqrt(n) rho^T)`` times a vector with entries in
    ``[-1, 1]`` keeps every iterate below 0.45. ``eta`` defaults to
    ``1/(K P)``; smaller values separate close eigenvalues better within the
    horizon at the price of more steps.
    """
    u = np.asarray(direction, dtype=float)
    if u.shape != (spec.n,) or np.max(np.abs(u)) > 1 or not np.any(u):
        raise InvalidInput("direction must be a nonzero vector with entries in [-1, 1]")
    full = 1.0 / (spec.K * require_P(spec))
    eta = full if eta is None else float(eta)
    if not (0 < eta <= full):
        raise InvalidSchedule(f"growth descent needs 0 < eta <= 1/(K P) = {full:.6g}")
    horizon = growth_horizon(spec, eta, floor)
    if T > horizon:
        raise InvalidSchedule(f"T = {T} exceeds the growth horizon {horizon} at eta = {eta:.6g}")
    nu0 = GROWTH_CEILING / (math.sqrt(spec.n) * growth_rate(spec, eta) ** T)
    sched = DescentSchedule(eta=eta, T=T, x0=nu0 * u, budget="trajectory", **kw)
    return run_descent(spec, sched)


def _hessian(spec: Objective) -> np.ndarray:
    # Exact for quadratics: columns are gradient differences along unit vectors.
    g0 = spec.gradient(np.zeros(spec.n))
    return np.stack([spec.gradient(e) - g0 for e in np.eye(spec.n)], axis=1)


def overlap_readout(x_enc: EncodedOperator, v, label: str = "probe") -> float:
    """``v . x`` read from an encoded diagonal through the first inner-product construction.

    ``v`` is divided by ``r = max(1, ||v||_1 / 1.8)`` first so the encoded
    scalar stays within amplification range for any ``x`` in the box.
    """
    vec = np.asarray(v, dtype=float).ravel()
    dim = x_enc.dim
    if vec.size > dim:
        raise ShapeError(f"probe has {vec.size} entries, operator only {dim}")
    if not np.any(vec):
        return 0.0
    r = max(1.0, float(np.sum(np.abs(vec))) / 1.8)
    padded = np.zeros(dim)
    padded[: vec.size] = vec / r
    norm = float(np.linalg.norm(padded))
    direction = encode_vector(padded / norm, label=label)
    s = inner_product_v1(x_enc, direction, SupportSet.of(padded), 0.0, scale=norm)
    return float(np.real(s.block[0, 0])) * r
