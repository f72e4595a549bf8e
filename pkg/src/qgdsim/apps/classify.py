"""Support-vector training and nearest-centroid clustering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..block_encoding import EncodedOperator
from ..errors import EmptyCluster, Indeterminate, InvalidInput
from ..objective import Family, ObjectiveSpec
from ..oracle import grad_bound_P
from ..qgd import DescentTrace
from .common import Dataset, contraction_steps, descend_from, overlap_readout

MAX_OUTER_ROUNDS = 10
TIE_TOL = 1e-12


def _augmented(points: np.ndarray) -> np.ndarray:
    return np.hstack([points, np.ones((points.shape[0], 1))])


def active_set(data: Dataset, theta: np.ndarray) -> np.ndarray:
    """Indices of points with ``y (w.x + b) < 1``."""
    margins = data.labels * (_augmented(data.points) @ theta)
    return np.flatnonzero(margins < 1)


def svm_to_objective(data: Dataset, C_reg: float, active: Sequence[int] | None = None) -> ObjectiveSpec:
    """Hinge-loss primal over ``theta = (w, b)`` with the active set frozen.

    ``|w|^2/2 + C sum_active (1 - y (w.x + b))``; the constant ``C |active|``
    is kept aside.
    """
    if data.labels is None or not np.all(np.isin(data.labels, (-1.0, 1.0))):
        raise InvalidInput("labels must be +1 or -1")
    if C_reg <= 0:
        raise InvalidInput("C_reg must be positive")
    idx = np.arange(data.M) if active is None else np.asarray(active, dtype=int)
    aug = _augmented(data.points)
    linear = -C_reg * (data.labels[idx, None] * aug[idx]).sum(axis=0) if idx.size else np.zeros(data.n + 1)
    quad = np.append(np.full(data.n, 0.5), 0.0)
    spec = ObjectiveSpec(
        Family.SUM_POWERS,
        np.array([linear, quad]),
        exponents=[1, 2],
        constant=C_reg * idx.size,
        meta={"task": "svm", "active": tuple(int(i) for i in idx)},
    )
    return spec.with_P(grad_bound_P(spec))


@dataclass(frozen=True, eq=False)
class SVMModel:
    theta: np.ndarray
    encoded: EncodedOperator
    active: tuple[int, ...]
    rounds: int
    traces: tuple[DescentTrace, ...]

    @property
    def w(self) -> np.ndarray:
        return self.theta[:-1]

    @property
    def b(self) -> float:
        return float(self.theta[-1])


def train_svm(data: Dataset, C_reg: float, T: int | None = None, tol: float = 1e-8) -> SVMModel:
    """Outer active-set loop around smooth descents (at most 10 rounds).

    Each round freezes the margin violators, descends on the resulting
    smooth objective from the previous solution, and stops once the set no
    longer changes.
    """
    theta = np.zeros(data.n + 1)
    active = tuple(active_set(data, theta))
    traces = []
    for rounds in range(1, MAX_OUTER_ROUNDS + 1):
        spec = svm_to_objective(data, C_reg, active)
        steps = T
        if steps is None:
            # w contracts by 1 - eta per step with eta = 1/(K P).
            steps = contraction_steps(1 - 1.0 / (spec.K * spec.P), tol)
        trace = descend_from(spec, steps, theta)
        traces.append(trace)
        theta = trace.solution
        new_active = tuple(active_set(data, theta))
        if new_active == active:
            break
        active = new_active
    return SVMModel(theta, traces[-1].final.X, active, rounds, tuple(traces))


def svm_classify(wb_enc: EncodedOperator, x, margin_tol: float = 1e-9) -> int:
    """Sign of ``w.x + b`` from an inner product with ``(x, 1)``."""
    v = np.append(np.asarray(x, dtype=float).ravel(), 1.0)
    score = overlap_readout(wb_enc, v, label="U_probe")
    if abs(score) < margin_tol:
        raise Indeterminate(f"|w.x + b| = {abs(score):.3g} is below the margin tolerance")
    return 1 if score > 0 else -1


def centroid_objective(points) -> ObjectiveSpec:
    """``(1/M) sum_i |c - r_i|^2 = |c|^2 - 2 c.mean + const``; minimizer is the mean."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise EmptyCluster("a centroid needs at least one point")
    mean = pts.mean(axis=0)
    spec = ObjectiveSpec(
        Family.SUM_POWERS,
        np.array([-2 * mean, np.ones(pts.shape[1])]),
        exponents=[1, 2],
        constant=float(np.mean(np.sum(pts**2, axis=1))),
        meta={"task": "centroid"},
    )
    return spec.with_P(grad_bound_P(spec))


@dataclass(frozen=True, eq=False)
class CentroidFit:
    centroid: np.ndarray
    encoded: EncodedOperator
    trace: DescentTrace


def fit_centroid(points, T: int | None = None, tol: float = 1e-9) -> CentroidFit:
    spec = centroid_objective(points)
    # Gradient 2(c - mean): contraction 1 - 2 eta with eta = 1/(K P).
    eta = 1.0 / (spec.K * spec.P)
    steps = T if T is not None else contraction_steps(abs(1 - 2 * eta), tol)
    trace = descend_from(spec, steps, np.zeros(spec.n))
    return CentroidFit(trace.solution, trace.final.X, trace)


def fit_clusters(data: Dataset, T: int | None = None, tol: float = 1e-9) -> list[CentroidFit]:
    """One centroid per distinct label, in sorted label order."""
    if data.labels is None:
        raise InvalidInput("clustering needs class labels")
    fits = []
    for lab in np.unique(data.labels):
        fits.append(fit_centroid(data.points[data.labels == lab], T, tol))
    return fits


def first_argmax(values: Sequence[float], tol: float = TIE_TOL) -> int:
    """Index of the maximum; near-ties resolve to the lowest index."""
    vals = np.asarray(values, dtype=float)
    return int(np.flatnonzero(vals >= vals.max() - tol)[0])


def assign_cluster(x, centroids: Sequence[EncodedOperator]) -> int:
    """Index of the centroid with the largest overlap ``C_k . x``."""
    if not centroids:
        raise InvalidInput("at least one centroid is required")
    v = np.asarray(x, dtype=float).ravel()
    mass = float(np.sum(np.abs(v)))
    probe = v / mass if mass > 0 else v
    overlaps = [overlap_readout(c, probe, label="U_probe") for c in centroids]
    return first_argmax(overlaps)
