"""Quadratic-form minimization: Ising ground and excited states, principal components.

The raw objectives ``x^T H x`` are unconstrained, so a descent from the box
centre either shrinks to zero or grows along negative directions. The
``shifted`` mode subtracts ``c |x|^2`` with ``c`` above the top of the
spectrum, which makes the form negative definite; the descent then acts as a
power iteration towards the lowest eigenvector, and the energy is read out as
the Rayleigh quotient of the extracted unit state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput, TooManySites
from ..objective import CompositeObjective, Family, Objective, ObjectiveSpec
from ..oracle import grad_bound_P
from ..qgd import DescentTrace, extract_state, require_P
from .common import SIGNAL_FLOOR, TRACKING_FLOOR, Dataset, growth_descent, growth_horizon, overlap_readout

DEFAULT_SITE_CAP = 2**10
DEFAULT_MARGIN = 0.1
# Under a fixed growth budget, shorter steps separate close eigenvalues better.
ETA_FRACTION = 0.25
MAX_GROWTH_STEPS = 300


@dataclass(frozen=True)
class IsingModel:
    """Open chain ``sum_i J_i Z_i Z_{i+1}``; site 1 is the most significant bit."""

    J: tuple[float, ...]
    cap: int = DEFAULT_SITE_CAP

    def __post_init__(self):
        J = tuple(float(j) for j in self.J)
        if len(J) < 1:
            raise InvalidInput("a chain needs at least two sites")
        object.__setattr__(self, "J", J)
        if 2**self.N > self.cap:
            raise TooManySites(f"2^{self.N} amplitudes exceed the cap {self.cap}")

    @property
    def N(self) -> int:
        return len(self.J) + 1

    @property
    def dim(self) -> int:
        return 2**self.N

    def energies(self) -> np.ndarray:
        """Diagonal of the Hamiltonian, one energy per bit string."""
        s = np.arange(self.dim)
        bits = (s[:, None] >> (self.N - 1 - np.arange(self.N))[None, :]) & 1
        spins = 1 - 2 * bits
        return np.sum(np.array(self.J)[None, :] * spins[:, :-1] * spins[:, 1:], axis=1).astype(float)

    def hamiltonian(self) -> np.ndarray:
        return np.diag(self.energies())


def ising_objective(model: IsingModel, shift: float | None = None) -> ObjectiveSpec:
    """``E(x) = sum_s E(s) x_s^2`` as a single squared-power row.

    With ``shift = c`` the row becomes ``E(s) - c``.
    """
    row = model.energies()
    if shift is not None:
        row = row - shift
    spec = ObjectiveSpec(
        Family.SUM_POWERS,
        row[None, :],
        exponents=[2],
        meta={"task": "ising", "shift": 0.0 if shift is None else float(shift)},
    )
    return spec.with_P(grad_bound_P(spec))


def deflate_objective(base: Objective, E0: float, phi0) -> CompositeObjective:
    """Add ``-E0 (phi0 . x)^2`` to a quadratic-form objective."""
    phi = np.asarray(phi0, dtype=float).ravel()
    if phi.size != base.n:
        raise InvalidInput(f"phi0 has {phi.size} entries, expected {base.n}")
    if abs(np.linalg.norm(phi) - 1) > 1e-9:
        raise InvalidInput("phi0 must be a unit vector")
    parts = list(base.parts)
    if E0 != 0:
        parts.append(ObjectiveSpec(Family.SUM_AFFINE_POWERS, phi[None, :], [0.0], [2], weight=-float(E0)))
    meta = {**base.meta, "deflated": float(E0)}
    obj = CompositeObjective(tuple(parts), constant=base.constant, meta=meta)
    return obj.with_P(grad_bound_P(obj))


def energy_readout(state, model: IsingModel) -> float:
    v = np.asarray(state, dtype=float).ravel()
    if abs(np.linalg.norm(v) - 1) > 1e-9:
        raise InvalidInput("energy readout needs a unit state")
    return float(v @ model.hamiltonian() @ v)


@dataclass(frozen=True, eq=False)
class EigenEstimate:
    state: np.ndarray
    energy: float
    success_prob: float
    trace: DescentTrace


def default_start(dim: int, seed: int = 0, signed: bool = False) -> np.ndarray:
    """Generic start vector; a random one avoids symmetric dead spots.

    Signed starts suit deflated runs: a positive start can nearly cancel
    against the partner of a degenerate ground pair.
    """
    g = np.random.default_rng(seed)
    return g.uniform(-1.0, 1.0, dim) if signed else g.uniform(0.5, 1.0, dim)


def _minimize_form(
    spec: Objective, H: np.ndarray, T: int | None, start, eta_fraction: float, floor: float = SIGNAL_FLOOR
) -> EigenEstimate:
    if not (0 < eta_fraction <= 1):
        raise InvalidInput(f"eta_fraction must lie in (0, 1], got {eta_fraction}")
    eta = eta_fraction / (spec.K * require_P(spec))
    if T is None:
        T = min(MAX_GROWTH_STEPS, growth_horizon(spec, eta, floor))
    trace = growth_descent(spec, T, start, eta=eta, floor=floor)
    state, p0 = extract_state(trace.final.X, spec.n)
    state = np.real(state)
    return EigenEstimate(state, float(state @ H @ state), p0, trace)


def ising_ground_state(
    model: IsingModel, T: int | None = None, margin: float = DEFAULT_MARGIN, start=None, eta_fraction: float = ETA_FRACTION
) -> EigenEstimate:
    """Shifted descent with ``c = max E(s) + margin`` and Rayleigh readout.

    ``T`` defaults to the growth horizon, capped at ``MAX_GROWTH_STEPS``.
    """
    c = float(model.energies().max()) + margin
    spec = ising_objective(model, shift=c)
    u = default_start(model.dim) if start is None else start
    return _minimize_form(spec, model.hamiltonian(), T, u, eta_fraction)


def ising_excited_state(
    model: IsingModel,
    ground: EigenEstimate,
    T: int | None = None,
    margin: float = DEFAULT_MARGIN,
    start=None,
    eta_fraction: float = ETA_FRACTION,
) -> EigenEstimate:
    """Deflate the shifted form by the ground pair and descend again.

    Accuracy is bounded by the growth horizon: close second and third
    eigenvalues may not separate before the start meets the rounding floor.
    """
    c = float(model.energies().max()) + margin
    base = ising_objective(model, shift=c)
    spec = deflate_objective(base, ground.energy - c, ground.state)
    u = default_start(model.dim, seed=1, signed=True) if start is None else start
    return _minimize_form(spec, model.hamiltonian(), T, u, eta_fraction)


def covariance(data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    X = data.points
    mu = X.mean(axis=0)
    return X.T @ X / data.M - np.outer(mu, mu), mu


def pca_objective(data: Dataset, shift: float | None = None) -> CompositeObjective:
    """``x^T (I - Q) x / (2M)`` written as ``|x|^2/(2M) - sum_i (X_i.x)^2/(2M^2) + (mu.x)^2/(2M)``.

    ``Q`` is attached under ``meta["Q"]``. With ``shift = c`` the norm row
    becomes ``(1 - c)/(2M)``.
    """
    M, n = data.M, data.n
    Q, mu = covariance(data)
    norm_coef = (1.0 - (shift or 0.0)) / (2 * M)
    parts = [ObjectiveSpec(Family.SUM_POWERS, np.full((1, n), norm_coef), exponents=[2])]
    live = data.points[np.any(data.points != 0, axis=1)]
    if live.size:
        parts.append(
            ObjectiveSpec(Family.SUM_AFFINE_POWERS, live, np.zeros(len(live)), [2] * len(live), weight=-1.0 / (2 * M * M))
        )
    if np.any(mu):
        parts.append(ObjectiveSpec(Family.SUM_AFFINE_POWERS, mu[None, :], [0.0], [2], weight=1.0 / (2 * M)))
    obj = CompositeObjective(
        tuple(parts), meta={"task": "pca", "Q": Q, "shift": 0.0 if shift is None else float(shift)}
    )
    return obj.with_P(grad_bound_P(obj))


def principal_direction(
    data: Dataset, T: int | None = None, margin: float = 1e-3, start=None, eta_fraction: float = 1.0
) -> EigenEstimate:
    """Dominant eigenvector of the covariance via the shifted objective ``c = 1 + margin``.

    The default ``T`` stops where the encoded run still tracks exact
    arithmetic within 1e-9.
    """
    spec = pca_objective(data, shift=1.0 + margin)
    u = default_start(data.n) if start is None else start
    return _minimize_form(spec, spec.meta["Q"], T, u, eta_fraction, TRACKING_FLOOR)


def pca_project(x_enc, datapoint) -> float:
    """``X . x`` through an encoded inner product."""
    return overlap_readout(x_enc, datapoint, label="U_datapoint")
