"""Gradient descent carried out on encoded diagonal operators.

Each iteration builds an encoding of ``diag(grad f(x_t))`` from the current
``X_t = diag(x_t)``, combines ``(X_t - eta * G)/2`` and amplifies by two.
A plain float copy of ``x_t`` (the shadow) rides along for cheap checks; the
encoded block stays the source of truth.

Gradient construction: every row contributes one term ``c_i * B_i`` where
``B_i`` is an encoded diagonal of norm at most one and ``c_i`` a classical
weight. All terms are scaled by ``|c_i|/L`` with ``L = max(1, max|c_i|)`` and
averaged, which encodes ``grad f / (K P L)``. Rows enter through their unit
direction ``diag(a_i/||a_i||)`` so no coefficient bound is needed on ``a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import numerics
from .block_encoding import (
    EncodedOperator,
    QueryLedger,
    amplify,
    encode_density,
    linear_combine,
    product,
    qsvt_poly,
    rescale,
    zero_operator,
)
from .encoded_scalars import inner_product_v1, inner_product_v2
from .errors import (
    ExtractionBoundViolated,
    InvalidInput,
    InvalidSchedule,
    NegativeCoefficient,
    NormBudgetExceeded,
    ShapeError,
    SimulationError,
    StepError,
    WrongFamily,
    ZeroVector,
)
from .objective import CompositeObjective, DescentSchedule, Family, Objective, ObjectiveSpec, SupportSet
from .state_prep import embed_diagonal, encode_vector, prepare

NORM_TOL = 1e-9
X0_LABEL = "U_x0"


# ---------------------------------------------------------------- schedules


def default_schedule(spec: Objective, T: int, **overrides) -> DescentSchedule:
    """``eta = min(1/(K P), 1/(4 P T))`` from the scaled-identity start."""
    P = require_P(spec)
    eta = min(1.0 / (spec.K * P), 1.0 / (4.0 * P * T))
    return DescentSchedule(eta=eta, T=T, **overrides)


def require_P(spec: Objective) -> float:
    if spec.P is not None:
        return float(spec.P)
    from .oracle import grad_bound_P

    return grad_bound_P(spec)


def initial_operator(schedule: DescentSchedule, spec: Objective) -> EncodedOperator:
    """Encode the starting diagonal.

    Scaled identity: the maximally entangled state on the logical ``n``
    coordinates gives ``I/n`` by partial trace, which is then rescaled to
    ``(1/2 - eta P T) I``. Padding coordinates stay zero.
    """
    n = spec.n
    dim = numerics.next_pow2(n)
    P = require_P(spec)
    if not schedule.scaled_identity:
        x0 = schedule.initial_point(n, P)
        return encode_vector(x0, label=X0_LABEL, delta=schedule.delta, eps_amp=schedule.eps_amp)
    c = schedule.x0_budget(P)
    if c <= 0:
        raise InvalidSchedule(f"1/2 - eta*P*T = {c:.6g} leaves no room for the start")
    psi = np.zeros(dim * dim)
    for i in range(n):
        psi[i * dim + i] = 1.0
    psi /= math.sqrt(n)
    mixed = encode_density(psi, (dim, dim), trace_out=1, label=X0_LABEL)
    return rescale(mixed, n * c, schedule.delta, schedule.eps_amp)


# ---------------------------------------------------------------- gradients


@dataclass(frozen=True)
class _Term:
    op: EncodedOperator
    coef: float


def _row_direction(a: np.ndarray, label: str) -> tuple[EncodedOperator, float]:
    """``diag(a/||a||)`` and ``||a||``."""
    norm = float(np.linalg.norm(a))
    return embed_diagonal(prepare(a, label=label)), norm


def _power(op: EncodedOperator, k: int) -> EncodedOperator:
    out = op
    for _ in range(k - 1):
        out = product(out, op)
    return out


def _affine_scalar(
    X: EncodedOperator,
    a: np.ndarray,
    b: float,
    label: str,
    version: str,
    schedule: DescentSchedule,
) -> EncodedOperator:
    """``(a.x + b) I`` through one of the two inner-product constructions."""
    if version == "v2":
        if np.any(a < 0):
            raise NegativeCoefficient(f"row {label} has negative coefficients")
        return inner_product_v2(X, a, b, delta=schedule.delta, eps_amp=schedule.eps_amp)
    dim = X.dim
    if not np.any(a):
        return inner_product_v1(X, zero_operator(dim), SupportSet(()), b, delta=schedule.delta, eps_amp=schedule.eps_amp)
    direction, norm = _row_direction(_pad(a, dim), label)
    return inner_product_v1(
        X, direction, SupportSet.of(a), b, scale=norm, delta=schedule.delta, eps_amp=schedule.eps_amp
    )


def _pad(a: np.ndarray, dim: int) -> np.ndarray:
    out = np.zeros(dim)
    out[: a.size] = a
    return out


def _half_power(s: EncodedOperator, k: int) -> EncodedOperator:
    """``s**k / 2`` by a degree-``k`` polynomial transform."""
    coeffs = np.zeros(k + 1)
    coeffs[k] = 0.5
    return qsvt_poly(s, coeffs)


def _terms_sum_powers(spec: ObjectiveSpec, X: EncodedOperator, P: float, tag: str) -> list[_Term]:
    terms = []
    dim = X.dim
    for i, (a, e) in enumerate(zip(spec.coeff_rows, spec.exponents)):
        if not np.any(a):
            terms.append(_Term(zero_operator(dim), 0.0))
            continue
        direction, norm = _row_direction(_pad(a, dim), f"{tag}a{i}")
        op = product(direction, _power(X, e - 1)) if e > 1 else direction
        terms.append(_Term(op, spec.weight * e * norm / P))
    return terms


def _terms_sum_affine(
    spec: ObjectiveSpec, X: EncodedOperator, P: float, version: str, schedule: DescentSchedule, tag: str
) -> list[_Term]:
    terms = []
    dim = X.dim
    for i, (a, b, e) in enumerate(zip(spec.coeff_rows, spec.offsets, spec.exponents)):
        if not np.any(a):
            terms.append(_Term(zero_operator(dim), 0.0))
            continue
        if version == "v2" and np.any(a < 0):
            raise NegativeCoefficient(f"row {i} has negative coefficients")
        direction, norm = _row_direction(_pad(a, dim), f"{tag}a{i}")
        coef = spec.weight * e * norm / P
        if e > 1:
            s = _affine_scalar(X, a, b, f"{tag}a{i}", version, schedule)
            op = product(_half_power(s, e - 1), direction)
            coef *= 2
        else:
            op = direction
        terms.append(_Term(op, coef))
    return terms


def _terms_prod_affine(
    spec: ObjectiveSpec, X: EncodedOperator, P: float, version: str, schedule: DescentSchedule, tag: str
) -> list[_Term]:
    dim = X.dim
    if version == "v2" and np.any(spec.coeff_rows < 0):
        raise NegativeCoefficient("the second construction needs nonnegative rows")
    scalars = [
        _affine_scalar(X, a, b, f"{tag}a{i}", version, schedule)
        for i, (a, b) in enumerate(zip(spec.coeff_rows, spec.offsets))
    ]
    full = [_half_power(s, e) for s, e in zip(scalars, spec.exponents)]
    terms = []
    for i, (a, e) in enumerate(zip(spec.coeff_rows, spec.exponents)):
        if not np.any(a):
            terms.append(_Term(zero_operator(dim), 0.0))
            continue
        direction, norm = _row_direction(_pad(a, dim), f"{tag}a{i}")
        op = direction
        factor = 1.0
        for j in range(spec.K):
            if j != i:
                op = product(op, full[j])
                factor *= 2
        if e > 1:
            op = product(op, _half_power(scalars[i], e - 1))
            factor *= 2
        terms.append(_Term(op, spec.weight * e * norm * factor / P))
    return terms


def _terms(spec: ObjectiveSpec, X: EncodedOperator, P: float, version: str, schedule: DescentSchedule, tag: str):
    if spec.family is Family.SUM_POWERS:
        return _terms_sum_powers(spec, X, P, tag)
    if spec.family is Family.SUM_AFFINE_POWERS:
        return _terms_sum_affine(spec, X, P, version, schedule, tag)
    return _terms_prod_affine(spec, X, P, version, schedule, tag)


def _check_operand(spec: Objective, X: EncodedOperator) -> None:
    if not X.is_diagonal():
        raise ShapeError("X must be a diagonal encoded operator")
    if X.dim != numerics.next_pow2(spec.n):
        raise ShapeError(f"X has dimension {X.dim}, expected {numerics.next_pow2(spec.n)}")


def build_gradient(
    spec: Objective,
    X: EncodedOperator,
    version: str = "v1",
    schedule: DescentSchedule | None = None,
) -> tuple[EncodedOperator, float]:
    """Encode ``grad f(x) / scale`` and return it with ``scale = K P L``."""
    if version not in ("v1", "v2"):
        raise InvalidInput("version must be 'v1' or 'v2'")
    _check_operand(spec, X)
    schedule = schedule or DescentSchedule(eta=1.0, T=1, budget="trajectory")
    P = require_P(spec)
    terms: list[_Term] = []
    for idx, part in enumerate(spec.parts):
        tag = f"p{idx}." if len(spec.parts) > 1 else ""
        terms.extend(_terms(part, X, P, version, schedule, tag))
    L = max(1.0, max(abs(t.coef) for t in terms))
    scaled, signs = [], []
    for t in terms:
        scaled.append(rescale(t.op, abs(t.coef) / L) if t.coef else zero_operator(X.dim))
        signs.append(1 if t.coef >= 0 else -1)
    return linear_combine(scaled, signs), len(terms) * P * L


def _public_gradient(spec, X, version, schedule, family: Family) -> EncodedOperator:
    if not isinstance(spec, ObjectiveSpec) or spec.family is not family:
        raise WrongFamily(f"expected a {family.value} spec, got {getattr(spec, 'family', type(spec))}")
    G, scale = build_gradient(spec, X, version, schedule)
    schedule = schedule or DescentSchedule(eta=1.0, T=1, budget="trajectory")
    L = scale / (spec.K * require_P(spec))
    return rescale(G, L, schedule.delta, schedule.eps_amp)


def gradient_type1(spec: ObjectiveSpec, X: EncodedOperator, schedule: DescentSchedule | None = None) -> EncodedOperator:
    """Encode ``diag(grad f)/(K P)`` for a sum-of-powers spec.

    Raises ``AmplificationOutOfRange`` when ``||grad f||_inf / (K P)`` is too
    close to one for the final rescale (possible only when ``K = 1``).
    """
    return _public_gradient(spec, X, "v1", schedule, Family.SUM_POWERS)


def gradient_type2(
    spec: ObjectiveSpec, X: EncodedOperator, version: str = "v1", schedule: DescentSchedule | None = None
) -> EncodedOperator:
    """Encode ``diag(grad f)/(K P)`` for a sum of affine powers."""
    return _public_gradient(spec, X, version, schedule, Family.SUM_AFFINE_POWERS)


def gradient_type3(
    spec: ObjectiveSpec, X: EncodedOperator, version: str = "v1", schedule: DescentSchedule | None = None
) -> EncodedOperator:
    """Encode ``diag(grad f)/(K P)`` for a product of affine powers."""
    return _public_gradient(spec, X, version, schedule, Family.PROD_AFFINE_POWERS)


# ---------------------------------------------------------------- iteration


def descent_step(
    X: EncodedOperator,
    G: EncodedOperator,
    eta_eff: float,
    schedule: DescentSchedule,
    grad_scale: float,
) -> EncodedOperator:
    """Encode ``diag(x - eta_eff * grad f)`` given ``G = diag(grad f)/grad_scale``.

    The update is ``2 * (X - eta_eff*grad_scale*G)/2``; the intermediate
    half must have norm at most 1/4 so the result stays within norm 1/2.
    """
    if G.shape != X.shape:
        raise ShapeError("gradient and iterate encodings differ in shape")
    if not (eta_eff > 0 and grad_scale > 0):
        raise InvalidInput("eta_eff and grad_scale must be positive")
    step = rescale(G, eta_eff * grad_scale, schedule.delta, schedule.eps_amp)
    half = linear_combine([X, step], [1, -1])
    if 2 * half.norm() > 0.5 + NORM_TOL:
        raise NormBudgetExceeded(
            f"updated iterate has norm {2 * half.norm():.6g} > 1/2; lower eta or shrink x0"
        )
    return amplify(half, 2.0, schedule.delta, schedule.eps_amp)


@dataclass(frozen=True, eq=False)
class Iterate:
    t: int
    X: EncodedOperator
    shadow: np.ndarray
    grad_inf_norm: float
    value: float
    ledger: QueryLedger

    @property
    def encoded(self) -> np.ndarray:
        """Logical part of the encoded diagonal."""
        return np.real(np.diag(self.X.block))[: self.shadow.size]

    @property
    def shadow_dev(self) -> float:
        return float(np.max(np.abs(self.encoded - self.shadow)))


@dataclass(frozen=True, eq=False)
class DescentTrace:
    spec: Objective
    schedule: DescentSchedule
    P: float
    iterates: tuple[Iterate, ...] = field(default_factory=tuple)

    @property
    def final(self) -> Iterate:
        return self.iterates[-1]

    @property
    def solution(self) -> np.ndarray:
        return self.final.encoded

    @property
    def ledger(self) -> QueryLedger:
        return self.final.ledger

    def max_norm(self) -> float:
        return max(it.X.norm() for it in self.iterates)


def _snapshot(t: int, X: EncodedOperator, shadow: np.ndarray, spec: Objective) -> Iterate:
    g = spec.gradient(shadow)
    return Iterate(t, X, shadow.copy(), float(np.max(np.abs(g))), spec.value(shadow), X.ledger)


def run_descent(spec: Objective, schedule: DescentSchedule, version: str = "v1") -> DescentTrace:
    """Run ``schedule.T`` encoded descent steps and record every iterate.

    Errors inside an iteration are re-raised as :class:`StepError` carrying
    the iteration index.
    """
    P = require_P(spec)
    if schedule.budget == "worst_case" and schedule.eta > 1.0 / (2 * P * schedule.T) * (1 + 1e-12):
        raise InvalidSchedule(
            f"eta = {schedule.eta:.6g} exceeds 1/(2PT) = {1 / (2 * P * schedule.T):.6g}"
        )
    X = initial_operator(schedule, spec)
    shadow = schedule.initial_point(spec.n, P)
    iterates = [_snapshot(0, X, shadow, spec)]
    for t in range(1, schedule.T + 1):
        if schedule.early_stop_tol is not None and iterates[-1].grad_inf_norm <= schedule.early_stop_tol:
            break
        try:
            G, scale = build_gradient(spec, X, version, schedule)
            X = descent_step(X, G, schedule.eta, schedule, scale)
        except SimulationError as exc:
            raise StepError(t, exc) from exc
        shadow = shadow - schedule.eta * spec.gradient(shadow)
        iterates.append(_snapshot(t, X, shadow, spec))
    return DescentTrace(spec, schedule, P, tuple(iterates))


def extract_state(X: EncodedOperator, n: int | None = None, bound: float | None = None) -> tuple[np.ndarray, float]:
    """Normalized logical diagonal and the probability of the flag outcome.

    ``p0 = (1/n) sum_i |x_i|^2`` over the ``n`` logical coordinates. When
    ``bound`` is given (for example ``(eta P T)**2`` after a scaled-identity
    start) a smaller ``p0`` raises :class:`ExtractionBoundViolated`.
    """
    if not X.is_diagonal():
        raise ShapeError("extraction needs a diagonal operator")
    n = X.dim if n is None else n
    if not (1 <= n <= X.dim):
        raise InvalidInput(f"logical dimension {n} outside 1..{X.dim}")
    x = np.diag(X.block)[:n]
    norm = float(np.linalg.norm(x))
    if norm == 0:
        raise ZeroVector("cannot extract a state from a zero diagonal")
    p0 = norm**2 / n
    if bound is not None and p0 < bound - 1e-12:
        raise ExtractionBoundViolated(f"p0 = {p0:.6g} below the guaranteed {bound:.6g}")
    return x / norm, p0


def step_query_ratios(trace: DescentTrace) -> list[float]:
    """Primitive-query growth factor between consecutive iterates."""
    totals = [it.ledger.total() for it in trace.iterates]
    return [b / a for a, b in zip(totals, totals[1:]) if a]


__all__: Sequence[str] = (
    "CompositeObjective",
    "DescentSchedule",
    "DescentTrace",
    "Iterate",
    "build_gradient",
    "default_schedule",
    "descent_step",
    "extract_state",
    "gradient_type1",
    "gradient_type2",
    "gradient_type3",
    "initial_operator",
    "require_P",
    "run_descent",
    "step_query_ratios",
)
