"""Polynomial-activation networks: loss expansion and encoded forward pass.

Parameters are flattened layer by layer, each layer as ``W`` row-major then
``b``. Hidden layers apply the activation polynomial; the output layer is a
single linear node.

The loss expansion writes ``(1/M) sum_s (y_hat_s - y_s)^2`` as a weighted sum
of products of affine forms in the parameters. First-layer pre-activations
are affine in ``(W, b)``; every later weight and bias enters as a unit form.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import numerics
from ..block_encoding import (
    DEFAULT_DELTA,
    EncodedOperator,
    QueryLedger,
    amplify,
    identity,
    linear_combine,
    product,
    qsvt_poly,
    scale_down,
)
from ..encoded_scalars import inner_product_v1, slice_direct_sum
from ..errors import ActivationOverflow, AmplificationOutOfRange, ExpansionTooLarge, InvalidInput, ShapeError
from ..objective import CompositeObjective, Family, ObjectiveSpec, SupportSet
from ..oracle import coefficient_bound
from ..qgd import DescentTrace
from ..state_prep import encode_vector
from .common import Dataset, descend_from

QUADRATIC_RELU = (0.0, 0.5, 0.625)
QUARTIC_RELU = (0.0, 0.5, 35 / 32, 0.0, -21 / 32)
DEFAULT_TERM_CAP = 100_000


def term_cap() -> int:
    raw = os.environ.get("QGD_CAP_TERMS")
    return int(float(raw)) if raw else DEFAULT_TERM_CAP


def peak_on_unit_interval(coeffs: Sequence[float]) -> float:
    """``max |p(t)|`` over ``[-1, 1]`` from endpoints and critical points."""
    p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
    cands = [-1.0, 1.0] + [float(r.real) for r in p.deriv().roots() if abs(r.imag) < 1e-12 and abs(r.real) <= 1]
    return max(abs(float(p(t))) for t in cands)


@dataclass(frozen=True)
class NetworkArch:
    n: int
    p: int
    m: int
    activation: tuple[float, ...] = QUADRATIC_RELU

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.p < 0:
            raise InvalidInput("need n >= 1, m >= 1 and p >= 0")
        object.__setattr__(self, "activation", tuple(float(c) for c in self.activation))

    def layer_shapes(self) -> list[tuple[int, int]]:
        shapes = []
        width = self.n
        for _ in range(self.p):
            shapes.append((self.m, width))
            width = self.m
        shapes.append((1, width))
        return shapes

    @property
    def param_count(self) -> int:
        return sum(r * c + r for r, c in self.layer_shapes())

    @property
    def block_dim(self) -> int:
        """Width of one row block in the direct-sum parameter encoding."""
        return numerics.next_pow2(max(self.n, self.m) + 1)

    def unflatten(self, theta) -> list[tuple[np.ndarray, np.ndarray]]:
        t = np.asarray(theta, dtype=float).ravel()
        if t.size != self.param_count:
            raise ShapeError(f"expected {self.param_count} parameters, got {t.size}")
        layers, pos = [], 0
        for r, c in self.layer_shapes():
            W = t[pos : pos + r * c].reshape(r, c)
            pos += r * c
            b = t[pos : pos + r]
            pos += r
            layers.append((W, b))
        return layers

    def offsets(self) -> list[tuple[int, int]]:
        """Start of ``W`` and of ``b`` for every layer in the flat vector."""
        out, pos = [], 0
        for r, c in self.layer_shapes():
            out.append((pos, pos + r * c))
            pos += r * c + r
        return out

    def predicted_terms(self, M: int) -> int:
        return M * self.m ** (2**self.p)


# ------------------------------------------------------------- expansion

# A polynomial is a dict from a monomial key to its coefficient. A key is a
# sorted tuple of (form id, exponent); the empty key is the constant.


class _Forms:
    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[np.ndarray] = []
        self.offsets: list[float] = []
        self._index: dict[bytes, int] = {}

    def add(self, row: np.ndarray, offset: float = 0.0) -> int:
        key = np.append(row, offset).tobytes()
        if key not in self._index:
            self._index[key] = len(self.rows)
            self.rows.append(row.copy())
            self.offsets.append(float(offset))
        return self._index[key]

    def unit(self, j: int) -> int:
        row = np.zeros(self.dim)
        row[j] = 1.0
        return self.add(row)


def _mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for k1, c1 in p.items():
        for k2, c2 in q.items():
            merged = dict(k1)
            for f, e in k2:
                merged[f] = merged.get(f, 0) + e
            key = tuple(sorted(merged.items()))
            out[key] = out.get(key, 0.0) + c1 * c2
    return out


def _add(p: dict, q: dict, scale: float = 1.0) -> dict:
    out = dict(p)
    for k, c in q.items():
        out[k] = out.get(k, 0.0) + scale * c
    return out


def _apply(coeffs: Sequence[float], z: dict) -> dict:
    out: dict = {(): coeffs[0]} if coeffs[0] else {}
    power: dict = {(): 1.0}
    for c in coeffs[1:]:
        power = _mul(power, z)
        if c:
            out = _add(out, power, c)
    return out


def _symbolic_output(arch: NetworkArch, forms: _Forms, x: np.ndarray) -> dict:
    offs = arch.offsets()
    shapes = arch.layer_shapes()
    r0, c0 = shapes[0]
    w0, b0 = offs[0]
    pre = []
    for q in range(r0):
        row = np.zeros(arch.param_count)
        row[w0 + q * c0 : w0 + (q + 1) * c0] = x
        row[b0 + q] = 1.0
        pre.append({((forms.add(row), 1),): 1.0})
    if arch.p == 0:
        return pre[0]
    h = [_apply(arch.activation, z) for z in pre]
    for layer in range(1, arch.p + 1):
        (r, c), (w, b) = shapes[layer], offs[layer]
        z = []
        for q in range(r):
            acc = {((forms.unit(b + q), 1),): 1.0}
            for k in range(c):
                acc = _add(acc, _mul({((forms.unit(w + q * c + k), 1),): 1.0}, h[k]))
            z.append(acc)
        h = z if layer == arch.p else [_apply(arch.activation, zz) for zz in z]
    return h[0]


def nn_loss_objective(arch: NetworkArch, data: Dataset, cap: int | None = None) -> CompositeObjective:
    """Expanded mean squared error as a sum of weighted products of affine forms.

    Raises :class:`ExpansionTooLarge` when ``M * m**(2**p)`` exceeds the cap
    (default 1e5, overridable through ``QGD_CAP_TERMS``).
    """
    if data.labels is None:
        raise InvalidInput("network training needs targets")
    if data.n != arch.n:
        raise ShapeError(f"data has {data.n} inputs, network expects {arch.n}")
    cap = term_cap() if cap is None else cap
    predicted = arch.predicted_terms(data.M)
    if predicted > cap:
        raise ExpansionTooLarge(f"M * m^(2^p) = {predicted} exceeds the cap {cap}")
    forms = _Forms(arch.param_count)
    loss: dict = {}
    for x, y in zip(data.points, data.labels):
        out = _symbolic_output(arch, forms, x)
        resid = _add(out, {(): -float(y)})
        loss = _add(loss, _mul(resid, resid), 1.0 / data.M)
    constant = 0.0
    parts = []
    for key, coef in sorted(loss.items()):
        if not key:
            constant += coef
            continue
        if coef == 0:
            continue
        ids = [f for f, _ in key]
        parts.append(
            ObjectiveSpec(
                Family.PROD_AFFINE_POWERS,
                np.array([forms.rows[f] for f in ids]),
                np.array([forms.offsets[f] for f in ids]),
                [e for _, e in key],
                weight=coef,
            )
        )
    if not parts:
        parts.append(ObjectiveSpec(Family.SUM_POWERS, np.zeros((1, arch.param_count)), exponents=[1]))
    obj = CompositeObjective(
        tuple(parts),
        constant=constant,
        meta={"task": "network", "expansion_terms": len(parts), "predicted_terms": predicted},
    )
    return obj.with_P(coefficient_bound(obj))


def train_network(arch: NetworkArch, data: Dataset, T: int, theta0=None, cap: int | None = None) -> DescentTrace:
    spec = nn_loss_objective(arch, data, cap)
    start = np.zeros(arch.param_count) if theta0 is None else np.asarray(theta0, dtype=float)
    return descend_from(spec, T, start)


# ------------------------------------------------------------- encoded forward


def encode_network_params(arch: NetworkArch, theta, label: str = "U_theta") -> EncodedOperator:
    """Direct sum of one diagonal block per node: ``[W_q, 0, ..., 2 b_q]``.

    Blocks are ordered hidden layer by hidden layer, node by node, then the
    output node; the block count is padded to a power of two with zeros.
    """
    D = arch.block_dim
    rows = []
    for W, b in arch.unflatten(theta):
        for q in range(W.shape[0]):
            r = np.zeros(D)
            r[: W.shape[1]] = W[q]
            r[D - 1] = 2 * b[q]
            rows.append(r)
    blocks = numerics.next_pow2(len(rows))
    flat = np.zeros(blocks * D)
    flat[: len(rows) * D] = np.concatenate(rows)
    # encode_vector amplifies diag(flat), so entries must stay below 1 - delta.
    if np.max(np.abs(flat)) > 1 - DEFAULT_DELTA:
        raise InvalidInput(f"weights and doubled biases must lie within {1 - DEFAULT_DELTA:g} in magnitude")
    return encode_vector(flat, label=label)


def _slot_projector(D: int, k: int) -> EncodedOperator:
    """``|k><k|`` as ``(I - R_k)/2`` with the reflection ``R_k = I - 2|k><k|``."""
    refl = np.eye(D)
    refl[k, k] = -1.0
    R = EncodedOperator(refl, 0, 0.0, QueryLedger().plus(gates=2 * numerics.log2_int(D) + 1))
    return linear_combine([identity(D), R], [1, -1])


def _augmented_input(h: np.ndarray, D: int) -> np.ndarray:
    out = np.zeros(D)
    out[: h.size] = h
    out[D - 1] = 0.5
    return out


def _node_value(H: EncodedOperator, params: EncodedOperator, block: int, D: int) -> EncodedOperator:
    row = slice_direct_sum(params, block, D)
    support = SupportSet.of(np.diag(row.block))
    try:
        return inner_product_v1(H, row, support, 0.0)
    except AmplificationOutOfRange as exc:
        raise ActivationOverflow(f"pre-activation of block {block} out of range: {exc}") from exc


@dataclass(frozen=True, eq=False)
class ForwardResult:
    output: float
    probability: float
    ledger: QueryLedger


def nn_forward_encoded(arch: NetworkArch, params: EncodedOperator, x) -> ForwardResult:
    D = arch.block_dim
    xv = np.asarray(x, dtype=float).ravel()
    if xv.size != arch.n:
        raise ShapeError(f"input has {xv.size} entries, expected {arch.n}")
    if np.max(np.abs(xv), initial=0.0) > 1 - DEFAULT_DELTA:
        raise InvalidInput(f"inputs must lie within {1 - DEFAULT_DELTA:g} in magnitude")
    if params.dim % D:
        raise ShapeError("parameter encoding does not match the architecture")
    act = np.asarray(arch.activation)
    c = 2 * peak_on_unit_interval(act)
    H = encode_vector(_augmented_input(xv, D), label="U_input")
    for layer in range(arch.p):
        terms = []
        for q in range(arch.m):
            s = _node_value(H, params, layer * arch.m + q, D)
            sigma = qsvt_poly(s, act / c)
            terms.append(product(sigma, _slot_projector(D, q)))
        terms.append(scale_down(_slot_projector(D, D - 1), 2 * c))
        mixed = linear_combine(terms, [1] * len(terms))
        try:
            H = amplify(mixed, c * (arch.m + 1))
        except AmplificationOutOfRange as exc:
            raise ActivationOverflow(f"layer {layer + 1} activations out of range: {exc}") from exc
    s = _node_value(H, params, arch.p * arch.m, D)
    amp_op = scale_down(s, 2 * arch.m)
    amp = float(np.real(amp_op.block[0, 0]))
    prob = amp**2
    # The sign comes from interfering the readout with a reference branch.
    y = 2 * arch.m * np.sign(amp) * np.sqrt(prob)
    return ForwardResult(float(y), prob, amp_op.ledger)


def nn_forward_quantum(arch: NetworkArch, params: EncodedOperator, x) -> float:
    """Network output recovered from the final readout probability."""
    return nn_forward_encoded(arch, params, x).output
