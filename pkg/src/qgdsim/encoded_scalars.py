"""Encoded scalars, entries and slices built from diagonal encodings.

The inner-product constructions return ``(a^T x + b) * I`` over the padded
dimension of ``X``. Both go through a Hadamard-test density matrix
``diag(p0, p1)`` whose population difference is the overlap, then subtract
``I/2``, lift to the full register and add the offset before a final
amplification.
"""

from __future__ import annotations

import math
import numpy as np

from . import numerics
from .block_encoding import (
    DEFAULT_DELTA,
    DEFAULT_EPS_AMP,
    EncodedOperator,
    QueryLedger,
    encode_density,
    identity,
    linear_combine,
    product,
    rescale,
    scale_down,
    tensor,
    zero_operator,
)
from .errors import BlockIndexError, InvalidInput, NegativeCoefficient, OutOfSpectralRange, ShapeError
from .objective import SupportSet
from .state_prep import PreparedState, prepare


def _require_diagonal(*ops: EncodedOperator) -> None:
    for op in ops:
        if not op.is_diagonal():
            raise ShapeError("expected a diagonal encoded operator")
    if len({op.dim for op in ops}) > 1:
        raise ShapeError("diagonal operators must share a dimension")


def hadamard_density(overlap: float, source: QueryLedger) -> EncodedOperator:
    """Encoded ``diag(p0, p1)`` with ``p0 - p1 = overlap``.

    ``source`` is the ledger of the controlled circuit inside the test; the
    density encoding calls it forward and inverted.
    """
    if abs(overlap) > 1 + 1e-12:
        raise InvalidInput(f"overlap {overlap} outside [-1, 1]")
    o = float(np.clip(overlap, -1.0, 1.0))
    p0, p1 = (1 + o) / 2, (1 - o) / 2
    # Purification sqrt(p0)|0>|0> + sqrt(p1)|1>|1>; trace the second qubit.
    psi = np.array([math.sqrt(p0), 0.0, 0.0, math.sqrt(p1)])
    return encode_density(psi, (2, 2), trace_out=1, prep=source.plus(gates=2))


def _lift_overlap(rho: EncodedOperator, dim: int) -> EncodedOperator:
    """From ``diag(p0, p1)`` to ``((p0 - p1)/4) * I_dim``."""
    half = scale_down(identity(2), 2.0)
    centered = linear_combine([rho, half], [1, -1])  # diag(o/4, -o/4)
    return slice_direct_sum(tensor(centered, identity(dim)), 0, dim)


def _add_offset(
    scalar: EncodedOperator,
    kappa: float,
    b: float,
    delta: float,
    eps_amp: float,
) -> EncodedOperator:
    """Given ``scalar = (s/kappa) I``, return ``(s + b) I``."""
    dim = scalar.dim
    if b == 0:
        shift = zero_operator(dim)
        sign = 1
    else:
        ratio = abs(b) / kappa
        if ratio > 1:
            scalar = scale_down(scalar, ratio)
            kappa *= ratio
            shift = identity(dim)
        else:
            shift = rescale(identity(dim), ratio)
        sign = 1 if b > 0 else -1
    combined = linear_combine([scalar, shift], [1, sign])  # (s + b) / (2 kappa)
    return rescale(combined, 2 * kappa, delta, eps_amp)


def inner_product_v1(
    x: EncodedOperator,
    a: EncodedOperator,
    support: SupportSet,
    b: float = 0.0,
    scale: float = 1.0,
    delta: float = DEFAULT_DELTA,
    eps_amp: float = DEFAULT_EPS_AMP,
) -> EncodedOperator:
    """Encode ``(a^T x + b) * I`` from encodings of ``diag(x)`` and ``diag(a)/scale``.

    The Hadamard test runs on the uniform state over ``support``, so the
    measured overlap carries a ``1/s_i`` factor that the final amplification
    (by ``8 * s_i * scale``) removes. An empty support is treated as one
    dummy index with zero overlap. Raises ``AmplificationOutOfRange`` when
    ``|a^T x + b| > 1 - delta``.
    """
    _require_diagonal(x, a)
    dim = x.dim
    if any(i >= dim for i in support.indices):
        raise InvalidInput("support index outside the operator dimension")
    m = product(a, x)
    s_i = max(1, support.size)
    if support.size:
        phi = np.zeros(dim)
        phi[list(support.indices)] = 1.0 / math.sqrt(support.size)
        overlap = float(np.real(phi @ m.block @ phi))
    else:
        overlap = 0.0
    rho = hadamard_density(overlap, m.ledger.plus(gates=2 * numerics.log2_int(dim)))
    lifted = _lift_overlap(rho, dim)
    return _add_offset(lifted, 4.0 * s_i * scale, float(b), delta, eps_amp)


def inner_product_v2(
    x: EncodedOperator,
    sqrt_a,
    b: float = 0.0,
    mass: float | None = None,
    delta: float = DEFAULT_DELTA,
    eps_amp: float = DEFAULT_EPS_AMP,
) -> EncodedOperator:
    """Encode ``(a^T x + b) * I`` from ``diag(x)`` and a state carrying ``sqrt(a)``.

    ``sqrt_a`` is either a :class:`PreparedState` with amplitudes
    ``sqrt(a)/sqrt(||a||_1)`` (pass ``mass = ||a||_1``; default 1) or the raw
    nonnegative row ``a`` itself. The overlap between ``X U|0>`` and ``U|0>``
    is ``a^T x / ||a||_1``, so the final amplification removes
    ``8 * ||a||_1`` whatever the support size. ``X`` and the preparation are
    each used twice.
    """
    _require_diagonal(x)
    if isinstance(sqrt_a, PreparedState):
        state = sqrt_a
        if mass is None:
            mass = 1.0
    else:
        row = numerics.as_vector(sqrt_a)
        if np.iscomplexobj(row) or np.any(row < 0):
            raise NegativeCoefficient("the second construction needs nonnegative coefficients")
        if row.size > x.dim:
            raise ShapeError("coefficient row longer than the operator dimension")
        mass = float(row.sum())
        state = prepare(np.sqrt(row), label="sqrt_a") if mass > 0 else None
    if mass < 0:
        raise InvalidInput("mass must be nonnegative")
    if state is None or mass == 0:
        rho = hadamard_density(0.0, x.ledger.plus(gates=2))
        return _add_offset(_lift_overlap(rho, x.dim), 4.0, float(b), delta, eps_amp)
    r = state.amplitudes
    if np.iscomplexobj(r) or np.any(r < -1e-15):
        raise NegativeCoefficient("the second construction needs nonnegative amplitudes")
    if r.size > x.dim:
        raise ShapeError("prepared state is wider than X")
    amps = np.zeros(x.dim)
    amps[: r.size] = r
    overlap = float(amps @ (np.real(np.diag(x.block)) * amps))
    # Controlled X and controlled U(sqrt a) inside the test.
    source = x.ledger + QueryLedger.primitive(state.label)
    rho = hadamard_density(overlap, source.plus(gates=2))
    return _add_offset(_lift_overlap(rho, x.dim), 4.0 * mass, float(b), delta, eps_amp)


def single_entry(x: EncodedOperator, j: int, k: int) -> EncodedOperator:
    """Encode ``x_j |k><k|`` using ``X`` twice (0-based indices)."""
    _require_diagonal(x)
    n = x.dim
    if not (0 <= j < n and 0 <= k < n):
        raise BlockIndexError(f"indices ({j}, {k}) outside 0..{n - 1}")
    block = np.zeros_like(x.block)
    block[k, k] = x.block[j, j]
    return EncodedOperator(block, x.ancillas + 1, 2 * x.eps, x.ledger.times(2).plus(gates=4 * numerics.log2_int(n) + 2))


def slice_direct_sum(a: EncodedOperator, i: int, block_dim: int) -> EncodedOperator:
    """The ``i``-th diagonal block (0-based) of a block-diagonal operator.

    Projecting the block-index register onto ``|i>`` turns an encoding of
    ``(+)_i W_i`` into an encoding of ``W_i`` with one use.
    """
    n = a.dim
    if block_dim < 1 or n % block_dim:
        raise ShapeError(f"dimension {n} is not a multiple of {block_dim}")
    count = n // block_dim
    if not (0 <= i < count):
        raise BlockIndexError(f"block {i} outside 0..{count - 1}")
    mask = np.kron(np.eye(count), np.ones((block_dim, block_dim)))
    if np.max(np.abs(a.block * (1 - mask)), initial=0.0) > 1e-12:
        raise ShapeError("operator is not block diagonal")
    sl = slice(i * block_dim, (i + 1) * block_dim)
    return EncodedOperator(
        a.block[sl, sl],
        a.ancillas + numerics.log2_int(count),
        a.eps,
        a.ledger.plus(gates=2 * numerics.log2_int(count)),
    )


def positive_power(
    e: EncodedOperator,
    c: float,
    kappa: float | None = None,
    eps: float = 1e-6,
) -> EncodedOperator:
    """Encode ``block**c / 2`` entrywise for a diagonal block in ``[1/kappa, 1]``.

    Charges ``ceil(kappa * ln(kappa/eps)**2)`` uses of ``e``.
    """
    _require_diagonal(e)
    if not (0 < c < 1):
        raise InvalidInput("exponent must lie in (0, 1)")
    d = np.real(np.diag(e.block))
    if kappa is None:
        if np.any(d <= 0):
            raise OutOfSpectralRange("entries must be positive")
        kappa = float(1.0 / d.min())
    if kappa < 1:
        raise InvalidInput("kappa must be at least 1")
    if np.any(d < 1.0 / kappa - 1e-12) or np.any(d > 1 + 1e-12):
        raise OutOfSpectralRange(f"entries must lie in [1/{kappa:g}, 1]")
    uses = math.ceil(kappa * math.log(max(kappa / eps, math.e)) ** 2)
    return EncodedOperator(
        np.diag(np.clip(d, 0, None) ** c / 2),
        e.ancillas + 2,
        eps + e.eps,
        e.ledger.times(uses).plus(gates=2 * uses),
    )
