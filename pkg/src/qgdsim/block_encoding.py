"""Logical block-encoding algebra with a query ledger.

An :class:`EncodedOperator` stores the top-left block of a notional unitary
(already including every subnormalization) plus metadata. Each operation
returns a new operator whose ledger is the input ledgers multiplied by the
number of times the construction invokes them, plus the gates it adds itself.
Dilations to explicit unitaries exist only for verification
(:func:`qgdsim.numerics.dilate`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from . import numerics
from .errors import (
    AmplificationOutOfRange,
    InvalidInput,
    InvalidScale,
    NormViolation,
    NotNormalized,
    NotUnitary,
    PolynomialOutOfBounds,
    ShapeError,
    UnsupportedBlock,
)

NORM_SLACK = 1e-9
DEFAULT_DELTA = 0.1
DEFAULT_EPS_AMP = 1e-6
# Two contractions never differ by more than 2 in operator norm, so larger
# accumulated bounds carry no information and are clipped.
EPS_CEILING = 2.0


@dataclass(frozen=True)
class QueryLedger:
    """Cost counters for a circuit.

    ``primitive_queries`` maps a source label (a state-preparation unitary, the
    initial operator, ...) to how many times the circuit calls it. Counts are
    Python ints and may grow far beyond 64 bits for long descents.
    """

    primitive_queries: Mapping[str, int] = field(default_factory=dict)
    two_qubit_gates: int = 0
    classical_preprocessing: int = 0

    def __post_init__(self):
        q = {str(k): int(v) for k, v in dict(self.primitive_queries).items() if int(v) != 0}
        if any(v < 0 for v in q.values()) or self.two_qubit_gates < 0 or self.classical_preprocessing < 0:
            raise InvalidInput("ledger counts must be nonnegative")
        object.__setattr__(self, "primitive_queries", MappingProxyType(dict(sorted(q.items()))))

    @classmethod
    def primitive(cls, label: str, count: int = 1, gates: int = 0) -> "QueryLedger":
        return cls({label: count}, two_qubit_gates=gates)

    def __add__(self, other: "QueryLedger") -> "QueryLedger":
        q = dict(self.primitive_queries)
        for k, v in other.primitive_queries.items():
            q[k] = q.get(k, 0) + v
        return QueryLedger(
            q,
            self.two_qubit_gates + other.two_qubit_gates,
            self.classical_preprocessing + other.classical_preprocessing,
        )

    def times(self, k: int) -> "QueryLedger":
        return QueryLedger(
            {name: v * k for name, v in self.primitive_queries.items()},
            self.two_qubit_gates * k,
            self.classical_preprocessing * k,
        )

    def plus(self, gates: int = 0, classical: int = 0) -> "QueryLedger":
        return QueryLedger(self.primitive_queries, self.two_qubit_gates + gates, self.classical_preprocessing + classical)

    def total(self) -> int:
        return sum(self.primitive_queries.values())

    def to_dict(self) -> dict:
        return {
            "primitive_queries": dict(self.primitive_queries),
            "primitive_total": self.total(),
            "two_qubit_gates": self.two_qubit_gates,
            "classical_preprocessing": self.classical_preprocessing,
        }


def merge(ledgers: Sequence[QueryLedger]) -> QueryLedger:
    out = QueryLedger()
    for led in ledgers:
        out = out + led
    return out


@dataclass(frozen=True)
class EncodedOperator:
    """A logically block-encoded matrix.

    ``block`` is the encoded matrix itself (norm at most one), ``eps`` an upper
    bound on the distance to the ideal block, ``ancillas`` the ancilla count of
    the notional circuit.
    """

    block: np.ndarray
    ancillas: int = 0
    eps: float = 0.0
    ledger: QueryLedger = field(default_factory=QueryLedger)

    def __post_init__(self):
        b = numerics.as_matrix(self.block)
        b.setflags(write=False)
        object.__setattr__(self, "block", b)
        if self.ancillas < 0:
            raise InvalidInput("ancilla count must be nonnegative")
        if not (self.eps >= 0):
            raise InvalidInput("eps must be nonnegative")
        object.__setattr__(self, "eps", min(float(self.eps), EPS_CEILING))
        norm = numerics.operator_norm(b)
        if norm > 1 + NORM_SLACK:
            raise NormViolation(f"encoded block has norm {norm:.12g} > 1")

    @property
    def dim(self) -> int:
        return self.block.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.block.shape

    def diagonal(self) -> np.ndarray:
        return np.diag(self.block).copy()

    def is_diagonal(self, tol: float = 0.0) -> bool:
        return self.block.shape[0] == self.block.shape[1] and numerics.is_diagonal(self.block, tol)

    def norm(self) -> float:
        return numerics.operator_norm(self.block)


def _same_shape(ops: Sequence[EncodedOperator]) -> tuple[int, int]:
    shapes = {op.shape for op in ops}
    if len(shapes) != 1:
        raise ShapeError(f"blocks have mismatched shapes {sorted(shapes)}")
    return shapes.pop()


def from_unitary(u, label: str = "U") -> EncodedOperator:
    """A unitary block-encodes itself with no ancillas; charges one query."""
    m = numerics.as_matrix(u, square=True)
    if numerics.unitarity_defect(m) > 1e-9:
        raise NotUnitary("matrix is not unitary within 1e-9")
    return EncodedOperator(m, 0, 0.0, QueryLedger.primitive(label))


def identity(dim: int) -> EncodedOperator:
    """Identity on ``dim`` states. Free: it needs no oracle and no gates."""
    return EncodedOperator(np.eye(dim), 0, 0.0, QueryLedger())


def zero_operator(dim: int) -> EncodedOperator:
    """The zero block (flag an ancilla and never unflag it). Free."""
    return EncodedOperator(np.zeros((dim, dim)), 1, 0.0, QueryLedger())


def scale_down(e: EncodedOperator, p: float) -> EncodedOperator:
    """Encode ``block / p`` by mixing in a one-qubit rotation ancilla."""
    if not (p > 1):
        raise InvalidScale(f"scale factor must exceed 1, got {p}")
    return EncodedOperator(e.block / p, e.ancillas + 1, e.eps / p, e.ledger.plus(gates=1))


def linear_combine(ops: Sequence[EncodedOperator], signs: Sequence[int]) -> EncodedOperator:
    """Encode ``(1/m) sum_i signs_i * block_i``, using each input once."""
    if not ops:
        raise InvalidInput("linear_combine needs at least one operator")
    if len(signs) != len(ops):
        raise ShapeError("one sign per operator is required")
    if any(s not in (1, -1) for s in signs):
        raise InvalidInput("signs must be +1 or -1")
    _same_shape(ops)
    m = len(ops)
    acc = np.zeros_like(ops[0].block, dtype=np.result_type(*[op.block.dtype for op in ops]))
    for s, op in zip(signs, ops):
        acc = acc + s * op.block
    select_qubits = numerics.log2_int(m)
    # PREP + PREP^dagger on the select register, plus one controlled call per term.
    gates = 2 * max(1, select_qubits) + m
    return EncodedOperator(
        acc / m,
        max(op.ancillas for op in ops) + select_qubits,
        sum(op.eps for op in ops) / m,
        merge([op.ledger for op in ops]).plus(gates=gates),
    )


def product(e1: EncodedOperator, e2: EncodedOperator) -> EncodedOperator:
    """Encode ``block1 @ block2``, using each input once."""
    if e1.shape[1] != e2.shape[0]:
        raise ShapeError(f"cannot multiply {e1.shape} by {e2.shape}")
    return EncodedOperator(
        e1.block @ e2.block,
        e1.ancillas + e2.ancillas,
        e1.eps + e2.eps,
        (e1.ledger + e2.ledger).plus(gates=1),
    )


def tensor(e1: EncodedOperator, e2: EncodedOperator) -> EncodedOperator:
    """Encode ``block1 (x) block2``: parallel single uses plus a constant SWAP layer."""
    return EncodedOperator(
        np.kron(e1.block, e2.block),
        e1.ancillas + e2.ancillas,
        e1.eps + e2.eps,
        (e1.ledger + e2.ledger).plus(gates=3),
    )


def amplification_rounds(gamma: float, delta: float, eps_amp: float) -> int:
    """Number of uses ``ceil((gamma/delta) * ln(gamma/eps_amp))`` (constant one)."""
    return math.ceil((gamma / delta) * math.log(gamma / eps_amp))


def amplify(
    e: EncodedOperator,
    gamma: float,
    delta: float = DEFAULT_DELTA,
    eps_amp: float = DEFAULT_EPS_AMP,
) -> EncodedOperator:
    """Uniform singular-value amplification by ``gamma``.

    Simulated exactly. The guarantee ``gamma * ||block|| <= 1 - delta`` is
    enforced. The error bound becomes ``eps*gamma + eps_amp*||block'||``.
    """
    if not (gamma > 1):
        raise InvalidScale(f"amplification factor must exceed 1, got {gamma}")
    if not (0 < delta < 0.5 and 0 < eps_amp < 0.5):
        raise InvalidInput("delta and eps_amp must lie in (0, 1/2)")
    norm = e.norm()
    if gamma * norm > (1 - delta) + 1e-12:
        raise AmplificationOutOfRange(
            f"gamma*||A|| = {gamma * norm:.6g} exceeds 1 - delta = {1 - delta:.6g}"
        )
    m = amplification_rounds(gamma, delta, eps_amp)
    block = gamma * e.block
    return EncodedOperator(
        block,
        e.ancillas + 1,
        e.eps * gamma + eps_amp * gamma * norm,
        e.ledger.times(m).plus(gates=m),
    )


def rescale(
    e: EncodedOperator,
    factor: float,
    delta: float = DEFAULT_DELTA,
    eps_amp: float = DEFAULT_EPS_AMP,
) -> EncodedOperator:
    """Multiply the block by a positive ``factor`` with the cheaper primitive."""
    if not (factor > 0):
        raise InvalidScale(f"rescale factor must be positive, got {factor}")
    if abs(factor - 1.0) <= 1e-15:
        return e
    if factor < 1:
        return scale_down(e, 1.0 / factor)
    return amplify(e, factor, delta, eps_amp)


def chebyshev_nodes(d: int) -> np.ndarray:
    """``10*d + 1`` Chebyshev-Lobatto points on ``[-1, 1]``."""
    k = max(1, 10 * d)
    return np.cos(np.pi * np.arange(k + 1) / k)


def _trim(coeffs) -> np.ndarray:
    c = np.array(coeffs, dtype=float).ravel()
    if c.size == 0 or not np.all(np.isfinite(c)):
        raise InvalidInput("polynomial needs finite coefficients")
    nz = np.flatnonzero(c)
    return c[: nz[-1] + 1] if nz.size else c[:1]


def qsvt_poly(e: EncodedOperator, coeffs, bound: float = 0.5) -> EncodedOperator:
    """Apply the real polynomial ``sum_k coeffs[k] x**k`` to a Hermitian block.

    The bound ``|P| <= 1/2`` is checked at Chebyshev nodes spanning the block's
    spectral interval ``[-||block||, ||block||]`` (margin 1e-9). The
    polynomial is applied entrywise for diagonal blocks and through an
    eigendecomposition otherwise. Costs ``d`` uses of ``e``.
    """
    c = _trim(coeffs)
    d = c.size - 1
    b = e.block
    if not numerics.is_hermitian(b, 1e-12):
        raise UnsupportedBlock("QSVT is only simulated for Hermitian blocks")
    radius = e.norm()
    samples = np.polynomial.polynomial.polyval(radius * chebyshev_nodes(d), c)
    peak = float(np.max(np.abs(samples)))
    if peak > bound + 1e-9:
        raise PolynomialOutOfBounds(f"max |P| = {peak:.6g} on the spectral interval exceeds {bound}")
    if numerics.is_diagonal(b):
        diag = np.polynomial.polynomial.polyval(np.real(np.diag(b)), c)
        out = np.diag(diag)
    else:
        w, v = np.linalg.eigh((b + b.conj().T) / 2)
        out = (v * np.polynomial.polynomial.polyval(w, c)) @ v.conj().T
    uses = max(d, 0)
    return EncodedOperator(
        out,
        e.ancillas + 2,
        4 * d * math.sqrt(e.eps) if d else 0.0,
        e.ledger.times(uses).plus(gates=2 * uses + 1),
    )


def encode_density(
    psi,
    dims: tuple[int, int],
    trace_out: int = 0,
    prep: QueryLedger | None = None,
    label: str = "U_psi",
) -> EncodedOperator:
    """Encode the reduced density matrix of the pure state ``psi``.

    The preparation circuit (ledger ``prep``, or one query to ``label``) is
    used twice, once forward and once inverted.
    """
    x = numerics.as_vector(psi)
    if abs(np.linalg.norm(x) - 1) > 1e-9:
        raise NotNormalized(f"state norm {np.linalg.norm(x):.12g} != 1")
    rho = numerics.partial_trace(x, dims, trace_out)
    source = prep if prep is not None else QueryLedger.primitive(label)
    qubits = numerics.log2_int(dims[0] * dims[1])
    return EncodedOperator(rho, qubits + 1, 0.0, source.times(2).plus(gates=qubits + 1))
