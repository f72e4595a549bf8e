"""Amplitude-level state preparation and diagonal embedding."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import numerics
from .block_encoding import (
    DEFAULT_DELTA,
    DEFAULT_EPS_AMP,
    EncodedOperator,
    QueryLedger,
    rescale,
    zero_operator,
)
from .errors import InvalidInput, ZeroVector


class PrepClass(str, Enum):
    GENERAL = "general"
    STRUCTURED = "structured"
    PRODUCT_FORM = "product_form"


@dataclass(frozen=True)
class PrepCost:
    kind: PrepClass
    depth: int  # O(log n) circuit depth class
    ancillas: int


@dataclass(frozen=True)
class PreparedState:
    """Stand-in for the first column of a state-preparation unitary."""

    amplitudes: np.ndarray
    logical_dim: int
    padded_dim: int
    prep_cost: PrepCost
    label: str = "state"

    def __post_init__(self):
        a = numerics.as_vector(self.amplitudes)
        if a.size != self.padded_dim or self.padded_dim & (self.padded_dim - 1):
            raise InvalidInput("padded_dim must be a power of two matching the amplitude count")
        if abs(np.linalg.norm(a) - 1) > 1e-9:
            raise InvalidInput("amplitudes must have unit norm")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def logical(self) -> np.ndarray:
        return self.amplitudes[: self.logical_dim]


def _padded(v: np.ndarray) -> np.ndarray:
    out = np.zeros(numerics.next_pow2(v.size), dtype=v.dtype)
    out[: v.size] = v
    return out


def prepare(coeffs, mode: PrepClass | str = PrepClass.GENERAL, label: str = "state") -> PreparedState:
    """Normalize ``coeffs`` and zero-pad to a power of two.

    For GENERAL preparation the ancilla count is the number of nonzeros.
    """
    v = numerics.as_vector(coeffs)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ZeroVector("cannot prepare the zero vector")
    mode = PrepClass(mode)
    amps = _padded(v / norm)
    depth = numerics.log2_int(amps.size)
    anc = int(np.count_nonzero(v)) if mode is PrepClass.GENERAL else 0
    return PreparedState(amps, v.size, amps.size, PrepCost(mode, depth, anc), label)


def embed_diagonal(psi: PreparedState) -> EncodedOperator:
    """Exact encoding of ``diag(psi)`` over the padded dimension.

    Uses one controlled call of the preparation unitary plus ``O(log n)`` gates.
    """
    q = numerics.log2_int(psi.padded_dim)
    ledger = QueryLedger.primitive(psi.label, 1, gates=2 * q + 1).plus(classical=psi.logical_dim)
    return EncodedOperator(np.diag(psi.amplitudes), q + 3, 0.0, ledger)


def encode_vector(
    v,
    label: str = "state",
    mode: PrepClass | str = PrepClass.GENERAL,
    delta: float = DEFAULT_DELTA,
    eps_amp: float = DEFAULT_EPS_AMP,
) -> EncodedOperator:
    """``diag(v)`` (padded) from state preparation plus a rescale by ``||v||``.

    The zero vector maps to the free zero operator. Vectors with ``||v|| > 1``
    need amplification, which requires ``max|v_i| <= 1 - delta``.
    """
    x = numerics.as_vector(v)
    norm = float(np.linalg.norm(x))
    if norm == 0:
        return zero_operator(numerics.next_pow2(x.size))
    return rescale(embed_diagonal(prepare(x, mode, label)), norm, delta, eps_amp)


def power_state(x: float, n: int, label: str = "power") -> PreparedState:
    """State with amplitudes proportional to ``z, z**2, ..., z**n`` where ``z = sqrt(x)``.

    Built as a product of one-qubit states ``(1, z**(2**k))`` (most significant
    qubit first) times a global ``z``; the normalization is computed numerically.
    """
    if not (0 < x <= 1):
        raise InvalidInput(f"power_state needs 0 < x <= 1, got {x}")
    if n < 1 or n & (n - 1):
        raise InvalidInput(f"n must be a power of two, got {n}")
    z = np.sqrt(x)
    qubits = numerics.log2_int(n)
    amps = np.array([1.0])
    for k in reversed(range(qubits)):
        amps = np.kron(amps, np.array([1.0, z ** (2**k)]))
    amps = z * amps
    amps = amps / np.linalg.norm(amps)
    return PreparedState(amps, n, n, PrepCost(PrepClass.PRODUCT_FORM, 1, 0), label)
