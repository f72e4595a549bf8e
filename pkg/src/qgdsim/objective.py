"""Objective and schedule descriptions shared by the engines, the oracle and the apps.

Nothing in this module touches encoded operators, so the oracle can depend on
it without pulling in the block-encoding algebra.

Three families over ``x`` in the box ``[-1/2, 1/2]^n``:

* ``SUM_POWERS``: ``f = sum_i sum_j a_ij * x_j**e_i``
* ``SUM_AFFINE_POWERS``: ``f = sum_i (a_i . x + b_i)**e_i``
* ``PROD_AFFINE_POWERS``: ``f = prod_i (a_i . x + b_i)**e_i``

``e_i`` defaults to the 1-based row index. A :class:`CompositeObjective` is a
weighted sum of specs and is what most applications produce.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import Any, Mapping, Sequence, Union

import numpy as np

from .errors import InvalidInput, InvalidSchedule, ShapeError

BOX = 0.5


@dataclass(frozen=True)
class SupportSet:
    """Sorted positions (0-based) of the nonzero coefficients of one row."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])) or any(i < 0 for i in idx):
            raise InvalidInput("support indices must be nonnegative and strictly increasing")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, row, tol: float = 0.0) -> "SupportSet":
        return cls(tuple(int(i) for i in np.flatnonzero(np.abs(np.asarray(row)) > tol)))

    @property
    def size(self) -> int:
        return len(self.indices)


class Family(str, Enum):
    SUM_POWERS = "sum_powers"
    SUM_AFFINE_POWERS = "sum_affine_powers"
    PROD_AFFINE_POWERS = "prod_affine_powers"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ObjectiveSpec:
    family: Family
    coeff_rows: np.ndarray
    offsets: np.ndarray | None = None
    exponents: Sequence[int] | None = None
    P: float | None = None
    weight: float = 1.0
    constant: float = 0.0
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        fam = Family(self.family)
        rows = np.array(self.coeff_rows, dtype=float)
        if rows.ndim == 1:
            rows = rows.reshape(1, -1)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise ShapeError(f"coeff_rows must be a nonempty K x n array, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise InvalidInput("coefficients must be finite")
        k = rows.shape[0]
        off = np.zeros(k) if self.offsets is None else np.array(self.offsets, dtype=float).ravel()
        if off.shape != (k,):
            raise ShapeError("one offset per row is required")
        if fam is Family.SUM_POWERS and np.any(off != 0):
            raise InvalidInput("sum-of-powers rows carry no offsets")
        exps = tuple(range(1, k + 1)) if self.exponents is None else tuple(int(e) for e in self.exponents)
        if len(exps) != k or any(e < 1 for e in exps):
            raise InvalidInput("exponents must be K integers >= 1")
        if self.P is not None and not (self.P > 0 and np.isfinite(self.P)):
            raise InvalidInput("P must be positive")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "coeff_rows", _frozen(rows))
        object.__setattr__(self, "offsets", _frozen(off))
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    @property
    def n(self) -> int:
        return self.coeff_rows.shape[1]

    @property
    def K(self) -> int:
        return self.coeff_rows.shape[0]

    @property
    def parts(self) -> tuple["ObjectiveSpec", ...]:
        return (self,)

    @property
    def supports(self) -> tuple[SupportSet, ...]:
        return tuple(SupportSet.of(r) for r in self.coeff_rows)

    def with_P(self, P: float) -> "ObjectiveSpec":
        return replace(self, P=float(P))

    def with_meta(self, **kw) -> "ObjectiveSpec":
        return replace(self, meta={**self.meta, **kw})

    def _affine(self, x: np.ndarray) -> np.ndarray:
        return self.coeff_rows @ x + self.offsets

    def value(self, x) -> float:
        """Weighted value, constant excluded."""
        x = _point(x, self.n)
        e = np.array(self.exponents)
        if self.family is Family.SUM_POWERS:
            v = float(np.sum(self.coeff_rows * x[None, :] ** e[:, None]))
        elif self.family is Family.SUM_AFFINE_POWERS:
            v = float(np.sum(self._affine(x) ** e))
        else:
            v = float(np.prod(self._affine(x) ** e))
        return self.weight * v

    def gradient(self, x) -> np.ndarray:
        x = _point(x, self.n)
        e = np.array(self.exponents)
        a = self.coeff_rows
        if self.family is Family.SUM_POWERS:
            g = np.sum(e[:, None] * a * x[None, :] ** (e[:, None] - 1), axis=0)
        elif self.family is Family.SUM_AFFINE_POWERS:
            g = (e * self._affine(x) ** (e - 1)) @ a
        else:
            s = self._affine(x)
            powered = s**e
            g = np.zeros(self.n)
            for i in range(self.K):
                others = np.prod(np.delete(powered, i))
                g += e[i] * s[i] ** (e[i] - 1) * others * a[i]
        return self.weight * g

    def total(self, x) -> float:
        """Value including the dropped constant."""
        return self.value(x) + self.constant


@dataclass(frozen=True, eq=False)
class CompositeObjective:
    """Weighted sum of specs over the same variables; ``K`` counts every row."""

    parts: tuple[ObjectiveSpec, ...]
    P: float | None = None
    constant: float = 0.0
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise InvalidInput("composite needs at least one part")
        if len({p.n for p in parts}) != 1:
            raise ShapeError("all parts must share the variable count")
        if self.P is not None and not (self.P > 0 and np.isfinite(self.P)):
            raise InvalidInput("P must be positive")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    @property
    def n(self) -> int:
        return self.parts[0].n

    @property
    def K(self) -> int:
        return sum(p.K for p in self.parts)

    @property
    def family(self) -> str:
        return "composite"

    def with_P(self, P: float) -> "CompositeObjective":
        return replace(self, P=float(P))

    def with_meta(self, **kw) -> "CompositeObjective":
        return replace(self, meta={**self.meta, **kw})

    def value(self, x) -> float:
        return float(sum(p.value(x) for p in self.parts))

    def gradient(self, x) -> np.ndarray:
        return np.sum([p.gradient(x) for p in self.parts], axis=0)

    def total(self, x) -> float:
        return self.value(x) + self.constant + sum(p.constant for p in self.parts)


Objective = Union[ObjectiveSpec, CompositeObjective]


def family_name(obj: Objective) -> str:
    fam = obj.family
    return fam.value if isinstance(fam, Family) else str(fam)


def _point(x, n: int) -> np.ndarray:
    v = np.asarray(x, dtype=float).ravel()
    if v.shape != (n,):
        raise ShapeError(f"expected a point with {n} coordinates, got shape {v.shape}")
    return v


@dataclass(frozen=True, eq=False)
class DescentSchedule:
    """Step size, horizon, start and amplification tolerances.

    ``budget="worst_case"`` enforces ``eta <= 1/(2 P T)`` so every iterate
    provably stays inside norm 1/2. ``"trajectory"`` skips that check and
    relies on the per-step norm test instead; apps that start from a known
    good point use it to take larger steps.
    """

    eta: float
    T: int
    x0: Any = "scaled_identity"
    delta: float = 0.1
    eps_amp: float = 1e-6
    budget: str = "worst_case"
    early_stop_tol: float | None = None

    def __post_init__(self):
        if not (self.eta > 0 and np.isfinite(self.eta)):
            raise InvalidSchedule("eta must be positive")
        if int(self.T) != self.T or self.T < 1:
            raise InvalidSchedule("T must be an integer >= 1")
        object.__setattr__(self, "T", int(self.T))
        if not (0 < self.delta < 0.5 and 0 < self.eps_amp < 0.5):
            raise InvalidSchedule("delta and eps_amp must lie in (0, 1/2)")
        if self.budget not in ("worst_case", "trajectory"):
            raise InvalidSchedule("budget must be 'worst_case' or 'trajectory'")
        if isinstance(self.x0, str):
            if self.x0 != "scaled_identity":
                raise InvalidSchedule(f"unknown x0 mode {self.x0!r}")
        else:
            object.__setattr__(self, "x0", _frozen(np.asarray(self.x0, dtype=float).ravel()))

    @property
    def scaled_identity(self) -> bool:
        return isinstance(self.x0, str)

    def x0_budget(self, P: float) -> float:
        """``1/2 - eta P T``, the scale of the identity start."""
        return 0.5 - self.eta * P * self.T

    def initial_point(self, n: int, P: float) -> np.ndarray:
        if self.scaled_identity:
            return np.full(n, self.x0_budget(P))
        if self.x0.shape != (n,):
            raise ShapeError(f"x0 has {self.x0.size} entries, expected {n}")
        return self.x0.copy()

    def with_(self, **kw) -> "DescentSchedule":
        return replace(self, **kw)
