"""Seeded random problem instances shared by tests, acceptance runs, the CLI and scripts."""

from __future__ import annotations

import numpy as np

from .apps.common import Dataset
from .apps.linear import LinearSystem
from .apps.network import NetworkArch
from .objective import Family, ObjectiveSpec
from .oracle import coefficient_bound

# Affine rows keep |a.x + b| below this over the box, inside the 0.9
# amplification range with room for the default delta.
AFFINE_HEADROOM = 0.85
COEFF_MAX = 0.25


def rng_from(seed) -> np.random.Generator:
    """PCG64 generator; every random instance in the package goes through here."""
    return np.random.Generator(np.random.PCG64(seed))


def random_spec(
    rng: np.random.Generator,
    family: Family | str,
    n: int,
    K: int,
    density: float = 0.7,
    exponents=None,
) -> ObjectiveSpec:
    """Random spec with ``||a||_inf <= 1/4`` and ``P`` from the coefficient bound.

    Affine rows are shrunk so ``||a||_1/2 + |b| <= 0.85``.
    """
    family = Family(family)
    rows = rng.uniform(-COEFF_MAX, COEFF_MAX, (K, n)) * (rng.random((K, n)) < density)
    for i in range(K):
        if not np.any(rows[i]):
            rows[i, rng.integers(n)] = rng.uniform(0.05, COEFF_MAX) * rng.choice([-1, 1])
    offsets = None
    if family is not Family.SUM_POWERS:
        offsets = rng.uniform(-0.1, 0.1, K)
        reach = np.abs(rows).sum(axis=1) / 2 + np.abs(offsets)
        shrink = np.minimum(1.0, AFFINE_HEADROOM / reach)
        rows = rows * shrink[:, None]
        offsets = offsets * shrink
    spec = ObjectiveSpec(family, rows, offsets, exponents)
    return spec.with_P(coefficient_bound(spec))


def random_spd_system(
    rng: np.random.Generator, n: int, lo: float = 0.05, hi: float = 0.25, diagonal: bool = False
) -> LinearSystem:
    """Symmetric ``A`` with spectrum in ``[lo, hi]`` and a unit ``b``.

    The default range keeps the regularized minimizer inside the box.
    """
    eig = rng.uniform(lo, hi, n)
    if diagonal:
        A = np.diag(eig)
    else:
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        A = Q @ np.diag(eig) @ Q.T
        A = (A + A.T) / 2
    b = rng.normal(size=n)
    return LinearSystem(A, b / np.linalg.norm(b))


def random_consistent_lsq(rng: np.random.Generator, M: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Well-conditioned ``F`` (singular values in ``[0.3, 0.6]``), ``lam`` in the box, ``y = F lam``."""
    U, _ = np.linalg.qr(rng.normal(size=(M, n)))
    V, _ = np.linalg.qr(rng.normal(size=(n, n)))
    F = U @ np.diag(rng.uniform(0.3, 0.6, n)) @ V.T
    lam = rng.uniform(-0.3, 0.3, n)
    return F, F @ lam, lam


def random_network(rng: np.random.Generator, n: int, m: int, p: int, scale: float = 0.2) -> tuple[NetworkArch, np.ndarray]:
    arch = NetworkArch(n, p, m)
    return arch, rng.uniform(-scale, scale, arch.param_count)


def toy_svm() -> tuple[Dataset, float]:
    """Four separable points in the plane and the regularization weight used with them."""
    pts = [[0.6, 0.4], [0.3, 0.7], [-0.5, -0.5], [-0.4, -0.6]]
    return Dataset(pts, [1, 1, -1, -1], task="classification"), 0.2


def clustered_points(rng: np.random.Generator, centers, per_cluster: int, spread: float = 0.05) -> Dataset:
    centers = np.asarray(centers, dtype=float)
    pts, labels = [], []
    for k, c in enumerate(centers):
        pts.append(c + rng.uniform(-spread, spread, (per_cluster, centers.shape[1])))
        labels += [k] * per_cluster
    return Dataset(np.vstack(pts), labels)


def rank_one_dataset(rng: np.random.Generator, M: int, n: int) -> tuple[Dataset, np.ndarray]:
    """Points ``t_i v`` along one unit direction ``v``; returns the data and ``v``."""
    v = rng.normal(size=n)
    v /= np.linalg.norm(v)
    t = rng.uniform(-1, 1, M)
    return Dataset(np.outer(t, v) * 0.5), v
