"""Dense linear-algebra substrate.

Matrices and vectors are plain numpy arrays. Every function here is pure and
returns fresh arrays, so results can be frozen by the caller.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput, NotPSD, ShapeError, SubnormalizationTooSmall

DEFAULT_TOL = 1e-10
PSD_CLAMP = 1e-12


def as_matrix(a, *, square: bool = False) -> np.ndarray:
    """Return ``a`` as a finite 2-D float or complex array."""
    m = np.array(a, copy=True)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {m.shape}")
    if not np.issubdtype(m.dtype, np.complexfloating):
        m = m.astype(float)
    if not np.all(np.isfinite(m)):
        raise InvalidInput("matrix has non-finite entries")
    if square and m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    return m


def as_vector(v) -> np.ndarray:
    """Return ``v`` as a finite 1-D float or complex array."""
    x = np.array(v, copy=True)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1:
        raise ShapeError(f"expected a vector, got shape {x.shape}")
    if not np.issubdtype(x.dtype, np.complexfloating):
        x = x.astype(float)
    if not np.all(np.isfinite(x)):
        raise InvalidInput("vector has non-finite entries")
    return x


def is_diagonal(a: np.ndarray, tol: float = 0.0) -> bool:
    off = a - np.diag(np.diag(a))
    return bool(np.max(np.abs(off), initial=0.0) <= tol)


def is_hermitian(a: np.ndarray, tol: float = 1e-12) -> bool:
    return a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def operator_norm(a) -> float:
    """Largest singular value of ``a``.

    Diagonal inputs take a fast path (max absolute entry), which is exact.
    """
    m = as_matrix(a)
    if m.size == 0:
        return 0.0
    if m.shape[0] == m.shape[1] and is_diagonal(m):
        return float(np.max(np.abs(np.diag(m))))
    return float(np.linalg.svd(m, compute_uv=False)[0])


def psd_sqrt(a, tol: float | None = None) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero; anything more negative
    raises :class:`NotPSD`. The default tolerance scales with ``max(1, ||a||)``.
    """
    m = as_matrix(a, square=True)
    if not is_hermitian(m, 1e-10 * max(1.0, float(np.max(np.abs(m), initial=0.0)))):
        raise InvalidInput("psd_sqrt needs a Hermitian matrix")
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    floor = PSD_CLAMP * scale if tol is None else tol
    if w.size and w.min() < -floor:
        raise NotPSD(f"eigenvalue {w.min():.3e} below -{floor:.1e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def dilate(a, alpha: float = 1.0) -> np.ndarray:
    """Unitary dilation of the contraction ``a / alpha``.

    Returns ``[[B, sqrt(I - B B^H)], [sqrt(I - B^H B), -B^H]]`` with
    ``B = a / alpha``. The top-left block equals ``B`` exactly.
    """
    m = as_matrix(a, square=True)
    sigma = operator_norm(m)
    if alpha <= 0 or alpha < sigma * (1 - 1e-12) - 1e-15:
        raise SubnormalizationTooSmall(f"alpha={alpha} < ||A||={sigma}")
    b = m / alpha
    # One shared SVD keeps both square roots consistent; two separate
    # eigendecompositions lose ~1e-8 unitarity when ||B|| = 1.
    u, s, vh = np.linalg.svd(b)
    c = np.sqrt(np.clip(1.0 - s**2, 0.0, None))
    top_right = (u * c) @ u.conj().T
    bottom_left = (vh.conj().T * c) @ vh
    return np.block([[b, top_right], [bottom_left, -b.conj().T]])


def unitarity_defect(u) -> float:
    """Entrywise max of ``|U^H U - I|``."""
    m = as_matrix(u, square=True)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])), initial=0.0))


def partial_trace(psi, dims: tuple[int, int], trace_out: int) -> np.ndarray:
    """Reduced density matrix of the pure state ``psi`` on ``dims[0] x dims[1]``.

    ``trace_out`` selects the subsystem removed (0 for the first factor).
    """
    d_a, d_b = dims
    x = as_vector(psi)
    if x.size != d_a * d_b:
        raise ShapeError(f"state of length {x.size} does not factor as {d_a}x{d_b}")
    m = x.reshape(d_a, d_b)
    if trace_out == 0:
        return m.T @ m.conj()
    if trace_out == 1:
        return m @ m.conj().T
    raise InvalidInput("trace_out must be 0 or 1")


def next_pow2(n: int) -> int:
    if n < 1:
        raise InvalidInput("dimension must be positive")
    return 1 << (n - 1).bit_length()


def log2_int(n: int) -> int:
    return max(0, (n - 1).bit_length())
