"""Dense complex linear algebra helpers for small (2..16 dim) spaces.

Everything operates on plain numpy complex arrays.  Matrices are row-major
2-d arrays; state vectors are 1-d arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .config import DEFAULT_TOL, Tolerances


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def tensor(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices / vectors.

    Index convention for ``tensor(a, b)``: row ``i_a * b.rows + i_b``,
    column ``j_a * b.cols + j_b``.
    """
    if not mats:
        raise ValueError("tensor() needs at least one factor")
    return reduce(np.kron, mats)


def partial_trace(rho: np.ndarray, dims: list[int], keep) -> np.ndarray:
    """Reduced density operator of ``rho`` on the subsystems in ``keep``.

    ``dims`` lists the subsystem dimensions in tensor order; ``keep`` is a
    collection of subsystem indices to retain.  The trace is preserved.
    """
    rho = np.asarray(rho, dtype=complex)
    dims = list(dims)
    total = int(np.prod(dims))
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("partial_trace expects a square matrix")
    if rho.shape[0] != total:
        raise ValueError(
            f"dims {dims} are inconsistent with a {rho.shape[0]}-dim operator"
        )
    keep = sorted(set(keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} subsystems")

    n = len(dims)
    reshaped = rho.reshape(dims + dims)
    # Contract the traced subsystems pairwise.
    for sub in sorted(set(range(n)) - set(keep), reverse=True):
        reshaped = np.trace(reshaped, axis1=sub, axis2=sub + reshaped.ndim // 2)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return reshaped.reshape(d_keep, d_keep)


@dataclass(frozen=True)
class HermitianEigen:
    """Full spectrum of a Hermitian matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns are orthonormal eigenvectors


def eig_hermitian(h: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized before solving; a deviation from Hermiticity
    beyond ``tol.hermitian`` is rejected.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("eig_hermitian expects a square matrix")
    dev = np.abs(h - dagger(h)).max()
    if dev > tol.hermitian:
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    sym = (h + dagger(h)) / 2
    w, v = np.linalg.eigh(sym)
    return HermitianEigen(eigenvalues=w, eigenvectors=v)


def is_unitary(u: np.ndarray, tol: float = DEFAULT_TOL.unitary):
    """Return ``(unitary?, max deviation of U†U from I)``."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("is_unitary expects a square matrix")
    dev = np.abs(dagger(u) @ u - np.eye(u.shape[0])).max()
    return bool(dev <= tol), float(dev)


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed random unitary via QR of a complex Ginibre matrix.

    The diagonal of R is phase-normalized so the distribution is exactly
    Haar rather than QR-convention dependent.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    z /= np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


# --- matrix JSON interchange -------------------------------------------------

def matrix_to_json(m: np.ndarray) -> dict:
    """Serialize to ``{"rows", "cols", "data": [[re, im], ...]}`` row-major."""
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return {
        "rows": m.shape[0],
        "cols": m.shape[1],
        "data": [[float(x.real), float(x.imag)] for x in m.ravel()],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    """Inverse of :func:`matrix_to_json`; exact round-trip."""
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    if len(data) != rows * cols:
        raise ValueError(
            f"matrix JSON has {len(data)} entries, expected {rows * cols}"
        )
    flat = np.array([complex(re, im) for re, im in data])
    if not np.isfinite(flat.view(float)).all():
        raise ValueError("matrix JSON contains non-finite entries")
    return flat.reshape(rows, cols)
