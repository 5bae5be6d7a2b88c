"""Small dense Hermitian eigenproblems.

Everything in entflow reduces global operators to per-party matrices of
dimension at most 8, so a cyclic Jacobi solver is accurate and fast enough.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionMismatch,
    EmptyInput,
    InvalidInput,
    NotHermitian,
    NotPositiveDefinite,
)

HERMITIAN_TOL = 1e-12
OFFDIAG_TOL = 1e-14
MAX_SWEEPS = 60


def as_matrix(a) -> np.ndarray:
    """Coerce input to a finite square complex array."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InvalidInput(f"expected a nonempty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInput("matrix has non-finite entries")
    return m


def hermitian_part(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return (A + A^dagger)/2 after checking A is Hermitian to ``tol``."""
    m = as_matrix(a)
    dev = np.max(np.abs(m - m.conj().T))
    if dev > tol:
        raise NotHermitian(f"max |A - A^dagger| = {dev:.3e} exceeds {tol:.0e}")
    return 0.5 * (m + m.conj().T)


def _jacobi(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # plain Python lists: for d <= 8 this beats per-rotation numpy calls
    n = m.shape[0]
    a = m.tolist()
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    scale = max(float(np.linalg.norm(m)), 1e-300)
    for _ in range(MAX_SWEEPS):
        off = math.sqrt(sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n) if i != j))
        if off < OFFDIAG_TOL * scale:
            vals = np.array([a[i][i].real for i in range(n)])
            return vals, np.array(v, dtype=complex)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                ph = (apq / mag).conjugate()
                tau = (a[q][q].real - a[p][p].real) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # columns p, q times [[c, s], [-s*ph, c*ph]] zeroes the (p, q) entry
                sp, cp = -s * ph, c * ph
                for row in a:
                    x, y = row[p], row[q]
                    row[p] = c * x + sp * y
                    row[q] = s * x + cp * y
                spc, cpc = sp.conjugate(), cp.conjugate()
                rp, rq = a[p], a[q]
                for j in range(n):
                    x, y = rp[j], rq[j]
                    rp[j] = c * x + spc * y
                    rq[j] = s * x + cpc * y
                rp[q] = rq[p] = 0j
                rp[p] = complex(rp[p].real, 0.0)
                rq[q] = complex(rq[q].real, 0.0)
                for row in v:
                    x, y = row[p], row[q]
                    row[p] = c * x + sp * y
                    row[q] = s * x + cp * y
    raise ConvergenceError(f"Jacobi rotations did not converge in {MAX_SWEEPS} sweeps")


def eig_hermitian(a, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ascending eigenvalues and the matching orthonormal eigenvectors
    as columns.
    """
    m = hermitian_part(a, tol)
    vals, vecs = _jacobi(m)
    order = np.argsort(vals, kind="stable")
    return vals[order], vecs[:, order]


def lambda_max(a) -> float:
    return float(eig_hermitian(a)[0][-1])


def _check_pd(vals: np.ndarray, what: str = "matrix") -> None:
    if vals[0] <= 0.0:
        raise NotPositiveDefinite(f"{what} is not positive definite (min eigenvalue {vals[0]:.3e})")


def inv_sqrt(a) -> np.ndarray:
    """A^(-1/2) for a Hermitian positive-definite matrix."""
    vals, vecs = eig_hermitian(a)
    _check_pd(vals)
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def sqrt_pd(a) -> np.ndarray:
    vals, vecs = eig_hermitian(a)
    _check_pd(vals)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def congruence(w: np.ndarray, h: np.ndarray) -> np.ndarray:
    """W H W for Hermitian W, symmetrized against rounding."""
    m = w @ h @ w
    return 0.5 * (m + m.conj().T)


def relative_eig_max(g, h) -> float:
    """Largest eigenvalue of G^-1 H, computed from the Hermitian matrix G^-1/2 H G^-1/2."""
    gm = hermitian_part(g)
    hm = hermitian_part(h)
    if gm.shape != hm.shape:
        raise DimensionMismatch(f"shapes {gm.shape} and {hm.shape} differ")
    vals = eig_hermitian(congruence(inv_sqrt(gm), hm))[0]
    _check_pd(vals, "second argument")
    return float(vals[-1])


def tensor_lambda_max(parts: Sequence) -> float:
    """Largest eigenvalue of a Kronecker product of positive matrices."""
    if len(parts) == 0:
        raise EmptyInput("need at least one factor")
    out = 1.0
    for p in parts:
        vals = eig_hermitian(p)[0]
        _check_pd(vals, "factor")
        out *= float(vals[-1])
    return out
