"""
Dense complex linear algebra used throughout ffscale.

All matrices are plain ``numpy.ndarray`` objects of complex dtype. Functions
are pure: inputs are never modified.
"""

from dataclasses import dataclass

import numba
import numpy as np

from .errors import EigenNotConverged

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and matching orthonormal eigenvectors (as columns)."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self):
        return self.values.shape[0]

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.conj().T


def as_matrix(a):
    """Return ``a`` as a finite, square, complex 2-D array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def hermiticity_residual(a):
    return float(np.max(np.abs(a - a.conj().T), initial=0.0))


def as_hermitian(a, tol=HERMITIAN_TOL):
    """Validate that ``a`` is Hermitian and return it as a complex array.

    The check is ``max|A - A^H| <= tol * max(1, ||A||)`` so that large
    generators are not rejected over rounding.
    """
    m = as_matrix(a)
    res = hermiticity_residual(m)
    if res > tol * max(1.0, op_norm(m)):
        raise ValueError(f"matrix is not Hermitian (residual {res:.3e})")
    return m


def op_norm(a):
    """Frobenius norm."""
    return float(np.sqrt(np.vdot(a, a).real))


def commutator(a, b):
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def nested_commutator(a, b, k):
    """``ad_a^k (b)``, i.e. ``[a, [a, ... [a, b]]]`` with ``k`` brackets."""
    out = b
    for _ in range(k):
        out = commutator(a, out)
    return out


@numba.njit(cache=True)
def _off_norm(a):
    n = a.shape[0]
    off = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                off += a[i, j].real ** 2 + a[i, j].imag ** 2
    return np.sqrt(off)


@numba.njit(cache=True)
def _jacobi_kernel(a, v, threshold, max_sweeps):
    # in place on a (-> diagonal) and v (-> eigenvectors); returns sweeps used or -1
    n = a.shape[0]
    sweeps = 0
    polished = _off_norm(a) <= threshold
    # one extra sweep past the threshold; convergence is quadratic there
    while not polished:
        if sweeps >= max_sweeps:
            return -1
        polished = _off_norm(a) <= threshold
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                ph = (apq / r).conjugate()
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # J = diag(1, ph) @ [[c, s], [-s, c]];  A <- J^H A J,  V <- V J
                for i in range(n):
                    ap = a[i, p]
                    aq = a[i, q]
                    a[i, p] = c * ap - s * ph * aq
                    a[i, q] = s * ap + c * ph * aq
                for i in range(n):
                    rp = a[p, i]
                    rq = a[q, i]
                    a[p, i] = c * rp - s * ph.conjugate() * rq
                    a[q, i] = s * rp + c * ph.conjugate() * rq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for i in range(n):
                    vp = v[i, p]
                    vq = v[i, q]
                    v[i, p] = c * vp - s * ph * vq
                    v[i, q] = s * vp + c * ph * vq
    return sweeps


@numba.njit(cache=True)
def _eigh_sorted(a_in, tol, max_sweeps):
    a = a_in.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    norm = 0.0
    for i in range(n):
        for j in range(n):
            norm += a[i, j].real ** 2 + a[i, j].imag ** 2
    sweeps = _jacobi_kernel(a, v, tol * np.sqrt(norm), max_sweeps)
    values = np.empty(n)
    for i in range(n):
        values[i] = a[i, i].real
    order = np.argsort(values, kind="mergesort")
    return values[order], v[:, order], sweeps, _off_norm(a)


def jacobi_eigh(a, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi diagonalisation of a complex Hermitian matrix.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies the real symmetric Jacobi rotation that annihilates it. Sweeps
    visit pivots in row-major order, so the result is deterministic.

    Parameters
    ----------
    a:
        Hermitian matrix (not modified).
    tol:
        Convergence threshold on the off-diagonal Frobenius norm, relative to
        the Frobenius norm of ``a``.
    max_sweeps:
        Iteration cap; exceeding it raises :class:`EigenNotConverged`.

    Returns
    -------
    values, vectors
        Ascending eigenvalues and the accumulated unitary whose columns are
        the matching eigenvectors.
    """
    values, vectors, sweeps, off = _eigh_sorted(np.ascontiguousarray(a, dtype=np.complex128),
                                                tol, max_sweeps)
    if sweeps < 0:
        raise EigenNotConverged(float(off), max_sweeps)
    return values, vectors


def hermitian_eig(a, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS, check=True):
    """Eigendecomposition of a Hermitian matrix with ascending eigenvalues.

    ``check=False`` skips the Hermiticity validation for callers that build
    their input Hermitian by construction.
    """
    m = as_hermitian(a) if check else a
    values, vectors = jacobi_eigh(m, tol=tol, max_sweeps=max_sweeps)
    return EigenDecomposition(values, vectors)


def exp_unitary(h, tau, check=True):
    """``exp(-1j * tau * h)`` for Hermitian ``h``, via its eigendecomposition."""
    if not np.isfinite(tau):
        raise ValueError("tau must be finite")
    eig = hermitian_eig(h, check=check)
    return (eig.vectors * np.exp(-1j * tau * eig.values)) @ eig.vectors.conj().T


PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
