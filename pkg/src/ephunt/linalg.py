"""Dense complex linear algebra.

Matrices and vectors are plain ``numpy`` arrays of ``complex128``.  The
eigensolver is written out explicitly (Householder-Hessenberg reduction,
Wilkinson-shifted QR, inverse iteration on the triangular factor) so that
its tolerances and failure modes are under our control; a closed-form path
handles 2x2 matrices, which is where both built-in models live.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NoConvergence, SingularMatrix

TOL_EIG = 1e-9
PIVOT_FLOOR = 1e-14
_EPS = np.finfo(float).eps


def as_matrix(a) -> np.ndarray:
    """Validate ``a`` as a finite square complex matrix and return a copy."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_vector(v, dim: int | None = None) -> np.ndarray:
    x = np.array(v, dtype=complex).reshape(-1)
    if dim is not None and x.shape[0] != dim:
        raise DimensionMismatch(f"vector of length {x.shape[0]} does not match dimension {dim}")
    return x


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return np.conj(np.asarray(a, dtype=complex)).T.copy()


def lu_factor(a) -> tuple[np.ndarray, np.ndarray]:
    """LU factorization with partial pivoting.

    Returns the packed factors and the row permutation.  Raises
    :class:`SingularMatrix` when a pivot magnitude drops below
    ``PIVOT_FLOOR * max|a_ij|``.
    """
    lu = as_matrix(a)
    n = lu.shape[0]
    scale = np.max(np.abs(lu))
    floor = PIVOT_FLOOR * scale
    perm = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) <= floor or scale == 0.0:
            raise SingularMatrix(f"pivot {abs(lu[p, k]):.3e} at column {k} below floor {floor:.3e}")
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, perm


def lu_solve(a, rhs) -> np.ndarray:
    """Solve ``a @ x = rhs`` for a vector or a matrix of right-hand sides."""
    lu, perm = lu_factor(a)
    b = np.array(rhs, dtype=complex)
    if b.shape[0] != lu.shape[0]:
        raise DimensionMismatch(f"rhs has {b.shape[0]} rows, matrix has {lu.shape[0]}")
    y = solve_triangular(lu, b[perm], lower=True, unit_diagonal=True)
    return solve_triangular(lu, y, lower=False)


@dataclass(frozen=True)
class RawEigenSystem:
    """Eigenvalues with unit-norm right eigenvectors stored as columns."""

    values: np.ndarray
    right_vectors: np.ndarray
    converged: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def canonical_order(values: np.ndarray) -> np.ndarray:
    """Indices sorting eigenvalues by real part, then imaginary part.

    Real parts are compared after rounding relative to the spectral scale so
    that ``+-1e-17`` noise on a purely imaginary pair does not decide the order.
    """
    values = np.asarray(values, dtype=complex)
    scale = max(float(np.max(np.abs(values), initial=0.0)), 1.0)
    re = np.round(values.real / scale, 11) + 0.0  # +0.0 folds -0.0 into 0.0
    return np.lexsort((values.imag, re))


def hessenberg(a) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction ``a = q @ h @ q^H`` with ``h`` upper Hessenberg."""
    h = as_matrix(a)
    n = h.shape[0]
    q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = h[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        h[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h, q


def _givens(x: complex, y: complex) -> tuple[complex, complex]:
    r = math.hypot(abs(x), abs(y))
    if r == 0.0:
        return 1.0 + 0j, 0j
    return x / r, y / r


def _wilkinson_shift(a: complex, b: complex, c: complex, d: complex) -> complex:
    # eigenvalue of [[a, b], [c, d]] closest to d
    m = 0.5 * (a + d)
    s = np.sqrt(0.25 * (a - d) ** 2 + b * c)
    e1, e2 = m + s, m - s
    return e1 if abs(e1 - d) <= abs(e2 - d) else e2


def schur(a, max_qr_iters: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Complex Schur form ``a = q @ t @ q^H`` by shifted QR on the Hessenberg form."""
    h, q = hessenberg(a)
    n = h.shape[0]
    if max_qr_iters is None:
        max_qr_iters = 30 * n
    hi = n - 1
    total = 0
    stalled = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if s == 0.0:
                s = np.linalg.norm(h[: hi + 1, : hi + 1], 1)
            if abs(h[lo, lo - 1]) <= _EPS * s:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stalled = 0
            continue
        if total >= max_qr_iters:
            raise NoConvergence(f"QR iteration did not converge after {total} sweeps")
        total += 1
        stalled += 1

        if stalled % 10 == 0:
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            mu = _wilkinson_shift(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])

        idx = np.arange(lo, hi + 1)
        h[idx, idx] -= mu
        rots = []
        for k in range(lo, hi):
            c, s = _givens(h[k, k], h[k + 1, k])
            rows = h[k:k + 2, k:].copy()
            h[k, k:] = np.conj(c) * rows[0] + np.conj(s) * rows[1]
            h[k + 1, k:] = -s * rows[0] + c * rows[1]
            h[k + 1, k] = 0.0
            rots.append((c, s))
        for k, (c, s) in zip(range(lo, hi), rots):
            top = min(k + 2, hi) + 1
            cols = h[:top, k:k + 2].copy()
            h[:top, k] = c * cols[:, 0] + s * cols[:, 1]
            h[:top, k + 1] = -np.conj(s) * cols[:, 0] + np.conj(c) * cols[:, 1]
            qc = q[:, k:k + 2].copy()
            q[:, k] = c * qc[:, 0] + s * qc[:, 1]
            q[:, k + 1] = -np.conj(s) * qc[:, 0] + np.conj(c) * qc[:, 1]
        h[idx, idx] += mu
    return np.triu(h), q


def _triangular_eigvecs(t: np.ndarray, sweeps: int = 2) -> np.ndarray:
    """Eigenvectors of upper-triangular ``t`` by inverse iteration.

    The vector for ``t[j, j]`` lives in the leading ``(j+1)``-block.  The
    shift is nudged off the diagonal by ``eps * ||t||`` so the solve stays
    finite when eigenvalues repeat.
    """
    n = t.shape[0]
    nudge = _EPS * max(np.linalg.norm(t, 1), 1e-300)
    x = np.zeros((n, n), dtype=complex)
    for j in range(n):
        block = t[: j + 1, : j + 1] - (t[j, j] + nudge) * np.eye(j + 1)
        d = np.diag(block).copy()
        tiny = np.abs(d) < nudge
        d[tiny] = nudge
        block[np.diag_indices(j + 1)] = d
        y = np.zeros(j + 1, dtype=complex)
        y[j] = 1.0
        for _ in range(sweeps):
            y = solve_triangular(block, y, lower=False)
            y /= np.linalg.norm(y)
        x[: j + 1, j] = y
    return x


def _eig_2x2(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    if b == 0 and c == 0 and a == d:
        return np.array([a, d]), np.eye(2, dtype=complex)
    half = 0.5 * (a + d)
    s = np.sqrt(0.25 * (a - d) ** 2 + b * c)
    values = np.array([half + s, half - s])
    vecs = np.empty((2, 2), dtype=complex)
    for j, lam in enumerate(values):
        v1 = np.array([b, lam - a])
        v2 = np.array([lam - d, c])
        v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
        vecs[:, j] = v / np.linalg.norm(v)
    return values, vecs


def eig_general(h, max_qr_iters: int | None = None) -> RawEigenSystem:
    """All eigenvalues and unit right eigenvectors of a general complex matrix.

    Results are returned in canonical order (see :func:`canonical_order`).
    Defective input is not an error here; the coalesced eigenvectors are
    returned as they come and the biorthogonal layer decides what that means.
    """
    m = as_matrix(h)
    n = m.shape[0]
    if n == 1:
        values, vecs = m[0].copy(), np.ones((1, 1), dtype=complex)
    elif n == 2:
        values, vecs = _eig_2x2(m)
    else:
        t, q = schur(m, max_qr_iters)
        values = np.diag(t).copy()
        vecs = q @ _triangular_eigvecs(t)
        vecs /= np.linalg.norm(vecs, axis=0)
    order = canonical_order(values)
    values, vecs = values[order], vecs[:, order]
    scale = max(np.linalg.norm(m, 2), 1e-300)
    resid = np.linalg.norm(m @ vecs - vecs * values, axis=0)
    converged = resid <= TOL_EIG * scale * np.linalg.norm(vecs, axis=0)
    return RawEigenSystem(values=values, right_vectors=vecs, converged=converged)


def _taylor_action(h: np.ndarray, t: float, v: np.ndarray) -> np.ndarray:
    a = -1j * t * h
    steps = max(1, int(math.ceil(np.linalg.norm(a, 1) / 0.5)))
    a /= steps
    out = v.copy()
    for _ in range(steps):
        term = out.copy()
        acc = out.copy()
        for k in range(1, 40):
            term = a @ term / k
            acc += term
            if np.linalg.norm(term) <= _EPS * np.linalg.norm(acc):
                break
        out = acc
    return out


def expm_action(h, t: float, v) -> np.ndarray:
    """Return ``exp(-i h t) @ v``.

    Uses the eigendecomposition when the eigenvector stack is well
    conditioned and falls back to scaled Taylor stepping otherwise.
    """
    m = as_matrix(h)
    x = as_vector(v, m.shape[0])
    if t == 0:
        return x
    raw = eig_general(m)
    vecs = raw.right_vectors
    try:
        if np.linalg.cond(vecs) > 1e8:
            raise SingularMatrix("eigenvector stack too ill-conditioned")
        coeff = lu_solve(vecs, x)
    except SingularMatrix:
        return _taylor_action(m, t, x)
    return vecs @ (np.exp(-1j * raw.values * t) * coeff)
