"""Dense symmetric / Hermitian eigendecomposition.

Householder reduction to real symmetric tridiagonal form followed by the
implicit-shift QL iteration. Complex Hermitian input is reduced with
complex reflectors; a diagonal unitary then makes the off-diagonal real so
the same real QL kernel serves both cases.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError, ValidationError

__all__ = [
    "EigenDecomposition",
    "eigh_symmetric",
    "eigh_hermitian",
    "eigh_tridiagonal",
    "MAX_SWEEPS",
]

MAX_SWEEPS = 50
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order with eigenvectors stored as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    def __len__(self):
        return self.eigenvalues.shape[0]

    def reconstruct(self):
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.conj().T


@njit(cache=True)
def _tql(d, e, zt, max_sweeps):
    """Implicit QL on a symmetric tridiagonal, in place.

    ``d`` holds the diagonal, ``e`` the subdiagonal padded with a trailing
    zero. Rotations are accumulated into the rows of ``zt`` (the transposed
    eigenvector matrix), which may have zero columns for eigenvalues only.
    Returns -1 on success or the index that hit the sweep cap.
    """
    n = d.shape[0]
    ncol = zt.shape[1]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 2.220446049250313e-16 * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_sweeps:
                return l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            if g >= 0.0:
                g = d[m] - d[l] + e[l] / (g + r)
            else:
                g = d[m] - d[l] + e[l] / (g - r)
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(ncol):
                    f2 = zt[i + 1, k]
                    zt[i + 1, k] = s * zt[i, k] + c * f2
                    zt[i, k] = c * zt[i, k] - s * f2
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


@njit(cache=True)
def _tridiag_solve(d, e, shift, rhs, tiny):
    """Solve (T - shift I) x = rhs by Gaussian elimination with partial
    pivoting; zero pivots are replaced by ``tiny``."""
    n = d.shape[0]
    # rows hold up to three nonzeros after pivoting: a (diag), b, c (fill)
    a = d - shift
    b = np.zeros(n)
    c = np.zeros(n)
    sub = np.zeros(n)
    for i in range(n - 1):
        b[i] = e[i]
        sub[i] = e[i]
    x = rhs.copy()
    for i in range(n - 1):
        if abs(sub[i]) > abs(a[i]):
            # swap rows i and i+1
            ta, tb, tc, tx = a[i], b[i], c[i], x[i]
            a[i] = sub[i]
            b[i] = a[i + 1]
            c[i] = b[i + 1]
            x[i] = x[i + 1]
            a[i + 1] = tb
            b[i + 1] = tc
            x[i + 1] = tx
            # old row i now sits at i+1 with (ta, tb, tc) in columns i..i+2
            if a[i] == 0.0:
                a[i] = tiny
            mult = ta / a[i]
            a[i + 1] = tb - mult * b[i]
            b[i + 1] = tc - mult * c[i]
            x[i + 1] = tx - mult * x[i]
        else:
            if a[i] == 0.0:
                a[i] = tiny
            mult = sub[i] / a[i]
            a[i + 1] -= mult * b[i]
            b[i + 1] -= mult * c[i]
            x[i + 1] -= mult * x[i]
    if a[n - 1] == 0.0:
        a[n - 1] = tiny
    x[n - 1] /= a[n - 1]
    if n >= 2:
        x[n - 2] = (x[n - 2] - b[n - 2] * x[n - 1]) / a[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - b[i] * x[i + 1] - c[i] * x[i + 2]) / a[i]
    return x


@njit(cache=True)
def _inverse_iteration(d, e, evals, tol_cluster, tiny):
    n = d.shape[0]
    k = evals.shape[0]
    vecs = np.zeros((k, n))
    state = np.uint64(88172645463325252)
    for j in range(k):
        rhs = np.empty(n)
        for i in range(n):
            # xorshift64 start vector, deterministic per column
            state ^= (state << np.uint64(13)) & np.uint64(0xFFFFFFFFFFFFFFFF)
            state ^= state >> np.uint64(7)
            state ^= (state << np.uint64(17)) & np.uint64(0xFFFFFFFFFFFFFFFF)
            rhs[i] = (state % np.uint64(1000003)) / 1000003.0 - 0.5
        x = rhs
        for _ in range(4):
            x = _tridiag_solve(d, e, evals[j], x, tiny)
            for p in range(j):
                if abs(evals[p] - evals[j]) < tol_cluster:
                    dot = 0.0
                    for i in range(n):
                        dot += vecs[p, i] * x[i]
                    for i in range(n):
                        x[i] -= dot * vecs[p, i]
            nrm = 0.0
            for i in range(n):
                nrm += x[i] * x[i]
            nrm = np.sqrt(nrm)
            for i in range(n):
                x[i] /= nrm
        vecs[j] = x
    return vecs


def _fix_phase(q):
    """Make the largest-magnitude entry of each column real and positive."""
    idx = np.argmax(np.abs(q), axis=0)
    pivots = q[idx, np.arange(q.shape[1])]
    if np.iscomplexobj(q):
        phase = np.conj(pivots) / np.abs(pivots)
    else:
        phase = np.sign(pivots)
        phase[phase == 0] = 1.0
    return q * phase


def _run_ql(diag, offdiag, zt):
    d = np.array(diag, dtype=float)
    e = np.zeros(d.shape[0])
    e[: d.shape[0] - 1] = offdiag
    failed = _tql(d, e, zt, MAX_SWEEPS)
    if failed >= 0:
        raise ConvergenceError(
            f"QL iteration exceeded {MAX_SWEEPS} sweeps at eigenvalue {failed}", failed
        )
    return d


def _householder(a):
    """Reduce a symmetric or Hermitian matrix to real tridiagonal form.

    Returns ``d, e, q`` with ``a = q @ T @ q^H`` where ``T`` has diagonal
    ``d`` and real off-diagonal ``e``.
    """
    a = np.array(a, copy=True)
    n = a.shape[0]
    q = np.eye(n, dtype=a.dtype)
    e = np.zeros(max(n - 1, 0), dtype=a.dtype)
    for k in range(n - 2):
        x = a[k + 1 :, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            e[k] = 0.0
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        alpha = -phase * xnorm
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            e[k] = x0
            continue
        v /= vnorm
        blk = a[k + 1 :, k + 1 :]
        p = blk @ v
        kk = np.vdot(v, p).real
        w = p - kk * v
        blk -= 2.0 * (np.outer(v, w.conj()) + np.outer(w, v.conj()))
        e[k] = alpha
        qb = q[:, k + 1 :]
        qb -= 2.0 * np.outer(qb @ v, v.conj())
    if n >= 2:
        e[n - 2] = a[n - 1, n - 2]
    d = np.real(np.diag(a)).copy()
    if np.iscomplexobj(a):
        # rotate phases out of the off-diagonal
        scale = np.ones(n, dtype=complex)
        mags = np.abs(e)
        for k in range(n - 1):
            ph = e[k] / mags[k] if mags[k] > 0 else 1.0
            scale[k + 1] = scale[k] * ph
        q = q * scale
        e = mags
    else:
        # real reflectors may leave negative off-diagonals; T accepts them
        e = e.real
    return d, e, q


def _square(m, dtype):
    arr = np.array(m, dtype=dtype)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValidationError("matrix must be at least 1x1")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("matrix has non-finite entries")
    return arr


def _decompose(arr):
    d, e, q = _householder(arr)
    zt = np.ascontiguousarray(q.T)
    evals = _run_ql(d, e, zt)
    order = np.argsort(evals, kind="stable")
    vecs = _fix_phase(zt[order].T)
    return EigenDecomposition(evals[order], np.ascontiguousarray(vecs))


def eigh_symmetric(m):
    """Eigendecomposition of a real symmetric matrix.

    The input is symmetrized as ``(m + m.T) / 2`` before reduction.

    Raises
    ------
    ConvergenceError
        If some eigenvalue needs more than ``MAX_SWEEPS`` QL sweeps.
    """
    arr = _square(m, float)
    arr = 0.5 * (arr + arr.T)
    return _decompose(arr)


def eigh_hermitian(m):
    """Eigendecomposition of a complex Hermitian matrix; eigenvalues real."""
    arr = _square(m, complex)
    arr = 0.5 * (arr + arr.conj().T)
    return _decompose(arr)


def eigh_tridiagonal(diag, offdiag, select=None):
    """Eigendecomposition of a real symmetric tridiagonal matrix.

    Parameters
    ----------
    diag : array_like, shape (n,)
    offdiag : array_like, shape (n-1,)
    select : int, optional
        Keep only the ``select`` smallest eigenpairs. Eigenvalues still come
        from a full QL pass, but eigenvectors are obtained by inverse
        iteration, which is O(n) per vector instead of O(n^2).
    """
    d = np.asarray(diag, dtype=float).ravel()
    off = np.asarray(offdiag, dtype=float).ravel()
    n = d.shape[0]
    if n < 1:
        raise ValidationError("tridiagonal matrix must have n >= 1")
    if off.shape[0] != n - 1:
        raise ValidationError(f"offdiag must have length {n - 1}, got {off.shape[0]}")
    if select is None or select >= n:
        zt = np.eye(n)
        evals = _run_ql(d, off, zt)
        order = np.argsort(evals, kind="stable")
        vecs = _fix_phase(zt[order].T)
        return EigenDecomposition(evals[order], np.ascontiguousarray(vecs))
    if select < 1:
        raise ValidationError(f"select must be >= 1, got {select}")
    evals = np.sort(_run_ql(d, off, np.zeros((n, 0))))[:select]
    norm = max(np.max(np.abs(d)) + 2.0 * (np.max(np.abs(off)) if n > 1 else 0.0), 1e-300)
    vecs = _inverse_iteration(
        d, off, np.ascontiguousarray(evals), 1e-3 * norm, _EPS * norm
    )
    return EigenDecomposition(evals, np.ascontiguousarray(_fix_phase(vecs.T)))
