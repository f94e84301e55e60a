"""Dense complex linear algebra for small Hermitian problems.

Vectors are 1-D complex numpy arrays and matrices are 2-D complex arrays.
Subspaces are carried as :class:`SubspaceBasis`, whose rows are orthonormal
vectors of the ambient space.

Every vector this module hands back is phase-fixed: its first component with
magnitude above ``PHASE_EPS`` is rotated to be real and positive, so results
are reproducible from run to run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PreconditionError

PHASE_EPS = 1e-8
DEFAULT_TOL = 1e-9
CLUSTER_GAP = 1e-9
_MAX_SWEEPS = 60


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis of a subspace of C^ambient_dim.

    ``vectors`` has shape ``(count, ambient_dim)``; each row is one basis vector.
    """

    vectors: np.ndarray
    ambient_dim: int
    tol_used: float = DEFAULT_TOL

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[0])

    def __len__(self) -> int:
        return self.dim

    def __iter__(self):
        return iter(self.vectors)

    def columns(self) -> np.ndarray:
        """Basis vectors as the columns of an ``ambient_dim x count`` matrix."""
        return self.vectors.T


def as_cvec(v) -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise PreconditionError(f"expected a nonempty 1-D vector, got shape {arr.shape}")
    return arr


def phase_fix(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its first significant component is real positive."""
    v = np.asarray(v, dtype=complex)
    idx = np.flatnonzero(np.abs(v) > PHASE_EPS)
    if idx.size == 0:
        return v.copy()
    c = v[idx[0]]
    return v * (abs(c) / c)


def is_hermitian(h: np.ndarray, tol: float = 1e-12) -> bool:
    h = np.asarray(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and bool(np.all(np.abs(h - h.conj().T) <= tol))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """One complex Jacobi rotation zeroing a[p, q] (and a[q, p]) in place."""
    apq = a[p, q]
    mag = abs(apq)
    if mag == 0.0:
        return
    # split a[p,q] = |a[p,q]| e^{i phi}; diag(1, e^{-i phi}) makes the pair real
    ph = apq / mag
    theta = 0.5 * math.atan2(2.0 * mag, a[q, q].real - a[p, p].real)
    c, s = math.cos(theta), math.sin(theta)
    phc = ph.conjugate()

    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * phc * col_q
    a[:, q] = s * col_p + c * phc * col_q
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - s * ph * row_q
    a[q, :] = s * row_p + c * ph * row_q
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real

    vp = v[:, p].copy()
    vq = v[:, q].copy()
    v[:, p] = c * vp - s * phc * vq
    v[:, q] = s * vp + c * phc * vq


def _off_norm2(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sum(np.abs(off) ** 2))


def hermitian_eig(h, herm_tol: float = 1e-10) -> tuple[np.ndarray, SubspaceBasis]:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    h : array_like
        Square Hermitian matrix.
    herm_tol : float
        Allowed deviation from Hermiticity, relative to ``max(1, max|h|)``.

    Returns
    -------
    eigenvalues : ndarray
        Real eigenvalues in ascending order.
    eigenvectors : SubspaceBasis
        Row ``k`` is the phase-fixed eigenvector of ``eigenvalues[k]``.
        Inside a cluster of eigenvalues closer than ``CLUSTER_GAP`` the vectors
        are re-orthonormalized and ordered by the row index of their first
        significant component.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] == 0:
        raise PreconditionError(f"hermitian_eig needs a nonempty square matrix, got shape {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h))))
    if not is_hermitian(h, herm_tol * scale):
        raise PreconditionError("hermitian_eig: matrix is not Hermitian")

    n = h.shape[0]
    a = 0.5 * (h + h.conj().T)
    v = np.eye(n, dtype=complex)
    total = float(np.sum(np.abs(a) ** 2))
    target = 1e-32 * total
    skip = 1e-18 * math.sqrt(total)
    for _ in range(_MAX_SWEEPS):
        if _off_norm2(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) > skip:
                    _rotate(a, v, p, q)

    evals = np.diag(a).real.copy()
    order = np.argsort(evals, kind="stable")
    evals = evals[order]
    vecs = v[:, order].T.copy()
    vecs = _tidy_clusters(evals, vecs)
    return evals, SubspaceBasis(vecs, n)


def _first_significant(v: np.ndarray) -> int:
    idx = np.flatnonzero(np.abs(v) > PHASE_EPS)
    return int(idx[0]) if idx.size else len(v)


def _tidy_clusters(evals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    out = np.empty_like(vecs)
    start = 0
    n = len(evals)
    while start < n:
        stop = start + 1
        while stop < n and evals[stop] - evals[stop - 1] < CLUSTER_GAP:
            stop += 1
        block = [phase_fix(x) for x in vecs[start:stop]]
        if stop - start > 1:
            block = _mgs(block)
            block = [phase_fix(x) for x in block]
            block.sort(key=_first_significant)
        out[start:stop] = block
        start = stop
    return out


def _mgs(vectors: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Modified Gram-Schmidt with one re-orthogonalization pass."""
    basis: list[np.ndarray] = []
    for x in vectors:
        w = np.array(x, dtype=complex)
        for _ in range(2):
            for b in basis:
                w -= np.vdot(b, w) * b
        nrm = np.linalg.norm(w)
        if nrm > 0:
            basis.append(w / nrm)
    return basis


def _stack(vectors, ambient_dim: int | None = None) -> np.ndarray:
    vs = [np.asarray(v, dtype=complex) for v in vectors]
    if not vs:
        if ambient_dim is None:
            raise PreconditionError("empty vector list needs an explicit ambient dimension")
        return np.zeros((0, ambient_dim), dtype=complex)
    dims = {v.shape for v in vs}
    if len(dims) != 1 or vs[0].ndim != 1:
        raise PreconditionError(f"vectors must share one 1-D shape, got {sorted(dims)}")
    if ambient_dim is not None and vs[0].shape[0] != ambient_dim:
        raise PreconditionError(
            f"vectors have dimension {vs[0].shape[0]}, expected {ambient_dim}"
        )
    return np.vstack(vs)


def numeric_rank(vectors, tol: float = DEFAULT_TOL) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    m = _stack(vectors, None if len(vectors) else 0)
    if m.size == 0:
        return 0
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def _pivoted_span(m: np.ndarray, steps: int) -> list[np.ndarray]:
    """Orthonormal basis of the dominant span of the rows of ``m``.

    Each step takes the row with the largest remaining residual, which makes
    the first ``steps`` vectors a rank-revealing choice.
    """
    resid = m.copy()
    basis: list[np.ndarray] = []
    for _ in range(steps):
        norms = np.linalg.norm(resid, axis=1)
        k = int(np.argmax(norms))
        w = resid[k].copy()
        for b in basis:
            w -= np.vdot(b, w) * b
        w /= np.linalg.norm(w)
        basis.append(w)
        resid -= np.outer(resid @ w.conj(), w)
    return basis


def orthonormal_complement(vectors, ambient_dim: int, tol: float = DEFAULT_TOL) -> SubspaceBasis:
    """Orthonormal basis of the orthogonal complement of span(vectors).

    The size is ``ambient_dim - numeric_rank(vectors, tol)``. The span is first
    resolved by pivoted Gram-Schmidt, then completed with standard basis
    vectors chosen by largest residual.
    """
    if ambient_dim < 1:
        raise PreconditionError("ambient_dim must be >= 1")
    m = _stack(vectors, ambient_dim)
    r = numeric_rank(list(m), tol) if len(m) else 0
    span = _pivoted_span(m, r) if r else []

    q = np.array(span, dtype=complex).reshape(len(span), ambient_dim)
    resid = np.eye(ambient_dim, dtype=complex)
    if len(q):
        resid -= q.conj().T @ q  # row i becomes (I - P) e_i
    comp: list[np.ndarray] = []
    for _ in range(ambient_dim - r):
        k = int(np.argmax(np.linalg.norm(resid, axis=1)))
        w = resid[k].copy()
        for _ in range(2):
            for b in span:
                w -= np.vdot(b, w) * b
            for b in comp:
                w -= np.vdot(b, w) * b
        w /= np.linalg.norm(w)
        comp.append(w)
        resid -= np.outer(resid @ w.conj(), w)
    out = np.array([phase_fix(w) for w in comp], dtype=complex).reshape(len(comp), ambient_dim)
    return SubspaceBasis(out, ambient_dim, tol)


def span_basis(vectors, ambient_dim: int, tol: float = DEFAULT_TOL) -> SubspaceBasis:
    """Orthonormal basis of span(vectors), of size ``numeric_rank(vectors, tol)``."""
    m = _stack(vectors, ambient_dim)
    r = numeric_rank(list(m), tol) if len(m) else 0
    span = [phase_fix(w) for w in _pivoted_span(m, r)] if r else []
    return SubspaceBasis(np.array(span, dtype=complex).reshape(r, ambient_dim), ambient_dim, tol)


def project_onto_span(v, basis: SubspaceBasis) -> np.ndarray:
    """Orthogonal projection of ``v`` onto the span of an orthonormal basis."""
    v = as_cvec(v)
    if v.shape[0] != basis.ambient_dim:
        raise PreconditionError(
            f"vector dimension {v.shape[0]} does not match basis dimension {basis.ambient_dim}"
        )
    if basis.dim == 0:
        return np.zeros_like(v)
    coeffs = basis.vectors.conj() @ v
    return coeffs @ basis.vectors
