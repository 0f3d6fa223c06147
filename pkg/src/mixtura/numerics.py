"""Dense complex linear algebra kernel.

Matrices are numpy ``complex128`` arrays. Kets are 1-d arrays; everything
else is 2-d. Decompositions are delegated to LAPACK through numpy and then
post-processed into a deterministic phase and ordering convention.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, NotHermitian


@dataclass(frozen=True)
class Tolerance:
    abs: float = 1e-10
    rel: float = 1e-10

    def __post_init__(self):
        if not (self.abs >= 0 and self.rel >= 0):
            raise ValueError("tolerances must be non-negative")
        if self.abs == 0 and self.rel == 0:
            raise ValueError("at least one of abs, rel must be positive")

    def threshold(self, scale: float = 1.0) -> float:
        return self.abs + self.rel * scale


DEFAULT_TOL = Tolerance()


def as_matrix(m, *, ndim: int | None = None) -> np.ndarray:
    """Coerce to a finite complex128 array."""
    arr = np.asarray(m, dtype=np.complex128)
    if ndim is not None and arr.ndim != ndim:
        raise InvariantViolation(f"expected {ndim}-d array, got shape {arr.shape}")
    if arr.size == 0:
        raise InvariantViolation("empty matrix")
    if not np.all(np.isfinite(arr)):
        raise InvariantViolation("non-finite entry")
    return arr


def frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.flags.writeable = False
    return arr


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def basis_ket(n: int, i: int) -> np.ndarray:
    v = np.zeros(n, dtype=np.complex128)
    v[i] = 1.0
    return v


def dagger(m) -> np.ndarray:
    m = as_matrix(m)
    if m.ndim == 1:
        return m.conj()
    return m.conj().T


def tensor(a, b) -> np.ndarray:
    """Kronecker product; the first factor is the slow index."""
    return np.kron(as_matrix(a), as_matrix(b))


def fix_phase(v: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, complex]:
    """Rotate ``v`` so its first entry above ``tol.abs`` is real positive.

    Returns the rotated vector and the unit phase it was multiplied by.
    """
    big = np.flatnonzero(np.abs(v) > tol.abs)
    if big.size == 0:
        return v, 1.0 + 0j
    lead = v[big[0]]
    phase = abs(lead) / lead
    out = v * phase
    # make the leading entry exactly real
    out[big[0]] = abs(lead)
    return out, phase


def _cluster_order(values: np.ndarray, vecs: np.ndarray, tol: Tolerance) -> np.ndarray:
    """Reorder columns inside clusters of (near-)equal values."""
    n = len(values)
    gap = max(tol.abs, tol.rel * (abs(values[0]) if n else 0.0))
    order = []
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(values[stop - 1] - values[stop]) <= gap:
            stop += 1
        idx = list(range(start, stop))
        if len(idx) > 1:
            # magnitudes rounded so round-off cannot flip the order
            key = lambda j: tuple(np.round(-np.abs(vecs[:, j]), 12))
            idx.sort(key=key)
        order.extend(idx)
        start = stop
    return np.array(order, dtype=int)


def eig_hermitian(m, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Spectral decomposition of a Hermitian matrix.

    Eigenvalues come back descending, eigenvectors as the columns of a
    unitary matrix, each phase-fixed. Within a degenerate cluster the
    column order is reproducible but the subspace basis itself is whatever
    LAPACK returned.
    """
    m = as_matrix(m, ndim=2)
    if m.shape[0] != m.shape[1]:
        raise NotHermitian(f"matrix is not square: {m.shape}")
    scale = np.linalg.norm(m)
    if np.linalg.norm(m - m.conj().T) > tol.threshold(scale):
        raise NotHermitian("matrix differs from its adjoint beyond tolerance")
    herm = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(herm)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    for j in range(vecs.shape[1]):
        vecs[:, j], _ = fix_phase(vecs[:, j], tol)
    order = _cluster_order(vals, vecs, tol)
    return vals[order], vecs[:, order]


def svd(m, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD ``m = left @ diag(singulars) @ dagger(right)``.

    Left vectors are phase-fixed. For nonzero singular values the right
    vectors carry the compensating phase; for zero ones they are fixed
    independently.
    """
    m = as_matrix(m, ndim=2)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    v = vh.conj().T
    for j in range(len(s)):
        u[:, j], phase = fix_phase(u[:, j], tol)
        if s[j] > tol.abs:
            v[:, j] = v[:, j] * phase
        else:
            v[:, j], _ = fix_phase(v[:, j], tol)
    return u, s, v


def gram_schmidt_complete(vectors, dim: int, eps: float = 1e-8) -> np.ndarray:
    """Orthonormalize ``vectors`` in order, then extend to a basis of C^dim.

    Completion draws standard basis vectors in index order, skipping any
    whose remainder after projection has norm below ``eps``. Returns a
    ``dim x dim`` unitary whose leading columns span the input vectors.
    """
    basis: list[np.ndarray] = []

    def push(v):
        w = np.array(v, dtype=np.complex128)
        # two passes for numerical orthogonality
        for _ in range(2):
            for b in basis:
                w = w - np.vdot(b, w) * b
        nrm = np.linalg.norm(w)
        if nrm < eps:
            return False
        basis.append(w / nrm)
        return True

    for v in vectors:
        if not push(v):
            raise InvariantViolation("input vectors are linearly dependent")
    i = 0
    while len(basis) < dim and i < dim:
        push(basis_ket(dim, i))
        i += 1
    return np.column_stack(basis) if basis else np.zeros((dim, 0), dtype=np.complex128)


def global_phase_distance(psi, phi) -> float:
    """min over theta of ||psi - exp(i theta) phi||, in closed form."""
    psi = as_matrix(psi).ravel()
    phi = as_matrix(phi).ravel()
    overlap = np.vdot(phi, psi)
    # optimal phase aligns phi with psi; subtracting avoids the cancellation
    # of sqrt(|psi|^2 + |phi|^2 - 2|<phi|psi>|)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(psi - phase * phi))
