"""Schmidt decomposition, purification, the ancilla-side unitary relating
two purifications, and ensemble steering through an ancilla basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AncillaTooSmall,
    DimensionMismatch,
    MarginalsDiffer,
    NotADecomposition,
)
from .numerics import (
    DEFAULT_TOL,
    Tolerance,
    eig_hermitian,
    frozen,
    global_phase_distance,
    gram_schmidt_complete,
    svd,
    tensor,
)
from .states import (
    BipartiteDims,
    Ensemble,
    Ket,
    as_density,
    as_ket,
    convex_mix,
    partial_trace,
)

SCHMIDT_CUTOFF = 1e-12


@dataclass(frozen=True)
class SchmidtDecomposition:
    coeffs: np.ndarray
    left: tuple[Ket, ...]
    right: tuple[Ket, ...]
    dims: BipartiteDims

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    def reconstruct(self) -> np.ndarray:
        out = np.zeros(self.dims.total, dtype=np.complex128)
        for c, p, a in zip(self.coeffs, self.left, self.right):
            out += c * tensor(p.amps, a.amps)
        return out


@dataclass(frozen=True)
class SteeringResult:
    """Ancilla basis ``c_j = U d_j`` realizing a target ensemble."""

    ancilla_basis: tuple[Ket, ...]
    unitary: np.ndarray
    reconstruction_error: float
    psi: Ket
    dims: BipartiteDims

    def conditional(self, j: int) -> tuple[float, np.ndarray]:
        """Weight and (unnormalized) A-side vector left by outcome ``c_j``.

        Contracts the B factor of psi with <c_j|; the squared norm is the
        probability of that outcome.
        """
        mat = self.psi.amps.reshape(self.dims.dimA, self.dims.dimB)
        vec = mat @ self.ancilla_basis[j].amps.conj()
        return float(np.vdot(vec, vec).real), vec

    def recovered_weights(self) -> np.ndarray:
        return np.array([self.conditional(j)[0] for j in range(len(self.ancilla_basis))])


def _coefficient_matrix(psi: Ket, dims: BipartiteDims) -> np.ndarray:
    if psi.dim != dims.total:
        raise DimensionMismatch(f"ket of dimension {psi.dim} does not factor as {dims}")
    return psi.amps.reshape(dims.dimA, dims.dimB)


def schmidt(psi, dims: BipartiteDims, cutoff: float = SCHMIDT_CUTOFF,
            tol: Tolerance = DEFAULT_TOL) -> SchmidtDecomposition:
    """psi = sum_s c_s |p_s> (x) |a_s> with c_s > cutoff, descending."""
    psi = as_ket(psi)
    u, s, v = svd(_coefficient_matrix(psi, dims), tol)
    keep = s > cutoff
    # a_s = conj of the right singular vector
    left = tuple(Ket(u[:, j]) for j in np.flatnonzero(keep))
    right = tuple(Ket(v[:, j].conj()) for j in np.flatnonzero(keep))
    return SchmidtDecomposition(s[keep].copy(), left, right, dims)


def purify(rho, tol: Tolerance = DEFAULT_TOL, ancilla_dim: int | None = None,
           cutoff: float = SCHMIDT_CUTOFF) -> tuple[Ket, BipartiteDims]:
    """sum_j sqrt(w_j) |p_j> (x) |e_j> from the spectral decomposition.

    The ancilla has dimension rank(rho) unless ``ancilla_dim`` asks for a
    larger one, in which case the extra levels are left unpopulated.
    """
    rho = as_density(rho)
    vals, vecs = eig_hermitian(rho.matrix, tol)
    rank = max(1, int(np.sum(vals > cutoff)))
    dim_b = rank if ancilla_dim is None else ancilla_dim
    if dim_b < rank:
        raise AncillaTooSmall(f"ancilla of dimension {dim_b} cannot purify rank {rank}")
    amps = np.zeros((rho.dim, dim_b), dtype=np.complex128)
    amps[:, :rank] = vecs[:, :rank] * np.sqrt(np.clip(vals[:rank], 0.0, None))
    return Ket(amps.ravel(), normalize=True), BipartiteDims(rho.dim, dim_b)


def marginal_gap(psi: Ket, phi: Ket, dims: BipartiteDims) -> float:
    ra = partial_trace(psi, dims, "A").matrix
    rb = partial_trace(phi, dims, "A").matrix
    return float(np.linalg.norm(ra - rb))


def lemma_unitary(psi, phi, dims: BipartiteDims, tol: Tolerance = DEFAULT_TOL,
                  cutoff: float = SCHMIDT_CUTOFF) -> np.ndarray:
    """Unitary U on B with (I (x) U) phi = psi, given equal A-marginals.

    Writes psi = sum_j s_j |p_j b_j> and, using the same |p_j>,
    phi = sum_j s_j |p_j c_j>; then U = sum_j |b_j><c_j|, completed on the
    orthogonal complements by Gram-Schmidt over the standard basis.
    """
    psi, phi = as_ket(psi), as_ket(phi)
    pmat = _coefficient_matrix(psi, dims)
    fmat = _coefficient_matrix(phi, dims)
    gap = marginal_gap(psi, phi, dims)
    if gap > tol.threshold():
        raise MarginalsDiffer(f"reduced states differ by {gap:.3e} (Frobenius)")
    u, s, v = svd(pmat, tol)
    r = int(np.sum(s > cutoff))
    # rows of p^dagger . M are the B-side vectors paired with each p_j
    b = (u[:, :r].conj().T @ pmat) / s[:r, None]
    c = (u[:, :r].conj().T @ fmat) / s[:r, None]
    big_b = gram_schmidt_complete(list(b), dims.dimB)
    big_c = gram_schmidt_complete(list(c), dims.dimB)
    return big_b @ big_c.conj().T


def apply_on_b(unitary, psi, dims: BipartiteDims) -> np.ndarray:
    """(I (x) U) psi, as a raw amplitude vector."""
    mat = as_ket(psi).amps.reshape(dims.dimA, dims.dimB)
    return (mat @ np.asarray(unitary).T).ravel()


def kets_equal_up_to_phase(psi, phi, atol: float) -> bool:
    return global_phase_distance(psi, phi) <= atol


def ghjw_steer(psi, dims: BipartiteDims, target, tol: Tolerance = DEFAULT_TOL) -> SteeringResult:
    """Find the ancilla basis whose outcomes prepare ``target`` on A.

    Builds psi' = sum_j sqrt(f_j) |phi_j> (x) |d_j> with standard-basis d_j,
    relates it to psi by the ancilla unitary U and returns c_j = U d_j.
    """
    psi = as_ket(psi)
    target = target if isinstance(target, Ensemble) else Ensemble(target)
    rho_a = partial_trace(psi, dims, "A")
    if target.dim != dims.dimA:
        raise NotADecomposition(
            f"ensemble kets have dimension {target.dim}, subsystem A has {dims.dimA}")
    gap = float(np.linalg.norm(convex_mix(target).matrix - rho_a.matrix))
    if gap > tol.threshold():
        raise NotADecomposition(f"ensemble mixes to a different state (gap {gap:.3e})")
    m = len(target)
    if m > dims.dimB:
        raise AncillaTooSmall(f"{m} ensemble members need an ancilla of dimension >= {m}, have {dims.dimB}")
    primed = np.zeros((dims.dimA, dims.dimB), dtype=np.complex128)
    for j, (f, k) in enumerate(target.entries):
        primed[:, j] = np.sqrt(f) * k.amps
    psi_primed = Ket(primed.ravel(), normalize=True)
    u = lemma_unitary(psi, psi_primed, dims, tol)
    basis = tuple(Ket(u[:, j], normalize=True) for j in range(m))
    recon = np.zeros(dims.total, dtype=np.complex128)
    for (f, k), c in zip(target.entries, basis):
        recon += np.sqrt(f) * tensor(k.amps, c.amps)
    err = float(np.linalg.norm(psi.amps - recon))
    return SteeringResult(basis, frozen(u), err, psi, dims)


def ancilla_realize(rho, decomposition, tol: Tolerance = DEFAULT_TOL) -> tuple[Ket, tuple[Ket, ...]]:
    """Joint pure state and ancilla basis realizing ``decomposition`` of rho.

    The ancilla gets max(rank rho, len(decomposition)) levels so that any
    valid decomposition fits.
    """
    rho = as_density(rho)
    decomposition = decomposition if isinstance(decomposition, Ensemble) else Ensemble(decomposition)
    if decomposition.dim != rho.dim:
        raise NotADecomposition("decomposition lives on a different space")
    gap = float(np.linalg.norm(convex_mix(decomposition).matrix - rho.matrix))
    if gap > tol.threshold():
        raise NotADecomposition(f"ensemble mixes to a different state (gap {gap:.3e})")
    psi, dims = purify(rho, tol)
    if len(decomposition) > dims.dimB:
        psi, dims = purify(rho, tol, ancilla_dim=len(decomposition))
    res = ghjw_steer(psi, dims, decomposition, tol)
    return psi, res.ancilla_basis
