"""Worked constructions of the combination rules and the three mixture
arguments: the four-state composite reconstruction, preparation with an
environment, and premeasurement by an apparatus.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateWeights,
    DimensionMismatch,
    MarginalMismatch,
    NotNormalized,
    WeightsNotNormalized,
    ZeroVector,
)
from .numerics import DEFAULT_TOL, Tolerance, as_matrix, tensor
from .states import (
    RENORMALIZE_TOL,
    BipartiteDims,
    DensityOperator,
    Ket,
    as_ket,
    convex_mix,
    is_pure,
    partial_trace,
    projector,
    purity,
)

ZERO_CUTOFF = 1e-12
#: environment kets with |<eta_i|eta_j>| >= 1 - this count as collinear
COLLINEAR_TOL = 1e-9


class Verdict(enum.Enum):
    PURE = "Pure"
    IMPROPER_MIXTURE = "ImproperMixture"
    PURE_COMPOSITE_CONTRADICTS_MIXED_CLAIM = "PureCompositeContradictsMixedClaim"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ScenarioReport:
    name: str
    states: tuple[tuple[str, object], ...]
    findings: tuple[tuple[str, float], ...]
    verdict: Verdict
    criterion: str

    def __post_init__(self):
        labels = [k for k, _ in self.findings]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate finding label")
        for label, value in self.findings:
            if not np.isfinite(value):
                raise ValueError(f"finding {label} is not finite")

    def finding(self, label: str) -> float:
        return dict(self.findings)[label]

    def state(self, label: str):
        return dict(self.states)[label]


@dataclass(frozen=True)
class PreparationModel:
    """System prepared in alpha_s while its environment is in eta_s,
    with amplitude gamma_s."""

    gammas: tuple[complex, ...]
    alphas: tuple[Ket, ...]
    etas: tuple[Ket, ...]

    def __init__(self, entries):
        entries = list(entries)
        if not entries:
            raise ValueError("empty preparation model")
        gammas = tuple(complex(g) for g, _, _ in entries)
        alphas = tuple(as_ket(a) for _, a, _ in entries)
        etas = tuple(as_ket(e) for _, _, e in entries)
        if len({a.dim for a in alphas}) != 1 or len({e.dim for e in etas}) != 1:
            raise DimensionMismatch("system or environment kets have mixed dimensions")
        total = sum(abs(g) ** 2 for g in gammas)
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise NotNormalized(f"sum |gamma|^2 is {total!r}, expected 1")
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "etas", etas)

    @property
    def entries(self):
        return list(zip(self.gammas, self.alphas, self.etas))

    @property
    def dims(self) -> BipartiteDims:
        return BipartiteDims(self.alphas[0].dim, self.etas[0].dim)


def combine_indistinguishable(amplitudes: Sequence[complex], kets: Sequence) -> Ket:
    """Add the amplitude-weighted vectors and normalize."""
    if len(amplitudes) != len(kets) or not kets:
        raise DimensionMismatch("need one amplitude per ket")
    kets = [as_ket(k) for k in kets]
    if len({k.dim for k in kets}) != 1:
        raise DimensionMismatch("kets have mixed dimensions")
    v = sum(complex(a) * k.amps for a, k in zip(amplitudes, kets))
    if np.linalg.norm(v) < ZERO_CUTOFF:
        raise ZeroVector("amplitudes cancel completely")
    return Ket(v, normalize=True)


def combine_distinguishable(weights: Sequence[float], kets: Sequence) -> DensityOperator:
    """Add the weighted projectors."""
    if len(weights) != len(kets):
        raise DimensionMismatch("need one weight per ket")
    return convex_mix(list(zip(weights, kets)))


def _check_nondegenerate(w: np.ndarray, tol: Tolerance, label: str):
    for i in range(len(w)):
        for j in range(i):
            if abs(w[i] - w[j]) <= tol.threshold():
                raise DegenerateWeights(f"{label} has equal weights {float(w[j])!r} and {float(w[i])!r}")


def _weights(w, label: str) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or np.any(w < 0) or abs(w.sum() - 1.0) > RENORMALIZE_TOL:
        raise WeightsNotNormalized(f"{label} must be non-negative and sum to 1")
    return w


def despagnat_scenario(u_basis, v_basis, a, b, psi_coeffs=None,
                       tol: Tolerance = DEFAULT_TOL) -> ScenarioReport:
    """Compare the four-state (or n*m-state) mixture with the pure composite.

    Builds the naive mixture M = sum a_j b_k |u_j v_k><u_j v_k| and the
    pure state P = sum psi_jk |u_j v_k>, checks that both have the marginals
    diag(a), diag(b), and compares purities. ``psi_coeffs=None`` uses
    psi_jk = delta_jk sqrt(a_j), which needs a == b.
    """
    u_basis = [as_ket(k) for k in u_basis]
    v_basis = [as_ket(k) for k in v_basis]
    a = _weights(a, "a")
    b = _weights(b, "b")
    if len(a) != len(u_basis) or len(b) != len(v_basis):
        raise DimensionMismatch("weight vectors must match basis sizes")
    _check_nondegenerate(a, tol, "a")
    _check_nondegenerate(b, tol, "b")
    gram_u = np.array([[x.overlap(y) for y in u_basis] for x in u_basis])
    gram_v = np.array([[x.overlap(y) for y in v_basis] for x in v_basis])
    if (np.linalg.norm(gram_u - np.eye(len(u_basis))) > tol.threshold()
            or np.linalg.norm(gram_v - np.eye(len(v_basis))) > tol.threshold()):
        raise DimensionMismatch("u and v bases must be orthonormal")

    if psi_coeffs is None:
        if len(a) != len(b) or np.max(np.abs(a - b)) > tol.threshold():
            raise MarginalMismatch("default Schmidt-diagonal pure state needs a == b")
        psi_coeffs = np.diag(np.sqrt(a))
    coeffs = as_matrix(psi_coeffs, ndim=2)
    if coeffs.shape != (len(a), len(b)):
        raise DimensionMismatch(f"psi coefficients must be {len(a)}x{len(b)}")

    dims = BipartiteDims(u_basis[0].dim, v_basis[0].dim)
    naive = np.zeros((dims.total, dims.total), dtype=np.complex128)
    joint = np.zeros(dims.total, dtype=np.complex128)
    for j, uj in enumerate(u_basis):
        for k, vk in enumerate(v_basis):
            uv = tensor(uj.amps, vk.amps)
            naive += a[j] * b[k] * np.outer(uv, uv.conj())
            joint += coeffs[j, k] * uv
    naive = DensityOperator(naive)
    pure = Ket(joint)

    target_a = sum(w * projector(k).matrix for w, k in zip(a, u_basis))
    target_b = sum(w * projector(k).matrix for w, k in zip(b, v_basis))
    marg = {
        "naive_A": partial_trace(naive, dims, "A"),
        "naive_B": partial_trace(naive, dims, "B"),
        "pure_A": partial_trace(pure, dims, "A"),
        "pure_B": partial_trace(pure, dims, "B"),
    }
    gap_pure_a = float(np.linalg.norm(marg["pure_A"].matrix - target_a))
    gap_pure_b = float(np.linalg.norm(marg["pure_B"].matrix - target_b))
    if max(gap_pure_a, gap_pure_b) > tol.threshold():
        raise MarginalMismatch(
            f"pure state marginals miss diag(a)/diag(b) by {gap_pure_a:.3e}/{gap_pure_b:.3e}")

    p_naive = purity(naive)
    expected = float(np.sum(np.outer(a, b) ** 2))
    p_pure = purity(projector(pure))
    shared = float(max(
        np.linalg.norm(marg["naive_A"].matrix - marg["pure_A"].matrix),
        np.linalg.norm(marg["naive_B"].matrix - marg["pure_B"].matrix),
    ))
    if p_naive < 1 - tol.threshold() and shared <= tol.threshold():
        verdict = Verdict.PURE_COMPOSITE_CONTRADICTS_MIXED_CLAIM
    else:
        verdict = Verdict.PURE
    return ScenarioReport(
        name="despagnat",
        states=(
            ("naive_mixture", naive),
            ("pure_composite", pure),
            *((f"marginal_{k}", v) for k, v in marg.items()),
        ),
        findings=(
            ("purity_naive_mixture", p_naive),
            ("purity_naive_mixture_expected", expected),
            ("purity_pure_composite", p_pure),
            ("marginal_gap_naive_vs_pure", shared),
            ("marginal_gap_pure_A_vs_a", gap_pure_a),
            ("marginal_gap_pure_B_vs_b", gap_pure_b),
        ),
        verdict=verdict,
        criterion="purity(naive) < 1 - tol while marginals agree within tol",
    )


def etas_collinear(etas: Sequence[Ket], threshold: float = COLLINEAR_TOL) -> bool:
    return all(abs(etas[i].overlap(etas[j])) >= 1 - threshold
               for i in range(len(etas)) for j in range(i))


def prepare_with_environment(model: PreparationModel, tol: Tolerance = DEFAULT_TOL) -> ScenarioReport:
    """Reduced state of S for the joint state sum gamma_s |alpha_s eta_s>."""
    dims = model.dims
    joint = sum(g * tensor(a.amps, e.amps) for g, a, e in model.entries)
    if np.linalg.norm(joint) < ZERO_CUTOFF:
        raise ZeroVector("joint preparation amplitudes cancel completely")
    joint = Ket(joint, normalize=True)
    rho_s = partial_trace(joint, dims, "A")
    collinear = etas_collinear(model.etas)
    pure = collinear or is_pure(rho_s, tol)
    min_overlap = min((abs(model.etas[i].overlap(model.etas[j]))
                       for i in range(len(model.etas)) for j in range(i)), default=1.0)
    return ScenarioReport(
        name="preparation",
        states=(("joint", joint), ("rho_S", rho_s)),
        findings=(
            ("purity_rho_S", purity(rho_s)),
            ("etas_collinear", float(collinear)),
            ("min_eta_overlap", float(min_overlap)),
            ("idempotency_residual", float(np.linalg.norm(rho_s.matrix @ rho_s.matrix - rho_s.matrix))),
        ),
        verdict=Verdict.PURE if pure else Verdict.IMPROPER_MIXTURE,
        criterion="Pure iff environments collinear or ||rho_S^2 - rho_S|| <= tol",
    )


def premeasurement(system_amps: Sequence[complex], pointer_basis=None,
                   tol: Tolerance = DEFAULT_TOL) -> ScenarioReport:
    """Correlate system basis states with pointer states, then trace out
    the pointer.

    ``pointer_basis=None`` uses the standard basis of the same size.
    """
    c = as_matrix(system_amps, ndim=1)
    n = len(c)
    if abs(np.vdot(c, c).real - 1.0) > RENORMALIZE_TOL:
        raise NotNormalized("system amplitudes must be normalized")
    if pointer_basis is None:
        pointer_basis = [Ket.basis(n, i) for i in range(n)]
    pointers = [as_ket(k) for k in pointer_basis]
    if len(pointers) != n:
        raise DimensionMismatch(f"{n} amplitudes but {len(pointers)} pointer states")
    gram = np.array([[x.overlap(y) for y in pointers] for x in pointers])
    if np.linalg.norm(gram - np.eye(n)) > tol.threshold():
        raise DimensionMismatch("pointer states must be orthonormal")
    dims = BipartiteDims(n, pointers[0].dim)
    joint = sum(cs * tensor(Ket.basis(n, s).amps, m.amps)
                for s, (cs, m) in enumerate(zip(c, pointers)))
    joint = Ket(joint)
    rho_s = partial_trace(joint, dims, "A")
    probs = np.abs(c) ** 2
    nz = [s for s in range(n) if probs[s] > 0]
    reference = combine_distinguishable([probs[s] for s in nz], [Ket.basis(n, s) for s in nz])
    offdiag = rho_s.matrix - np.diag(np.diag(rho_s.matrix))
    return ScenarioReport(
        name="premeasurement",
        states=(("joint", joint), ("rho_S", rho_s), ("distinguishable_mixture", reference)),
        findings=(
            ("purity_rho_S", purity(rho_s)),
            ("max_offdiagonal", float(np.max(np.abs(offdiag)))),
            ("gap_to_distinguishable_mixture", float(np.max(np.abs(rho_s.matrix - reference.matrix)))),
        ),
        verdict=Verdict.PURE if is_pure(rho_s, tol) else Verdict.IMPROPER_MIXTURE,
        criterion="Pure iff ||rho_S^2 - rho_S|| <= tol",
    )
