"""State types and the basic operations on them.

Joint index convention: basis index ``i * dimB + k`` for ``|i>`` in A and
``|k>`` in B, i.e. subsystem A is the slow index. ``tensor`` and
``partial_trace`` both rely on it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateKet,
    InvariantViolation,
    NotNormalized,
    WeightsNotNormalized,
)
from .numerics import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    eig_hermitian,
    frozen,
    tensor,
)

#: deviation from unit norm/trace/weight-sum that is silently repaired
RENORMALIZE_TOL = 1e-8
#: kets with |<a|b>| at or above 1 - this are treated as the same ray
DISTINCT_TOL = 1e-8


@dataclass(frozen=True)
class BipartiteDims:
    dimA: int
    dimB: int

    def __post_init__(self):
        if int(self.dimA) < 1 or int(self.dimB) < 1:
            raise DimensionMismatch(f"dimensions must be positive: {self.dimA}x{self.dimB}")

    @property
    def total(self) -> int:
        return self.dimA * self.dimB

    @classmethod
    def parse(cls, text: str) -> "BipartiteDims":
        """Parse ``"2x3"``."""
        parts = text.lower().split("x")
        if len(parts) != 2:
            raise ValueError(f"dims must look like AxB, got {text!r}")
        return cls(int(parts[0]), int(parts[1]))

    def __str__(self):
        return f"{self.dimA}x{self.dimB}"


class Ket:
    """Normalized state vector. Immutable."""

    __slots__ = ("amps", "renormalized")

    def __init__(self, amps, *, normalize: bool = False):
        a = as_matrix(amps).ravel()
        norm = float(np.linalg.norm(a))
        if normalize:
            if norm == 0.0:
                raise NotNormalized("cannot normalize the zero vector")
            dev = abs(norm - 1.0)
        else:
            dev = abs(norm * norm - 1.0)
            if dev > RENORMALIZE_TOL:
                raise NotNormalized(f"ket norm^2 is {norm * norm!r}, expected 1")
        object.__setattr__(self, "amps", frozen(a / norm))
        object.__setattr__(self, "renormalized", (not normalize) and dev > 1e-14)

    def __setattr__(self, key, value):
        raise AttributeError("Ket is immutable")

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def __repr__(self):
        return f"Ket({np.array2string(self.amps, precision=6)})"

    def overlap(self, other: "Ket") -> complex:
        """<self|other>"""
        return complex(np.vdot(self.amps, other.amps))

    @classmethod
    def basis(cls, dim: int, i: int) -> "Ket":
        v = np.zeros(dim, dtype=np.complex128)
        v[i] = 1.0
        return cls(v)


def as_ket(k) -> Ket:
    return k if isinstance(k, Ket) else Ket(k)


class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace matrix. Immutable."""

    __slots__ = ("matrix", "renormalized")

    def __init__(self, matrix, tol: Tolerance = DEFAULT_TOL):
        m = as_matrix(matrix, ndim=2)
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got {m.shape}")
        # raises NotHermitian
        vals, _ = eig_hermitian(m, tol)
        if vals[-1] < -tol.abs:
            raise InvariantViolation(f"not positive semidefinite: min eigenvalue {vals[-1]:.3e}")
        m = 0.5 * (m + m.conj().T)
        tr = float(np.trace(m).real)
        dev = abs(tr - 1.0)
        if dev > RENORMALIZE_TOL:
            raise NotNormalized(f"trace is {tr!r}, expected 1")
        object.__setattr__(self, "matrix", frozen(m / tr))
        object.__setattr__(self, "renormalized", dev > 1e-14)

    def __setattr__(self, key, value):
        raise AttributeError("DensityOperator is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self):
        return f"DensityOperator(\n{np.array2string(self.matrix, precision=6)})"

    def close_to(self, other, atol: float) -> bool:
        other = other.matrix if isinstance(other, DensityOperator) else as_matrix(other)
        return bool(np.linalg.norm(self.matrix - other) <= atol)


def as_density(rho) -> DensityOperator:
    return rho if isinstance(rho, DensityOperator) else DensityOperator(rho)


@dataclass(frozen=True)
class Ensemble:
    """Weighted list of distinct kets, ``rho = sum_s w_s |phi_s><phi_s|``."""

    entries: tuple[tuple[float, Ket], ...]
    renormalized: bool = field(default=False, compare=False)

    def __init__(self, entries: Iterable[tuple[float, object]]):
        items = [(float(w), as_ket(k)) for w, k in entries]
        if not items:
            raise WeightsNotNormalized("ensemble is empty")
        dims = {k.dim for _, k in items}
        if len(dims) != 1:
            raise DimensionMismatch(f"ensemble kets have mixed dimensions {sorted(dims)}")
        weights = np.array([w for w, _ in items])
        if np.any(~np.isfinite(weights)) or np.any(weights <= 0) or np.any(weights > 1 + RENORMALIZE_TOL):
            raise WeightsNotNormalized("weights must lie in (0, 1]")
        total = weights.sum()
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise WeightsNotNormalized(f"weights sum to {total!r}, expected 1")
        for i in range(len(items)):
            for j in range(i):
                if abs(items[i][1].overlap(items[j][1])) >= 1 - DISTINCT_TOL:
                    raise DuplicateKet(f"entries {j} and {i} are the same ray")
        object.__setattr__(
            self, "entries", tuple((w / total, k) for w, k in items))
        object.__setattr__(self, "renormalized", abs(total - 1.0) > 1e-14)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.entries])

    @property
    def kets(self) -> list[Ket]:
        return [k for _, k in self.entries]

    @property
    def dim(self) -> int:
        return self.entries[0][1].dim

    def __len__(self):
        return len(self.entries)


def projector(k) -> DensityOperator:
    """|k><k|"""
    a = as_ket(k).amps
    return DensityOperator(np.outer(a, a.conj()))


def convex_mix(e) -> DensityOperator:
    if not isinstance(e, Ensemble):
        e = Ensemble(e)
    m = sum(w * np.outer(k.amps, k.amps.conj()) for w, k in e.entries)
    return DensityOperator(m)


def _as_joint_matrix(rho, dims: BipartiteDims) -> np.ndarray:
    if isinstance(rho, Ket) or np.ndim(rho) == 1:
        rho = projector(rho)
    m = rho.matrix if isinstance(rho, DensityOperator) else as_matrix(rho, ndim=2)
    if m.shape != (dims.total, dims.total):
        raise DimensionMismatch(
            f"operator of size {m.shape[0]} does not factor as {dims}")
    return m


def partial_trace(rho, dims: BipartiteDims, keep: Literal["A", "B"] = "A") -> DensityOperator:
    """Reduced state of subsystem ``keep``; a ket is taken as its projector."""
    m = _as_joint_matrix(rho, dims).reshape(dims.dimA, dims.dimB, dims.dimA, dims.dimB)
    keep = keep.upper()
    if keep == "A":
        out = np.einsum("ikjk->ij", m)
    elif keep == "B":
        out = np.einsum("kikj->ij", m)
    else:
        raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")
    return DensityOperator(out)


def purity(rho) -> float:
    """Tr(rho^2)."""
    m = as_density(rho).matrix
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(m) ** 2))


def is_pure(rho, tol: Tolerance = DEFAULT_TOL) -> bool:
    m = as_density(rho).matrix
    return bool(np.linalg.norm(m @ m - m) <= tol.abs + tol.rel)


def is_uncorrelated(rho, dims: BipartiteDims, tol: Tolerance = DEFAULT_TOL) -> bool:
    m = _as_joint_matrix(rho, dims)
    rho_a = partial_trace(m, dims, "A").matrix
    rho_b = partial_trace(m, dims, "B").matrix
    return bool(np.linalg.norm(m - tensor(rho_a, rho_b)) <= tol.threshold())


def maximally_mixed(dim: int) -> DensityOperator:
    return DensityOperator(np.eye(dim) / dim)
