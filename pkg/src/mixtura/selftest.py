"""Randomized property suites behind ``mixtura selftest``.

Each suite checks one library contract against an independent route
(explicit index sums, eigenvalues of the marginal, direct reconstruction)
and returns the worst residual seen next to the tolerance it must meet.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .decompositions import (
    apply_on_b,
    ghjw_steer,
    lemma_unitary,
    purify,
    schmidt,
)
from .errors import AncillaTooSmall, MarginalsDiffer, NotADecomposition
from .numerics import global_phase_distance
from .scenarios import (
    PreparationModel,
    Verdict,
    combine_distinguishable,
    despagnat_scenario,
    premeasurement,
    prepare_with_environment,
)
from .states import BipartiteDims, DensityOperator, Ensemble, Ket, partial_trace
from .stateio import parse_state_file, serialize_state_file, state_file_from


@dataclass
class SuiteResult:
    name: str
    passed: bool
    cases: int
    metrics: dict[str, float] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={v:.3e}" for k, v in self.metrics.items())
        return f"[{status}] {self.name} ({self.cases} cases) {parts}"


class _Tracker:
    """Collects worst-case residuals against fixed bounds."""

    def __init__(self, name: str):
        self.result = SuiteResult(name, True, 0)
        self.bounds: dict[str, float] = {}

    def record(self, key: str, value: float, bound: float, *, upper: bool = True):
        m = self.result.metrics
        if upper:
            m[key] = max(m.get(key, 0.0), float(value))
            ok = value <= bound
        else:
            m[key] = min(m.get(key, np.inf), float(value))
            ok = value >= bound
        if not ok:
            self.result.passed = False
            if len(self.result.failures) < 5:
                self.result.failures.append(f"{key}={value!r} vs bound {bound!r}")

    def check(self, ok: bool, what: str):
        if not ok:
            self.result.passed = False
            if len(self.result.failures) < 5:
                self.result.failures.append(what)


# random objects -----------------------------------------------------------

def random_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(rng: np.random.Generator, n: int, rank: int | None = None) -> np.ndarray:
    rank = rank or int(rng.integers(1, n + 1))
    a = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_bipartite(rng: np.random.Generator, da: int, db: int, rank: int | None = None) -> np.ndarray:
    """Random joint ket with Schmidt rank ``rank`` (generic if None)."""
    k = rank or min(da, db)
    m = (rng.normal(size=(da, k)) + 1j * rng.normal(size=(da, k))) @ \
        (rng.normal(size=(k, db)) + 1j * rng.normal(size=(k, db)))
    v = m.ravel()
    return v / np.linalg.norm(v)


def steered_ensemble(rng, rho_a: np.ndarray, m: int) -> list[tuple[float, np.ndarray]]:
    """Decomposition of rho_a into m kets via a random m x m unitary mixing
    of its spectral ensemble."""
    vals, vecs = np.linalg.eigh(rho_a)
    keep = vals > 1e-12
    vals, vecs = vals[keep], vecs[:, keep]
    r = len(vals)
    if m < r:
        raise ValueError("cannot decompose into fewer kets than the rank")
    scaled = np.zeros((rho_a.shape[0], m), dtype=np.complex128)
    scaled[:, :r] = vecs * np.sqrt(vals)
    w = random_unitary(rng, m)
    out = []
    for j in range(m):
        v = scaled @ w[j]
        f = float(np.vdot(v, v).real)
        out.append((f, v / np.sqrt(f)))
    return out


# oracles --------------------------------------------------------------------

def brute_partial_trace(rho: np.ndarray, da: int, db: int, keep: str) -> np.ndarray:
    if keep == "A":
        out = np.zeros((da, da), dtype=np.complex128)
        for i in range(da):
            for j in range(da):
                for k in range(db):
                    out[i, j] += rho[i * db + k, j * db + k]
    else:
        out = np.zeros((db, db), dtype=np.complex128)
        for i in range(db):
            for j in range(db):
                for k in range(da):
                    out[i, j] += rho[k * db + i, k * db + j]
    return out


# suites ---------------------------------------------------------------------

def suite_partial_trace(rng, n=500) -> SuiteResult:
    t = _Tracker("partial_trace_oracle")
    for _ in range(n):
        da, db = int(rng.integers(2, 5)), int(rng.integers(2, 6))
        rho = DensityOperator(random_density(rng, da * db))
        dims = BipartiteDims(da, db)
        for keep in "AB":
            got = partial_trace(rho, dims, keep).matrix
            ref = brute_partial_trace(rho.matrix, da, db, keep)
            t.record("max_entry_error", np.max(np.abs(got - ref)), 1e-12)
        t.result.cases += 1
    return t.result


def suite_schmidt(rng, n=500) -> SuiteResult:
    t = _Tracker("schmidt")
    for _ in range(n):
        da, db = int(rng.integers(2, 5)), int(rng.integers(2, 6))
        rank = int(rng.integers(1, min(da, db) + 1))
        psi = Ket(random_bipartite(rng, da, db, rank))
        dims = BipartiteDims(da, db)
        sd = schmidt(psi, dims)
        t.record("reconstruction_residual", np.linalg.norm(psi.amps - sd.reconstruct()), 1e-10)
        marginal = np.linalg.eigvalsh(brute_partial_trace(np.outer(psi.amps, psi.amps.conj()), da, db, "A"))[::-1]
        sq = np.zeros(da)
        sq[:sd.rank] = sd.coeffs ** 2
        t.record("coeff_sq_vs_marginal_eigs", np.max(np.abs(sq - marginal)), 1e-10)
        t.check(all(abs(k.overlap(l) - (i == j)) < 1e-10
                    for i, k in enumerate(sd.left) for j, l in enumerate(sd.left)),
                "left basis not orthonormal")
        t.result.cases += 1
    return t.result


def suite_purify(rng, n=500) -> SuiteResult:
    t = _Tracker("purification")
    for _ in range(n):
        d = int(rng.integers(2, 7))
        rho = DensityOperator(random_density(rng, d))
        psi, dims = purify(rho)
        back = brute_partial_trace(np.outer(psi.amps, psi.amps.conj()), dims.dimA, dims.dimB, "A")
        t.record("marginal_error", np.linalg.norm(back - rho.matrix), 1e-10)
        t.result.cases += 1
    return t.result


def suite_lemma(rng, n=200, n_bad=50) -> SuiteResult:
    t = _Tracker("ghjw_lemma")
    for _ in range(n):
        da, db = int(rng.integers(2, 5)), int(rng.integers(2, 6))
        dims = BipartiteDims(da, db)
        psi = Ket(random_bipartite(rng, da, db, int(rng.integers(1, min(da, db) + 1))))
        v = random_unitary(rng, db)
        phi = Ket(apply_on_b(v, psi, dims))
        u = lemma_unitary(psi, phi, dims)
        t.record("unitarity_residual", np.linalg.norm(u.conj().T @ u - np.eye(db)), 1e-10)
        t.record("mapping_residual", global_phase_distance(psi.amps, apply_on_b(u, phi, dims)), 1e-9)
        t.result.cases += 1
    raised = 0
    for _ in range(n_bad):
        da, db = int(rng.integers(2, 5)), int(rng.integers(2, 6))
        dims = BipartiteDims(da, db)
        psi = Ket(random_bipartite(rng, da, db))
        phi = Ket(random_bipartite(rng, da, db))
        try:
            lemma_unitary(psi, phi, dims)
        except MarginalsDiffer:
            raised += 1
        t.result.cases += 1
    t.check(raised == n_bad, f"MarginalsDiffer raised {raised}/{n_bad}")
    t.result.metrics["mismatch_rejected_fraction"] = raised / n_bad
    return t.result


def suite_steering(rng, n=200, n_bad=50) -> SuiteResult:
    t = _Tracker("ghjw_steering")
    for _ in range(n):
        da, db = int(rng.integers(2, 5)), int(rng.integers(2, 6))
        k = int(rng.integers(1, min(da, db) + 1))
        dims = BipartiteDims(da, db)
        psi = Ket(random_bipartite(rng, da, db, k))
        rho_a = partial_trace(psi, dims, "A").matrix
        m = 1 if k == 1 else int(rng.integers(k, db + 1))
        target = steered_ensemble(rng, rho_a, m)
        res = ghjw_steer(psi, dims, target)
        basis = np.column_stack([c.amps for c in res.ancilla_basis])
        t.record("ancilla_orthonormality", np.linalg.norm(basis.conj().T @ basis - np.eye(m)), 1e-10)
        t.record("reconstruction_residual", res.reconstruction_error, 1e-9)
        # independent weight recovery: contract psi's B factor with <c_j|
        mat = psi.amps.reshape(da, db)
        for j, (f, _) in enumerate(target):
            w = np.linalg.norm(mat @ basis[:, j].conj()) ** 2
            t.record("weight_recovery_error", abs(w - f), 1e-9)
        t.result.cases += 1
    bad_ok = small_ok = 0
    for _ in range(n_bad):
        da, db = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        dims = BipartiteDims(da, db)
        psi = Ket(random_bipartite(rng, da, db))
        rho_a = partial_trace(psi, dims, "A").matrix
        # a decomposition of a different state
        other = steered_ensemble(rng, random_density(rng, da, min(da, db)), min(da, db))
        try:
            ghjw_steer(psi, dims, other)
        except NotADecomposition:
            bad_ok += 1
        # a valid decomposition with one member too many for the ancilla
        big = steered_ensemble(rng, rho_a, db + 1)
        try:
            ghjw_steer(psi, dims, big)
        except AncillaTooSmall:
            small_ok += 1
        t.result.cases += 2
    t.check(bad_ok == n_bad, f"NotADecomposition raised {bad_ok}/{n_bad}")
    t.check(small_ok == n_bad, f"AncillaTooSmall raised {small_ok}/{n_bad}")
    return t.result


def suite_hughes(rng=None) -> SuiteResult:
    t = _Tracker("hughes_reconstruction")
    std = [Ket.basis(2, 0), Ket.basis(2, 1)]
    report = despagnat_scenario(std, std, [0.6, 0.4], [0.6, 0.4])
    t.record("naive_purity_error", abs(report.finding("purity_naive_mixture") - 0.2704), 1e-12)
    t.record("pure_purity_error", abs(report.finding("purity_pure_composite") - 1.0), 1e-12)
    t.record("marginal_gap", report.finding("marginal_gap_naive_vs_pure"), 1e-10)
    t.check(report.verdict is Verdict.PURE_COMPOSITE_CONTRADICTS_MIXED_CLAIM,
            f"verdict {report.verdict}")
    t.result.cases = 1
    return t.result


def suite_preparation(rng, n=200) -> SuiteResult:
    t = _Tracker("proper_mixture_impossibility")
    for _ in range(n):
        ds, de, m = (int(x) for x in rng.integers(2, 6, size=3))
        gammas = random_vector(rng, m)
        alphas = [random_vector(rng, ds) for _ in range(m)]
        eta = random_vector(rng, de)
        etas = [np.exp(2j * np.pi * rng.random()) * eta for _ in range(m)]
        rep = prepare_with_environment(PreparationModel(zip(gammas, alphas, etas)))
        t.check(rep.verdict is Verdict.PURE, f"collinear case gave {rep.verdict}")
        t.record("collinear_min_purity", rep.finding("purity_rho_S"), 1 - 1e-9, upper=False)
        t.result.cases += 1
    for _ in range(n):
        ds, de, m = (int(x) for x in rng.integers(2, 6, size=3))
        while True:
            etas = [random_vector(rng, de) for _ in range(m)]
            if any(abs(np.vdot(etas[i], etas[j])) <= 0.99 for i in range(m) for j in range(i)):
                break
        gammas = random_vector(rng, m)
        alphas = [random_vector(rng, ds) for _ in range(m)]
        rep = prepare_with_environment(PreparationModel(zip(gammas, alphas, etas)))
        t.check(rep.verdict is Verdict.IMPROPER_MIXTURE, f"non-collinear case gave {rep.verdict}")
        t.record("noncollinear_max_purity", rep.finding("purity_rho_S"), 1 - 1e-6)
        t.result.cases += 1
    return t.result


def suite_premeasurement(rng, n=200) -> SuiteResult:
    t = _Tracker("premeasurement_decoherence")
    for _ in range(n):
        ns = int(rng.integers(2, 7))
        dm = ns + int(rng.integers(0, 3))
        c = random_vector(rng, ns)
        pointers = random_unitary(rng, dm)[:, :ns].T
        rep = premeasurement(c, list(pointers))
        rho_s = rep.state("rho_S").matrix
        reference = combine_distinguishable(np.abs(c) ** 2, [Ket.basis(ns, s) for s in range(ns)]).matrix
        t.record("gap_to_distinguishable_mixture", np.max(np.abs(rho_s - reference)), 1e-12)
        t.record("max_offdiagonal", rep.finding("max_offdiagonal"), 1e-12)
        t.result.cases += 1
    return t.result


def fixture_states() -> dict[str, object]:
    s = 1 / np.sqrt(2)
    return {
        "bell.state": Ket([s, 0, 0, s]),
        "mixed.state": DensityOperator(np.eye(2) / 2),
        "pm.ens": Ensemble([(0.5, [s, s]), (0.5, [s, -s])]),
        "zero_plus.ens": Ensemble([(0.5, [1, 0]), (0.5, [s, s])]),
        "prep.state": PreparationModel([(np.sqrt(0.6), [1, 0], [1, 0]),
                                        (np.sqrt(0.4), [0, 1], [s, s])]),
    }


def suite_fixture_roundtrip(rng=None) -> SuiteResult:
    t = _Tracker("fixture_roundtrip")
    for name, obj in fixture_states().items():
        text = serialize_state_file(state_file_from(obj))
        first = parse_state_file(text)
        again = serialize_state_file(first)
        second = parse_state_file(again)
        t.check(text == again, f"{name}: serialization not stable")
        t.record("data_drift", np.max(np.abs(np.subtract(first.data, second.data))), 1e-15)
        t.result.cases += 1
    return t.result


SUITES: dict[str, Callable] = {
    "partial_trace": suite_partial_trace,
    "schmidt": suite_schmidt,
    "purify": suite_purify,
    "lemma": suite_lemma,
    "steering": suite_steering,
    "hughes": suite_hughes,
    "preparation": suite_preparation,
    "premeasurement": suite_premeasurement,
    "fixtures": suite_fixture_roundtrip,
}


def run_all(seed: int = 0) -> list[SuiteResult]:
    """Run every suite, each from its own stream derived from ``seed``."""
    seqs = np.random.SeedSequence(seed).spawn(len(SUITES))
    return [fn(np.random.default_rng(s)) for fn, s in zip(SUITES.values(), seqs)]
