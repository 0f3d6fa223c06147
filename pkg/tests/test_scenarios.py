import numpy as np
import pytest

from conftest import KET0, KET1, PLUS, S
from mixtura.errors import DegenerateWeights, MarginalMismatch, WeightsNotNormalized, ZeroVector
from mixtura.scenarios import (
    PreparationModel,
    Verdict,
    combine_distinguishable,
    combine_indistinguishable,
    despagnat_scenario,
    premeasurement,
    prepare_with_environment,
)
from mixtura.selftest import random_unitary, random_vector
from mixtura.states import projector, purity
from mixtura.numerics import global_phase_distance

STD = [KET0, KET1]


def test_combine_indistinguishable_examples():
    np.testing.assert_allclose(combine_indistinguishable([S, S], STD).amps, PLUS)
    with pytest.raises(ZeroVector):
        combine_indistinguishable([S, -S], [PLUS, PLUS])
    k = combine_indistinguishable([np.sqrt(0.6), np.sqrt(0.4)], STD)
    np.testing.assert_allclose(k.amps, [np.sqrt(0.6), np.sqrt(0.4)])
    assert purity(projector(k)) == pytest.approx(1, abs=1e-14)


def test_combine_indistinguishable_single_alternative(rng):
    v = random_vector(rng, 4)
    out = combine_indistinguishable([0.3 - 0.2j], [v])
    assert global_phase_distance(out.amps, v) <= 1e-12


def test_combine_distinguishable_examples():
    np.testing.assert_array_equal(combine_distinguishable([1], [KET0]).matrix, np.diag([1, 0]))
    np.testing.assert_allclose(combine_distinguishable([0.5, 0.5], STD).matrix, np.eye(2) / 2)
    rho = combine_distinguishable([0.6, 0.4], STD)
    np.testing.assert_allclose(rho.matrix, np.diag([0.6, 0.4]))
    assert purity(rho) == pytest.approx(0.52, abs=1e-15)
    with pytest.raises(WeightsNotNormalized):
        combine_distinguishable([0.6, 0.6], STD)


def test_despagnat_standard_case():
    rep = despagnat_scenario(STD, STD, [0.6, 0.4], [0.6, 0.4])
    # 0.36^2 + 0.24^2 + 0.24^2 + 0.16^2
    assert rep.finding("purity_naive_mixture") == pytest.approx(0.2704, abs=1e-12)
    assert rep.finding("purity_naive_mixture_expected") == pytest.approx(0.2704, abs=1e-12)
    assert rep.finding("purity_pure_composite") == pytest.approx(1, abs=1e-12)
    assert rep.verdict is Verdict.PURE_COMPOSITE_CONTRADICTS_MIXED_CLAIM
    for side in "AB":
        np.testing.assert_allclose(rep.state(f"marginal_naive_{side}").matrix,
                                   rep.state(f"marginal_pure_{side}").matrix, atol=1e-10)


def test_despagnat_degenerate_and_mismatch():
    with pytest.raises(DegenerateWeights):
        despagnat_scenario(STD, STD, [0.5, 0.5], [0.5, 0.5])
    with pytest.raises(MarginalMismatch):
        despagnat_scenario(STD, STD, [0.7, 0.3], [0.6, 0.4])
    with pytest.raises(MarginalMismatch):
        despagnat_scenario(STD, STD, [0.7, 0.3], [0.7, 0.3], np.array([[1, 0], [0, 0]]))


def test_despagnat_marginals_07():
    rep = despagnat_scenario(STD, STD, [0.7, 0.3], [0.7, 0.3], np.diag([np.sqrt(0.7), np.sqrt(0.3)]))
    for label in ("marginal_naive_A", "marginal_naive_B", "marginal_pure_A", "marginal_pure_B"):
        np.testing.assert_allclose(rep.state(label).matrix, np.diag([0.7, 0.3]), atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_despagnat_random_bases(rng, n):
    u = random_unitary(rng, n)
    v = random_unitary(rng, n)
    a = rng.random(n) + 0.1
    a /= a.sum()
    # any phases on the diagonal keep both marginals
    coeffs = np.diag(np.sqrt(a) * np.exp(2j * np.pi * rng.random(n)))
    rep = despagnat_scenario(list(u.T), list(v.T), a, a, coeffs)
    assert rep.finding("marginal_gap_naive_vs_pure") <= 1e-10
    assert abs(rep.finding("purity_naive_mixture") - np.sum(np.outer(a, a) ** 2)) <= 1e-10
    assert rep.finding("purity_naive_mixture") < 1
    assert rep.verdict is Verdict.PURE_COMPOSITE_CONTRADICTS_MIXED_CLAIM


def test_preparation_examples():
    e0, e1 = KET0, KET1
    g = [S, S]
    rep = prepare_with_environment(PreparationModel(zip(g, STD, [e0, e0])))
    assert rep.verdict is Verdict.PURE
    np.testing.assert_allclose(rep.state("rho_S").matrix, projector(PLUS).matrix, atol=1e-12)

    rep = prepare_with_environment(PreparationModel(zip(g, STD, [e0, e1])))
    assert rep.verdict is Verdict.IMPROPER_MIXTURE
    np.testing.assert_allclose(rep.state("rho_S").matrix, np.eye(2) / 2, atol=1e-12)

    rep = prepare_with_environment(PreparationModel(zip([np.sqrt(0.6), np.sqrt(0.4)], STD, [e0, PLUS])))
    rho = rep.state("rho_S").matrix
    # joint ket (sqrt.6, 0, sqrt.2, sqrt.2) traced by hand
    np.testing.assert_allclose(rho, [[0.6, np.sqrt(0.24) * S], [np.sqrt(0.24) * S, 0.4]], atol=1e-12)
    assert rep.verdict is Verdict.IMPROPER_MIXTURE
    assert 0.52 < rep.finding("purity_rho_S") < 1


def test_preparation_zero_vector():
    with pytest.raises(ZeroVector):
        prepare_with_environment(PreparationModel([(S, KET0, KET0), (-S, KET0, KET0)]))


def test_preparation_collinear_random(rng):
    for _ in range(30):
        ds, de, m = (int(x) for x in rng.integers(2, 6, size=3))
        eta = random_vector(rng, de)
        model = PreparationModel(zip(random_vector(rng, m),
                                     [random_vector(rng, ds) for _ in range(m)],
                                     [np.exp(1j * rng.random() * 6) * eta for _ in range(m)]))
        rep = prepare_with_environment(model)
        assert rep.verdict is Verdict.PURE
        assert rep.finding("purity_rho_S") >= 1 - 1e-9


def test_premeasurement_examples():
    rep = premeasurement([1, 0])
    np.testing.assert_allclose(rep.state("rho_S").matrix, np.diag([1, 0]))
    assert rep.verdict is Verdict.PURE
    rep = premeasurement([S, S])
    np.testing.assert_allclose(rep.state("rho_S").matrix, np.eye(2) / 2, atol=1e-15)
    assert rep.verdict is Verdict.IMPROPER_MIXTURE
    rep = premeasurement([np.sqrt(0.6), np.sqrt(0.4)])
    np.testing.assert_allclose(rep.state("rho_S").matrix, np.diag([0.6, 0.4]), atol=1e-15)
    assert rep.finding("gap_to_distinguishable_mixture") <= 1e-12


def test_premeasurement_rotated_pointers(rng):
    for _ in range(20):
        n = int(rng.integers(2, 6))
        c = random_vector(rng, n)
        pointers = list(random_unitary(rng, n + 1)[:, :n].T)
        rep = premeasurement(c, pointers)
        assert rep.finding("max_offdiagonal") <= 1e-12
        np.testing.assert_allclose(np.diag(rep.state("rho_S").matrix).real, np.abs(c) ** 2, atol=1e-12)


def test_report_rejects_non_finite():
    from mixtura.scenarios import ScenarioReport
    with pytest.raises(ValueError):
        ScenarioReport("x", (), (("a", float("nan")),), Verdict.PURE, "")
