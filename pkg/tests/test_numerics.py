import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixtura.errors import NotHermitian
from mixtura.numerics import (
    Tolerance,
    dagger,
    eig_hermitian,
    fix_phase,
    global_phase_distance,
    gram_schmidt_complete,
    identity,
    svd,
    tensor,
)
from mixtura.selftest import random_unitary

S = 1 / np.sqrt(2)


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_dagger_examples():
    assert dagger([[2 + 3j]])[0, 0] == 2 - 3j
    np.testing.assert_array_equal(dagger(identity(3)), identity(3))
    np.testing.assert_array_equal(dagger([[0, 1], [0, 0]]), [[0, 0], [1, 0]])


def test_dagger_involution_is_exact(rng):
    m = random_complex(rng, 3, 5)
    np.testing.assert_array_equal(dagger(dagger(m)), m)


def test_tensor_examples():
    np.testing.assert_array_equal(tensor([1, 0], [0, 1]), [0, 1, 0, 0])
    np.testing.assert_array_equal(tensor(identity(2), identity(2)), identity(4))
    x = [[0, 1], [1, 0]]
    z = [[1, 0], [0, -1]]
    # blocks 0, Z; Z, 0 written out by hand
    expected = [[0, 0, 1, 0],
                [0, 0, 0, -1],
                [1, 0, 0, 0],
                [0, -1, 0, 0]]
    np.testing.assert_array_equal(tensor(x, z), expected)


def test_tensor_index_convention(rng):
    a, b = random_complex(rng, 2, 3), random_complex(rng, 4, 2)
    t = tensor(a, b)
    assert t.shape == (8, 6)
    for i in range(2):
        for j in range(3):
            for k in range(4):
                for l in range(2):
                    ref = a[i, j] * b[k, l]
                    assert abs(t[i * 4 + k, j * 2 + l] - ref) <= 4e-16 * abs(ref)


def test_tensor_associative_exact_on_gaussian_integers(rng):
    a, b, c = (rng.integers(-9, 10, size=(n, n)) + 1j * rng.integers(-9, 10, size=(n, n))
               for n in (2, 3, 2))
    np.testing.assert_array_equal(tensor(tensor(a, b), c), tensor(a, tensor(b, c)))


def test_tensor_associative_and_trace(rng):
    a, b, c = (random_complex(rng, n, n) for n in (2, 3, 2))
    np.testing.assert_allclose(tensor(tensor(a, b), c), tensor(a, tensor(b, c)), rtol=1e-15, atol=0)
    assert abs(np.trace(tensor(a, b)) - np.trace(a) * np.trace(b)) <= 1e-12 * max(1, abs(np.trace(a) * np.trace(b)))


def test_eig_examples():
    vals, vecs = eig_hermitian(identity(2))
    np.testing.assert_allclose(vals, [1, 1])
    np.testing.assert_allclose(vecs.conj().T @ vecs, identity(2), atol=1e-12)

    vals, vecs = eig_hermitian(np.diag([0.4, 0.6]))
    np.testing.assert_allclose(vals, [0.6, 0.4])
    np.testing.assert_allclose(vecs, [[0, 1], [1, 0]], atol=1e-12)

    # characteristic polynomial l^2 - 1 = 0 solved by hand
    vals, vecs = eig_hermitian([[0, 1], [1, 0]])
    np.testing.assert_allclose(vals, [1, -1], atol=1e-12)
    np.testing.assert_allclose(vecs[:, 0], [S, S], atol=1e-12)
    np.testing.assert_allclose(vecs[:, 1], [S, -S], atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        eig_hermitian([[0, 1], [0, 0]])
    with pytest.raises(NotHermitian):
        eig_hermitian(np.ones((2, 3)))


@pytest.mark.parametrize("n", range(2, 9))
def test_eig_reconstruction(rng, n):
    for _ in range(20):
        a = random_complex(rng, n, n)
        m = a + a.conj().T
        vals, vecs = eig_hermitian(m)
        assert np.all(np.diff(vals) <= 0)
        assert np.linalg.norm(vecs @ np.diag(vals) @ vecs.conj().T - m) <= 1e-10 * np.linalg.norm(m)
        assert np.linalg.norm(vecs.conj().T @ vecs - np.eye(n)) <= 1e-10


def test_eig_phase_convention(rng):
    a = random_complex(rng, 5, 5)
    _, vecs = eig_hermitian(a + a.conj().T)
    for j in range(5):
        lead = vecs[np.flatnonzero(np.abs(vecs[:, j]) > 1e-10)[0], j]
        assert lead.imag == 0 and lead.real > 0


def test_degenerate_cluster_spans_subspace(rng):
    u = random_unitary(rng, 4)
    m = u @ np.diag([3, 1, 1, 0]) @ u.conj().T
    vals, vecs = eig_hermitian(m)
    np.testing.assert_allclose(vals, [3, 1, 1, 0], atol=1e-12)
    proj = vecs[:, 1:3] @ vecs[:, 1:3].conj().T
    ref = u[:, 1:3] @ u[:, 1:3].conj().T
    np.testing.assert_allclose(proj, ref, atol=1e-10)


def test_svd_examples():
    _, s, _ = svd(np.diag([3.0, 2.0]))
    np.testing.assert_allclose(s, [3, 2])
    _, s, _ = svd(np.zeros((2, 3)))
    np.testing.assert_array_equal(s, [0, 0])
    # m m^dagger = diag(1, 0) by hand
    _, s, _ = svd(np.array([[1, 1], [0, 0]]) / np.sqrt(2))
    np.testing.assert_allclose(s, [1, 0], atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_svd_reconstruction(r, c, seed):
    rng = np.random.default_rng(seed)
    m = random_complex(rng, r, c)
    left, s, right = svd(m)
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)
    assert np.linalg.norm(left @ np.diag(s) @ right.conj().T - m) <= 1e-10 * np.linalg.norm(m)
    for j in range(len(s)):
        lead = left[np.flatnonzero(np.abs(left[:, j]) > 1e-10)[0], j]
        assert lead.imag == 0 and lead.real > 0


def test_tolerance_validation():
    assert Tolerance().threshold() == pytest.approx(2e-10)
    assert Tolerance(1e-9, 0).threshold(10) == 1e-9
    with pytest.raises(ValueError):
        Tolerance(0, 0)
    with pytest.raises(ValueError):
        Tolerance(-1, 1)


def test_fix_phase_and_phase_distance():
    v, phase = fix_phase(np.array([0, 1j, 1]))
    np.testing.assert_allclose(v, [0, 1, -1j])
    assert abs(phase) == pytest.approx(1)
    psi = np.array([S, S * 1j])
    assert global_phase_distance(psi, np.exp(0.7j) * psi) < 1e-15
    assert global_phase_distance([1, 0], [0, 1]) == pytest.approx(np.sqrt(2))


def test_gram_schmidt_complete_keeps_leading_vectors():
    v = np.array([S, 0, S * 1j])
    q = gram_schmidt_complete([v], 3)
    np.testing.assert_allclose(q[:, 0], v)
    np.testing.assert_allclose(q.conj().T @ q, np.eye(3), atol=1e-14)
