import math

import numpy as np
import pytest

from sfbm_kl.errors import DomainError
from sfbm_kl.eigensolve import convergence_sweep, jacobi_eigh, porter_stirling_check, spectrum
from sfbm_kl.galerkin import assemble


def test_jacobi_matches_lapack_random():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((12, 12))
    a = a + a.T
    w, v = jacobi_eigh(a)
    assert np.allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-12)
    assert np.allclose(v.T @ v, np.eye(12), atol=1e-13)
    assert np.allclose(a @ v, v * w, atol=1e-12)


def test_jacobi_route_on_galerkin_matrix():
    mat = assemble("sfbm", 0.7, 24)
    j = spectrum(mat, want_vectors=True, method="jacobi")
    l = spectrum(mat, want_vectors=True)
    assert np.allclose(j.eigenvalues, l.eigenvalues, rtol=0, atol=1e-15)
    # orientation convention makes eigenvectors comparable
    assert np.allclose(j.eigenvectors[:, :5], l.eigenvectors[:, :5], atol=1e-10)


def test_spectrum_of_brownian_matrix():
    sp = spectrum(assemble("sfbm", 0.5, 32), want_vectors=True)
    exact = 1.0 / ((np.arange(32) + 0.5) * math.pi) ** 2
    assert np.allclose(sp.eigenvalues, exact, rtol=0, atol=1e-15)
    assert sp.residual < 1e-15
    assert np.all(np.diff(sp.eigenvalues) <= 0)
    assert not sp.eigenvalues.flags.writeable


def test_orientation_and_sort_are_stable():
    sp = spectrum(np.diag([1.0, 3.0, 3.0, 2.0]), want_vectors=True)
    assert list(sp.eigenvalues) == [3.0, 3.0, 2.0, 1.0]
    idx = np.argmax(np.abs(sp.eigenvectors), axis=0)
    assert np.all(sp.eigenvectors[idx, range(4)] > 0)


def test_input_checks():
    with pytest.raises(DomainError):
        spectrum(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(DomainError):
        spectrum(np.ones((2, 3)))
    with pytest.raises(DomainError):
        spectrum(np.eye(70), method="jacobi")
    with pytest.raises(DomainError):
        spectrum(np.eye(3), method="qr")


def test_serialisation():
    sp = spectrum(assemble("fbm", 0.6, 8))
    assert sp.to_dict()["kind"] == "fbm"
    assert len(sp.to_csv().split()) == 8


@pytest.mark.parametrize("kind,h", [("fbm", 0.3), ("sfbm", 0.6), ("sfbm-noise", 0.75)])
def test_interlacing_small(kind, h):
    sweep = convergence_sweep(kind, h, (16, 32, 64, 128), 8)
    assert sweep.values.shape == (4, 8)
    assert sweep.max_decrease() <= 1e-12


def test_sweep_validation():
    with pytest.raises(DomainError):
        convergence_sweep("sfbm", 0.6, (32, 16), 4)
    with pytest.raises(DomainError):
        convergence_sweep("sfbm", 0.6, (16, 32), 20)


def test_product_inequality_counterexample():
    # indefinite K with T = diag(1, 2): |l_2(T K T)| = 2 exceeds |l_1(K)| l_2(T^T T) = 1
    K = np.array([[0.0, 1.0], [1.0, 0.0]])
    T = np.diag([1.0, 2.0])
    rep = porter_stirling_check(K, np.zeros((2, 2)), T)
    assert not rep.product_passed
    assert rep.product_margin == pytest.approx(-1.0)
    assert rep.sum_passed


def test_product_inequality_holds_for_psd():
    rng = np.random.default_rng(11)
    for _ in range(200):
        b = rng.standard_normal((8, 8))
        K1 = b @ b.T
        K2 = rng.standard_normal((8, 8))
        K2 = K2 + K2.T
        T = rng.standard_normal((8, 8))
        assert porter_stirling_check(K1, K2, T).passed


def test_sum_inequality_holds_for_indefinite():
    rng = np.random.default_rng(12)
    for _ in range(300):
        a, b = rng.standard_normal((2, 8, 8))
        rep = porter_stirling_check(a + a.T, b + b.T, np.eye(8))
        assert rep.sum_passed


def test_porter_stirling_dimension_limit():
    with pytest.raises(DomainError):
        porter_stirling_check(np.eye(17), np.eye(17), np.eye(17))
