import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entrobounds import matcore
from entrobounds.exceptions import DomainError, NonHermitianInput, NotInvertible, NotPSD
from entrobounds.randgen import random_density, random_hermitian

from conftest import ETA_I, qubit_eigs


def test_identity_eigenvalues():
    s = matcore.eigh(np.eye(2))
    assert np.allclose(s.eigenvalues, [1, 1], atol=1e-14)


def test_eta_i_eigenvalues():
    w = matcore.eigvalsh(ETA_I)
    expected = [0.5 * (1 - 1 / math.sqrt(2)), 0.5 * (1 + 1 / math.sqrt(2))]
    assert np.allclose(w, expected, atol=1e-14)


def test_pauli_x():
    w = matcore.eigvalsh([[0, 1], [1, 0]])
    assert np.allclose(w, [-1, 1], atol=1e-14)


def test_one_by_one():
    s = matcore.eigh([[2.5]])
    assert s.eigenvalues[0] == 2.5
    assert np.allclose(s.reconstruct(), [[2.5]])


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitianInput):
        matcore.eigh([[1, 2], [0, 1]])


def test_non_square_rejected():
    with pytest.raises(ValueError):
        matcore.eigh(np.zeros((2, 3)))


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        matcore.eigh([[np.nan, 0], [0, 1]])


def test_matches_numpy_oracle(rng):
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(2, 6))
        a = random_hermitian(rng, d, scale=float(rng.uniform(0.1, 10)))
        s = matcore.eigh(a)
        ref = np.linalg.eigvalsh(a)
        fro = np.linalg.norm(a)
        worst = max(worst, np.abs(s.eigenvalues - ref).max() / (1 + fro))
        assert np.linalg.norm(s.reconstruct() - a) <= 1e-10 * max(fro, 1e-300)
        assert abs(np.trace(a).real - s.eigenvalues.sum()) <= 1e-10 * (1 + fro)
        v = s.eigenvectors
        assert np.abs(v.conj().T @ v - np.eye(d)).max() <= 1e-10
        for k in range(d):
            resid = np.linalg.norm(a @ v[:, k] - s.eigenvalues[k] * v[:, k])
            assert resid <= 1e-10 * (1 + fro)
        assert np.all(np.diff(s.eigenvalues) >= 0)
    assert worst < 1e-12


def test_degenerate_spectrum():
    u = np.linalg.qr(np.arange(9).reshape(3, 3) + np.eye(3) * 5)[0]
    a = u @ np.diag([2.0, 2.0, -1.0]) @ u.T
    s = matcore.eigh(a)
    assert np.allclose(s.eigenvalues, [-1, 2, 2], atol=1e-12)
    assert np.allclose(s.reconstruct(), a, atol=1e-12)


def test_qubit_closed_form(rng):
    for _ in range(1000):
        rho = random_density(rng, 2)
        d = np.linalg.det(rho).real
        assert np.allclose(matcore.eigvalsh(rho), qubit_eigs(d), atol=1e-12)


def test_spectral_apply_identity_and_sqrt(rng):
    a = random_hermitian(rng, 3)
    assert np.allclose(matcore.spectral_apply(a, lambda w: w), a, atol=1e-10)
    assert np.allclose(matcore.spectral_apply(np.diag([4.0, 9.0]), np.sqrt), np.diag([2, 3]), atol=1e-14)


def test_inverse_sqrt_of_eta_i():
    r = matcore.spectral_apply(ETA_I, lambda w: w ** -0.5)
    assert np.allclose(r @ r @ ETA_I, np.eye(2), atol=1e-9)
    assert np.allclose(matcore.inv_sqrtm(ETA_I), r, atol=1e-12)


def test_exp_inverse(rng):
    for _ in range(200):
        d = int(rng.integers(2, 5))
        a = random_hermitian(rng, d)
        a *= 5.0 / max(np.abs(np.linalg.eigvalsh(a)).max(), 1e-12) * rng.uniform(0, 1)
        prod = matcore.spectral_apply(a, np.exp) @ matcore.spectral_apply(a, lambda w: np.exp(-w))
        assert np.allclose(prod, np.eye(d), atol=1e-9)


def test_domain_error():
    with pytest.raises(DomainError):
        matcore.spectral_apply(np.diag([1.0, 0.0]), lambda w: w ** -0.5)


def test_psd_clipping():
    w = matcore.clip_psd(np.array([-5e-11, 0.3]))
    assert w[0] == 0.0
    with pytest.raises(NotPSD):
        matcore.clip_psd(np.array([-1e-9, 1.0]))
    with pytest.raises(NotPSD):
        matcore.sqrtm_psd(np.diag([1.0, -0.01]))


def test_not_invertible():
    with pytest.raises(NotInvertible):
        matcore.inv_sqrtm(np.diag([1.0, 1e-11]))


def test_determinants():
    assert abs(matcore.det(ETA_I) - 0.125) < 1e-15
    rho1 = np.array([[9, 9], [9, 11]]) / 20
    assert abs(matcore.det(rho1) - 9 / 200) < 1e-15
    assert abs(matcore.det(np.eye(3)) - 1) < 1e-15


def test_det_paths_agree(rng):
    for _ in range(300):
        d = int(rng.integers(2, 6))
        a = random_hermitian(rng, d)
        lu, ev = matcore.det(a).real, matcore.det_hermitian(a)
        assert abs(lu - ev) <= 1e-10 * max(1.0, abs(ev))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=4, max_size=4), st.floats(0, 2 * math.pi))
def test_rotated_diagonal_recovered(vals, angle):
    c, s = math.cos(angle), math.sin(angle)
    u = np.eye(4, dtype=complex)
    u[:2, :2] = [[c, -s * 1j], [-s * 1j, c]]
    a = u @ np.diag(vals) @ u.conj().T
    a = 0.5 * (a + a.conj().T)
    assert np.allclose(matcore.eigvalsh(a), sorted(vals), atol=1e-10 * (1 + np.abs(vals).max()))
