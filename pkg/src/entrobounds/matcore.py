"""Dense Hermitian linear algebra for small matrices.

The eigensolver is a cyclic complex Jacobi iteration working on Python
complex scalars; for the dimensions used here (d <= ~8) this is both
accurate and faster than per-rotation numpy calls.
"""
from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from .exceptions import DomainError, NonHermitianInput, NotInvertible, NotPSD

HERMITIAN_RTOL = 1e-12
OFFDIAG_THRESHOLD = 1e-13
MAX_SWEEPS = 100
PSD_CLIP = 1e-10
INVERTIBLE_MIN = 1e-10
ROOT_NOISE = 1e-14


class Spectrum(NamedTuple):
    """Ascending eigenvalues and the unitary matrix of column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T)))


def check_hermitian(a) -> np.ndarray:
    """Return `a` as a complex array, raising NonHermitianInput if it is not self-adjoint."""
    a = as_square(a)
    biggest = float(np.abs(a).max())
    if not math.isfinite(biggest):
        raise ValueError("matrix has non-finite entries")
    scale = 1.0 + biggest
    defect = hermiticity_defect(a)
    if defect > HERMITIAN_RTOL * scale:
        raise NonHermitianInput(f"Hermiticity defect {defect:.3e} exceeds tolerance")
    return a


def _jacobi(rows: list[list[complex]], n: int) -> tuple[list[float], list[list[complex]]]:
    a = rows
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    frob2 = sum(abs(z) ** 2 for row in a for z in row)
    target = (OFFDIAG_THRESHOLD ** 2) * frob2
    for _ in range(MAX_SWEEPS):
        off = 0.0
        for i in range(n):
            ai = a[i]
            for j in range(n):
                if i != j:
                    off += ai[j].real ** 2 + ai[j].imag ** 2
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                ph = (apq / mag).conjugate()
                theta = (a[q][q].real - a[p][p].real) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0.0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # U = diag(1, e^{-i phi}) @ [[c, s], [-s, c]] acting on the (p, q) plane
                u10 = -s * ph
                u11 = c * ph
                u10c = u10.conjugate()
                u11c = u11.conjugate()
                for k in range(n):
                    ak = a[k]
                    akp, akq = ak[p], ak[q]
                    ak[p] = akp * c + akq * u10
                    ak[q] = akp * s + akq * u11
                ap, aq = a[p], a[q]
                for k in range(n):
                    apk, aqk = ap[k], aq[k]
                    ap[k] = c * apk + u10c * aqk
                    aq[k] = s * apk + u11c * aqk
                ap[q] = 0j
                aq[p] = 0j
                ap[p] = complex(ap[p].real, 0.0)
                aq[q] = complex(aq[q].real, 0.0)
                for k in range(n):
                    vk = v[k]
                    vkp, vkq = vk[p], vk[q]
                    vk[p] = vkp * c + vkq * u10
                    vk[q] = vkp * s + vkq * u11
    return [a[i][i].real for i in range(n)], v


def eigh(a) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvalues are returned in ascending order.  Raises NonHermitianInput
    when the Hermiticity tolerance is exceeded.
    """
    a = check_hermitian(a)
    n = a.shape[0]
    if n == 1:
        return Spectrum(np.array([a[0, 0].real]), np.ones((1, 1), dtype=complex))
    herm = 0.5 * (a + a.conj().T)
    vals, vecs = _jacobi(herm.tolist(), n)
    order = sorted(range(n), key=vals.__getitem__)
    w = np.array([vals[i] for i in order])
    v = np.array(vecs, dtype=complex)[:, order]
    return Spectrum(w, v)


def eigvalsh(a) -> np.ndarray:
    return eigh(a).eigenvalues


def clip_psd(w: np.ndarray) -> np.ndarray:
    """Apply the PSD clipping rule to a vector of eigenvalues."""
    if w.size and w.min() < -PSD_CLIP:
        raise NotPSD(f"eigenvalue {w.min():.3e} below -{PSD_CLIP:g}")
    return np.where(w < 0.0, 0.0, w)


def psd_spectrum(a) -> Spectrum:
    s = eigh(a)
    return Spectrum(clip_psd(s.eigenvalues), s.eigenvectors)


def spectral_apply(a, f: Callable[[np.ndarray], np.ndarray], *, spectrum: Spectrum | None = None) -> np.ndarray:
    """Return V diag(f(lambda)) V^dagger for Hermitian `a`."""
    s = spectrum if spectrum is not None else eigh(a)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        fw = np.asarray(f(s.eigenvalues), dtype=float)
    if fw.shape != s.eigenvalues.shape or not np.all(np.isfinite(fw)):
        raise DomainError("function undefined at some eigenvalue")
    v = s.eigenvectors
    return (v * fw) @ v.conj().T


def sqrtm_psd(a) -> np.ndarray:
    s = psd_spectrum(a)
    w = s.eigenvalues
    # round-off eigenvalues would become O(sqrt(eps)) after the root
    w = np.where(w <= ROOT_NOISE * max(float(w.max()), 0.0), 0.0, w)
    return spectral_apply(a, np.sqrt, spectrum=Spectrum(w, s.eigenvectors))


def inv_sqrtm(a) -> np.ndarray:
    """Inverse square root; raises NotInvertible when min eigenvalue <= 1e-10."""
    s = eigh(a)
    if s.eigenvalues.min() <= INVERTIBLE_MIN:
        raise NotInvertible(f"minimum eigenvalue {s.eigenvalues.min():.3e} too small to invert")
    return spectral_apply(a, lambda w: w ** -0.5, spectrum=s)


def det(a) -> complex:
    """Determinant by LU factorisation with partial pivoting (LAPACK getrf)."""
    return complex(np.linalg.det(as_square(a)))


def det_hermitian(a) -> float:
    """Determinant of a Hermitian matrix as the product of its eigenvalues."""
    return float(np.prod(eigh(a).eigenvalues))


def dagger(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(a, -1, -2).conj()
