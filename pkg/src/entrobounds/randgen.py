"""Seeded random states, priors, ensembles and instruments for property tests."""
from __future__ import annotations

import numpy as np

from . import matcore
from .instruments import Instrument, Operation
from .qstates import Ensemble, ProbVector


def rng_for(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_density(rng, d: int, rank: int | None = None) -> np.ndarray:
    """G G^dagger / Tr with G a d x rank complex Gaussian matrix."""
    rng = rng_for(rng)
    g = ginibre(rng, d, d if rank is None else rank)
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_pure(rng, d: int) -> np.ndarray:
    return random_density(rng, d, rank=1)


def random_hermitian(rng, d: int, scale: float = 1.0) -> np.ndarray:
    g = ginibre(rng_for(rng), d, d)
    return scale * 0.5 * (g + g.conj().T)


def random_prior(rng, n: int, labels=None) -> ProbVector:
    """Uniform draw from the simplex via normalized exponentials."""
    rng = rng_for(rng)
    w = rng.exponential(size=n)
    labels = tuple(str(i) for i in range(n)) if labels is None else labels
    return ProbVector.renormalized(labels, w / w.sum())


def random_ensemble(rng, d: int, n_letters: int, *, pure: bool = False, commuting: bool = False) -> Ensemble:
    rng = rng_for(rng)
    prior = random_prior(rng, n_letters)
    if commuting:
        u = random_unitary(rng, d)
        states = []
        for _ in range(n_letters):
            w = rng.exponential(size=d)
            states.append((u * (w / w.sum())) @ u.conj().T)
    else:
        states = [random_density(rng, d, rank=1 if pure else None) for _ in range(n_letters)]
    return Ensemble(prior, states)


def random_unitary(rng, d: int) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(rng_for(rng), d, d))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def normalize_kraus(raw: list[np.ndarray]) -> list[np.ndarray]:
    """Right-multiply every Kraus family by S^{-1/2}, S = sum V^dagger V over all of them."""
    s = sum(np.einsum("kji,kjl->il", v.conj(), v) for v in raw)
    fix = matcore.inv_sqrtm(0.5 * (s + s.conj().T))
    return [v @ fix for v in raw]


def random_instrument(rng, d: int, n_outcomes: int, kraus_per_outcome: int = 1) -> Instrument:
    rng = rng_for(rng)
    raw = [
        np.array([ginibre(rng, d, d) for _ in range(kraus_per_outcome)])
        for _ in range(n_outcomes)
    ]
    ops = tuple(Operation(v) for v in normalize_kraus(raw))
    return Instrument(tuple(str(w) for w in range(n_outcomes)), ops)
