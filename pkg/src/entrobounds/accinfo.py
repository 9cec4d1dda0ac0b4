"""Accessible information by multi-start pattern search over rank-one POVMs.

A POVM with n rank-one elements is parameterized by n vectors v(w) in C^d:

    E(w) = S^{-1/2} |v(w)><v(w)| S^{-1/2},   S = sum_w |v(w)><v(w)|,

which is complete by construction whenever S is invertible.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .bounds import classical_info, holevo, subentropy_bound
from .exceptions import DimensionTooLarge
from .instruments import POVM
from .qstates import Ensemble, average_state
from .scenarios import eigenbasis

MAX_DIM = 4
INITIAL_STEP = 0.5
MAX_EVALS = 20_000
IMPROVE_TOL = 1e-13


class AccessibleInfo(NamedTuple):
    value: float
    povm: POVM


def _frame_to_elements(vecs: np.ndarray) -> np.ndarray | None:
    """Rank-one elements from frame vectors (rows), or None if they do not span."""
    s = vecs.T @ vecs.conj()
    w, u = np.linalg.eigh(s)
    if w[0] <= 1e-12 * max(w[-1], 1e-300):
        return None
    root_inv = (u * w ** -0.5) @ u.conj().T
    k = vecs @ root_inv.T
    return np.einsum("wi,wj->wij", k, k.conj())


class _Objective:
    """I_c of the frame POVM, evaluated for a batch of parameter vectors."""

    def __init__(self, e: Ensemble, n: int):
        self.prior = np.asarray(e.weights, dtype=float)
        self.states = np.asarray(e.states)
        self.d = e.dim
        self.n = n
        self.evals = 0

    def decode(self, theta: np.ndarray) -> np.ndarray:
        half = self.n * self.d
        z = theta[..., :half] + 1j * theta[..., half:]
        return z.reshape(theta.shape[:-1] + (self.n, self.d))

    @staticmethod
    def encode(vecs: np.ndarray) -> np.ndarray:
        flat = vecs.ravel()
        return np.concatenate([flat.real, flat.imag])

    def batch(self, thetas: np.ndarray) -> np.ndarray:
        self.evals += len(thetas)
        v = self.decode(thetas)  # (m, n, d)
        s = np.einsum("mwi,mwj->mij", v, v.conj())
        w, u = np.linalg.eigh(s)
        bad = w[:, 0] <= 1e-12 * np.maximum(w[:, -1], 1e-300)
        w = np.where(bad[:, None], 1.0, w)
        root_inv = np.einsum("mik,mk,mjk->mij", u, w ** -0.5, u.conj())
        k = np.einsum("mwj,mij->mwi", v, root_inv)
        cond = np.einsum("mwi,aij,mwj->maw", k.conj(), self.states, k).real
        table = np.clip(self.prior[None, :, None] * cond, 0.0, None)
        vals = _mutual_info(table)
        vals[bad] = -math.inf
        return vals

    def __call__(self, theta: np.ndarray) -> float:
        return float(self.batch(theta[None])[0])


def _mutual_info(table: np.ndarray) -> np.ndarray:
    """Mutual information (bits) of a stack of joint tables, shape (m, A, W)."""
    pr = table.sum(axis=2, keepdims=True)
    pc = table.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(table > 0, table * np.log2(table / (pr * pc)), 0.0)
    return terms.sum(axis=(1, 2))


def _pattern_search(f: _Objective, theta: np.ndarray, tol: float) -> tuple[float, np.ndarray]:
    """Coordinate pattern search: try +-step on every coordinate, take the best
    improving move, halve the step when none improves."""
    best = f(theta)
    size = theta.size
    moves = np.vstack([np.eye(size), -np.eye(size)])
    step = INITIAL_STEP
    while step >= tol and f.evals < MAX_EVALS:
        trials = theta[None, :] + step * moves
        vals = f.batch(trials)
        k = int(np.argmax(vals))
        if vals[k] > best + IMPROVE_TOL:
            best, theta = float(vals[k]), trials[k]
        else:
            step *= 0.5
    return best, theta


def _basis_start(basis: np.ndarray, n: int) -> np.ndarray:
    """Frame vectors from an orthonormal basis (columns), cycling to fill n slots."""
    d = basis.shape[0]
    return np.array([basis[:, w % d] for w in range(n)])


def _fibonacci_sphere(m: int) -> np.ndarray:
    k = np.arange(m) + 0.5
    z = 1.0 - 2.0 * k / m
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = math.pi * (3.0 - math.sqrt(5.0)) * k
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _bloch_vectors(states: np.ndarray) -> np.ndarray:
    return np.column_stack([
        2 * states[:, 0, 1].real,
        -2 * states[:, 0, 1].imag,
        (states[:, 0, 0] - states[:, 1, 1]).real,
    ])


def _projective_values(e: Ensemble, directions: np.ndarray) -> np.ndarray:
    """I_c of the two-outcome measurements (1 +- n.sigma)/2 for each direction n."""
    r = _bloch_vectors(np.asarray(e.states))
    up = 0.5 * (1.0 + directions @ r.T)  # p(+ | a), shape (m, A)
    cond = np.stack([up, 1.0 - up], axis=2).clip(0.0, 1.0)
    return _mutual_info(np.asarray(e.weights)[None, :, None] * cond)


def _bloch_projector_basis(n: np.ndarray) -> np.ndarray:
    """Orthonormal eigenbasis (columns) of n.sigma."""
    theta = math.acos(max(-1.0, min(1.0, n[2])))
    phi = math.atan2(n[1], n[0])
    up = np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
    down = np.array([-np.exp(-1j * phi) * math.sin(theta / 2), math.cos(theta / 2)])
    return np.column_stack([up, down])


def _structured_starts(e: Ensemble, n: int) -> list[np.ndarray]:
    starts = [_basis_start(eigenbasis(average_state(e))[1], n)]
    for rho in e.states:
        starts.append(_basis_start(eigenbasis(rho)[1], n))
    if e.dim == 2:
        dirs = _fibonacci_sphere(400)
        best = dirs[int(np.argmax(_projective_values(e, dirs)))]
        starts.append(_basis_start(_bloch_projector_basis(best), n))
    return starts


def accessible_info(e: Ensemble, n_outcomes: int | None = None, restarts: int = 4, seed: int = 0, tol: float = 1e-6) -> AccessibleInfo:
    """Best I_c over rank-one POVMs with ``n_outcomes`` elements (default d^2)."""
    d = e.dim
    if d > MAX_DIM:
        raise DimensionTooLarge(f"dimension {d} exceeds the limit {MAX_DIM}")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    n = d * d if n_outcomes is None else int(n_outcomes)
    if not d <= n <= d * d:
        raise ValueError(f"number of outcomes must lie in [{d}, {d * d}], got {n}")
    f = _Objective(e, n)
    candidates = [_Objective.encode(v) for v in _structured_starts(e, n)]
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        candidates.append(rng.standard_normal(2 * n * d))

    best_val, best_theta = -math.inf, None
    for theta0 in candidates:
        f.evals = 0
        val, theta = _pattern_search(f, theta0, tol)
        if val > best_val:
            best_val, best_theta = val, theta
    elements = _frame_to_elements(f.decode(best_theta))
    elements = 0.5 * (elements + np.conj(np.swapaxes(elements, 1, 2)))
    povm = POVM(tuple(str(w) for w in range(n)), elements)
    return AccessibleInfo(classical_info(e, povm), povm)


def projective_grid_oracle(e: Ensemble, grid_size: int = 10_000) -> float:
    """Max I_c over qubit projective measurements along a Fibonacci-sphere grid."""
    if e.dim != 2:
        raise DimensionTooLarge("the projective grid oracle is defined for qubits only")
    return float(_projective_values(e, _fibonacci_sphere(grid_size)).max())


def bracket(e: Ensemble) -> tuple[float, float]:
    """(subentropy lower bound, Holevo upper bound) for the accessible information."""
    return subentropy_bound(e), holevo(e)
