"""Worked scenarios: rank-one and projective measurements, the two-level atom
counting examples, commuting letter states, and seeded random scenarios.

Two-level conventions: the excited state |1> is (1, 0) and the ground
state |0> is (0, 1); x = Gamma t is the dimensionless counting time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import matcore
from .exceptions import DimensionMismatch, NormalizationError, SingularAverageState
from .instruments import POVM, Instrument, Operation
from .qstates import Ensemble, ProbVector, average_state
from .randgen import random_ensemble, random_instrument, rng_for

KET1 = np.array([1.0, 0.0], dtype=complex)
KET0 = np.array([0.0, 1.0], dtype=complex)
PROJ1 = np.outer(KET1, KET1)
PROJ0 = np.outer(KET0, KET0)
# |0><1|: de-excitation
LOWER = np.outer(KET0, KET1)


@dataclass(frozen=True, eq=False)
class Scenario:
    ensemble: Ensemble
    instrument: Instrument
    label: str = ""
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.ensemble.dim != self.instrument.dim:
            raise DimensionMismatch("ensemble and instrument dimensions differ")

    @property
    def dim(self) -> int:
        return self.ensemble.dim


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if abs(n - 1.0) > 1e-10:
        raise NormalizationError(f"vector norm {n!r} is not 1")
    return v


def rank_one_scenario(mu: Sequence[float], psi: Sequence, ensemble: Ensemble, phi: Sequence | None = None, label: str = "rank_one") -> Scenario:
    """Instrument with Kraus operators |phi_k(w)><psi(w)| for the POVM mu(w)|psi(w)><psi(w)|.

    ``phi[w]`` is a list of vectors with sum_k |phi_k(w)|^2 = mu(w); by default
    phi(w) = sqrt(mu(w)) psi(w).
    """
    psi = [_unit(v) for v in psi]
    d = len(psi[0])
    total = sum(m * np.outer(v, v.conj()) for m, v in zip(mu, psi))
    resid = np.abs(total - np.eye(d)).max()
    if resid > 1e-10:
        raise NormalizationError(f"rank-one elements sum to identity only within {resid:.3e}")
    if phi is None:
        phi = [[math.sqrt(m) * v] for m, v in zip(mu, psi)]
    ops = []
    for m, v, fam in zip(mu, psi, phi):
        fam = [np.asarray(f, dtype=complex) for f in fam]
        weight = sum(float(np.vdot(f, f).real) for f in fam)
        if abs(weight - m) > 1e-10:
            raise NormalizationError(f"Kraus vectors carry weight {weight!r}, expected {m!r}")
        ops.append(Operation(np.array([np.outer(f, v.conj()) for f in fam])))
    labels = tuple(str(w) for w in range(len(ops)))
    return Scenario(ensemble, Instrument(labels, tuple(ops)), label)


def _phase_fix(v: np.ndarray) -> np.ndarray:
    for c in v:
        if abs(c) > 1e-12:
            return v * (abs(c) / c)
    return v


def eigenbasis(rho) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues descending and phase-fixed eigenvectors (columns)."""
    s = matcore.eigh(rho)
    order = np.argsort(-s.eigenvalues, kind="stable")
    vecs = np.column_stack([_phase_fix(s.eigenvectors[:, k]) for k in order])
    return s.eigenvalues[order], vecs


def von_neumann_scenario(ensemble: Ensemble, label: str = "von_neumann") -> Scenario:
    """Projective measurement in the eigenbasis of the average state, Lueders reduction."""
    eta = average_state(ensemble)
    vals, vecs = eigenbasis(eta)
    if vals.min() <= matcore.INVERTIBLE_MIN:
        raise SingularAverageState(f"average state has eigenvalue {vals.min():.3e}")
    d = len(vals)
    ops = tuple(Operation(np.outer(vecs[:, k], vecs[:, k].conj())[None]) for k in range(d))
    return Scenario(ensemble, Instrument(tuple(str(k) for k in range(d)), ops), label)


def eigenprojection_povm(ensemble: Ensemble) -> POVM:
    _, vecs = eigenbasis(average_state(ensemble))
    d = vecs.shape[1]
    return POVM(tuple(str(k) for k in range(d)), [np.outer(vecs[:, k], vecs[:, k].conj()) for k in range(d)])


def example_A_ensemble() -> Ensemble:
    plus = 0.5 * np.ones((2, 2), dtype=complex)
    return Ensemble(ProbVector(("0", "1"), np.array([0.5, 0.5])), [PROJ0, plus])


def example_B_ensemble() -> Ensemble:
    rho1 = np.array([[9, 9], [9, 11]], dtype=complex) / 20
    return Ensemble(ProbVector(("0", "1"), np.array([4 / 9, 5 / 9])), [PROJ0, rho1])


def _decay(x: float) -> np.ndarray:
    """exp(-(x/2)|1><1|)."""
    return np.diag([math.exp(-x / 2), 1.0]).astype(complex)


def counting_instrument_A(x: float) -> Instrument:
    if x < 0:
        raise ValueError("x must be nonnegative")
    k0 = _decay(x)
    k1 = math.sqrt(-math.expm1(-x)) * LOWER
    return Instrument(("0", "1"), (Operation(k0[None]), Operation(k1[None])))


def counting_instrument_B(x: float) -> Instrument:
    if x < 0:
        raise ValueError("x must be nonnegative")
    q = -math.expm1(-x)  # 1 - e^{-x}
    eye = np.eye(2, dtype=complex)
    op0 = Operation(np.array([math.sqrt(49 / 50) * _decay(x), math.sqrt(math.exp(-x) / 50) * eye]))
    op1 = Operation(np.array([math.sqrt(49 * q / 50) * LOWER, math.sqrt(q / 50) * eye]))
    return Instrument(("0", "1"), (op0, op1))


def two_level_example_A(x: float) -> Scenario:
    return Scenario(example_A_ensemble(), counting_instrument_A(x), "example_A", {"x": float(x)})


def two_level_example_B(x: float) -> Scenario:
    return Scenario(example_B_ensemble(), counting_instrument_B(x), "example_B", {"x": float(x)})


def commuting_qubit_scenario(x: float = 0.0) -> Scenario:
    """Diagonal letter states measured in their joint eigenbasis."""
    prior = ProbVector(("0", "1", "2"), np.array([0.5, 0.3, 0.2]))
    states = [np.diag([0.9, 0.1]), np.diag([0.2, 0.8]), np.diag([0.5, 0.5])]
    ens = Ensemble(prior, states)
    ops = (Operation(PROJ1[None]), Operation(PROJ0[None]))
    return Scenario(ens, Instrument(("0", "1"), ops), "commuting_qubit", {})


def _eigen_variant(make_ensemble, name):
    def build(x: float = 0.0) -> Scenario:
        s = von_neumann_scenario(make_ensemble())
        return Scenario(s.ensemble, s.instrument, name, {})

    return build


BUILTINS: dict[str, Callable[[float], Scenario]] = {
    "example_A": two_level_example_A,
    "example_B": two_level_example_B,
    "example_A_eigen": _eigen_variant(example_A_ensemble, "example_A_eigen"),
    "example_B_eigen": _eigen_variant(example_B_ensemble, "example_B_eigen"),
    "commuting_qubit": commuting_qubit_scenario,
}


def builtin(name: str, x: float = 0.0) -> Scenario:
    try:
        make = BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}") from None
    return make(x)


def random_scenario(seed, d: int, n_letters: int, n_outcomes: int, kraus_per_outcome: int = 1) -> Scenario:
    if min(d, n_letters, n_outcomes, kraus_per_outcome) < 1:
        raise ValueError("all counts must be at least 1")
    rng = rng_for(seed)
    ens = random_ensemble(rng, d, n_letters)
    inst = random_instrument(rng, d, n_outcomes, kraus_per_outcome)
    params = {"seed": seed, "d": d, "n_letters": n_letters, "n_outcomes": n_outcomes, "kraus_per_outcome": kraus_per_outcome}
    return Scenario(ens, inst, "random", params)
