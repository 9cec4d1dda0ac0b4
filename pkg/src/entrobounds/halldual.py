"""Hall's dual instrument J and the state families derived from it.

Given an ensemble {p_i, rho_i} with invertible average eta and a POVM E,
the dual instrument has Kraus operators

    M(alpha) = sqrt(p_i(alpha)) rho_i(alpha)^{1/2} eta^{-1/2}

and swaps the roles of letters and outcomes while preserving the joint
distribution p_if.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore
from .exceptions import NotInvertible, SingularAverageState
from .instruments import POVM, Instrument, Operation, probs_array
from .qstates import ZERO_PROB, Ensemble, JointDistribution, average_state, maximally_mixed


@dataclass(frozen=True, eq=False)
class HallPackage:
    """Everything built from one (ensemble, POVM) pair.

    Arrays indexed by letter come first, then by outcome:
    ``table[a, w] = p_if``, ``pi_J[a, w]`` is the J a posteriori state of
    sigma(w) for letter a.
    """

    letters: tuple[str, ...]
    outcomes: tuple[str, ...]
    eta: np.ndarray
    eta_sqrt: np.ndarray
    eta_inv_sqrt: np.ndarray
    instrumentJ: Instrument
    povmJ: POVM
    table: np.ndarray
    p_i: np.ndarray
    p_f: np.ndarray
    f_given_i: np.ndarray
    i_given_f: np.ndarray
    sigma: np.ndarray
    xi: np.ndarray
    epsilon: np.ndarray
    pi_J: np.ndarray
    etaJ: np.ndarray
    sigma_completed: np.ndarray
    pi_completed: np.ndarray

    def state_map(self, name: str) -> dict[str, np.ndarray]:
        arr = getattr(self, name)
        keys = self.letters if name == "xi" else self.outcomes
        return dict(zip(keys, arr))


def _dual_kraus(e: Ensemble, root_states: np.ndarray, eta_inv_sqrt: np.ndarray) -> np.ndarray:
    return np.sqrt(e.weights)[:, None, None] * (root_states @ eta_inv_sqrt)


def build_hall(e: Ensemble, povm: POVM) -> HallPackage:
    eta = average_state(e)
    try:
        eta_inv_sqrt = matcore.inv_sqrtm(eta)
    except NotInvertible as exc:
        raise SingularAverageState(str(exc)) from None
    eta_sqrt = matcore.sqrtm_psd(eta)
    d = e.dim
    roots = np.array([matcore.sqrtm_psd(r) for r in e.states])
    kraus = _dual_kraus(e, roots, eta_inv_sqrt)
    inst_j = Instrument(e.labels, tuple(Operation(m[None]) for m in kraus))
    effects_j = np.einsum("aji,ajl->ail", kraus.conj(), kraus)
    effects_j = 0.5 * (effects_j + matcore.dagger(effects_j))
    povm_j = POVM(e.labels, effects_j)

    E = povm.elements
    nA, nO = len(e), len(povm.labels)
    f_given_i = np.array([probs_array(E, rho) for rho in e.states])
    table = e.weights[:, None] * f_given_i
    p_f = table.sum(axis=0)
    zero_f = p_f <= ZERO_PROB
    i_given_f = table / np.where(zero_f, 1.0, p_f)[None, :]
    i_given_f[:, zero_f] = 1.0 / nA

    sigma = np.empty((nO, d, d), dtype=complex)
    for w in range(nO):
        if zero_f[w]:
            sigma[w] = maximally_mixed(d)
        else:
            sigma[w] = eta_sqrt @ E[w] @ eta_sqrt / p_f[w]
    xi = np.einsum("aw,wij->aij", f_given_i, sigma)
    epsilon = np.einsum("aw,aij->wij", i_given_f, e.states)

    pi_j = np.empty((nA, nO, d, d), dtype=complex)
    pi_zero = np.zeros((nA, nO), dtype=bool)
    for a in range(nA):
        for w in range(nO):
            q = f_given_i[a, w]
            if q <= ZERO_PROB or table[a, w] <= ZERO_PROB:
                pi_j[a, w] = maximally_mixed(d)
                pi_zero[a, w] = True
            else:
                pi_j[a, w] = roots[a] @ E[w] @ roots[a] / q
    eta_j = np.einsum("aw,awij->wij", i_given_f, pi_j)

    return HallPackage(
        letters=e.labels,
        outcomes=povm.labels,
        eta=eta,
        eta_sqrt=eta_sqrt,
        eta_inv_sqrt=eta_inv_sqrt,
        instrumentJ=inst_j,
        povmJ=povm_j,
        table=table,
        p_i=np.array(e.weights),
        p_f=p_f,
        f_given_i=f_given_i,
        i_given_f=i_given_f,
        sigma=sigma,
        xi=xi,
        epsilon=epsilon,
        pi_J=pi_j,
        etaJ=eta_j,
        sigma_completed=zero_f,
        pi_completed=pi_zero,
    )


def hall_joint(e: Ensemble, povm: POVM, pkg: HallPackage | None = None) -> JointDistribution:
    """Joint distribution of {p_f, sigma} measured by E_J, rows indexed by outcomes of E."""
    pkg = build_hall(e, povm) if pkg is None else pkg
    t = np.array([pkg.p_f[w] * probs_array(pkg.povmJ.elements, pkg.sigma[w]) for w in range(len(pkg.outcomes))])
    t = np.clip(t, 0.0, None)
    return JointDistribution(pkg.outcomes, pkg.letters, t / t.sum())


def apply_dual(pkg: HallPackage, rho) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Probabilities, a posteriori states and completion flags of J on input rho."""
    blocks = pkg.instrumentJ.apply_all(rho)
    p = np.trace(blocks, axis1=1, axis2=2).real
    zero = p <= ZERO_PROB
    states = blocks / np.where(zero, 1.0, p)[:, None, None]
    states[zero] = maximally_mixed(blocks.shape[1])
    return np.clip(p, 0.0, None), states, zero
