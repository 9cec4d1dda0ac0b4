"""Entropy functionals, all in bits.

Relative entropies return ``math.inf`` when the support condition fails.
Array-level helpers (``chi``, ``entropy_of_spectrum``) are used by the bound
computations to avoid re-validating intermediate states.
"""
from __future__ import annotations

import math
from typing import Sequence

import mpmath
import numpy as np

from . import matcore
from .exceptions import DimensionMismatch, LabelMismatch, NormalizationError
from .qstates import (
    ZERO_PROB,
    Ensemble,
    HybridState,
    JointDistribution,
    ProbVector,
    conditionals,
    split_blocks,
)

INF = math.inf
SUPPORT_TOL = 1e-12
NEG_CLAMP = 1e-12
# eigenvalues closer than this are merged before evaluating subentropy
DEGENERACY_GAP = 1e-7


def _clamp(x: float) -> float:
    if -NEG_CLAMP <= x < 0.0:
        return 0.0
    return x


def _xlogx(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    out = np.zeros_like(w)
    pos = w > 0
    out[pos] = w[pos] * np.log2(w[pos])
    return out


def entropy_of_spectrum(w) -> float:
    return _clamp(float(-_xlogx(w).sum()))


def _weights(p) -> np.ndarray:
    return p.weights if isinstance(p, ProbVector) else np.asarray(p, dtype=float)


def shannon(p) -> float:
    """Shannon entropy of a ProbVector (or plain weight array)."""
    return entropy_of_spectrum(_weights(p))


def kl(p1, p2) -> float:
    """Kullback-Leibler divergence S_c(p1 || p2); inf when p1 is not dominated by p2."""
    if isinstance(p1, ProbVector) and isinstance(p2, ProbVector) and p1.labels != p2.labels:
        raise LabelMismatch(f"{p1.labels} vs {p2.labels}")
    a, b = _weights(p1).ravel(), _weights(p2).ravel()
    if a.shape != b.shape:
        raise LabelMismatch("probability vectors have different lengths")
    live = a > 0
    if np.any(b[live] <= 0):
        return INF
    return _clamp(float(np.sum(a[live] * np.log2(a[live] / b[live]))))


def _psd_eigvals(rho) -> np.ndarray:
    return matcore.clip_psd(matcore.eigvalsh(rho))


def vn_entropy(rho) -> float:
    """von Neumann entropy -Tr rho log2 rho."""
    w = _psd_eigvals(rho)
    if abs(w.sum() - 1.0) > 1e-10:
        raise NormalizationError(f"trace {w.sum()!r} differs from 1")
    return entropy_of_spectrum(w)


def q_rel_entropy(r1, r2, *, support_tol: float = SUPPORT_TOL) -> float:
    """Quantum relative entropy S_q(r1 || r2) in bits."""
    r1 = np.asarray(r1, dtype=complex)
    r2 = np.asarray(r2, dtype=complex)
    if r1.shape != r2.shape:
        raise DimensionMismatch(f"{r1.shape} vs {r2.shape}")
    s2 = matcore.psd_spectrum(r2)
    v = s2.eigenvectors
    diag = np.einsum("ki,kl,li->i", v.conj(), r1, v).real
    supp = s2.eigenvalues > support_tol
    if diag[~supp].sum() > SUPPORT_TOL:
        return INF
    neg_s1 = float(_xlogx(_psd_eigvals(r1)).sum())
    cross = float(np.sum(diag[supp] * np.log2(s2.eigenvalues[supp])))
    return _clamp(neg_s1 - cross)


def block_rel_entropy(blocks1: np.ndarray, blocks2: np.ndarray) -> float:
    """Relative entropy of two block-diagonal positive states with unit total trace.

    Leading axes index the classical labels; the trailing two are the matrix
    blocks.  Equals S_c(p1 || p2) + sum p1 S_q(sigma1 || sigma2).
    """
    b1 = np.asarray(blocks1, dtype=complex)
    b2 = np.asarray(blocks2, dtype=complex)
    if b1.shape != b2.shape:
        raise DimensionMismatch(f"{b1.shape} vs {b2.shape}")
    d = b1.shape[-1]
    p1, st1, _ = split_blocks(b1.reshape(-1, d, d))
    p2, st2, _ = split_blocks(b2.reshape(-1, d, d))
    p1 = np.where(p1 > ZERO_PROB, p1, 0.0)
    p2 = np.where(p2 > ZERO_PROB, p2, 0.0)
    total = kl(p1, p2)
    if total == INF:
        return INF
    for pw, a, b in zip(p1, st1, st2):
        if pw > 0:
            r = q_rel_entropy(a, b)
            if r == INF:
                return INF
            total += pw * r
    return _clamp(total)


def _same_layout(s1: HybridState, s2: HybridState):
    if s1.labels != s2.labels:
        raise LabelMismatch(f"{s1.labels} vs {s2.labels}")
    if s1.dim != s2.dim:
        raise DimensionMismatch(f"{s1.dim} vs {s2.dim}")


def hybrid_entropy(s: HybridState) -> float:
    p, states, _ = split_blocks(s.blocks)
    total = shannon(p)
    for pw, sig in zip(p, states):
        if pw > ZERO_PROB:
            total += pw * vn_entropy(sig)
    return total


def hybrid_rel_entropy(s1: HybridState, s2: HybridState) -> float:
    _same_layout(s1, s2)
    return block_rel_entropy(s1.blocks, s2.blocks)


def mutual_info_classical(j) -> float:
    """Mutual information S_c(p_XY || p_X x p_Y) of a joint table."""
    t = j.table if isinstance(j, JointDistribution) else np.asarray(j, dtype=float)
    return kl(t, np.outer(t.sum(axis=1), t.sum(axis=0)))


def mutual_info_conditional_forms(j: JointDistribution) -> tuple[float, float]:
    """The two conditional decompositions sum_x p(x) S_c(p(.|x) || p_Y) and its mirror."""
    pr, pc, cgr, rgc, _, _ = conditionals(j.table)
    by_row = sum(pr[a] * kl(cgr[a], pc) for a in range(len(pr)) if pr[a] > ZERO_PROB)
    by_col = sum(pc[w] * kl(rgc[:, w], pr) for w in range(len(pc)) if pc[w] > ZERO_PROB)
    return by_row, by_col


def chi(weights: Sequence[float], states: np.ndarray) -> float:
    """chi-quantity S_q(average) - sum p S_q(state), skipping zero-weight members."""
    weights = np.asarray(weights, dtype=float)
    live = weights > ZERO_PROB
    avg = np.einsum("a,aij->ij", weights[live], states[live])
    val = entropy_of_spectrum(_psd_eigvals(avg))
    for pw, rho in zip(weights[live], states[live]):
        val -= pw * entropy_of_spectrum(_psd_eigvals(rho))
    return _clamp(val)


def chi_relative(weights: Sequence[float], states: np.ndarray) -> float:
    """chi-quantity as the average relative entropy to the ensemble average."""
    weights = np.asarray(weights, dtype=float)
    live = weights > ZERO_PROB
    avg = np.einsum("a,aij->ij", weights[live], states[live])
    total = 0.0
    for pw, rho in zip(weights[live], states[live]):
        r = q_rel_entropy(rho, avg)
        if r == INF:
            # members always lie in the support of the average; a tiny average
            # eigenvalue misclassified by the threshold is kept instead
            r = q_rel_entropy(rho, avg, support_tol=0.0)
        total += pw * r
    return _clamp(total)


def chi_quantity(e: Ensemble, *, form: str = "entropy") -> float:
    """Holevo chi of an ensemble; ``form`` selects the entropy-difference or relative-entropy route."""
    if form == "entropy":
        return chi(e.weights, e.states)
    if form == "relative":
        return chi_relative(e.weights, e.states)
    raise ValueError(f"unknown form {form!r}")


def holevo_of(e: Ensemble) -> float:
    return chi_quantity(e)


def _cluster(w: Sequence[float]) -> list[tuple[float, int]]:
    """Merge runs of sorted eigenvalues with gaps below DEGENERACY_GAP into (mean, multiplicity)."""
    groups: list[list[float]] = []
    for x in sorted(w):
        if groups and x - groups[-1][-1] < DEGENERACY_GAP:
            groups[-1].append(x)
        else:
            groups.append([x])
    return [(sum(g) / len(g), len(g)) for g in groups]


def _subentropy_dd(w: Sequence[float]) -> float:
    """-f[l_1, ..., l_n] for f(l) = l^n ln l, via a confluent divided-difference table."""
    n = len(w)
    nodes: list[float] = []
    for mean, mult in _cluster(w):
        nodes.extend([max(mean, 0.0)] * mult)
    def deriv_over_factorial(x, m):
        # f^(m)(x)/m! with f^(m)(x) = n!/(n-m)! x^(n-m) (ln x + H_n - H_{n-m})
        if x == 0:
            return mpmath.mpf(0)
        coeff = mpmath.binomial(n, m)
        return coeff * x ** (n - m) * (mpmath.log(x) + harm[n] - harm[n - m])

    with mpmath.workdps(30 + 8 * n):
        harm = [mpmath.mpf(0)]
        for k in range(1, n + 1):
            harm.append(harm[-1] + mpmath.mpf(1) / k)
        z = [mpmath.mpf(x) for x in nodes]
        # col[i] holds f[z_i, ..., z_{i+order}]
        col = [deriv_over_factorial(x, 0) for x in z]
        for order in range(1, n):
            col = [
                deriv_over_factorial(z[i], order)
                if z[i + order] == z[i]
                else (col[i + 1] - col[i]) / (z[i + order] - z[i])
                for i in range(n - order)
            ]
        return float(-col[0] / mpmath.log(2))


def subentropy(rho) -> float:
    """Subentropy Q(rho), continuous across degenerate spectra."""
    w = _psd_eigvals(rho)
    if w.size == 1:
        return 0.0
    return _clamp(_subentropy_dd(w.tolist()))
