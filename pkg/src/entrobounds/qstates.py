"""States on the classical, quantum and hybrid algebras.

Matrices are plain complex numpy arrays.  Families of matrices indexed by a
finite label set (ensemble members, hybrid blocks) are stacked along the
leading axis and carry a tuple of string labels alongside, in a fixed order
that every computation respects.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from . import matcore
from .exceptions import DimensionMismatch, LabelMismatch, NormalizationError

NORM_TOL = 1e-12
# outcome / letter probabilities at or below this are treated as exactly zero
ZERO_PROB = 1e-12


def _labels(labels: Sequence, n: int | None = None) -> tuple[str, ...]:
    out = tuple(str(x) for x in labels)
    if len(set(out)) != len(out):
        raise LabelMismatch(f"duplicate labels in {out}")
    if n is not None and len(out) != n:
        raise LabelMismatch(f"expected {n} labels, got {len(out)}")
    return out


def _clean_probs(w, what: str) -> np.ndarray:
    w = np.array(w, dtype=float)
    if w.ndim != 1 and what != "table":
        raise ValueError(f"{what} must be one-dimensional")
    if not np.all(np.isfinite(w)):
        raise NormalizationError(f"{what} has non-finite entries")
    if w.size and w.min() < -NORM_TOL:
        raise NormalizationError(f"{what} has negative entry {w.min():.3e}")
    w[w < 0] = 0.0
    total = w.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise NormalizationError(f"{what} sums to {total!r}, not 1")
    return w


@dataclass(frozen=True, eq=False)
class ProbVector:
    """A probability vector over an ordered set of string labels."""

    labels: tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self):
        w = _clean_probs(self.weights, "probability vector")
        object.__setattr__(self, "labels", _labels(self.labels, len(w)))
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_mapping(cls, m: Mapping[str, float]) -> "ProbVector":
        return cls(tuple(m), np.array(list(m.values()), dtype=float))

    @classmethod
    def uniform(cls, labels: Sequence[str]) -> "ProbVector":
        n = len(labels)
        return cls(tuple(labels), np.full(n, 1.0 / n))

    @classmethod
    def renormalized(cls, labels: Sequence[str], weights) -> "ProbVector":
        """Build from nonnegative weights, absorbing round-off in the total."""
        w = np.clip(np.asarray(weights, dtype=float), 0.0, None)
        return cls(tuple(labels), w / w.sum())

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, label: str) -> float:
        return float(self.weights[self.labels.index(label)])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.weights.tolist()))


def density_matrix(rho, *, tol: float = NORM_TOL) -> np.ndarray:
    """Validate a statistical operator and return it as a complex array."""
    rho = matcore.check_hermitian(rho)
    matcore.clip_psd(matcore.eigvalsh(rho))
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise NormalizationError(f"trace {tr!r} differs from 1")
    return rho


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex) / d


def ket_projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def _stack(states, what: str) -> np.ndarray:
    mats = [np.asarray(s, dtype=complex) for s in states]
    if not mats or len({m.shape for m in mats}) != 1:
        raise DimensionMismatch(f"{what} must share one square dimension")
    arr = np.array(mats)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise DimensionMismatch(f"{what} must share one square dimension")
    return arr


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Letter states rho(alpha) with a prior p(alpha)."""

    prior: ProbVector
    states: np.ndarray

    def __post_init__(self):
        states = _stack(self.states, "ensemble states")
        if states.shape[0] != len(self.prior):
            raise LabelMismatch("one state per prior label is required")
        for rho in states:
            density_matrix(rho)
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @classmethod
    def from_mapping(cls, prior: Mapping[str, float], states: Mapping[str, np.ndarray]) -> "Ensemble":
        if set(prior) != set(states):
            raise LabelMismatch("prior and states must have the same labels")
        pv = ProbVector.from_mapping(prior)
        return cls(pv, [states[a] for a in pv.labels])

    @property
    def labels(self) -> tuple[str, ...]:
        return self.prior.labels

    @property
    def weights(self) -> np.ndarray:
        return self.prior.weights

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def state(self, label: str) -> np.ndarray:
        return self.states[self.labels.index(label)]

    def __len__(self) -> int:
        return len(self.prior)


def average_state(e: Ensemble) -> np.ndarray:
    """The ensemble average sum_alpha p(alpha) rho(alpha)."""
    return np.einsum("a,aij->ij", e.weights, e.states)


@dataclass(frozen=True, eq=False)
class HybridState:
    """A state on C(Omega; M_d): PSD blocks Sigma(omega) with unit total trace."""

    labels: tuple[str, ...]
    blocks: np.ndarray

    def __post_init__(self):
        blocks = _stack(self.blocks, "hybrid blocks")
        object.__setattr__(self, "labels", _labels(self.labels, blocks.shape[0]))
        for b in blocks:
            matcore.clip_psd(matcore.eigvalsh(b))
        total = np.trace(blocks, axis1=1, axis2=2).real.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise NormalizationError(f"hybrid state has total trace {total!r}")
        blocks.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def product(cls, p: ProbVector, rho) -> "HybridState":
        rho = np.asarray(rho, dtype=complex)
        return cls(p.labels, p.weights[:, None, None] * rho[None])

    @property
    def dim(self) -> int:
        return self.blocks.shape[1]

    def block(self, label: str) -> np.ndarray:
        return self.blocks[self.labels.index(label)]


class Decomposition(NamedTuple):
    """p(omega), conditional states sigma(omega) and zero-probability flags."""

    probs: ProbVector
    states: np.ndarray
    completed: np.ndarray


def split_blocks(blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Array-level hybrid decomposition used by the bound computations."""
    d = blocks.shape[-1]
    p = np.trace(blocks, axis1=-2, axis2=-1).real.copy()
    zero = p <= ZERO_PROB
    safe = np.where(zero, 1.0, p)
    states = blocks / safe[..., None, None]
    states[zero] = np.eye(d) / d
    p[p < 0] = 0.0
    return p, states, zero


def hybrid_decompose(s: HybridState) -> Decomposition:
    p, states, zero = split_blocks(s.blocks)
    return Decomposition(ProbVector.renormalized(s.labels, p), states, zero)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint probabilities table[alpha, omega] over letters x outcomes."""

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim != 2:
            raise ValueError("joint table must be two-dimensional")
        t = _clean_probs(t.ravel(), "table").reshape(t.shape)
        object.__setattr__(self, "row_labels", _labels(self.row_labels, t.shape[0]))
        object.__setattr__(self, "col_labels", _labels(self.col_labels, t.shape[1]))
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def product(cls, p: ProbVector, q: ProbVector) -> "JointDistribution":
        return cls(p.labels, q.labels, np.outer(p.weights, q.weights))

    def transpose(self) -> "JointDistribution":
        return JointDistribution(self.col_labels, self.row_labels, self.table.T)


class Marginals(NamedTuple):
    """Marginals and both conditionals, indexed like the joint table.

    ``col_given_row[a, w] = p(w | a)`` and ``row_given_col[a, w] = p(a | w)``.
    Conditionals on a zero marginal are completed to uniform and flagged.
    """

    rows: ProbVector
    cols: ProbVector
    col_given_row: np.ndarray
    row_given_col: np.ndarray
    rows_completed: np.ndarray
    cols_completed: np.ndarray


def conditionals(table: np.ndarray):
    pr = table.sum(axis=1)
    pc = table.sum(axis=0)
    zr = pr <= ZERO_PROB
    zc = pc <= ZERO_PROB
    col_given_row = table / np.where(zr, 1.0, pr)[:, None]
    col_given_row[zr, :] = 1.0 / table.shape[1]
    row_given_col = table / np.where(zc, 1.0, pc)[None, :]
    row_given_col[:, zc] = 1.0 / table.shape[0]
    return pr, pc, col_given_row, row_given_col, zr, zc


def joint_marginals(j: JointDistribution) -> Marginals:
    pr, pc, cgr, rgc, zr, zc = conditionals(j.table)
    return Marginals(
        ProbVector.renormalized(j.row_labels, pr),
        ProbVector.renormalized(j.col_labels, pc),
        cgr,
        rgc,
        zr,
        zc,
    )


@dataclass(frozen=True, eq=False)
class TripartiteState:
    """Blocks p_if(alpha, omega) rho_f^alpha(omega) on C(A) x M_d x C(Omega)."""

    letters: tuple[str, ...]
    outcomes: tuple[str, ...]
    blocks: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=complex)
        if b.ndim != 4 or b.shape[:2] != (len(self.letters), len(self.outcomes)):
            raise DimensionMismatch("tripartite blocks must have shape (|A|, |Omega|, d, d)")
        total = np.trace(b, axis1=2, axis2=3).real.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise NormalizationError(f"tripartite state has total trace {total!r}")
        object.__setattr__(self, "blocks", b)

    def joint(self) -> JointDistribution:
        """Classical marginal Sigma^{02} = p_if."""
        t = np.trace(self.blocks, axis1=2, axis2=3).real
        return JointDistribution(self.letters, self.outcomes, np.clip(t, 0.0, None) / t.sum())

    def marginal_01(self) -> np.ndarray:
        return self.blocks.sum(axis=1)

    def marginal_12(self) -> np.ndarray:
        return self.blocks.sum(axis=0)

    def marginal_1(self) -> np.ndarray:
        return self.blocks.sum(axis=(0, 1))
