"""Finite-outcome instruments in Kraus form, their POVMs and channels."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import matcore
from .exceptions import (
    DimensionMismatch,
    LabelMismatch,
    NormalizationError,
    UnknownOutcome,
    ZeroReferenceProbability,
)
from .qstates import (
    ZERO_PROB,
    HybridState,
    ProbVector,
    _labels,
    maximally_mixed,
    split_blocks,
)

COMPLETENESS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Operation:
    """A completely positive map rho -> sum_k V_k rho V_k^dagger."""

    kraus: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] < 1 or k.shape[1] != k.shape[2]:
            raise DimensionMismatch(f"Kraus family must have shape (K, d, d), got {k.shape}")
        if not np.all(np.isfinite(k)):
            raise ValueError("Kraus matrices have non-finite entries")
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)

    @property
    def dim(self) -> int:
        return self.kraus.shape[1]

    def effect(self) -> np.ndarray:
        """E = sum_k V_k^dagger V_k."""
        return np.einsum("kji,kjl->il", self.kraus.conj(), self.kraus)

    def apply(self, rho) -> np.ndarray:
        v = self.kraus
        return np.einsum("kij,jl,kml->im", v, rho, v.conj())


def _check_dim(d: int, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (d, d):
        raise DimensionMismatch(f"expected a {d}x{d} state, got shape {rho.shape}")
    return rho


@dataclass(frozen=True, eq=False)
class Instrument:
    """Outcome-labelled operations whose effects sum to the identity."""

    labels: tuple[str, ...]
    ops: tuple[Operation, ...]

    def __post_init__(self):
        ops = tuple(o if isinstance(o, Operation) else Operation(o) for o in self.ops)
        if not ops:
            raise ValueError("an instrument needs at least one outcome")
        object.__setattr__(self, "labels", _labels(self.labels, len(ops)))
        object.__setattr__(self, "ops", ops)
        d = ops[0].dim
        if any(o.dim != d for o in ops):
            raise DimensionMismatch("operations act on different dimensions")
        resid = np.abs(self.effects().sum(axis=0) - np.eye(d)).max()
        if resid > COMPLETENESS_TOL:
            raise NormalizationError(f"effects sum to identity only within {resid:.3e}")

    @classmethod
    def from_mapping(cls, ops: Mapping[str, Sequence]) -> "Instrument":
        return cls(tuple(ops), tuple(Operation(np.asarray(k)) for k in ops.values()))

    @property
    def dim(self) -> int:
        return self.ops[0].dim

    def effects(self) -> np.ndarray:
        return np.array([o.effect() for o in self.ops])

    def index(self, omega: str) -> int:
        try:
            return self.labels.index(omega)
        except ValueError:
            raise UnknownOutcome(omega) from None

    def apply_all(self, rho) -> np.ndarray:
        """Stack of unnormalized outputs O(omega)[rho]."""
        rho = _check_dim(self.dim, rho)
        return np.array([o.apply(rho) for o in self.ops])

    def max_kraus(self) -> int:
        return max(o.kraus.shape[0] for o in self.ops)


@dataclass(frozen=True, eq=False)
class POVM:
    labels: tuple[str, ...]
    elements: np.ndarray

    def __post_init__(self):
        e = np.array(self.elements, dtype=complex)
        if e.ndim != 3 or e.shape[1] != e.shape[2]:
            raise DimensionMismatch(f"POVM elements must have shape (n, d, d), got {e.shape}")
        object.__setattr__(self, "labels", _labels(self.labels, e.shape[0]))
        for el in e:
            matcore.clip_psd(matcore.eigvalsh(el))
        resid = np.abs(e.sum(axis=0) - np.eye(e.shape[1])).max()
        if resid > COMPLETENESS_TOL:
            raise NormalizationError(f"POVM elements sum to identity only within {resid:.3e}")
        e.setflags(write=False)
        object.__setattr__(self, "elements", e)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @classmethod
    def trivial(cls, d: int) -> "POVM":
        return cls(("0",), np.eye(d)[None])


def povm_of(inst: Instrument) -> POVM:
    return POVM(inst.labels, inst.effects())


def _effects_and_labels(inst_or_povm):
    if isinstance(inst_or_povm, Instrument):
        return inst_or_povm.effects(), inst_or_povm.labels
    return inst_or_povm.elements, inst_or_povm.labels


def probs_array(effects: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Tr{E(omega) rho} for a stack of effects, clipped at zero."""
    p = np.einsum("wij,ji->w", effects, rho).real
    return np.where(p < 0.0, 0.0, p)


def outcome_probs(inst_or_povm, rho) -> ProbVector:
    effects, labels = _effects_and_labels(inst_or_povm)
    rho = _check_dim(effects.shape[1], rho)
    return ProbVector.renormalized(labels, probs_array(effects, rho))


def a_posteriori(inst: Instrument, rho, omega: str) -> tuple[np.ndarray, bool]:
    """Conditional output state for outcome omega and whether it was completed."""
    out = inst.ops[inst.index(omega)].apply(_check_dim(inst.dim, rho))
    p = np.trace(out).real
    if p <= ZERO_PROB:
        return maximally_mixed(inst.dim), True
    return out / p, False


def a_priori(inst: Instrument, rho) -> np.ndarray:
    """Unconditional post-measurement state sum_omega O(omega)[rho]."""
    return inst.apply_all(rho).sum(axis=0)


def channel_lambda_I(inst: Instrument, rho) -> HybridState:
    return HybridState(inst.labels, inst.apply_all(rho))


def classical_part(s: HybridState) -> ProbVector:
    p, _, _ = split_blocks(s.blocks)
    return ProbVector.renormalized(s.labels, p)


def quantum_part(s: HybridState) -> np.ndarray:
    return s.blocks.sum(axis=0)


def transpose_channel(povm: POVM, phi, f: ProbVector) -> np.ndarray:
    """phi-transpose of the measurement channel applied to the classical state f."""
    if tuple(f.labels) != povm.labels:
        raise LabelMismatch(f"{f.labels} vs {povm.labels}")
    phi = _check_dim(povm.dim, phi)
    ref = np.einsum("wij,ji->w", povm.elements, phi).real
    if ref.min() <= ZERO_PROB:
        bad = povm.labels[int(ref.argmin())]
        raise ZeroReferenceProbability(f"reference probability of outcome {bad!r} is zero")
    root = matcore.sqrtm_psd(phi)
    out = np.zeros_like(phi)
    for fw, pw, e in zip(f.weights, ref, povm.elements):
        out += (fw / pw) * (root @ e @ root)
    return out


def unitary_instrument(u) -> Instrument:
    return Instrument(("0",), (Operation(np.asarray(u)[None]),))


def trivial_instrument(d: int) -> Instrument:
    return unitary_instrument(np.eye(d))
