"""Classical information, its upper and lower bounds, and the identities linking them.

Notation: letters alpha index the input ensemble {p_i, rho_i}, outcomes omega
index the instrument.  ``table[a, w] = p_if(alpha, omega)``.  All quantities
are in bits.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import entropy as ent
from . import matcore
from .exceptions import DimensionMismatch, InvariantViolation, SingularAverageState
from .halldual import HallPackage, apply_dual, build_hall
from .instruments import POVM, Instrument, channel_lambda_I, probs_array
from .qstates import ZERO_PROB, Ensemble, TripartiteState, average_state, maximally_mixed
from .randgen import random_density, random_ensemble, random_pure, rng_for

SLACK = 1e-9
IDENTITY_TOL = 1e-9


def _weighted(weights: np.ndarray, values: np.ndarray) -> float:
    live = weights > ZERO_PROB
    return float(np.sum(weights[live] * values[live]))


@dataclass(frozen=True, eq=False)
class Measurement:
    """Per-(ensemble, instrument) quantities shared by every bound."""

    ensemble: Ensemble
    instrument: Instrument
    effects: np.ndarray
    eta: np.ndarray
    table: np.ndarray
    p_i: np.ndarray
    p_f: np.ndarray
    f_given_i: np.ndarray
    i_given_f: np.ndarray
    post: np.ndarray
    post_completed: np.ndarray
    rho_f: np.ndarray
    rho_f_completed: np.ndarray
    eta_f_alpha: np.ndarray
    eta_f: np.ndarray

    @property
    def povm(self) -> POVM:
        return POVM(self.instrument.labels, self.effects)


def measure(e: Ensemble, inst: Instrument) -> Measurement:
    if e.dim != inst.dim:
        raise DimensionMismatch(f"ensemble dimension {e.dim} vs instrument dimension {inst.dim}")
    d = e.dim
    effects = inst.effects()
    effects = 0.5 * (effects + matcore.dagger(effects))
    eta = average_state(e)
    nA = len(e)
    out = np.array([inst.apply_all(rho) for rho in e.states])
    f_given_i = np.trace(out, axis1=2, axis2=3).real.clip(0.0, None)
    table = e.weights[:, None] * f_given_i
    p_f = table.sum(axis=0)
    zero_f = p_f <= ZERO_PROB
    i_given_f = table / np.where(zero_f, 1.0, p_f)[None, :]
    i_given_f[:, zero_f] = 1.0 / nA

    post_zero = f_given_i <= ZERO_PROB
    post = out / np.where(post_zero, 1.0, f_given_i)[:, :, None, None]
    post[post_zero] = maximally_mixed(d)

    out_eta = inst.apply_all(eta)
    rho_f = out_eta / np.where(zero_f, 1.0, p_f)[:, None, None]
    rho_f[zero_f] = maximally_mixed(d)
    eta_f_alpha = out.sum(axis=1)
    return Measurement(
        ensemble=e,
        instrument=inst,
        effects=effects,
        eta=eta,
        table=table,
        p_i=np.array(e.weights),
        p_f=p_f,
        f_given_i=f_given_i,
        i_given_f=i_given_f,
        post=post,
        post_completed=post_zero,
        rho_f=rho_f,
        rho_f_completed=zero_f,
        eta_f_alpha=eta_f_alpha,
        eta_f=out_eta.sum(axis=0),
    )


def _povm_of(obj) -> POVM:
    return POVM(obj.labels, obj.effects()) if isinstance(obj, Instrument) else obj


def joint_table(e: Ensemble, povm: POVM) -> np.ndarray:
    return e.weights[:, None] * np.array([probs_array(povm.elements, rho) for rho in e.states])


def classical_info(e: Ensemble, povm) -> float:
    """I_c{p_i, rho_i; E}: mutual information of the input/output joint distribution."""
    povm = _povm_of(povm)
    if povm.dim != e.dim:
        raise DimensionMismatch(f"ensemble dimension {e.dim} vs POVM dimension {povm.dim}")
    return ent.mutual_info_classical(joint_table(e, povm))


def holevo(e: Ensemble) -> float:
    return ent.chi(e.weights, e.states)


def mean_posterior_chi(m: Measurement) -> float:
    """sum_w p_f(w) chi{p_i|f(.|w), rho_f^.(w)}: information left in the a posteriori states."""
    total = 0.0
    for w in range(len(m.p_f)):
        if m.p_f[w] > ZERO_PROB:
            total += m.p_f[w] * ent.chi(m.i_given_f[:, w], m.post[:, w])
    return total


def mean_letter_chi(m: Measurement) -> float:
    """sum_a p_i(a) chi{p_f|i(.|a), rho_f^a}."""
    total = 0.0
    for a in range(len(m.p_i)):
        if m.p_i[a] > ZERO_PROB:
            total += m.p_i[a] * ent.chi(m.f_given_i[a], m.post[a])
    return total


def _chi_joint(m: Measurement) -> float:
    """chi{p_if, rho_f^.} over the product alphabet."""
    d = m.post.shape[-1]
    return ent.chi(m.table.ravel(), m.post.reshape(-1, d, d))


def sww_forms(e: Ensemble, inst: Instrument, m: Measurement | None = None) -> tuple[float, float]:
    """The a posteriori form and the symmetric three-chi form of the SWW bound."""
    m = measure(e, inst) if m is None else m
    hlv = holevo(e)
    direct = hlv - mean_posterior_chi(m)
    symmetric = hlv + ent.chi(m.p_f, m.rho_f) - _chi_joint(m)
    return direct, symmetric


def sww(e: Ensemble, inst: Instrument, m: Measurement | None = None) -> float:
    direct, symmetric = sww_forms(e, inst, m)
    if abs(direct - symmetric) > IDENTITY_TOL:
        raise InvariantViolation(f"SWW forms disagree: {direct!r} vs {symmetric!r}")
    return direct


def iq_gain(inst: Instrument, eta) -> float:
    """Quantum information gain S_q(eta) - sum_w p_eta(w) S_q(pi_eta(w))."""
    eta = np.asarray(eta, dtype=complex)
    blocks = inst.apply_all(eta)
    p = np.trace(blocks, axis1=1, axis2=2).real
    val = ent.vn_entropy(eta)
    for pw, b in zip(p, blocks):
        if pw > ZERO_PROB:
            val -= pw * ent.vn_entropy(b / pw)
    return val


@dataclass
class GLReport:
    pure_preserving: bool
    max_purity_defect: float
    min_iq_mixed: Optional[float]
    min_iqineq_slack: float
    min_ic: float
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def iqineq_terms(e: Ensemble, inst: Instrument) -> tuple[float, float]:
    """(I_q(eta; I) - sum_a p_i(a) I_q(rho_i(a); I), I_c)."""
    lhs = iq_gain(inst, average_state(e))
    for pw, rho in zip(e.weights, e.states):
        if pw > ZERO_PROB:
            lhs -= pw * iq_gain(inst, rho)
    return lhs, classical_info(e, _povm_of(inst))


def groenewold_lindblad_check(inst: Instrument, trials: int = 50, seed=0) -> GLReport:
    rng = rng_for(seed)
    d = inst.dim
    defect = 0.0
    for _ in range(trials):
        psi = random_pure(rng, d)
        for b in inst.apply_all(psi):
            pw = np.trace(b).real
            if pw > ZERO_PROB:
                pi = b / pw
                defect = max(defect, 1.0 - float(np.trace(pi @ pi).real))
    pure = defect <= 1e-9
    report = GLReport(pure, defect, None, np.inf, np.inf)
    if pure:
        report.min_iq_mixed = min(iq_gain(inst, random_density(rng, d)) for _ in range(trials))
        if report.min_iq_mixed < -SLACK:
            report.violations.append(f"I_q = {report.min_iq_mixed:.3e} < 0 for a pure-preserving instrument")
    for _ in range(trials):
        n = int(rng.integers(2, 5))
        e = random_ensemble(rng, d, n)
        lhs, ic = iqineq_terms(e, inst)
        report.min_iqineq_slack = min(report.min_iqineq_slack, lhs - ic)
        report.min_ic = min(report.min_ic, ic)
    if report.min_iqineq_slack < -SLACK:
        report.violations.append(f"I_q inequality slack {report.min_iqineq_slack:.3e}")
    if report.min_ic < -SLACK:
        report.violations.append(f"negative I_c {report.min_ic:.3e}")
    return report


def _hall(e: Ensemble, povm, pkg: HallPackage | None) -> HallPackage:
    return build_hall(e, _povm_of(povm)) if pkg is None else pkg


def lower_bounds(e: Ensemble, povm, pkg: HallPackage | None = None) -> tuple[float, float]:
    """(b_nlb, b_Scu) = (chi{p_i, xi}, chi{p_f, epsilon})."""
    pkg = _hall(e, povm, pkg)
    return ent.chi(pkg.p_i, pkg.xi), ent.chi(pkg.p_f, pkg.epsilon)


def dual_gains(pkg: HallPackage) -> np.ndarray:
    """I_q{sigma(w); J} for each outcome, using the generic instrument action."""
    gains = np.zeros(len(pkg.outcomes))
    for w, sig in enumerate(pkg.sigma):
        if pkg.sigma_completed[w]:
            continue
        p, states, zero = apply_dual(pkg, sig)
        val = ent.vn_entropy(sig)
        for a in range(len(p)):
            if not zero[a]:
                val -= p[a] * ent.vn_entropy(states[a])
        gains[w] = val
    return gains


def dual_gain_of_average(pkg: HallPackage) -> float:
    """I_q{eta_i; J}, which equals the Holevo quantity of the ensemble."""
    p, states, zero = apply_dual(pkg, pkg.eta)
    val = ent.vn_entropy(pkg.eta)
    for a in range(len(p)):
        if not zero[a]:
            val -= p[a] * ent.vn_entropy(states[a])
    return val


def hall_and_nub(e: Ensemble, inst, pkg: HallPackage | None = None) -> tuple[float, float]:
    """(B_Hall, B_nub) = (chi{p_f, sigma}, chi{p_i, rho_i} - sum_w p_f I_q{sigma(w); J})."""
    pkg = _hall(e, inst, pkg)
    hlv = holevo(e)
    gains = dual_gains(pkg)
    if gains.min() < -SLACK:
        raise InvariantViolation(f"negative dual information gain {gains.min():.3e}")
    gap = abs(dual_gain_of_average(pkg) - hlv)
    if gap > IDENTITY_TOL:
        raise InvariantViolation(f"I_q(eta; J) differs from chi by {gap:.3e}")
    return ent.chi(pkg.p_f, pkg.sigma), hlv - _weighted(pkg.p_f, gains)


def nub_symmetric_form(pkg: HallPackage) -> float:
    """chi{p_f, sigma} - sum_a p_i(a) chi{p_f|i(.|a), pi^J_sigma(.)(a)}."""
    val = ent.chi(pkg.p_f, pkg.sigma)
    for a in range(len(pkg.letters)):
        if pkg.p_i[a] > ZERO_PROB:
            val -= pkg.p_i[a] * ent.chi(pkg.f_given_i[a], pkg.pi_J[a])
    return val


def b1_b2(e: Ensemble, inst: Instrument, pkg: HallPackage | None = None, m: Measurement | None = None) -> tuple[float, float]:
    """b1 = chi{p_i, eta_f^.} - mean posterior chi; b2 = chi{p_i, rho_i} - mean J-posterior chi."""
    m = measure(e, inst) if m is None else m
    pkg = _hall(e, inst, pkg)
    b1 = ent.chi(m.p_i, m.eta_f_alpha) - mean_posterior_chi(m)
    b2 = holevo(e) - mean_dual_posterior_chi(pkg)
    return b1, b2


def mean_dual_posterior_chi(pkg: HallPackage) -> float:
    total = 0.0
    for w in range(len(pkg.outcomes)):
        if pkg.p_f[w] > ZERO_PROB:
            total += pkg.p_f[w] * ent.chi(pkg.i_given_f[:, w], pkg.pi_J[:, w])
    return total


@dataclass
class TripartiteResult:
    state: TripartiteState
    marginals: dict
    # name -> (relative-entropy definition, chi expression)
    mutual_entropies: dict
    tensf_residual: float
    initial_mutual_entropy: tuple

    def max_gap(self) -> float:
        gaps = [abs(a - b) for a, b in self.mutual_entropies.values()]
        gaps.append(abs(self.initial_mutual_entropy[0] - self.initial_mutual_entropy[1]))
        return max(gaps)


def tripartite_final(e: Ensemble, inst: Instrument, m: Measurement | None = None) -> TripartiteResult:
    m = measure(e, inst) if m is None else m
    blocks = m.table[:, :, None, None] * m.post
    state = TripartiteState(e.labels, inst.labels, blocks)
    p_i, p_f = m.p_i, m.p_f
    s01 = p_i[:, None, None] * m.eta_f_alpha
    s12 = p_f[:, None, None] * m.rho_f
    s1 = m.eta_f
    marg = {"01": s01, "02": m.table, "12": s12, "0": p_i, "1": s1, "2": p_f}

    def rel(a, b):
        return ent.block_rel_entropy(a, b)

    ic = ent.mutual_info_classical(m.table)
    joint_chi = _chi_joint(m)
    post_chi = mean_posterior_chi(m)
    letter_chi = mean_letter_chi(m)
    me = {
        "02": (ent.kl(m.table.ravel(), np.outer(p_i, p_f).ravel()), ic),
        "01": (rel(s01, p_i[:, None, None] * s1), ent.chi(p_i, m.eta_f_alpha)),
        "12": (rel(s12, p_f[:, None, None] * s1), ent.chi(p_f, m.rho_f)),
        "02,1": (rel(blocks, m.table[:, :, None, None] * s1), joint_chi),
        "0,12": (rel(blocks, p_i[:, None, None, None] * s12[None]), ic + post_chi),
        "01,2": (rel(blocks, s01[:, None] * p_f[None, :, None, None]), ic + letter_chi),
        "0,1,2": (rel(blocks, np.outer(p_i, p_f)[:, :, None, None] * s1), ic + joint_chi),
    }
    # the channel 1 x Lambda_I applied to the product of the initial marginals
    lam_prod = np.array([[pa * b for b in inst.apply_all(m.eta)] for pa in p_i])
    tensf = float(np.abs(lam_prod - p_i[:, None, None, None] * s12[None]).max())
    init_rel = rel(p_i[:, None, None] * e.states, p_i[:, None, None] * m.eta[None])
    return TripartiteResult(state, marg, me, tensf, (init_rel, holevo(e)))


@dataclass
class IdentityReport:
    idt1: tuple
    idt2: tuple
    varineq_slack: float
    aprioribound_slack: float
    apriori_average_residual: float

    def max_gap(self) -> float:
        return max(abs(self.idt1[0] - self.idt1[1]), abs(self.idt2[0] - self.idt2[1]))


def chi_identities(e: Ensemble, inst: Instrument, m: Measurement | None = None) -> IdentityReport:
    m = measure(e, inst) if m is None else m
    chi_f = ent.chi(m.p_f, m.rho_f)
    post_chi = mean_posterior_chi(m)
    letter_chi = mean_letter_chi(m)
    chi_apriori = ent.chi(m.p_i, m.eta_f_alpha)
    ic = ent.mutual_info_classical(m.table)
    avg1 = np.einsum("a,aij->ij", m.p_i, m.eta_f_alpha)
    avg2 = np.einsum("w,wij->ij", m.p_f, m.rho_f)
    resid = float(max(np.abs(avg1 - m.eta_f).max(), np.abs(avg2 - m.eta_f).max()))
    return IdentityReport(
        idt1=(_chi_joint(m), chi_f + post_chi),
        idt2=(chi_f + post_chi, chi_apriori + letter_chi),
        varineq_slack=ic + letter_chi - chi_f,
        aprioribound_slack=ic + post_chi - chi_apriori,
        apriori_average_residual=resid,
    )


@dataclass
class GammaReport:
    joint_residual: float
    product_residual: float
    nmei_lhs: float
    nmei_rhs: float
    b_nlb: float

    @property
    def slack(self) -> float:
        return self.nmei_lhs - self.nmei_rhs


def gamma_channel_check(e: Ensemble, povm, pkg: HallPackage | None = None) -> GammaReport:
    """Gamma[f](a) = sum_w f(a, w) sigma(w) applied to p_if and to p_i x p_f."""
    pkg = _hall(e, povm, pkg)

    def gamma(f):
        return np.einsum("aw,wij->aij", f, pkg.sigma)

    g_joint = gamma(pkg.table)
    g_prod = gamma(np.outer(pkg.p_i, pkg.p_f))
    r1 = float(np.abs(g_joint - pkg.p_i[:, None, None] * pkg.xi).max())
    r2 = float(np.abs(g_prod - pkg.p_i[:, None, None] * pkg.eta[None]).max())
    lhs = ent.mutual_info_classical(pkg.table)
    rhs = ent.block_rel_entropy(g_joint, g_prod)
    return GammaReport(r1, r2, lhs, rhs, ent.chi(pkg.p_i, pkg.xi))


def subentropy_bound(e: Ensemble) -> float:
    val = ent.subentropy(average_state(e))
    for pw, rho in zip(e.weights, e.states):
        if pw > ZERO_PROB:
            val -= pw * ent.subentropy(rho)
    return val


REPORT_FIELDS = ("i_c", "b_hlv", "b_sww", "b_hall", "b_nub", "b_nlb", "b_scu", "b_subent", "b1", "b2", "iq_eta")


@dataclass
class BoundsReport:
    i_c: float
    b_hlv: float
    b_sww: float
    b_hall: Optional[float]
    b_nub: Optional[float]
    b_nlb: Optional[float]
    b_scu: Optional[float]
    b_subent: float
    b1: float
    b2: Optional[float]
    iq_eta: float
    mean_posterior_chi: float
    mean_dual_gain: Optional[float]
    hall_available: bool = True
    completed_outcomes: tuple = ()
    completed_posteriors: int = 0

    def checks(self) -> list[tuple[str, float]]:
        """(description, slack) for every ordering invariant; slack >= -1e-9 passes."""
        out = [
            ("0 <= I_c", self.i_c),
            ("I_c <= B_SWW", self.b_sww - self.i_c),
            ("B_SWW <= B_Hlv", self.b_hlv - self.b_sww),
            ("b1 <= I_c", self.i_c - self.b1),
        ]
        if self.hall_available:
            out += [
                ("0 <= b_nlb", self.b_nlb),
                ("b_nlb <= I_c", self.i_c - self.b_nlb),
                ("0 <= b_Scu", self.b_scu),
                ("b_Scu <= I_c", self.i_c - self.b_scu),
                ("I_c <= B_nub", self.b_nub - self.i_c),
                ("B_nub <= B_Hall", self.b_hall - self.b_nub),
                ("B_nub <= B_Hlv", self.b_hlv - self.b_nub),
                ("b2 <= I_c", self.i_c - self.b2),
            ]
        return out

    def violations(self, slack: float = SLACK) -> list[tuple[str, float]]:
        return [(name, s) for name, s in self.checks() if s < -slack]

    def assert_ordering(self, slack: float = SLACK):
        bad = self.violations(slack)
        if bad:
            raise InvariantViolation("; ".join(f"{n} (slack {s:.3e})" for n, s in bad))

    def as_dict(self) -> dict:
        return asdict(self)


def full_report(e: Ensemble, inst: Instrument) -> BoundsReport:
    m = measure(e, inst)
    i_c = ent.mutual_info_classical(m.table)
    b_hlv = holevo(e)
    post_chi = mean_posterior_chi(m)
    b_sww = b_hlv - post_chi
    b1 = ent.chi(m.p_i, m.eta_f_alpha) - post_chi
    report = BoundsReport(
        i_c=i_c,
        b_hlv=b_hlv,
        b_sww=b_sww,
        b_hall=None,
        b_nub=None,
        b_nlb=None,
        b_scu=None,
        b_subent=subentropy_bound(e),
        b1=b1,
        b2=None,
        iq_eta=iq_gain(inst, m.eta),
        mean_posterior_chi=post_chi,
        mean_dual_gain=None,
        completed_outcomes=tuple(l for l, z in zip(inst.labels, m.rho_f_completed) if z),
        completed_posteriors=int(np.sum(m.post_completed & (m.p_i[:, None] > ZERO_PROB))),
    )
    try:
        pkg = build_hall(e, POVM(inst.labels, m.effects))
    except SingularAverageState:
        report.hall_available = False
        return report
    gains = dual_gains(pkg)
    report.mean_dual_gain = _weighted(pkg.p_f, gains)
    report.b_hall = ent.chi(pkg.p_f, pkg.sigma)
    report.b_nub = b_hlv - report.mean_dual_gain
    report.b_nlb, report.b_scu = lower_bounds(e, None, pkg)
    report.b2 = b_hlv - mean_dual_posterior_chi(pkg)
    return report


def uhlmann_slack(inst: Instrument, rho, phi) -> float:
    """S_q(rho || phi) - S(Lambda[rho] || Lambda[phi]); nonnegative for every instrument."""
    before = ent.q_rel_entropy(rho, phi)
    after = ent.hybrid_rel_entropy(channel_lambda_I(inst, rho), channel_lambda_I(inst, phi))
    if math.isinf(before):
        return math.inf
    return before - after
