import math

import numpy as np
import pytest

from entrobounds import bounds, scenarios
from entrobounds import entropy as ent
from entrobounds.exceptions import InvariantViolation
from entrobounds.instruments import POVM, Instrument, Operation, trivial_instrument, unitary_instrument
from entrobounds.qstates import Ensemble, ProbVector, average_state
from entrobounds.randgen import random_density, random_ensemble, random_instrument, random_pure, random_unitary

from conftest import ETA_I, qubit_eigs


def s_of_det(d):
    """Qubit entropy from its determinant."""
    if d <= 1e-300:
        return 0.0
    lm, lp = qubit_eigs(d)
    return -sum(l * math.log2(l) for l in (lm, lp) if l > 0)


def test_classical_info_examples():
    e = scenarios.example_A_ensemble()
    assert bounds.classical_info(e, POVM.trivial(2)) == pytest.approx(0.0, abs=1e-15)
    s = scenarios.two_level_example_A(30.0)
    assert bounds.classical_info(s.ensemble, s.instrument) == pytest.approx(0.311278, abs=1e-4)
    for ens in (scenarios.example_A_ensemble(), scenarios.example_B_ensemble()):
        assert bounds.classical_info(ens, scenarios.eigenprojection_povm(ens)) == pytest.approx(0.0, abs=1e-12)


def test_holevo_examples():
    orth = Ensemble(ProbVector(("a", "b"), [0.5, 0.5]), [scenarios.PROJ0, scenarios.PROJ1])
    assert bounds.holevo(orth) == pytest.approx(1.0, abs=1e-12)
    assert bounds.holevo(scenarios.example_A_ensemble()) == pytest.approx(0.600876, abs=1e-6)
    assert bounds.holevo(scenarios.example_B_ensemble()) == pytest.approx(0.448368, abs=1e-6)


def test_sww_rank_one_reduces_to_holevo(rng):
    for _ in range(20):
        e = random_ensemble(rng, 3, 3)
        u = random_unitary(rng, 3)
        s = scenarios.rank_one_scenario([1, 1, 1], [u[:, k] for k in range(3)], e)
        r = bounds.full_report(s.ensemble, s.instrument)
        assert r.b_sww == pytest.approx(r.b_hlv, abs=1e-9)
        assert r.b_nub == pytest.approx(r.b_hlv, abs=1e-9)
        assert r.b_hall == pytest.approx(ent.vn_entropy(average_state(e)), abs=1e-9)


def test_sww_example_A_equals_hall():
    s = scenarios.two_level_example_A(1.0)
    r = bounds.full_report(s.ensemble, s.instrument)
    assert r.b_sww == pytest.approx(r.b_hall, abs=1e-9)


def test_sww_pure_case_is_information_gain(rng):
    for _ in range(50):
        d = int(rng.integers(2, 4))
        e = random_ensemble(rng, d, d + 1, pure=True)
        inst = random_instrument(rng, d, 3, 1)
        eta = np.einsum("a,aij->ij", e.weights, e.states)
        assert bounds.sww(e, inst) == pytest.approx(bounds.iq_gain(inst, eta), abs=1e-9)


def test_sww_forms_agree(rng):
    for _ in range(100):
        s = scenarios.random_scenario(rng, int(rng.integers(2, 4)), 3, 3, 2)
        a, b = bounds.sww_forms(s.ensemble, s.instrument)
        assert abs(a - b) < 1e-9


def test_iq_gain_examples(rng):
    u = random_unitary(rng, 3)
    assert bounds.iq_gain(unitary_instrument(u), random_density(rng, 3)) == pytest.approx(0.0, abs=1e-10)
    x = 1.0
    ex = math.exp(-x)
    inst = scenarios.counting_instrument_A(x)
    expected = s_of_det(1 / 8) - (3 + ex) / 4 * s_of_det(2 * ex / (3 + ex) ** 2)
    assert bounds.iq_gain(inst, ETA_I) == pytest.approx(expected, abs=1e-12)
    single = random_instrument(rng, 3, 3, 1)
    assert bounds.iq_gain(single, random_pure(rng, 3)) == pytest.approx(0.0, abs=1e-9)


def test_groenewold_lindblad():
    rng = np.random.default_rng(5)
    rep = bounds.groenewold_lindblad_check(random_instrument(rng, 2, 3, 1), trials=30, seed=1)
    assert rep.pure_preserving and rep.ok
    rep = bounds.groenewold_lindblad_check(scenarios.counting_instrument_B(1.0), trials=100, seed=2)
    assert rep.min_iqineq_slack >= -1e-9 and rep.ok
    k = [math.sqrt(0.7) * np.eye(2)] + [math.sqrt(0.1) * p for p in (np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1]))]
    depol = Instrument(("0",), (Operation(np.array(k)),))
    assert not bounds.groenewold_lindblad_check(depol, trials=10).pure_preserving


def test_lower_bounds_trivial():
    e = scenarios.example_B_ensemble()
    assert bounds.lower_bounds(e, POVM.trivial(2)) == pytest.approx((0.0, 0.0), abs=1e-12)


def test_von_neumann_measurement_collapse(rng):
    for _ in range(30):
        e = random_ensemble(rng, int(rng.integers(2, 4)), 3)
        s = scenarios.von_neumann_scenario(e)
        r = bounds.full_report(s.ensemble, s.instrument)
        assert r.b_nlb == pytest.approx(r.i_c, abs=1e-9)
        assert r.b1 == pytest.approx(r.i_c, abs=1e-9)
        assert r.b_scu <= r.i_c + 1e-9


def test_commuting_chain():
    s = scenarios.commuting_qubit_scenario()
    r = bounds.full_report(s.ensemble, s.instrument)
    for v in (r.b_sww, r.b_nub, r.b_hlv, r.b1, r.b2, r.b_nlb):
        assert v == pytest.approx(r.i_c, abs=1e-9)
    assert r.b_hall >= r.b_hlv - 1e-9
    # kappa[a, w] = <w| rho(a) |w>, q12(w, w') = sum_a p(a) kappa_w kappa_w'
    kappa = np.array([np.diag(rho).real for rho in s.ensemble.states])
    kappa = kappa[:, [0, 1]]
    q12 = np.einsum("a,aw,av->wv", s.ensemble.weights, kappa, kappa)
    assert r.b_scu == pytest.approx(ent.mutual_info_classical(q12), abs=1e-12)
    assert r.b_scu <= r.b_nlb + 1e-9


def test_random_commuting_chain(rng):
    for _ in range(30):
        e = random_ensemble(rng, 3, 3, commuting=True)
        s = scenarios.von_neumann_scenario(e)
        r = bounds.full_report(s.ensemble, s.instrument)
        for v in (r.b_sww, r.b_nub, r.b_hlv, r.b1, r.b2, r.b_nlb):
            assert v == pytest.approx(r.i_c, abs=1e-9)


def test_pure_ensemble_relations(rng):
    for _ in range(50):
        d = int(rng.integers(2, 4))
        e = random_ensemble(rng, d, d + 1, pure=True)
        s = scenarios.random_scenario(rng, d, 2, 3, 2)
        r = bounds.full_report(e, s.instrument)
        assert r.b_nub == pytest.approx(r.b_hall, abs=1e-9)
        assert r.b2 == pytest.approx(r.b_scu, abs=1e-9)
        assert r.b_hall <= r.b_hlv + 1e-9


def test_hall_nub_example_B_closed_form():
    x = 1.0
    ex = math.exp(-x)
    s = scenarios.two_level_example_B(x)
    b_hall, b_nub = bounds.hall_and_nub(s.ensemble, s.instrument)
    pt0, pt1 = (147 + 53 * ex) / 200, 53 * (1 - ex) / 200
    hall = s_of_det(1 / 8) - pt0 * s_of_det(100 * ex * (49 + ex) / (147 + 53 * ex) ** 2) - pt1 * s_of_det((10 / 53) ** 2)
    p10, p11 = (539 + 461 * ex) / 1800, 461 * (1 - ex) / 1800
    nub = hall - 5 / 9 * s_of_det(9 / 200) + p10 * s_of_det(900 * ex * (49 + ex) / (539 + 461 * ex) ** 2) + p11 * s_of_det((30 / 461) ** 2)
    assert b_hall == pytest.approx(hall, abs=1e-9)
    assert b_nub == pytest.approx(nub, abs=1e-9)


def test_b1_b2_von_neumann():
    s = scenarios.von_neumann_scenario(scenarios.example_B_ensemble())
    b1, b2 = bounds.b1_b2(s.ensemble, s.instrument)
    assert b1 == pytest.approx(bounds.classical_info(s.ensemble, s.instrument), abs=1e-9)


def test_example_A_b1_b2():
    for x in (0.25, 1.0, 3.0, 5.0):
        s = scenarios.two_level_example_A(x)
        r = bounds.full_report(s.ensemble, s.instrument)
        assert r.b1 < 0
        assert r.b2 == pytest.approx(r.b_scu, abs=1e-9)


def test_tripartite_trivial():
    e = Ensemble(ProbVector(("a",), [1.0]), [np.eye(2) / 2])
    res = bounds.tripartite_final(e, trivial_instrument(2))
    for rel, chi in res.mutual_entropies.values():
        assert rel == pytest.approx(0.0, abs=1e-12)
        assert chi == pytest.approx(0.0, abs=1e-12)


def test_tripartite_random(rng):
    for _ in range(100):
        s = scenarios.random_scenario(rng, int(rng.integers(2, 4)), 3, int(rng.integers(2, 4)), int(rng.integers(1, 3)))
        res = bounds.tripartite_final(s.ensemble, s.instrument)
        assert len(res.mutual_entropies) == 7
        assert res.max_gap() < 1e-9
        assert res.tensf_residual < 1e-10
        ic = bounds.classical_info(s.ensemble, s.instrument)
        rel, _ = res.mutual_entropies["0,1,2"]
        m = bounds.measure(s.ensemble, s.instrument)
        assert rel == pytest.approx(ic + ent.chi(m.table.ravel(), m.post.reshape(-1, s.dim, s.dim)), abs=1e-9)


def test_identities(rng):
    for _ in range(100):
        s = scenarios.random_scenario(rng, int(rng.integers(2, 4)), 3, 3, 2)
        idt = bounds.chi_identities(s.ensemble, s.instrument)
        assert idt.max_gap() < 1e-9
        assert idt.varineq_slack >= -1e-9
        assert idt.aprioribound_slack >= -1e-9
        assert idt.apriori_average_residual < 1e-10


def test_gamma_channel():
    s = scenarios.two_level_example_A(1.0)
    g = bounds.gamma_channel_check(s.ensemble, s.instrument)
    assert g.joint_residual < 1e-10 and g.product_residual < 1e-10
    assert g.slack >= -1e-9
    assert g.nmei_lhs - g.b_nlb >= -1e-9
    e = scenarios.example_B_ensemble()
    g0 = bounds.gamma_channel_check(e, POVM.trivial(2))
    assert g0.nmei_lhs == pytest.approx(0.0, abs=1e-12)
    assert g0.nmei_rhs == pytest.approx(0.0, abs=1e-12)


def test_full_report_large_time_values():
    s = scenarios.two_level_example_A(30.0)
    r = bounds.full_report(s.ensemble, s.instrument)
    assert (r.i_c, r.b_hlv, r.b_subent) == pytest.approx((0.311278, 0.600876, 0.151314), abs=1e-4)
    s = scenarios.two_level_example_B(30.0)
    r = bounds.full_report(s.ensemble, s.instrument)
    assert (r.i_c, r.b_hlv, r.b_subent) == pytest.approx((0.21822, 0.448368, 0.118467), abs=1e-4)


def test_single_letter_report():
    e = Ensemble(ProbVector(("a",), [1.0]), [np.diag([0.7, 0.3])])
    r = bounds.full_report(e, scenarios.counting_instrument_B(1.0))
    for v in (r.i_c, r.b_hlv, r.b_sww, r.b_nub, r.b_nlb, r.b_scu, r.b_subent):
        assert v == pytest.approx(0.0, abs=1e-12)
    assert not r.violations()


def test_singular_average_marks_unavailable():
    e = Ensemble(ProbVector(("a", "b"), [0.5, 0.5]), [scenarios.PROJ0, scenarios.PROJ0])
    r = bounds.full_report(e, scenarios.counting_instrument_A(1.0))
    assert not r.hall_available
    assert r.b_hall is None and r.b_nub is None
    assert not r.violations()


def test_assert_ordering_raises():
    s = scenarios.two_level_example_A(1.0)
    r = bounds.full_report(s.ensemble, s.instrument)
    r.i_c = r.b_hlv + 1.0
    with pytest.raises(InvariantViolation):
        r.assert_ordering()


def test_uhlmann_slack(rng):
    for _ in range(100):
        inst = random_instrument(rng, 2, 3, 2)
        assert bounds.uhlmann_slack(inst, random_density(rng, 2), random_density(rng, 2)) >= -1e-9


# independent numpy evaluation of both expressions for the second counting example
B_ORACLE = {0.5: (-0.07147840314192537, 0.0580464963673992), 1.0: (-0.07171606484136979, 0.09724022709276009),
            3.0: (-0.017924825220337226, 0.14859755347817205), 6.0: (0.002345324935407764, 0.15174266860727847)}


@pytest.mark.parametrize("x", sorted(B_ORACLE))
def test_example_B_b1_b2_oracle(x):
    s = scenarios.two_level_example_B(x)
    assert bounds.b1_b2(s.ensemble, s.instrument) == pytest.approx(B_ORACLE[x], abs=1e-12)


def test_example_B_b1_sign_change():
    def b1(x):
        s = scenarios.two_level_example_B(x)
        return bounds.b1_b2(s.ensemble, s.instrument)[0]
    assert b1(5.0592) < 0 < b1(5.0594)
