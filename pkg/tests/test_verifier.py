import math

import numpy as np
import pytest

from maxplus_lln.graph import BlockStructureViolation, decompose
from maxplus_lln.models import MatrixModel, ModelError, builtin_example, load_model
from maxplus_lln.semiring import TropicalMatrix, identity
from maxplus_lln.verifier import (
    NOT_CERTIFIED, SATISFIED, VIOLATED, HypothesisEntry, certify_ergodicity, check_h1_no_bottom_lines,
    check_limit_consistency, check_no_bottom_line, check_precedence, divergence_threshold, empirical_convergence,
    reachability_chain, verdict,
)

NEG = -math.inf
N = NEG


def _chain_fixture(p=0.5):
    # I = {0, 1} strongly connected through the mixed atoms; only atom 1 can exit, from node 1
    a1 = [[N, 0, N], [0, N, 0], [N, N, 0]]
    a2 = [[0, N, N], [N, 0, N], [N, N, 0]]
    return MatrixModel.iid([a1, a2], [p, 1 - p], seed=5)


def _d_bottom_fixture():
    a1 = [[N, 0, N], [0, N, N], [N, N, 0]]
    a2 = [[0, N, N], [N, 0, N], [N, N, 1]]
    return MatrixModel.iid([a1, a2], [0.5, 0.5])


# ------------------------------------------------------------------ H1
def test_h1_mairesse_violated_for_second_component():
    m = builtin_example("mairesse", p=0.3)
    d = decompose(m, horizon=2000, replicates=8)
    h1 = check_h1_no_bottom_lines(m, d)
    assert [e.status for e in h1] == [SATISFIED, VIOLATED]
    w = h1[1].witness
    assert (w["component"], w["atom"], w["row"]) == (1, 0, 1)
    assert math.isclose(w["probability"], 0.3)


def test_h1_precedence_fixture_satisfied():
    m = load_model("tests/fixtures/precedence_fixture.json")
    d = decompose(m, horizon=2000, replicates=8)
    assert all(e.status == SATISFIED for e in check_h1_no_bottom_lines(m, d))


def test_h1_integrability_satisfied():
    m = builtin_example("integrability")
    assert all(e.status == SATISFIED for e in check_h1_no_bottom_lines(m, decompose(m)))


def test_h1_needs_exponents():
    from maxplus_lln.graph import structural_decomposition

    m = builtin_example("mairesse")
    with pytest.raises(ValueError):
        check_h1_no_bottom_lines(m, structural_decomposition(m))


def test_h1_entrywise_bottom_mass():
    e = {"dist": "constant", "value": 0, "bottom": 0.5}
    m = MatrixModel.entrywise([[e, e], [N, 0]], integrable=True)
    d = decompose(m, horizon=500, replicates=4)
    nbl = check_no_bottom_line(m)
    assert nbl.status == VIOLATED and math.isclose(nbl.witness["probability"], 0.25)
    assert any(x.status == VIOLATED for x in check_h1_no_bottom_lines(m, d))


def test_hypothesis_entry_needs_witness_or_reason():
    with pytest.raises(ValueError):
        HypothesisEntry("t", "h", SATISFIED)
    with pytest.raises(ValueError):
        HypothesisEntry("t", "h", "maybe", reason="x")


# ------------------------------------------------------------ precedence
def test_precedence_examples():
    assert check_precedence(builtin_example("exchanges"))[0].status == VIOLATED
    assert check_precedence(MatrixModel.constant(identity(3)))[0].status == SATISFIED
    mp = check_precedence(builtin_example("mairesse"))[0]
    assert mp.status == VIOLATED and mp.witness["nodes"] == [1, 2]


def test_ergodicity_certificate():
    a = [[N, 0], [0, N]]
    b = [[N, 1], [0, N]]
    c = [[N, 2], [1, N]]
    assert certify_ergodicity(builtin_example("exchanges")).status == NOT_CERTIFIED
    assert certify_ergodicity(MatrixModel.periodic([a, b, c])).status == SATISFIED
    # a repeated block reduces to its minimal cycle
    assert certify_ergodicity(MatrixModel.periodic([a, a])).status == SATISFIED
    assert certify_ergodicity(builtin_example("mairesse")).status == SATISFIED


# --------------------------------------------------------------- verdict
def test_verdict_mairesse_diverges():
    v = verdict(builtin_example("mairesse", p=0.5), horizon=2000, replicates=8)
    assert v.verdict == "diverges" and v.theorem == "independent_case"
    assert v.witness["component"] == 1 and v.witness["row"] == 1


def test_verdict_exchanges_not_certified():
    v = verdict(builtin_example("exchanges"))
    assert v.verdict == "not_certified"
    ergo = v.report.select(hypothesis="theta_k_ergodic")[0]
    assert ergo.status == NOT_CERTIFIED and ergo.witness == {"period": 2, "k": 2}


def test_verdict_all_finite_iid_converges_by_both_routes():
    rng = np.random.default_rng(1)
    atoms = [rng.integers(-3, 4, (3, 3)).astype(float) for _ in range(3)]
    v = verdict(MatrixModel.iid(atoms, [0.2, 0.3, 0.5]), horizon=1000, replicates=4)
    assert v.verdict == "converges"
    assert {"independent_case", "precedence"} <= set(v.supporting)


def test_verdict_precedence_fixture():
    v = verdict(load_model("tests/fixtures/precedence_fixture.json"), horizon=2000, replicates=8)
    assert v.verdict == "converges" and v.theorem == "precedence"


def test_verdict_fixed_structure_coprime_cycle():
    cyc = [[[N, 0], [0, N]], [[N, 1], [0, N]], [[N, 2], [1, N]]]
    v = verdict(MatrixModel.periodic(cyc))
    assert v.verdict == "converges" and v.theorem == "fixed_structure"


def test_verdict_non_iid_h1_violation_uses_necessary_condition():
    from maxplus_lln.models import MAIRESSE_B, MAIRESSE_C

    m = MatrixModel.periodic([MAIRESSE_B, MAIRESSE_C, MAIRESSE_C])
    v = verdict(m, horizon=3000, replicates=4)
    assert v.verdict == "diverges" and v.theorem == "necessary_condition"


def test_verdict_integrability_not_certified():
    v = verdict(builtin_example("integrability"))
    assert v.verdict == "not_certified"
    assert v.limit.limit.data.tolist() == [0.0, 0.0, -1.0]


def test_verdict_bottom_line_blocks_convergence_claims():
    m = MatrixModel.iid([[[0, N], [N, N]], [[0, N], [0, 0]]], [0.5, 0.5])
    v = verdict(m, horizon=1000, replicates=4)
    assert v.verdict == "not_certified"


# ----------------------------------------------------------- diagnostics
def test_empirical_mairesse_divergent():
    diag = empirical_convergence(builtin_example("mairesse", p=0.5, seed=2), 200_000, checkpoints=2000)
    c = diag.coordinates[1]
    assert c.verdict == "divergent" and c.liminf_est <= 0.05 and abs(c.limsup_est - 0.5) < 0.05
    assert diag.coordinates[0].verdict == "convergent"
    assert diag.window == (100_000, 200_000)


def test_empirical_constant_convergent():
    diag = empirical_convergence(MatrixModel.constant(TropicalMatrix([[0, N], [1, -1]])), 1000)
    assert diag.verdict == "convergent"
    assert all(c.gap <= 1e-3 for c in diag.coordinates)


def test_empirical_exchanges_divergent():
    diag = empirical_convergence(builtin_example("exchanges", phase=0), 10_000)
    assert diag.verdict == "divergent"
    for c in diag.coordinates:
        assert c.liminf_est <= 0.01 and abs(c.limsup_est - 0.5) < 0.01


def test_empirical_requires_long_horizon():
    with pytest.raises(ValueError):
        empirical_convergence(builtin_example("exchanges"), 999)


def test_empirical_liminf_below_limsup_and_threshold_rule():
    diag = empirical_convergence(builtin_example("mairesse", p=0.4, seed=1), 5000, checkpoints=50)
    for c in diag.coordinates:
        assert c.liminf_est <= c.limsup_est
        assert c.threshold == divergence_threshold(c.limsup_est, 5000)
        if c.verdict == "divergent":
            assert c.gap > c.threshold
    assert "5/sqrt(n)" in diag.to_dict()["rule"]


@pytest.mark.parametrize("seed", range(32))
def test_no_false_divergence_on_convergent_fixture(seed):
    m = load_model("tests/fixtures/precedence_fixture.json").with_seed(seed)
    diag = empirical_convergence(m, 10_000, checkpoints=100)
    assert diag.verdict != "divergent"


# ------------------------------------------------------------------ chain
def test_chain_mairesse():
    r = reachability_chain(builtin_example("mairesse", p=0.5), [1, 2], [0], runs=1000)
    assert r.preconditions_hold and r.satisfied
    assert r.p_d_all_bottom == 0.0
    assert r.exit_times == {1: {1: 1000}, 2: {1: 1000}}
    assert r.hypothesis_entry(1).status == SATISFIED


def test_chain_transition_rows_sum_to_one():
    for m, I, J in ((builtin_example("mairesse", p=0.5), [1, 2], [0]), (_chain_fixture(0.3), [0, 1], [2])):
        r = reachability_chain(m, I, J, runs=10)
        assert np.allclose(r.transition.sum(axis=1), 1.0, rtol=0, atol=1e-12)
        assert r.transition.shape[0] == len(r.states) <= 2 ** (len(I) ** 2)
    r = reachability_chain(builtin_example("mairesse", p=0.5), [1, 2], [0], runs=1)
    assert np.all(r.transition.sum(axis=1) == 1.0)


def test_chain_two_node_mixed_structure():
    r = reachability_chain(_chain_fixture(), [0, 1], [2], runs=1000)
    assert r.preconditions_hold
    assert all(r.recurrent_exit)
    assert not any(r.never_exit_possible.values())
    assert r.censored == {0: 0, 1: 0}
    assert all(sum(h.values()) == 1000 for h in r.exit_times.values())
    assert min(r.exit_times[0]) == 2 and min(r.exit_times[1]) == 1  # node 1 needs one step to reach node 2


def test_chain_brute_force_states():
    # reachable structures of B(1)...B(n) by direct enumeration of atom words
    m = _chain_fixture()
    atoms = [np.isfinite(a.data[:2, :2]) for a in m.atoms]
    seen = {np.eye(2, dtype=bool).tobytes()}
    frontier = [np.eye(2, dtype=bool)]
    for _ in range(6):
        nxt = []
        for e in frontier:
            for b in atoms:
                f = (e.astype(int) @ b.astype(int)) > 0
                if f.tobytes() not in seen:
                    seen.add(f.tobytes())
                    nxt.append(f)
        frontier = nxt
    r = reachability_chain(m, [0, 1], [2], runs=1)
    assert {s.tobytes() for s in r.states} == seen


def test_chain_d_bottom_precondition():
    r = reachability_chain(_d_bottom_fixture(), [0, 1], [2], runs=20)
    assert r.p_d_all_bottom == 1.0 and not r.preconditions_hold
    e = r.hypothesis_entry()
    assert e.status == NOT_CERTIFIED and "a.s. all ⊥" in e.reason


def test_chain_random_models_satisfy_exit_when_preconditions_hold():
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(200):
        atoms = []
        for _ in range(2):
            a = np.where(rng.random((3, 3)) < 0.5, 0.0, NEG)
            a[2, :2] = NEG
            a[2, 2] = 0.0
            atoms.append(a)
        r = reachability_chain(MatrixModel.iid(atoms, [0.5, 0.5]), [0, 1], [2], runs=5)
        if r.preconditions_hold:
            checked += 1
            assert r.satisfied
        if all(r.recurrent_exit):
            assert not any(r.never_exit_possible.values())
    assert checked > 10


def test_chain_errors():
    with pytest.raises(ModelError):
        reachability_chain(builtin_example("exchanges"), [0, 1], [])
    with pytest.raises(ValueError):
        reachability_chain(MatrixModel.constant(identity(5)), [0, 1, 2, 3, 4], [])
    with pytest.raises(BlockStructureViolation):
        reachability_chain(builtin_example("mairesse"), [0], [1, 2])


# ------------------------------------------------------------ consistency
def test_consistency_precedence_fixture():
    m = load_model("tests/fixtures/precedence_fixture.json")
    r = check_limit_consistency(m, 100_000, 0.05, decision=verdict(m, horizon=4000, replicates=16))
    assert r.verdict == "converges" and r.h1_holds and r.passed
    assert np.all(r.deviations <= 0.05)


def test_consistency_constant_exact():
    # diagonal weights: x(n, 0) = n * diag, so the ratio is exact at any n
    m = MatrixModel.constant(TropicalMatrix([[1, N], [N, -2]]))
    r = check_limit_consistency(m, 1000, 0.0)
    assert r.passed and np.all(r.deviations == 0.0)


def test_consistency_integrability_flags_first_coordinate():
    r = check_limit_consistency(builtin_example("integrability", seed=4), 100_000, 0.02)
    assert r.non_integrable == (0,) and r.checked == (1, 2)
    assert r.passed
