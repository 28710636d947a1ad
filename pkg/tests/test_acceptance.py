"""One test per acceptance criterion; the terminal summary prints a PASS/FAIL line for each."""

import math
import time

import numpy as np
import pytest

import oracles
from maxplus_lln.builtin_checks import exchanges_closed_form, mairesse_counting_identity
from maxplus_lln.graph import decompose
from maxplus_lln.lyapunov import check_max_decomposition, iter_trajectory, left_trajectory
from maxplus_lln.models import MAIRESSE_B, builtin_example, load_model, sample_array
from maxplus_lln.report import build_report
from maxplus_lln.semiring import (
    BOTTOM, TropicalMatrix, TropicalScalar, TropicalVector, brute_force_power, has_bottom_line, mat_mul, mat_vec,
    oplus, otimes, structure_of,
)
from maxplus_lln.verifier import check_limit_consistency, empirical_convergence, reachability_chain, verdict

NEG = -math.inf
MAIRESSE_SEED = 7
MAIRESSE_N = 200_000


@pytest.fixture(scope="module")
def mairesse_run():
    model = builtin_example("mairesse", p=0.6, seed=MAIRESSE_SEED)
    t0 = time.perf_counter()
    ok, bad = mairesse_counting_identity(model, MAIRESSE_N)
    elapsed = time.perf_counter() - t0
    return model, ok, bad, elapsed


def test_criterion_1_counting_identity(mairesse_run):
    model, ok, bad, elapsed = mairesse_run
    assert ok, f"identity fails at step {bad}"
    assert elapsed < 30.0
    # independent recount of B draws against the final state
    mats = sample_array(model, MAIRESSE_N)
    n_b = int(np.sum(np.all(mats == np.array(MAIRESSE_B, dtype=float)[None], axis=(1, 2))))
    *_, (_, states, _) = iter_trajectory(model, MAIRESSE_N)
    assert states[-1].max() == n_b
    print(f"criterion 1: identity exact over {MAIRESSE_N} steps in {elapsed:.1f}s")


def test_criterion_2_divergence_reproduction(mairesse_run):
    model = mairesse_run[0]
    diag = empirical_convergence(model, MAIRESSE_N)
    c = diag.coordinates[1]
    print(f"criterion 2: liminf {c.liminf_est:.4f} limsup {c.limsup_est:.4f} gap {c.gap:.4f} > {c.threshold:.4f}")
    assert 0.55 <= c.limsup_est <= 0.62
    assert 0.0 <= c.liminf_est <= 0.05
    assert c.verdict == "divergent"


def test_criterion_3_exchanges_closed_forms():
    for phase in (0, 1):
        mats = sample_array(builtin_example("exchanges", phase=phase), 2001)
        xs = left_trajectory(mats, np.zeros(2))
        for k in range(2001):
            n, odd = divmod(k, 2)
            # explicit formulas, written out independently of the library helper
            if phase == 0:
                expect = [0.0, n] if odd else [n, 0.0]
            else:
                expect = [n + 1, 0.0] if odd else [0.0, n]
            assert xs[k].tolist() == expect, (phase, k)
            assert np.array_equal(exchanges_closed_form(phase, k), expect)
    print("criterion 3: both phases exact for 2n, 2n+1 <= 2000")


def test_criterion_4_exponent_decomposition(fixtures_dir):
    model = load_model(fixtures_dir / "random_d4.json")
    t0 = time.perf_counter()
    chk = check_max_decomposition(model, horizon=10_000, replicates=32)
    elapsed = time.perf_counter() - t0
    print(f"criterion 4: |gamma - max gamma^(m)| = {chk.discrepancy:.2e} <= {chk.threshold:.2e} in {elapsed:.1f}s")
    assert chk.discrepancy <= 3.0 * chk.combined_stderr or chk.discrepancy <= chk.threshold
    assert chk.passed and elapsed < 60.0


def test_criterion_5_precedence_convergence(fixtures_dir):
    model = load_model(fixtures_dir / "precedence_fixture.json")
    assert model.dim == 3 and all(np.isfinite(np.diag(a.data)).all() for a in model.atoms)
    r = check_limit_consistency(model, 100_000, 0.05, decision=verdict(model, horizon=10_000, replicates=32))
    print(f"criterion 5: deviations {np.round(r.deviations, 4).tolist()} <= 0.05")
    assert r.verdict == "converges" and r.passed
    assert np.all(r.deviations <= 0.05)


def test_criterion_6_integrability():
    model = builtin_example("integrability")
    dec = decompose(model)
    v = verdict(model, dec)
    assert all(g.is_exact for g in dec.gamma_round)
    assert v.limit.limit.data.tolist() == [0.0, 0.0, -1.0]
    r = check_limit_consistency(model, 100_000, 0.02, decision=v)
    print(f"criterion 6: L=(0,0,-1) exact, flagged {r.non_integrable}, empirical {r.empirical.tolist()}")
    assert r.non_integrable == (0,)
    assert r.deviations[1] <= 0.02 and r.deviations[2] <= 0.02


def test_criterion_7_oracle_equivalence():
    rng = np.random.default_rng(7)
    for _ in range(100):
        d, n = int(rng.integers(1, 4)), int(rng.integers(1, 7))
        seq = []
        for _ in range(n):
            a = rng.integers(-5, 6, (d, d)).astype(float)
            a[rng.random((d, d)) < 0.3] = NEG
            seq.append(TropicalMatrix(a))
        prod = seq[0]
        for a in seq[1:]:
            prod = mat_mul(a, prod)
        assert prod == brute_force_power(seq)
        assert oracles.to_py(prod.data.tolist()) == oracles.path_product([oracles.to_py(a.data.tolist()) for a in seq])
    print("criterion 7: 100/100 sequences agree")


def _scalar(rng):
    return BOTTOM if rng.random() < 0.2 else TropicalScalar.of(int(rng.integers(-50, 51)))


def _matrix(rng, d, p_bottom=0.3):
    a = rng.integers(-20, 21, (d, d)).astype(float)
    a[rng.random((d, d)) < p_bottom] = NEG
    return TropicalMatrix(a)


def test_criterion_8_property_suite():
    rng = np.random.default_rng(8)
    cases = 1000
    for _ in range(cases):
        a, b, c = _scalar(rng), _scalar(rng), _scalar(rng)
        zero = TropicalScalar.of(0)
        assert oplus(oplus(a, b), c) == oplus(a, oplus(b, c))
        assert oplus(a, b) == oplus(b, a) and oplus(a, a) == a
        assert otimes(otimes(a, b), c) == otimes(a, otimes(b, c))
        assert otimes(a, oplus(b, c)) == oplus(otimes(a, b), otimes(a, c))
        assert otimes(a, BOTTOM) == BOTTOM and otimes(a, zero) == a and oplus(a, BOTTOM) == a
        A, B, C = (_matrix(rng, 3) for _ in range(3))
        assert mat_mul(mat_mul(A, B), C) == mat_mul(A, mat_mul(B, C))
    for _ in range(cases):  # non-expansiveness
        d = int(rng.integers(1, 5))
        A = _matrix(rng, d)
        while has_bottom_line(A):
            A = _matrix(rng, d)
        x, y = rng.integers(-30, 31, d).astype(float), rng.integers(-30, 31, d).astype(float)
        ax, ay = mat_vec(A, TropicalVector(x)).data, mat_vec(A, TropicalVector(y)).data
        assert np.max(np.abs(ax - ay)) <= np.max(np.abs(x - y))
    for _ in range(cases):  # homogeneity
        d = int(rng.integers(1, 5))
        A, x, s = _matrix(rng, d), TropicalVector(rng.integers(-30, 31, d).astype(float)), float(rng.integers(-9, 10))
        assert mat_vec(A, x.shift(s)) == mat_vec(A, x).shift(s)
    for _ in range(cases):  # monotonicity
        d = int(rng.integers(1, 5))
        A = _matrix(rng, d)
        x = rng.integers(-30, 31, d).astype(float)
        y = x + rng.integers(0, 5, d)
        assert np.all(mat_vec(A, TropicalVector(x)).data <= mat_vec(A, TropicalVector(y)).data)
    for _ in range(cases):  # structure homomorphism
        d = int(rng.integers(1, 5))
        A, B = _matrix(rng, d, 0.5), _matrix(rng, d, 0.5)
        assert structure_of(mat_mul(A, B)) == mat_mul(structure_of(A), structure_of(B))
        pa = oracles.to_py(A.data.tolist())
        pb = oracles.to_py(B.data.tolist())
        ref = [[None if v is None else 0 for v in row] for row in oracles.matmul(pa, pb)]
        assert oracles.to_py(structure_of(mat_mul(A, B)).data.tolist()) == ref
    print(f"criterion 8: {cases} cases per property, zero failures")


def test_criterion_9_chain_analysis():
    r = reachability_chain(builtin_example("mairesse", p=0.5), [1, 2], [0], runs=1000)
    assert r.preconditions_hold and r.satisfied
    assert all(set(h) == {1} for h in r.exit_times.values())
    n = float("-inf")
    fixture = [[[n, 0, n], [0, n, n], [n, n, 0]], [[0, n, n], [n, 0, n], [n, n, 1]]]
    from maxplus_lln.models import MatrixModel

    bad = reachability_chain(MatrixModel.iid(fixture, [0.5, 0.5]), [0, 1], [2], runs=50)
    assert bad.p_d_all_bottom == 1.0 and not bad.preconditions_hold
    assert bad.hypothesis_entry().status == "not_certified"
    print(f"criterion 9: mairesse exit time 1; D=bottom fixture fails preconditions {bad.failed_preconditions()}")


def test_criterion_10_thresholds_recorded():
    model = builtin_example("mairesse", p=0.5)
    rep = build_report(model, horizon=2000, replicates=8, diagnostics_horizon=10_000, checkpoints=100,
                       consistency=True, consistency_horizon=10_000, tolerance=0.05).to_dict()
    th = rep["thresholds"]
    assert {"tie", "divergence", "consistency_tolerance", "monte_carlo"} <= set(th)
    assert rep["diagnostics"]["non_probative"] is True and "rule" in rep["diagnostics"]
    assert all("threshold" in c for c in rep["diagnostics"]["coordinates"])
    assert rep["consistency"]["tolerance"] == 0.05
    chk = check_max_decomposition(model, horizon=2000, replicates=8)
    assert chk.threshold >= 0.0
    print("criterion 10: tie, divergence and consistency thresholds present in every report")
