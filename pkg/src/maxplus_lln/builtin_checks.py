"""End-to-end runs of the reference models with their known closed-form facts.

Each ``run_*`` function returns an :class:`ExampleRun`: the analysis report
plus a list of named assertions.  The CLI turns a failed assertion into a
non-zero exit code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lyapunov import estimate_top_exponent, iter_trajectory, left_trajectory
from .models import builtin_example, sample_array
from .report import build_report
from .verifier import check_limit_consistency, empirical_convergence, reachability_chain, verdict

__all__ = [
    "Assertion",
    "ExampleRun",
    "run_example",
    "exchanges_closed_form",
    "integrability_closed_form",
    "mairesse_counting_identity",
]


@dataclass(frozen=True)
class Assertion:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "detail": self.detail}


@dataclass
class ExampleRun:
    name: str
    report: dict
    assertions: list[Assertion] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def to_dict(self) -> dict:
        return {"example": self.name, "passed": self.passed,
                "assertions": [a.to_dict() for a in self.assertions], "report": self.report}


# ------------------------------------------------------------ closed forms
def exchanges_closed_form(phase: int, k: int, z=(0.0, 0.0)) -> np.ndarray:
    """``x(k, z)`` for the exchange model started in ``phase``."""
    z1, z2 = z
    n, odd = divmod(k, 2)
    if phase == 0:
        return np.array([z2, z1 + n] if odd else [z1 + n, z2], dtype=float)
    return np.array([z2 + n + 1, z1] if odd else [z1, z2 + n], dtype=float)


def integrability_closed_form(X: np.ndarray, n: int) -> np.ndarray:
    """``x(n, 0)`` for ``n >= 1`` given the draws ``X[k]`` of ``A(k)``."""
    return np.array([max(-X[n - 1], -(n - 1)), 0.0, -float(n)])


def mairesse_counting_identity(model, horizon: int, replicate: int = 0) -> tuple[bool, int]:
    """Check ``max_i x_i(k+1, 0) = #{j <= k : A(j) = B}`` at every step.

    Returns ``(ok, first_bad_step)``; ``first_bad_step`` is -1 when ``ok``.
    """
    b = model.atoms[0].data
    count = 0
    for k0, states, mats in iter_trajectory(model, horizon, replicate):
        is_b = np.all((mats == b[None]) | (np.isneginf(mats) & np.isneginf(b[None])), axis=(1, 2))
        counts = count + np.cumsum(is_b)
        bad = np.flatnonzero(states.max(axis=1) != counts)
        if bad.size:
            return False, int(k0 + bad[0])
        count = int(counts[-1])
    return True, -1


# -------------------------------------------------------------------- runs
def _run_mairesse(p: float, seed: int, horizon: int, replicates: int, checkpoints) -> ExampleRun:
    model = builtin_example("mairesse", p=p, seed=seed)
    out = ExampleRun("mairesse", {})
    ok, bad = mairesse_counting_identity(model, horizon)
    out.assertions.append(Assertion("counting identity max_i x_i(n+1,0) = #B in A(0..n), every step", ok,
                                    "exact" if ok else f"first mismatch at step {bad}"))
    v = verdict(model, horizon=min(horizon, 10_000), replicates=replicates)
    dec = v.decomposition
    out.assertions.append(Assertion("components {1} and {2,3}, component 2 reaches component 1",
                                    dec.components == ((0,), (1, 2)) and 0 in dec.reach[1],
                                    str(dec.components)))
    g = dec.gamma_round
    out.assertions.append(Assertion("gamma^(1) = 0 exactly", g[0].is_exact and g[0].value == 0.0, repr(g[0])))
    tol = max(1e-9, 4.0 * g[1].sigma)
    out.assertions.append(Assertion("gamma^(2) = p (within 4 standard errors)", abs(g[1].value - p) <= tol,
                                    f"{g[1].value:.6f} vs {p} (tol {tol:.2e})"))
    w = v.witness or {}
    out.assertions.append(Assertion("verdict diverges: A^{2} has a bottom line with probability p",
                                    v.verdict == "diverges" and w.get("component") == 1
                                    and math.isclose(w.get("probability", -1), p),
                                    v.justification))
    diag = empirical_convergence(model, horizon, checkpoints)
    for i in (1, 2):
        c = diag.coordinates[i]
        out.assertions.append(Assertion(
            f"coordinate {i + 1}: liminf ~ 0, limsup ~ p, diagnostics divergent",
            c.verdict == "divergent" and 0.0 <= c.liminf_est <= 0.05 and p - 0.05 <= c.limsup_est <= p + 0.02,
            f"liminf {c.liminf_est:.4f}, limsup {c.limsup_est:.4f}, gap {c.gap:.4f} > {c.threshold:.4f}"))
    c0 = diag.coordinates[0]
    out.assertions.append(Assertion("coordinate 1 identically 0", c0.liminf_est == 0.0 == c0.limsup_est,
                                    f"[{c0.liminf_est}, {c0.limsup_est}]"))
    chain = reachability_chain(model, [1, 2], [0], runs=1000)
    times = set().union(*[set(h) for h in chain.exit_times.values()])
    out.assertions.append(Assertion("exit hypothesis holds for I={2,3}, J={1}; exit time always 1",
                                    chain.satisfied and times == {1} and not any(chain.censored.values()),
                                    f"exit times {sorted(times)}"))
    rep = build_report(model, horizon=min(horizon, 10_000), replicates=replicates).to_dict()
    rep["diagnostics"] = diag.to_dict()
    rep["chain"] = chain.to_dict()
    out.report = rep
    return out


def _run_exchanges(seed: int, horizon: int, replicates: int, checkpoints) -> ExampleRun:
    out = ExampleRun("exchanges", {})
    steps = min(horizon, 2001)
    for phase in (0, 1):
        model = builtin_example("exchanges", phase=phase, seed=seed)
        mats = sample_array(model, steps)
        for z in ((0.0, 0.0), (2.0, -1.0)):
            xs = left_trajectory(mats, np.array(z))
            expect = np.stack([exchanges_closed_form(phase, k, z) for k in range(steps + 1)])
            bad = np.flatnonzero(np.any(xs != expect, axis=1))
            out.assertions.append(Assertion(
                f"phase {phase}, z={z}: x(2n,z), x(2n+1,z) match the closed forms for k <= {steps}",
                bad.size == 0, "exact" if bad.size == 0 else f"first mismatch at k={int(bad[0])}"))
    model = builtin_example("exchanges", seed=seed)
    top = estimate_top_exponent(model)
    out.assertions.append(Assertion("gamma = 1/2 exactly", top.is_exact and top.value == 0.5, repr(top)))
    v = verdict(model, replicates=replicates)
    out.assertions.append(Assertion("no convergence certificate (theta^2 not ergodic)",
                                    v.verdict == "not_certified", v.justification))
    dh = max(horizon, 1000)
    diag = empirical_convergence(builtin_example("exchanges", phase=0, seed=seed), dh, checkpoints)
    out.assertions.append(Assertion("trajectory x(n,0)/n oscillates between 0 and 1/2: diagnostics divergent",
                                    diag.verdict == "divergent",
                                    ", ".join(f"[{c.liminf_est:.3f}, {c.limsup_est:.3f}]" for c in diag.coordinates)))
    rep = build_report(model, replicates=replicates).to_dict()
    rep["diagnostics"] = diag.to_dict()
    out.report = rep
    return out


def _run_integrability(seed: int, horizon: int, replicates: int, checkpoints) -> ExampleRun:
    model = builtin_example("integrability", seed=seed)
    out = ExampleRun("integrability", {})
    steps = min(horizon, 5000)
    mats = sample_array(model, steps)
    X = -mats[:, 0, 0]
    xs = left_trajectory(mats, np.zeros(3))
    expect = np.stack([np.zeros(3)] + [integrability_closed_form(X, n) for n in range(1, steps + 1)])
    bad = np.flatnonzero(np.any(xs != expect, axis=1))
    out.assertions.append(Assertion(f"x(n,0) = (max(-X_(n-1), -(n-1)), 0, -n) for n <= {steps}", bad.size == 0,
                                    "exact" if bad.size == 0 else f"first mismatch at n={int(bad[0])}"))
    v = verdict(model, replicates=replicates)
    dec = v.decomposition
    out.assertions.append(Assertion("three singleton components in a chain",
                                    dec.components == ((0,), (1,), (2,)) and dec.reach[0] == {0, 1, 2},
                                    str(dec.components)))
    vals = [g.value for g in dec.gamma_round]
    out.assertions.append(Assertion("component exponents (-inf, 0, -1), all closed form",
                                    vals == [-math.inf, 0.0, -1.0] and all(g.is_exact for g in dec.gamma_round),
                                    str(vals)))
    L = v.limit.limit.data.tolist()
    out.assertions.append(Assertion("predicted limit (0, 0, -1)", L == [0.0, 0.0, -1.0], str(L)))
    out.assertions.append(Assertion("not certified: the integrability condition fails",
                                    v.verdict == "not_certified", v.justification))
    cons = check_limit_consistency(model, max(horizon, 1000), 0.02, decision=v)
    out.assertions.append(Assertion("coordinate 1 flagged non-integrable", cons.non_integrable == (0,),
                                    str(cons.non_integrable)))
    out.assertions.append(Assertion("coordinates 2, 3 of x(n,0)/n within 0.02 of (0, -1)",
                                    all(cons.deviations[i] <= 0.02 for i in (1, 2)),
                                    str(cons.empirical.tolist())))
    rep = build_report(model, replicates=replicates).to_dict()
    rep["consistency"] = cons.to_dict()
    out.report = rep
    return out


def run_example(name: str, *, p: float = 0.5, seed: int = 0, horizon: int = 200_000, replicates: int = 32,
                checkpoints=None) -> ExampleRun:
    if horizon < 1 or replicates < 1:
        raise ValueError("need horizon >= 1 and replicates >= 1")
    if name == "mairesse":
        return _run_mairesse(p, seed, horizon, replicates, checkpoints)
    if name == "exchanges":
        return _run_exchanges(seed, horizon, replicates, checkpoints)
    if name == "integrability":
        return _run_integrability(seed, horizon, replicates, checkpoints)
    raise ValueError(f"unknown example {name!r}")
