"""Convergence verdicts for ``x(n, 0) / n`` and empirical diagnostics.

A verdict is only issued when a known theorem covers the model:

* independent case: i.i.d., integrable, no line of ⊥; converges if and only
  if, for every component, ``A^{m}`` (rows and columns in ``H_m``) has no
  bottom line;
* fixed structure: every entry a.s. finite or a.s. ⊥ and ``theta^k``
  ergodic for ``k <= d``;
* precedence: diagonal entries a.s. finite (and integrable);
* necessary condition: a bottom line in some ``A^{m}`` rules convergence out
  for any stationary ergodic sequence.

Everything else is reported as ``not_certified``.  Trajectory diagnostics
are attached to reports but never decide a verdict.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np

from .graph import ComponentDecomposition, IncidenceGraph, block_split, decompose
from .lyapunov import (
    DEFAULT_HORIZON,
    DEFAULT_REPLICATES,
    LimitPrediction,
    iter_trajectory,
    predicted_limit,
)
from .models import Kind, MatrixModel, ModelError, Realization, fixed_structure_check, minimal_cycle
from .semiring import identity

__all__ = [
    "SATISFIED",
    "VIOLATED",
    "NOT_CERTIFIED",
    "HypothesisEntry",
    "HypothesisReport",
    "Verdict",
    "ConvergenceDiagnostics",
    "CoordinateDiagnostic",
    "ChainReport",
    "ConsistencyReport",
    "check_no_bottom_line",
    "check_h1_no_bottom_lines",
    "check_h2_dominating",
    "check_h3_exits",
    "check_precedence",
    "certify_ergodicity",
    "hypothesis_report",
    "verdict",
    "empirical_convergence",
    "divergence_threshold",
    "reachability_chain",
    "check_limit_consistency",
    "CHAIN_MAX_NODES",
]

SATISFIED = "satisfied"
VIOLATED = "violated"
NOT_CERTIFIED = "not_certified"

CHAIN_MAX_NODES = 4


@dataclass(frozen=True)
class HypothesisEntry:
    theorem: str
    hypothesis: str
    status: str
    witness: dict | None = None
    reason: str = ""

    def __post_init__(self):
        if self.status not in (SATISFIED, VIOLATED, NOT_CERTIFIED):
            raise ValueError(f"bad status {self.status!r}")
        if self.witness is None and not self.reason:
            raise ValueError("every hypothesis entry needs a witness or a reason")

    def to_dict(self) -> dict:
        return {"theorem": self.theorem, "hypothesis": self.hypothesis, "status": self.status,
                "witness": self.witness, "reason": self.reason}


@dataclass(frozen=True)
class HypothesisReport:
    entries: tuple[HypothesisEntry, ...]

    def select(self, theorem: str | None = None, hypothesis: str | None = None) -> list[HypothesisEntry]:
        return [e for e in self.entries
                if (theorem is None or e.theorem == theorem) and (hypothesis is None or e.hypothesis == hypothesis)]

    def all_satisfied(self, hypothesis: str, theorem: str | None = None) -> bool:
        sel = self.select(theorem, hypothesis)
        return all(e.status == SATISFIED for e in sel)

    def any_violated(self, hypothesis: str, theorem: str | None = None) -> bool:
        return any(e.status == VIOLATED for e in self.select(theorem, hypothesis))

    def to_list(self) -> list[dict]:
        return [e.to_dict() for e in self.entries]


# ------------------------------------------------------------ basic checks
def _row_bottom_witness(model: MatrixModel, rows: Sequence[int], cols: Sequence[int]):
    """First (atom, row, probability) where row restricted to ``cols`` can be all ⊥."""
    rows, cols = list(rows), list(cols)
    if model.finite_support:
        atoms = model.support_atoms()
        weights = [p for p in model.probs if p > 0] if model.kind is Kind.IID_FINITE else [1 / len(atoms)] * len(atoms)
        for i in rows:
            hits = [k for k, a in enumerate(atoms) if not np.isfinite(a.data[i, cols]).any()]
            if hits:
                return {"atom": hits[0], "row": i, "probability": float(sum(weights[k] for k in hits))}
        return None
    for i in rows:
        cells = [model.entries[i][j] for j in cols]
        if all(e.may_be_bottom for e in cells):
            return {"atom": None, "row": i, "probability": float(np.prod([e.bottom for e in cells]))}
    return None


def _nodes(model: MatrixModel, nodes: Sequence[int]) -> list[int]:
    """Map local indices to the model's original node labels."""
    imap = model.index_map
    return [imap[i] if imap else i for i in nodes]


def check_no_bottom_line(model: MatrixModel) -> HypothesisEntry:
    """``A(0)`` never has a line of ⊥."""
    w = _row_bottom_witness(model, range(model.dim), range(model.dim))
    if w:
        return HypothesisEntry("all", "no_bottom_line", VIOLATED, w, "A(0) has a bottom line with positive probability")
    return HypothesisEntry("all", "no_bottom_line", SATISFIED, None, "no row of A(0) can be entirely ⊥")


def check_h1_no_bottom_lines(model: MatrixModel, decomposition: ComponentDecomposition) -> list[HypothesisEntry]:
    """Per component ``m``: ``A^{m}(0)``, restricted to ``H_m``, has no bottom line."""
    if not decomposition.has_exponents:
        raise ValueError("H1 needs exponents (for the sets H_m)")
    out = []
    for m in range(decomposition.K):
        hull = decomposition.hull[m]
        w = _row_bottom_witness(model, hull, hull)
        if w:
            w = {"component": m, **w}
            out.append(HypothesisEntry("general_scheme", "H1", VIOLATED, w,
                                       f"A^{{m}} restricted to H_{m}={list(hull)} has a bottom line"))
        else:
            out.append(HypothesisEntry("general_scheme", "H1", SATISFIED, {"component": m, "hull": list(hull)},
                                       "every row of H_m keeps a finite entry inside H_m"))
    return out


def check_precedence(model: MatrixModel) -> list[HypothesisEntry]:
    """Diagonal entries a.s. finite, and integrable (taken from the integrability flag)."""
    bad = []
    for i in range(model.dim):
        if model.finite_support:
            if any(not np.isfinite(a.data[i, i]) for a in model.support_atoms()):
                bad.append(i)
        elif model.entries[i][i].may_be_bottom:
            bad.append(i)
    if bad:
        finite = HypothesisEntry("precedence", "finite_diagonal", VIOLATED, {"nodes": bad},
                                 "some diagonal entry is ⊥ with positive probability")
    else:
        finite = HypothesisEntry("precedence", "finite_diagonal", SATISFIED, None, "all diagonal entries a.s. finite")
    if model.integrable:
        integ = HypothesisEntry("precedence", "integrable_diagonal", SATISFIED, None, "model declared integrable")
    else:
        integ = HypothesisEntry("precedence", "integrable_diagonal", NOT_CERTIFIED,
                                {"non_integrable_rows": model.non_integrable_rows()}, "model not declared integrable")
    return [finite, integ]


def certify_ergodicity(model: MatrixModel) -> HypothesisEntry:
    """Structural certificate that ``theta^k`` is ergodic for every ``k <= d``."""
    if model.kind is not Kind.PERIODIC:
        return HypothesisEntry("fixed_structure", "theta_k_ergodic", SATISFIED, None,
                               "i.i.d. shift: every power is ergodic")
    P = len(minimal_cycle(model.atoms))
    bad = [k for k in range(2, model.dim + 1) if math.gcd(k, P) != 1]
    if bad:
        return HypothesisEntry("fixed_structure", "theta_k_ergodic", NOT_CERTIFIED,
                               {"period": P, "k": bad[0]},
                               f"cycle of period {P}: theta^{bad[0]} is not ergodic")
    return HypothesisEntry("fixed_structure", "theta_k_ergodic", SATISFIED, {"period": P},
                           "period coprime with every k <= d")


def _fixed_structure_entry(model: MatrixModel) -> HypothesisEntry:
    if fixed_structure_check(model):
        return HypothesisEntry("fixed_structure", "fixed_structure", SATISFIED, None,
                               "every entry a.s. finite or a.s. ⊥")
    return HypothesisEntry("fixed_structure", "fixed_structure", VIOLATED, None,
                           "some entry is ⊥ with probability strictly between 0 and 1")


def _integrable_entry(model: MatrixModel) -> HypothesisEntry:
    if model.integrable:
        return HypothesisEntry("all", "integrable", SATISFIED, None,
                               "finite support" if model.finite_support else "declared integrable")
    return HypothesisEntry("all", "integrable", NOT_CERTIFIED, {"non_integrable_rows": model.non_integrable_rows()},
                           "max |A_ij| over finite entries is not integrable (or not declared so)")


def check_h2_dominating(model: MatrixModel, decomposition: ComponentDecomposition,
                        precedence_ok: bool, fixed_ok: bool, integrable: bool) -> list[HypothesisEntry]:
    """Dominating components: ``y^(m)(n, 0) / n -> gamma^(m) 1``.

    Certified through the theorem that covers the case (Hong's theorem for
    i.i.d. sequences, the precedence and fixed-structure lemmas); otherwise
    undecidable from a sample and reported ``not_certified``.
    """
    out = []
    for m in range(decomposition.K):
        if not decomposition.dominating[m]:
            continue
        comp = decomposition.components[m]
        wit = {"component": m}
        if precedence_ok:
            out.append(HypothesisEntry("general_scheme", "H2", SATISFIED, wit, "precedence lemma"))
        elif fixed_ok:
            out.append(HypothesisEntry("general_scheme", "H2", SATISFIED, wit, "fixed-structure lemma"))
        elif model.is_iid and integrable and _row_bottom_witness(model, comp, comp) is None:
            out.append(HypothesisEntry("general_scheme", "H2", SATISFIED, wit,
                                       "i.i.d., strongly connected, no bottom line (Hong)"))
        else:
            out.append(HypothesisEntry("general_scheme", "H2", NOT_CERTIFIED, wit,
                                       "not decidable from a finite sample"))
    return out


def check_h3_exits(model: MatrixModel, decomposition: ComponentDecomposition,
                   precedence_ok: bool, fixed_ok: bool, runs: int = 200) -> list[HypothesisEntry]:
    """Exit hypothesis for the splits ``I = c_m``, ``J = H_m minus c_m`` used by the induction."""
    out = []
    for m in range(decomposition.K):
        I = decomposition.components[m]
        J = [i for i in decomposition.hull[m] if i not in I]
        wit = {"component": m, "I": list(I), "J": J}
        if not J:
            continue
        if decomposition.trivial[m]:
            out.append(HypothesisEntry("general_scheme", "H3", SATISFIED, wit, "trivial component: D(-1)0 is finite"))
        elif precedence_ok:
            out.append(HypothesisEntry("general_scheme", "H3", SATISFIED, wit, "precedence lemma"))
        elif fixed_ok:
            out.append(HypothesisEntry("general_scheme", "H3", SATISFIED, wit, "fixed-structure lemma"))
        elif model.kind is Kind.IID_FINITE and len(I) <= CHAIN_MAX_NODES:
            chain = reachability_chain(model, I, J, runs=runs)
            out.append(chain.hypothesis_entry(m))
        else:
            out.append(HypothesisEntry("general_scheme", "H3", NOT_CERTIFIED, wit,
                                       "exit analysis needs an IID_FINITE model with |c_m| <= 4"))
    return out


def hypothesis_report(model: MatrixModel, decomposition: ComponentDecomposition, runs: int = 200) -> HypothesisReport:
    entries = [check_no_bottom_line(model), _integrable_entry(model)]
    entries += check_h1_no_bottom_lines(model, decomposition)
    prec = check_precedence(model)
    fixed = _fixed_structure_entry(model)
    ergo = certify_ergodicity(model)
    nbl = entries[0].status == SATISFIED
    precedence_ok = all(e.status == SATISFIED for e in prec)
    fixed_ok = nbl and fixed.status == SATISFIED and ergo.status == SATISFIED
    entries += check_h2_dominating(model, decomposition, prec[0].status == SATISFIED, fixed_ok, model.integrable)
    entries += check_h3_exits(model, decomposition, prec[0].status == SATISFIED, fixed_ok, runs=runs)
    entries += prec + [fixed, ergo]
    return HypothesisReport(tuple(entries))


# ------------------------------------------------------------------ verdict
@dataclass(frozen=True)
class Verdict:
    verdict: str  # converges | diverges | not_certified
    theorem: str | None
    justification: str
    supporting: tuple[str, ...]
    witness: dict | None
    report: HypothesisReport
    decomposition: ComponentDecomposition
    limit: LimitPrediction
    tie_slack_used: bool

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "theorem": self.theorem,
            "justification": self.justification,
            "supporting": list(self.supporting),
            "witness": self.witness,
            "tie_slack_used": self.tie_slack_used,
            "predicted_limit": self.limit.to_dict(),
        }


def verdict(model: MatrixModel, decomposition: ComponentDecomposition | None = None, *,
            horizon: int = DEFAULT_HORIZON, replicates: int = DEFAULT_REPLICATES, runs: int = 200,
            **kw) -> Verdict:
    """Decide convergence of ``x(n, 0) / n`` from the theorems' hypotheses."""
    if decomposition is None or not decomposition.has_exponents:
        decomposition = decompose(model, horizon=horizon, replicates=replicates, **kw)
    rep = hypothesis_report(model, decomposition, runs=runs)
    nbl = rep.all_satisfied("no_bottom_line")
    integ = model.integrable
    h1 = rep.all_satisfied("H1")
    limit = predicted_limit(decomposition)
    slack = bool(decomposition.tie_slack)

    # most specific theorem first; every applicable one is listed
    supporting = []
    if rep.all_satisfied("finite_diagonal") and rep.all_satisfied("integrable_diagonal"):
        supporting.append("precedence")
    if (integ and nbl and rep.all_satisfied("fixed_structure") and rep.all_satisfied("theta_k_ergodic")):
        supporting.append("fixed_structure")
    if model.is_iid and integ and nbl and h1:
        supporting.append("independent_case")
    if supporting:
        why = {
            "independent_case": "i.i.d. and A^{m} has no bottom line for every component",
            "fixed_structure": "fixed structure with theta^k ergodic for k <= d",
            "precedence": "all diagonal entries a.s. finite and integrable",
        }[supporting[0]]
        return Verdict("converges", supporting[0], why, tuple(supporting), None, rep, decomposition, limit, slack)

    violated = [e for e in rep.select(hypothesis="H1") if e.status == VIOLATED]
    if nbl and integ and violated:
        theorem = "independent_case" if model.is_iid else "necessary_condition"
        w = violated[0].witness
        why = (f"A^{{{w['component']}}} has a bottom line at node {w['row']} with probability "
               f"{w['probability']:g}; a.s. convergence would forbid it")
        return Verdict("diverges", theorem, why, (theorem,), w, rep, decomposition, limit, slack)

    missing = [f"{e.theorem}:{e.hypothesis}" for e in rep.entries if e.status != SATISFIED]
    why = "no theorem applies; open hypotheses: " + ", ".join(missing)
    return Verdict(NOT_CERTIFIED, None, why, (), None, rep, decomposition, limit, slack)


# -------------------------------------------------------------- diagnostics
@dataclass(frozen=True)
class CoordinateDiagnostic:
    liminf_est: float
    limsup_est: float
    gap: float
    threshold: float
    verdict: str  # convergent | divergent | inconclusive

    def to_dict(self) -> dict:
        from .report import json_float

        return {"liminf_est": json_float(self.liminf_est), "limsup_est": json_float(self.limsup_est),
                "gap": json_float(self.gap), "threshold": self.threshold, "verdict": self.verdict}


@dataclass(frozen=True)
class ConvergenceDiagnostics:
    horizon: int
    window: tuple[int, int]
    n_checkpoints: int
    coordinates: tuple[CoordinateDiagnostic, ...]
    final: np.ndarray = field(compare=False)
    rule: str = "divergent iff gap > max(0.1*|limsup_est|, 5/sqrt(n)); inconclusive iff gap in (threshold/2, threshold]"

    @property
    def verdict(self) -> str:
        vs = {c.verdict for c in self.coordinates}
        if "divergent" in vs:
            return "divergent"
        if "inconclusive" in vs:
            return "inconclusive"
        return "convergent"

    def to_dict(self) -> dict:
        from .report import json_float

        return {
            "horizon": self.horizon,
            "window": list(self.window),
            "checkpoints": self.n_checkpoints,
            "rule": self.rule,
            "non_probative": True,
            "verdict": self.verdict,
            "final_x_over_n": [json_float(v) for v in self.final],
            "coordinates": [c.to_dict() for c in self.coordinates],
        }


def divergence_threshold(limsup_est: float, horizon: int) -> float:
    scale = abs(limsup_est) if math.isfinite(limsup_est) else 0.0
    return max(0.1 * scale, 5.0 / math.sqrt(horizon))


def _schedule(horizon: int, checkpoints) -> np.ndarray:
    lo = max(1, math.ceil(horizon / 2))
    if checkpoints is None:
        return np.arange(lo, horizon + 1)
    if isinstance(checkpoints, int):
        if checkpoints < 1:
            raise ValueError("need at least one checkpoint")
        return np.unique(np.linspace(lo, horizon, checkpoints).round().astype(np.int64))
    ks = np.unique(np.asarray(checkpoints, dtype=np.int64))
    if ks.size == 0 or ks[0] < 1 or ks[-1] > horizon:
        raise ValueError("checkpoints must lie in 1..horizon")
    return ks[ks >= lo] if (ks >= lo).any() else ks


def empirical_convergence(model: MatrixModel, horizon: int = 200_000, checkpoints=None, replicate: int = 0,
                          x0=None) -> ConvergenceDiagnostics:
    """Running min/max of ``x_i(k, 0) / k`` over checkpoints in the last half of ``[1, n]``.

    ``checkpoints`` is ``None`` (every step), a count of evenly spaced
    steps, or an explicit list of steps.
    """
    if horizon < 1000:
        raise ValueError("empirical diagnostics need horizon >= 1000")
    ks = _schedule(horizon, checkpoints)
    d = model.dim
    lo = np.full(d, math.inf)
    hi = np.full(d, -math.inf)
    final = None
    for k0, states, _ in iter_trajectory(model, horizon, replicate, x0):
        steps = np.arange(k0 + 1, k0 + 1 + states.shape[0])
        sel = np.isin(steps, ks)
        if sel.any():
            ratio = states[sel] / steps[sel, None]
            lo = np.minimum(lo, ratio.min(axis=0))
            hi = np.maximum(hi, ratio.max(axis=0))
        final = states[-1] / horizon
    coords = []
    for i in range(d):
        gap = 0.0 if hi[i] == lo[i] else hi[i] - lo[i]
        thr = divergence_threshold(hi[i], horizon)
        if gap > thr:
            v = "divergent"
        elif gap > thr / 2:
            v = "inconclusive"
        else:
            v = "convergent"
        coords.append(CoordinateDiagnostic(float(lo[i]), float(hi[i]), float(gap), thr, v))
    return ConvergenceDiagnostics(horizon, (int(ks[0]), int(ks[-1])), int(ks.size), tuple(coords), final)


# -------------------------------------------------------- structure chain
@dataclass(frozen=True)
class ChainReport:
    I: tuple[int, ...]
    J: tuple[int, ...]
    states: tuple[np.ndarray, ...]
    transition: np.ndarray
    recurrent_classes: tuple[tuple[int, ...], ...]
    recurrent_exit: tuple[bool, ...]
    b_strongly_connected: bool
    p_d_all_bottom: float
    tilde_no_bottom_line: bool
    never_exit_possible: dict
    exit_times: dict
    censored: dict
    runs: int

    @property
    def preconditions_hold(self) -> bool:
        return self.b_strongly_connected and self.p_d_all_bottom < 1.0 and self.tilde_no_bottom_line

    @property
    def satisfied(self) -> bool:
        return self.preconditions_hold and not any(self.never_exit_possible.values())

    def failed_preconditions(self) -> list[str]:
        out = []
        if not self.b_strongly_connected:
            out.append("G(B) not strongly connected")
        if not self.p_d_all_bottom < 1.0:
            out.append("D is a.s. all ⊥")
        if not self.tilde_no_bottom_line:
            out.append("A~ has a bottom line")
        return out

    def hypothesis_entry(self, component: int | None = None) -> HypothesisEntry:
        wit = {"component": component, "I": list(self.I), "J": list(self.J),
               "exit_time_max": max((max(h) for h in self.exit_times.values() if h), default=None)}
        if self.satisfied:
            return HypothesisEntry("general_scheme", "H3", SATISFIED, wit,
                                   "every row of I reaches a finite D-exit almost surely")
        if not self.preconditions_hold:
            return HypothesisEntry("general_scheme", "H3", NOT_CERTIFIED, wit,
                                   "preconditions fail: " + "; ".join(self.failed_preconditions()))
        bad = [i for i, v in self.never_exit_possible.items() if v]
        return HypothesisEntry("general_scheme", "H3", VIOLATED, {**wit, "rows": bad},
                               "some row avoids every exit with positive probability")

    def to_dict(self) -> dict:
        return {
            "I": list(self.I),
            "J": list(self.J),
            "n_states": len(self.states),
            "recurrent_classes": [list(c) for c in self.recurrent_classes],
            "recurrent_exit": list(self.recurrent_exit),
            "b_strongly_connected": self.b_strongly_connected,
            "p_d_all_bottom": self.p_d_all_bottom,
            "tilde_no_bottom_line": self.tilde_no_bottom_line,
            "preconditions_hold": self.preconditions_hold,
            "failed_preconditions": self.failed_preconditions(),
            "never_exit_possible": {str(k): v for k, v in self.never_exit_possible.items()},
            "exit_time_histogram": {str(k): {str(t): c for t, c in sorted(h.items())}
                                    for k, h in self.exit_times.items()},
            "censored": {str(k): v for k, v in self.censored.items()},
            "runs": self.runs,
            "satisfied": self.satisfied,
        }


def _bool_mul(e: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (e.astype(np.uint8) @ b.astype(np.uint8)) > 0


def reachability_chain(model: MatrixModel, I: Sequence[int], J: Sequence[int], runs: int = 1000,
                       max_steps: int = 10_000, replicate_base: int = 0) -> ChainReport:
    """Markov chain of the structures ``R(n)`` of ``B(1) ... B(n)`` and D-exit analysis.

    ``R(0)`` is the structure of the identity; from state ``E`` the atom
    ``k`` leads to the structure of ``E B_k``.  Row ``i`` of ``I`` *exits* at
    step ``n + 1`` when ``(B(1) ... B(n) D(n+1) 0)_i`` is finite.  Whether a
    row can avoid every exit with positive probability is decided exactly
    on the finite chain; the exit-time histogram comes from ``runs``
    simulated sequences.
    """
    if model.kind is not Kind.IID_FINITE:
        raise ModelError("structure chain analysis needs an IID_FINITE model")
    if len(I) > CHAIN_MAX_NODES:
        raise ValueError(f"|I| = {len(I)} exceeds the state-space guard ({CHAIN_MAX_NODES})")
    split = block_split(model, I, J)
    I, J = split.I, split.J
    probs = [p for p in model.probs if p > 0]
    atoms = model.support_atoms()
    bk = [np.isfinite(a.data[np.ix_(I, I)]) for a in atoms]
    if J:
        dk = [np.isfinite(a.data[np.ix_(I, J)]).any(axis=1) for a in atoms]  # rows of D with a finite entry
    else:
        dk = [np.zeros(len(I), dtype=bool) for _ in atoms]

    b_graph = IncidenceGraph(len(I), np.logical_or.reduce(bk))
    b_sc = nx.is_strongly_connected(b_graph.to_networkx())
    p_d_bottom = float(sum(p for p, d in zip(probs, dk) if not d.any()))
    tilde_rows = list(I) + list(J)
    tilde_nbl = all(np.isfinite(a.data[np.ix_(tilde_rows, tilde_rows)]).any(axis=1).all() for a in atoms)

    # full chain over {0, ⊥}^{I×I}
    start = np.isfinite(identity(len(I)).data)
    index = {start.tobytes(): 0}
    states = [start]
    rows = []
    q = 0
    while q < len(states):
        e = states[q]
        row = {}
        for p, b in zip(probs, bk):
            f = _bool_mul(e, b)
            key = f.tobytes()
            if key not in index:
                index[key] = len(states)
                states.append(f)
            row[index[key]] = row.get(index[key], 0.0) + p
        rows.append(row)
        q += 1
    T = np.zeros((len(states), len(states)))
    for s, row in enumerate(rows):
        for t, p in row.items():
            T[s, t] = p
    g = nx.DiGraph()
    g.add_nodes_from(range(len(states)))
    g.add_edges_from((s, t) for s, row in enumerate(rows) for t in row)
    recurrent = tuple(sorted(tuple(sorted(c)) for c in nx.attracting_components(g)))
    # a recurrent class is visited forever, so an exit offered somewhere in it is taken a.s.
    recurrent_exit = tuple(
        all(any((states[s][r] & d).any() for s in c for d in dk) for r in range(len(I)))
        for c in recurrent
    )

    never = {}
    for r, i in enumerate(I):
        never[i] = _can_avoid_exit(states, bk, dk, r)

    hist: dict = {i: Counter() for i in I}
    censored = {i: 0 for i in I}
    positive = [j for j, p in enumerate(model.probs) if p > 0]
    pos = {j: r for r, j in enumerate(positive)}
    for run in range(runs):
        stream = Realization(model, replicate_base + run)
        alive = {r: np.eye(len(I), dtype=bool)[r] for r in range(len(I))}
        n = 0
        while alive and n < max_steps:
            stream.take(min(64, max_steps - n))
            for k in stream.last_indices:
                k = pos[int(k)]
                for r in list(alive):
                    if (alive[r] & dk[k]).any():
                        hist[I[r]][n + 1] += 1
                        del alive[r]
                    else:
                        alive[r] = _bool_mul(alive[r][None, :], bk[k])[0]
                n += 1
                if not alive:
                    break
        for r in alive:
            censored[I[r]] += 1
    return ChainReport(I, J, tuple(states), T, recurrent, recurrent_exit, b_sc, p_d_bottom, tilde_nbl, never,
                       {i: dict(h) for i, h in hist.items()}, censored, runs)


def _can_avoid_exit(states, bk, dk, r: int) -> bool:
    """Whether row ``r`` survives forever with positive probability.

    Only row ``r`` of the state matters.  The surviving transitions form a
    finite graph; survival has positive probability iff a reachable
    strongly connected set is closed: from each of its states every atom
    avoids the exit and stays inside.
    """
    start = np.eye(states[0].shape[0], dtype=bool)[r]
    seen = {start.tobytes(): start}
    edges = []
    todo = [start]
    while todo:
        v = todo.pop()
        for b, d in zip(bk, dk):
            if (v & d).any():
                continue
            w = (v.astype(np.uint8) @ b.astype(np.uint8)) > 0
            key = w.tobytes()
            edges.append((v.tobytes(), key))
            if key not in seen:
                seen[key] = w
                todo.append(w)
    g = nx.DiGraph()
    g.add_nodes_from(seen)
    g.add_edges_from(edges)
    for comp in nx.strongly_connected_components(g):
        closed = True
        for key in comp:
            v = seen[key]
            for b, d in zip(bk, dk):
                if (v & d).any():
                    closed = False
                    break
                w = ((v.astype(np.uint8) @ b.astype(np.uint8)) > 0).tobytes()
                if w not in comp:
                    closed = False
                    break
            if not closed:
                break
        if closed:
            return True
    return False


# -------------------------------------------------------------- consistency
@dataclass(frozen=True)
class ConsistencyReport:
    horizon: int
    tolerance: float
    predicted: LimitPrediction
    empirical: np.ndarray
    deviations: np.ndarray
    non_integrable: tuple[int, ...]
    checked: tuple[int, ...]
    h1_holds: bool
    verdict: str
    passed: bool

    def to_dict(self) -> dict:
        from .report import json_float

        return {
            "horizon": self.horizon,
            "tolerance": self.tolerance,
            "predicted": self.predicted.limit.to_list(),
            "empirical": [json_float(v) for v in self.empirical],
            "deviations": [json_float(v) for v in self.deviations],
            "non_integrable_coordinates": list(self.non_integrable),
            "checked_coordinates": list(self.checked),
            "h1_holds": self.h1_holds,
            "verdict": self.verdict,
            "passed": self.passed,
        }


def check_limit_consistency(model: MatrixModel, horizon: int = 100_000, tolerance: float = 0.05, *,
                            decision: Verdict | None = None, replicate: int = 0, **kw) -> ConsistencyReport:
    """Compare ``x(n, 0) / n`` with the predicted limit, coordinate by coordinate.

    Coordinates whose row carries a non-integrable entry are flagged and
    left out of the comparison: their a.s. limit need not exist.
    """
    decision = decision or verdict(model, **kw)
    L = decision.limit.limit.data
    x = None
    for _, states, _ in iter_trajectory(model, horizon, replicate):
        x = states[-1]
    emp = x / horizon
    dev = np.where((L == -math.inf) & (emp == -math.inf), 0.0, np.abs(emp - L))
    flagged = tuple(model.non_integrable_rows())
    checked = tuple(i for i in range(model.dim) if i not in flagged)
    h1 = decision.report.all_satisfied("H1")
    ok = h1 and all(dev[i] <= tolerance for i in checked)
    return ConsistencyReport(horizon, tolerance, decision.limit, emp, dev, flagged, checked, h1,
                             decision.verdict, bool(ok))
