"""Lyapunov exponents of max-plus matrix sequences and the predicted limit vector.

Monte Carlo estimates run ``R`` independent replicates of ``x(n, 0)`` and
average ``max_i x_i(n, 0) / n`` (or ``min_i`` for the bottom exponent).
Replicates are advanced together as one vectorised batch; every replicate
owns its random stream, so results do not depend on batch size or on the
number of worker threads.

Deterministic models (one atom, a cycle, or constant entries) get exact
values: the top exponent of a constant matrix is its maximal cycle mean,
and a cycle of length ``P`` behaves like the product of its elements over
``P`` steps.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .estimate import TIE_FLOOR, ExponentEstimate
from .graph import ComponentDecomposition, structural_decomposition
from .models import Kind, MatrixModel, Realization
from .semiring import (
    BOTTOM,
    NEG_INF,
    TropicalMatrix,
    TropicalScalar,
    TropicalVector,
    _matmul,
    identity,
    mat_mul,
)

__all__ = [
    "DEFAULT_HORIZON",
    "DEFAULT_REPLICATES",
    "RECENTER_EVERY",
    "LimitPrediction",
    "MaxDecompositionCheck",
    "final_states",
    "iter_trajectory",
    "trajectory",
    "left_trajectory",
    "right_trajectory",
    "max_cycle_mean",
    "coordinate_growth",
    "estimate_top_exponent",
    "estimate_bottom_exponent",
    "component_exponent",
    "component_exponents",
    "predicted_limit",
    "check_max_decomposition",
]

DEFAULT_HORIZON = 10_000
DEFAULT_REPLICATES = 32
RECENTER_EVERY = 1_000
_BATCH_BYTES = 32 * 2**20


# --------------------------------------------------------------- trajectories
def _initial(model: MatrixModel, x0) -> np.ndarray:
    if x0 is None:
        return np.zeros(model.dim)
    x = x0.data if isinstance(x0, TropicalVector) else np.asarray(x0, dtype=np.float64)
    if x.shape != (model.dim,):
        raise ValueError(f"initial vector must have length {model.dim}")
    return np.array(x)


def _run_batch(model: MatrixModel, horizon: int, replicates: list[int], x0: np.ndarray) -> np.ndarray:
    d = model.dim
    B = len(replicates)
    streams = [Realization(model, r) for r in replicates]
    x = np.tile(x0, (B, 1))
    offset = np.zeros(B)
    # chunk length depends on d only, so batching never changes the arithmetic
    step = max(1, min(RECENTER_EVERY, _BATCH_BYTES // (8 * 32 * d * d)))
    done = 0
    while done < horizon:
        k = min(step, horizon - done)
        mats = np.stack([s.take(k) for s in streams])
        for t in range(k):
            x = np.max(mats[:, t] + x[:, None, :], axis=2)
        done += k
        top = x.max(axis=1)
        live = np.isfinite(top)
        x[live] -= top[live, None]
        offset[live] += top[live]
    return x + offset[:, None]


def final_states(model: MatrixModel, horizon: int, replicates: int = 1, x0=None, *,
                 batch: int = 32, workers: int = 1) -> np.ndarray:
    """``x(horizon, x0)`` for replicates ``0..R-1``, shape ``(R, d)``.

    The state is re-centred by its maximum at least every
    :data:`RECENTER_EVERY` steps and the removed amount is added back at
    the end (exact by homogeneity).
    """
    if horizon < 0 or replicates < 1:
        raise ValueError("need horizon >= 0 and replicates >= 1")
    start = _initial(model, x0)
    groups = [list(range(i, min(i + batch, replicates))) for i in range(0, replicates, batch)]
    if workers > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda g: _run_batch(model, horizon, g, start), groups))
    else:
        parts = [_run_batch(model, horizon, g, start) for g in groups]
    return np.concatenate(parts)


def iter_trajectory(model: MatrixModel, horizon: int, replicate: int = 0, x0=None,
                    chunk: int = 4096) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Yield ``(k0, states, mats)`` with ``states[t] = x(k0 + t + 1)`` and ``mats[t] = A(k0 + t)``."""
    x = _initial(model, x0)
    stream = Realization(model, replicate)
    k0 = 0
    while k0 < horizon:
        k = min(chunk, horizon - k0)
        mats = stream.take(k)
        out = np.empty((k, model.dim))
        for t in range(k):
            x = np.max(mats[t] + x[None, :], axis=1)
            out[t] = x
        yield k0, out, mats
        k0 += k


def trajectory(model: MatrixModel, horizon: int, replicate: int = 0, x0=None) -> np.ndarray:
    """Rows ``x(0), ..., x(horizon)`` of one replicate, shape ``(horizon + 1, d)``."""
    rows = [_initial(model, x0)[None, :]]
    rows += [states for _, states, _ in iter_trajectory(model, horizon, replicate, x0)]
    return np.concatenate(rows)


def left_trajectory(mats, x0) -> np.ndarray:
    """``x(0..n)`` for an explicit matrix sequence (``mats[k] = A(k)``)."""
    mats = np.asarray([m.data if isinstance(m, TropicalMatrix) else m for m in mats], dtype=np.float64)
    x = np.array(x0.data if isinstance(x0, TropicalVector) else x0, dtype=np.float64)
    out = np.empty((len(mats) + 1, x.shape[0]))
    out[0] = x
    for k, a in enumerate(mats):
        x = np.max(a + x[None, :], axis=1)
        out[k + 1] = x
    return out


def right_trajectory(mats, x0) -> np.ndarray:
    """``y(0..n)`` for ``mats[k] = A(-k-1)``: ``y(n) = A(-1) ... A(-n) x0``.

    Keeps the running product ``A(-1) ... A(-n)`` and applies it to ``x0``.
    """
    mats = np.asarray([m.data if isinstance(m, TropicalMatrix) else m for m in mats], dtype=np.float64)
    x = np.array(x0.data if isinstance(x0, TropicalVector) else x0, dtype=np.float64)
    d = x.shape[0]
    prod = identity(d).data
    out = np.empty((len(mats) + 1, d))
    out[0] = x
    for k, a in enumerate(mats):
        prod = _matmul(prod, a)
        out[k + 1] = np.max(prod + x[None, :], axis=1)
    return out


# --------------------------------------------------------------- closed forms
def max_cycle_mean(A: TropicalMatrix) -> TropicalScalar:
    """Largest mean weight of a cycle in the graph of ``A`` (⊥ if acyclic).

    Elementary cycles have length at most ``d`` and every closed walk splits
    into elementary cycles, so the value is ``max_k max_i (A^k)_ii / k`` for
    ``k = 1..d``.
    """
    best = NEG_INF
    p = A
    for k in range(1, A.dim + 1):
        if k > 1:
            p = mat_mul(p, A)
        best = max(best, float(np.max(np.diag(p.data))) / k)
    return TropicalScalar(best)


def coordinate_growth(A: TropicalMatrix) -> np.ndarray:
    """Per-coordinate limit of ``(A^n 0)_i / n`` for a constant matrix.

    Coordinate ``i`` grows like the heaviest cycle mean among the
    components reachable from it; ``-inf`` when no cycle is reachable.
    """
    model = MatrixModel.constant(A)
    base = structural_decomposition(model)
    own = [max_cycle_mean(A.restrict(c)) for c in base.components]
    reach_best = [max(float(own[l]) for l in base.reach[m]) for m in range(base.K)]
    return np.array([reach_best[base.node_component[i]] for i in range(A.dim)])


def _cycle_product(cycle) -> TropicalMatrix:
    p = cycle[0]
    for a in cycle[1:]:
        p = mat_mul(a, p)
    return p


def _closed_top(model: MatrixModel) -> ExponentEstimate:
    cycle = model.deterministic_cycle()
    return ExponentEstimate.exact(float(max_cycle_mean(_cycle_product(cycle))) / len(cycle))


def _closed_bottom(model: MatrixModel) -> ExponentEstimate:
    cycle = model.deterministic_cycle()
    growth = coordinate_growth(_cycle_product(cycle))
    return ExponentEstimate.exact(float(np.min(growth)) / len(cycle))


# -------------------------------------------------------------- Monte Carlo
def _mc(model: MatrixModel, horizon: int, replicates: int, reduce, **kw) -> ExponentEstimate:
    if horizon < 1 or replicates < 1:
        raise ValueError("need horizon >= 1 and replicates >= 1")
    states = final_states(model, horizon, replicates, **kw)
    vals = reduce(states, axis=1) / horizon
    common = dict(method="monte_carlo", horizon=horizon, replicates=replicates)
    if not np.all(np.isfinite(vals)):
        # ⊥ is absorbing: one collapsed replicate means the exponent is -inf
        return ExponentEstimate(BOTTOM, stderr=0.0, **common)
    se = float(np.std(vals, ddof=1) / math.sqrt(replicates)) if replicates > 1 else 0.0
    return ExponentEstimate(TropicalScalar(float(np.mean(vals))), stderr=se, **common)


def _method(model: MatrixModel, method: str) -> str:
    if method not in ("auto", "closed_form", "monte_carlo"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        return "closed_form" if model.is_deterministic() else "monte_carlo"
    if method == "closed_form" and not model.is_deterministic():
        raise ValueError("closed forms are only available for deterministic models")
    return method


def estimate_top_exponent(model: MatrixModel, horizon: int = DEFAULT_HORIZON,
                          replicates: int = DEFAULT_REPLICATES, *, method: str = "auto",
                          **kw) -> ExponentEstimate:
    """gamma(A): average over replicates of ``max_i x_i(n, 0) / n``."""
    if _method(model, method) == "closed_form":
        return _closed_top(model)
    return _mc(model, horizon, replicates, np.max, **kw)


def estimate_bottom_exponent(model: MatrixModel, horizon: int = DEFAULT_HORIZON,
                             replicates: int = DEFAULT_REPLICATES, *, method: str = "auto",
                             **kw) -> ExponentEstimate:
    """gamma_b(A): average over replicates of ``min_i x_i(n, 0) / n``."""
    if _method(model, method) == "closed_form":
        return _closed_bottom(model)
    return _mc(model, horizon, replicates, np.min, **kw)


def _singleton_exponent(model: MatrixModel, i: int) -> ExponentEstimate:
    if model.finite_support:
        loops = [float(a.data[i, i]) for a in model.support_atoms()]
        if any(v == NEG_INF for v in loops):
            return ExponentEstimate.bottom()
        if model.kind is Kind.IID_FINITE:
            weights = [p for p in model.probs if p > 0]
            return ExponentEstimate.exact(float(np.dot(weights, loops)))
        return ExponentEstimate.exact(float(np.mean(loops)))
    e = model.entries[i][i]
    if e.may_be_bottom:
        return ExponentEstimate.bottom()
    mean = e.mean()
    if mean == math.inf:
        raise ValueError(f"self-loop at node {i} has infinite positive mean; exponent undefined")
    return ExponentEstimate.exact(mean)


def component_exponent(model: MatrixModel, m: int, structure: ComponentDecomposition | None = None,
                       horizon: int = DEFAULT_HORIZON, replicates: int = DEFAULT_REPLICATES,
                       **kw) -> ExponentEstimate:
    """gamma^(m), the top exponent of the model restricted to component ``m``.

    Single-node components are exact: ⊥ if the self-loop can be ⊥, otherwise
    its mean.  Larger components are handled by
    :func:`estimate_top_exponent` on the restricted model.
    """
    structure = structure or structural_decomposition(model)
    if not 0 <= m < structure.K:
        raise IndexError(f"component index {m} out of range")
    comp = structure.components[m]
    if structure.trivial[m]:
        return ExponentEstimate.bottom()
    if len(comp) == 1:
        return _singleton_exponent(model, comp[0])
    return estimate_top_exponent(model.restrict(comp), horizon, replicates, **kw)


def component_exponents(model: MatrixModel, structure: ComponentDecomposition | None = None,
                        **kw) -> list[ExponentEstimate]:
    structure = structure or structural_decomposition(model)
    return [component_exponent(model, m, structure, **kw) for m in range(structure.K)]


@dataclass(frozen=True)
class LimitPrediction:
    """Candidate limit of ``x(n, 0) / n``: coordinate ``i`` gets gamma^[m] of its component."""

    limit: TropicalVector
    provenance: tuple[tuple[int, str], ...]

    def to_dict(self) -> dict:
        return {"limit": self.limit.to_list(),
                "provenance": [{"component": m, "method": meth} for m, meth in self.provenance]}


def predicted_limit(decomposition: ComponentDecomposition) -> LimitPrediction:
    if not decomposition.has_exponents:
        raise ValueError("decomposition has no exponents attached")
    vals, prov = [], []
    for i in range(decomposition.dim):
        m = decomposition.node_component[i]
        g = decomposition.gamma_square[m]
        vals.append(g.value)
        prov.append((m, g.method))
    return LimitPrediction(TropicalVector(vals), tuple(prov))


@dataclass(frozen=True)
class MaxDecompositionCheck:
    top: ExponentEstimate
    component_max: ExponentEstimate
    argmax: int
    discrepancy: float
    combined_stderr: float
    threshold: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "top": self.top.to_dict(),
            "component_max": self.component_max.to_dict(),
            "argmax": self.argmax,
            "discrepancy": self.discrepancy,
            "combined_stderr": self.combined_stderr,
            "threshold": self.threshold,
            "passed": self.passed,
        }


def check_max_decomposition(model: MatrixModel, decomposition: ComponentDecomposition | None = None,
                            horizon: int = DEFAULT_HORIZON, replicates: int = DEFAULT_REPLICATES,
                            **kw) -> MaxDecompositionCheck:
    """Compare gamma(A) with the largest component exponent (3 sigma rule)."""
    if decomposition is None or not decomposition.has_exponents:
        base = decomposition or structural_decomposition(model)
        decomposition = base.with_exponents(component_exponents(model, base, horizon=horizon,
                                                                replicates=replicates, **kw))
    top = estimate_top_exponent(model, horizon, replicates, **kw)
    gam = decomposition.gamma_round
    argmax = max(range(decomposition.K), key=lambda l: (gam[l].value, -l))
    best = gam[argmax]
    sigma = math.hypot(top.sigma, best.sigma)
    if top.point.is_bottom or best.point.is_bottom:
        disc = 0.0 if top.point.is_bottom and best.point.is_bottom else math.inf
    else:
        disc = abs(top.value - best.value)
    threshold = 0.0 if top.is_exact and best.is_exact else max(TIE_FLOOR, 3.0 * sigma)
    return MaxDecompositionCheck(top, best, argmax, disc, sigma, threshold, disc <= threshold)
