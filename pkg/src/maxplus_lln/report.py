"""Analysis reports (JSON) and CSV writers for exponents and trajectories.

CSV output is byte-stable: "." decimals, ``-inf`` for ⊥, UTF-8, LF line
endings, and floats written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .graph import ComponentDecomposition
from .lyapunov import DEFAULT_HORIZON, DEFAULT_REPLICATES
from .models import MatrixModel, model_to_dict

__all__ = [
    "json_float",
    "csv_float",
    "AnalysisReport",
    "build_report",
    "exponent_rows",
    "write_exponent_csv",
    "write_trajectory_csv",
    "dumps_json",
]

REPORT_VERSION = 1


def json_float(v):
    """JSON-safe number: ``-inf``/``inf`` become strings, NaN becomes null."""
    if v is None:
        return None
    v = float(v)
    if math.isnan(v):
        return None
    if math.isinf(v):
        return "-inf" if v < 0 else "inf"
    return int(v) if v.is_integer() and abs(v) < 2**53 else v


def csv_float(v) -> str:
    v = float(v)
    if v == -math.inf:
        return "-inf"
    if math.isinf(v) or math.isnan(v):
        raise ValueError(f"cannot write {v!r} to CSV")
    if v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(v)


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return json_float(obj)
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_sanitize(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


@dataclass(frozen=True)
class AnalysisReport:
    model: dict
    decomposition: dict
    exponents: list
    hypotheses: list
    verdict: dict
    diagnostics: dict | None
    consistency: dict | None
    thresholds: dict

    def to_dict(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "model": self.model,
            "decomposition": self.decomposition,
            "exponents": self.exponents,
            "hypotheses": self.hypotheses,
            "verdict": self.verdict,
            "diagnostics": self.diagnostics,
            "consistency": self.consistency,
            "thresholds": self.thresholds,
        }

    def dumps(self) -> str:
        return dumps_json(self.to_dict())


def exponent_rows(decomposition: ComponentDecomposition) -> list[dict]:
    """One row per component: exponents, standard error and method."""
    if not decomposition.has_exponents:
        raise ValueError("decomposition has no exponents attached")
    rows = []
    for m in range(decomposition.K):
        g, s = decomposition.gamma_round[m], decomposition.gamma_square[m]
        rows.append({
            "component": m,
            "nodes": list(decomposition.components[m]),
            "gamma_round": g.value,
            "gamma_square": s.value,
            "stderr": g.sigma,
            "method": g.method,
        })
    return rows


def build_report(model: MatrixModel, *, horizon: int = DEFAULT_HORIZON, replicates: int = DEFAULT_REPLICATES,
                 diagnostics_horizon: int | None = None, checkpoints=None, consistency: bool = False,
                 consistency_horizon: int = 100_000, tolerance: float = 0.05, runs: int = 200) -> AnalysisReport:
    """Full analysis: decomposition, exponents, hypotheses, verdict, and optional diagnostics."""
    from .verifier import check_limit_consistency, divergence_threshold, empirical_convergence, verdict

    v = verdict(model, horizon=horizon, replicates=replicates, runs=runs)
    dec = v.decomposition
    diag = None
    if diagnostics_horizon:
        diag = empirical_convergence(model, diagnostics_horizon, checkpoints).to_dict()
    cons = None
    if consistency:
        cons = check_limit_consistency(model, consistency_horizon, tolerance, decision=v).to_dict()
    thresholds = {
        "tie": "max(1e-9, 3*SE_a + 3*SE_b); exact comparison between closed forms",
        "divergence": "gap > max(0.1*|limsup_est|, 5/sqrt(n))",
        "consistency_tolerance": tolerance,
        "monte_carlo": {"horizon": horizon, "replicates": replicates},
    }
    if diagnostics_horizon:
        thresholds["divergence_floor"] = divergence_threshold(0.0, diagnostics_horizon)
    exps = [{**r, "gamma_round": json_float(r["gamma_round"]), "gamma_square": json_float(r["gamma_square"])}
            for r in exponent_rows(dec)]
    return AnalysisReport(
        model=model_to_dict(model),
        decomposition=dec.to_dict(),
        exponents=exps,
        hypotheses=v.report.to_list(),
        verdict=v.to_dict(),
        diagnostics=diag,
        consistency=cons,
        thresholds=thresholds,
    )


def _writer(fh: IO[str]):
    return csv.writer(fh, lineterminator="\n")


def write_exponent_csv(decomposition: ComponentDecomposition, fh: IO[str] | None = None) -> str:
    """Columns: component, gamma_round, gamma_square, stderr, method."""
    buf = fh or io.StringIO()
    w = _writer(buf)
    w.writerow(["component", "gamma_round", "gamma_square", "stderr", "method"])
    for r in exponent_rows(decomposition):
        w.writerow([r["component"], csv_float(r["gamma_round"]), csv_float(r["gamma_square"]),
                    csv_float(r["stderr"]), r["method"]])
    return buf.getvalue() if fh is None else ""


def write_trajectory_csv(states: np.ndarray, fh: IO[str] | None = None, start: int = 0,
                         header: bool = True) -> str:
    """Columns: n, x_1, ..., x_d; row ``t`` is ``x(start + t)``."""
    buf = fh or io.StringIO()
    w = _writer(buf)
    states = np.asarray(states)
    if header:
        w.writerow(["n"] + [f"x_{i + 1}" for i in range(states.shape[1])])
    for t, row in enumerate(states):
        w.writerow([start + t] + [csv_float(v) for v in row])
    return buf.getvalue() if fh is None else ""
