"""Incidence graph of a matrix model, its components and derived node sets.

Nodes are 0-based.  The graph has the arc ``i -> j`` when ``A[i, j]`` is
finite with positive probability, i.e. coordinate ``i`` can be fed by
coordinate ``j``.  Component ``l`` is *reachable* from ``m`` (``m -> l``)
when a path leads from ``c_m`` to ``c_l``; components are numbered in
increasing order of their smallest node.

For each component ``m`` the decomposition records

* ``reach[m]``  the reachable components ``E_m`` (reflexive),
* ``span[m]``   their nodes ``F_m``,
* ``gamma_square[m]`` the largest exponent over ``E_m``,
* ``tied[m]``   ``G_m``: reachable ``l`` whose own reachable maximum equals
  that of ``m``, and ``hull[m]`` = ``H_m``, their nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from .estimate import ExponentEstimate, compare_exponents
from .models import Kind, MatrixModel, support_matrix
from .semiring import StructureMatrix

__all__ = [
    "IncidenceGraph",
    "ComponentDecomposition",
    "TieDecision",
    "BlockSplit",
    "BlockStructureViolation",
    "strongly_connected_components",
    "structural_decomposition",
    "decompose",
    "extract_submodel",
    "block_split",
    "SUBMODEL_KINDS",
]

SUBMODEL_KINDS = ("round", "square", "brace")


class BlockStructureViolation(ValueError):
    """The lower-left block of a requested split can be finite."""


@dataclass(frozen=True)
class IncidenceGraph:
    dim: int
    adjacency: np.ndarray  # adjacency[i, j] is the arc i -> j

    @classmethod
    def from_structure(cls, s: StructureMatrix) -> "IncidenceGraph":
        adj = np.array(s.data == 0.0)
        adj.setflags(write=False)
        return cls(s.dim, adj)

    @classmethod
    def from_model(cls, model: MatrixModel) -> "IncidenceGraph":
        return cls.from_structure(support_matrix(model))

    def arcs(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.adjacency))]

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.dim))
        g.add_edges_from(self.arcs())
        return g


def strongly_connected_components(graph: IncidenceGraph) -> list[tuple[int, ...]]:
    comps = [tuple(sorted(c)) for c in nx.strongly_connected_components(graph.to_networkx())]
    return sorted(comps)


@dataclass(frozen=True)
class TieDecision:
    """Record of an exponent equality accepted only thanks to Monte Carlo slack."""

    component: int
    other: int
    difference: float
    tolerance: float

    def to_dict(self) -> dict:
        return {"component": self.component, "other": self.other,
                "difference": self.difference, "tolerance": self.tolerance}


@dataclass(frozen=True)
class ComponentDecomposition:
    dim: int
    components: tuple[tuple[int, ...], ...]
    node_component: tuple[int, ...]
    reach: tuple[frozenset[int], ...]
    span: tuple[tuple[int, ...], ...]
    final: tuple[bool, ...]
    initial: tuple[bool, ...]
    trivial: tuple[bool, ...]
    gamma_round: tuple[ExponentEstimate, ...] | None = None
    gamma_square: tuple[ExponentEstimate, ...] | None = None
    tied: tuple[frozenset[int], ...] | None = None
    hull: tuple[tuple[int, ...], ...] | None = None
    dominating: tuple[bool, ...] | None = None
    tie_slack: tuple[TieDecision, ...] = field(default=())

    @property
    def K(self) -> int:
        return len(self.components)

    @property
    def has_exponents(self) -> bool:
        return self.gamma_round is not None

    def order_pairs(self) -> list[tuple[int, int]]:
        """Pairs ``(m, l)`` with ``m -> l`` and ``m != l``."""
        return [(m, l) for m in range(self.K) for l in sorted(self.reach[m]) if l != m]

    def topological_order(self) -> list[int]:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.K))
        g.add_edges_from(self.order_pairs())
        return list(nx.topological_sort(g))

    def with_exponents(self, exponents) -> "ComponentDecomposition":
        """Attach per-component exponents and derive ``gamma_square``, ``G``, ``H``."""
        gam = _coerce_exponents(exponents, self.K)
        square = []
        for m in range(self.K):
            best = max(self.reach[m], key=lambda l: (gam[l].value, -l))
            square.append(gam[best])
        tied, slack = [], []
        for m in range(self.K):
            members = set()
            for l in self.reach[m]:
                tie = compare_exponents(square[l], square[m])
                if tie.equal:
                    members.add(l)
                    if tie.used_slack:
                        slack.append(TieDecision(m, l, tie.difference, tie.tolerance))
            tied.append(frozenset(members))
        hull = tuple(tuple(sorted(i for l in g for i in self.components[l])) for g in tied)
        dominating = tuple(g == frozenset({m}) for m, g in enumerate(tied))
        return ComponentDecomposition(
            self.dim, self.components, self.node_component, self.reach, self.span,
            self.final, self.initial, self.trivial,
            gamma_round=tuple(gam), gamma_square=tuple(square), tied=tuple(tied),
            hull=hull, dominating=dominating, tie_slack=tuple(slack),
        )

    def tied_by_paths(self, m: int) -> frozenset[int]:
        """``G_m`` via an intermediate component: ``m -> l -> p`` with ``gamma(p) = gamma[m]``."""
        self._need_exponents()
        out = set()
        for l in self.reach[m]:
            if any(compare_exponents(self.gamma_round[p], self.gamma_square[m]).equal for p in self.reach[l]):
                out.add(l)
        return frozenset(out)

    def _need_exponents(self):
        if not self.has_exponents:
            raise ValueError("decomposition has no exponents attached")

    def nodes(self, m: int, kind: str) -> tuple[int, ...]:
        if not 0 <= m < self.K:
            raise IndexError(f"component index {m} out of range 0..{self.K - 1}")
        if kind == "round":
            return self.components[m]
        if kind == "square":
            return self.span[m]
        if kind == "brace":
            self._need_exponents()
            return self.hull[m]
        raise ValueError(f"submodel kind must be one of {SUBMODEL_KINDS}")

    def to_dict(self) -> dict:
        out = {
            "components": [list(c) for c in self.components],
            "reach": [sorted(e) for e in self.reach],
            "span": [list(f) for f in self.span],
            "final": list(self.final),
            "initial": list(self.initial),
            "trivial": list(self.trivial),
        }
        if self.has_exponents:
            out.update({
                "gamma_round": [g.to_dict() for g in self.gamma_round],
                "gamma_square": [g.to_dict() for g in self.gamma_square],
                "tied": [sorted(g) for g in self.tied],
                "hull": [list(h) for h in self.hull],
                "dominating": list(self.dominating),
                "tie_slack": [t.to_dict() for t in self.tie_slack],
            })
        return out


def _coerce_exponents(exponents, K: int) -> list[ExponentEstimate]:
    if isinstance(exponents, Mapping):
        try:
            exponents = [exponents[m] for m in range(K)]
        except KeyError as exc:
            raise ValueError(f"no exponent supplied for component {exc}") from None
    exponents = list(exponents)
    if len(exponents) != K:
        raise ValueError(f"expected {K} exponents, got {len(exponents)}")
    return [e if isinstance(e, ExponentEstimate) else ExponentEstimate.exact(e) for e in exponents]


def _self_loop_possible(model: MatrixModel, i: int) -> bool:
    return bool(support_matrix(model).data[i, i] == 0.0)


def structural_decomposition(model: MatrixModel) -> ComponentDecomposition:
    """Components, reachability, node spans and flags; no exponents."""
    graph = IncidenceGraph.from_model(model)
    comps = strongly_connected_components(graph)
    node_comp = [0] * model.dim
    for m, c in enumerate(comps):
        for i in c:
            node_comp[i] = m
    cond = nx.DiGraph()
    cond.add_nodes_from(range(len(comps)))
    for i, j in graph.arcs():
        if node_comp[i] != node_comp[j]:
            cond.add_edge(node_comp[i], node_comp[j])
    if not nx.is_directed_acyclic_graph(cond):
        raise AssertionError("condensation must be acyclic")
    reach = tuple(frozenset(nx.descendants(cond, m) | {m}) for m in range(len(comps)))
    span = tuple(tuple(sorted(i for l in e for i in comps[l])) for e in reach)
    final = tuple(e == frozenset({m}) for m, e in enumerate(reach))
    initial = tuple(not any(m in reach[l] for l in range(len(comps)) if l != m) for m in range(len(comps)))
    trivial = tuple(len(c) == 1 and not _self_loop_possible(model, c[0]) for c in comps)
    return ComponentDecomposition(
        model.dim, tuple(comps), tuple(node_comp), reach, span, final, initial, trivial
    )


def decompose(model: MatrixModel, exponents=None, **estimate_options) -> ComponentDecomposition:
    """Full decomposition.  Missing exponents are estimated per component.

    ``exponents`` is a sequence or mapping indexed by component; plain
    numbers and :class:`TropicalScalar` values count as exact.
    ``estimate_options`` (``horizon``, ``replicates``, ...) are passed to
    :func:`maxplus_lln.lyapunov.component_exponent`.
    """
    base = structural_decomposition(model)
    if exponents is None:
        from .lyapunov import component_exponent

        exponents = [component_exponent(model, m, structure=base, **estimate_options) for m in range(base.K)]
    return base.with_exponents(exponents)


def extract_submodel(model: MatrixModel, decomposition: ComponentDecomposition, m: int,
                     kind: str = "round") -> MatrixModel:
    """Restriction of ``model`` to ``c_m`` (round), ``F_m`` (square) or ``H_m`` (brace)."""
    return model.restrict(decomposition.nodes(m, kind))


@dataclass(frozen=True)
class BlockSplit:
    """``A~ = [[B, D], [⊥, C]]`` over the node order ``I + J``.

    ``d_blocks`` lists the ``|I|×|J|`` block of every atom (finite-support
    models) and is empty for entrywise models; ``d_support`` is its support.
    """

    I: tuple[int, ...]
    J: tuple[int, ...]
    tilde: MatrixModel
    b_model: MatrixModel
    c_model: MatrixModel | None
    d_blocks: tuple[np.ndarray, ...]
    d_support: np.ndarray

    @property
    def d_always_bottom(self) -> bool:
        return not self.d_support.any()


def block_split(model: MatrixModel, I: Sequence[int], J: Sequence[int]) -> BlockSplit:
    I, J = tuple(sorted(int(i) for i in I)), tuple(sorted(int(j) for j in J))
    if not I:
        raise ValueError("I must be non-empty")
    if set(I) & set(J):
        raise ValueError("I and J must be disjoint")
    support = support_matrix(model).data == 0.0
    if J:
        lower = support[np.ix_(J, I)]
        if lower.any():
            r, c = np.argwhere(lower)[0]
            raise BlockStructureViolation(
                f"entry ({J[r]}, {I[c]}) of the lower-left block is finite with positive probability"
            )
    tilde = model.restrict(I + J)
    b_model = model.restrict(I)
    c_model = model.restrict(J) if J else None
    if model.kind is Kind.ENTRYWISE_IID or not J:
        d_blocks = ()
    else:
        d_blocks = tuple(np.array(a.data[np.ix_(I, J)]) for a in model.support_atoms())
    d_support = support[np.ix_(I, J)] if J else np.zeros((len(I), 0), dtype=bool)
    return BlockSplit(I, J, tilde, b_model, c_model, d_blocks, d_support)

