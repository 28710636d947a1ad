"""Laws of stationary random matrix sequences and reproducible sampling.

Three model kinds are supported:

``IID_FINITE``
    A(n) i.i.d., drawn from finitely many atoms with given probabilities.
``PERIODIC``
    A(n) = cycle[(phase + n) mod P].  The phase is uniform over the cycle
    unless fixed, which makes the sequence stationary.
``ENTRYWISE_IID``
    A(n) i.i.d. with every entry drawn from its own distribution descriptor.
    Entries tagged with the same ``shared`` name reuse one draw per step
    (after their own affine map), which covers rows like ``(-X, -X, 0)``.

Randomness: each ``(seed, replicate)`` pair owns a Philox stream keyed by
``SeedSequence(seed, spawn_key=(replicate,))``.  Matrices are generated in
fixed blocks of :data:`BLOCK` steps, so a stream is a pure function of
``(model, seed, replicate)``: ``sample_array(m, n)[:k]`` equals
``sample_array(m, k)`` and the chunking used by consumers never matters.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .semiring import (
    NEG_INF,
    StructureMatrix,
    TropicalMatrix,
    format_entry,
    parse_entry,
    structure_of,
)

__all__ = [
    "Kind",
    "EntryDist",
    "MatrixModel",
    "ModelError",
    "Realization",
    "BLOCK",
    "make_rng",
    "sample_array",
    "sample_indices",
    "sample_sequence",
    "builtin_example",
    "BUILTINS",
    "support_matrix",
    "fixed_structure_check",
    "model_to_dict",
    "model_from_dict",
    "dumps_model",
    "loads_model",
    "load_model",
    "dump_model",
]

BLOCK = 1024
PROB_TOL = 1e-12


class ModelError(ValueError):
    """Invalid model parameters or configuration."""


class Kind(str, enum.Enum):
    IID_FINITE = "IID_FINITE"
    PERIODIC = "PERIODIC"
    ENTRYWISE_IID = "ENTRYWISE_IID"


_DIST_PARAMS = {
    "constant": ("value",),
    "uniform": ("low", "high"),
    "gaussian": ("mean", "std"),
    "pareto": ("alpha", "xmin"),
}


@dataclass(frozen=True)
class EntryDist:
    """Law of one matrix entry: ``offset + scale * draw``, or ⊥ with mass ``bottom``.

    ``pareto`` is the classical Pareto law with tail index ``alpha`` and
    support ``[xmin, inf)``; its mean is infinite when ``alpha <= 1``.
    """

    dist: str
    params: tuple[float, ...]
    bottom: float = 0.0
    scale: float = 1.0
    offset: float = 0.0
    shared: str | None = None

    def __post_init__(self):
        if self.dist not in _DIST_PARAMS:
            raise ModelError(f"unknown distribution {self.dist!r}")
        names = _DIST_PARAMS[self.dist]
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        if len(params) != len(names):
            raise ModelError(f"{self.dist} takes parameters {names}")
        if not all(math.isfinite(p) for p in params):
            raise ModelError("distribution parameters must be finite")
        if not 0.0 <= self.bottom <= 1.0:
            raise ModelError("bottom mass must lie in [0, 1]")
        if not (math.isfinite(self.scale) and math.isfinite(self.offset)):
            raise ModelError("scale and offset must be finite")
        if self.dist == "uniform" and params[0] > params[1]:
            raise ModelError("uniform needs low <= high")
        if self.dist == "gaussian" and params[1] < 0:
            raise ModelError("gaussian needs std >= 0")
        if self.dist == "pareto" and (params[0] <= 0 or params[1] <= 0):
            raise ModelError("pareto needs alpha > 0 and xmin > 0")

    @classmethod
    def constant(cls, value: float, bottom: float = 0.0) -> "EntryDist":
        return cls("constant", (value,), bottom=bottom)

    @classmethod
    def never(cls) -> "EntryDist":
        return cls("constant", (0.0,), bottom=1.0)

    @property
    def always_bottom(self) -> bool:
        return self.bottom == 1.0

    @property
    def may_be_bottom(self) -> bool:
        return self.bottom > 0.0

    @property
    def is_constant(self) -> bool:
        return self.dist == "constant" or (self.dist == "uniform" and self.params[0] == self.params[1]) or (
            self.dist == "gaussian" and self.params[1] == 0.0
        )

    def base_mean(self) -> float:
        p = self.params
        if self.dist == "constant":
            return p[0]
        if self.dist == "uniform":
            return 0.5 * (p[0] + p[1])
        if self.dist == "gaussian":
            return p[0]
        alpha, xmin = p
        return alpha * xmin / (alpha - 1.0) if alpha > 1.0 else math.inf

    def mean(self) -> float:
        """Mean of the finite part; may be ``±inf`` for heavy tails."""
        m = self.base_mean()
        if math.isinf(m):
            return m if self.scale > 0 else (-m if self.scale < 0 else self.offset)
        return self.offset + self.scale * m

    @property
    def integrable(self) -> bool:
        return self.always_bottom or self.scale == 0.0 or math.isfinite(self.base_mean())

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        p = self.params
        if self.dist == "constant":
            return np.full(size, p[0])
        if self.dist == "uniform":
            return rng.uniform(p[0], p[1], size)
        if self.dist == "gaussian":
            return rng.normal(p[0], p[1], size)
        # numpy's pareto is the Lomax law; shift and scale to classical Pareto
        return p[1] * (1.0 + rng.pareto(p[0], size))

    def base_key(self) -> tuple:
        return (self.dist, self.params)

    def to_json(self):
        if self.dist == "constant" and self.scale == 1.0 and self.offset == 0.0 and self.shared is None:
            if self.bottom == 1.0:
                return "-inf"
            if self.bottom == 0.0:
                return format_entry(self.params[0])
        out = {"dist": self.dist}
        out.update({k: format_entry(v) for k, v in zip(_DIST_PARAMS[self.dist], self.params)})
        if self.bottom:
            out["bottom"] = self.bottom
        if self.scale != 1.0:
            out["scale"] = format_entry(self.scale)
        if self.offset != 0.0:
            out["offset"] = format_entry(self.offset)
        if self.shared is not None:
            out["shared"] = self.shared
        return out

    @classmethod
    def from_json(cls, obj) -> "EntryDist":
        if not isinstance(obj, dict):
            v = parse_entry(obj)
            return cls.never() if v == NEG_INF else cls.constant(v)
        obj = dict(obj)
        try:
            dist = obj.pop("dist")
            params = tuple(obj.pop(k) for k in _DIST_PARAMS[dist])
        except KeyError as exc:
            raise ModelError(f"entry descriptor missing field {exc}") from None
        kw = {k: obj.pop(k) for k in ("bottom", "scale", "offset", "shared") if k in obj}
        if obj:
            raise ModelError(f"unknown entry descriptor fields {sorted(obj)}")
        return cls(dist, params, **kw)


@dataclass(frozen=True)
class MatrixModel:
    """Law of a stationary sequence of d×d max-plus matrices plus its seed.

    ``atoms`` holds the i.i.d. atoms (``IID_FINITE``) or the cycle
    (``PERIODIC``); ``entries`` holds the per-entry laws (``ENTRYWISE_IID``).
    ``index_map`` records the original node of every coordinate when the
    model was cut out of a larger one.
    """

    kind: Kind
    dim: int
    atoms: tuple[TropicalMatrix, ...] = ()
    probs: tuple[float, ...] = ()
    entries: tuple[tuple[EntryDist, ...], ...] = ()
    phase: int | None = None
    seed: int = 0
    integrable: bool = True
    note: str = ""
    index_map: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.dim < 1:
            raise ModelError("dim must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ModelError("seed must be a 64-bit unsigned integer")
        if self.kind is Kind.ENTRYWISE_IID:
            self._check_entries()
        else:
            self._check_atoms()
        if self.index_map is not None and len(self.index_map) != self.dim:
            raise ModelError("index_map length must equal dim")

    def _check_atoms(self):
        atoms = tuple(a if isinstance(a, TropicalMatrix) else TropicalMatrix(a) for a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ModelError("model needs at least one matrix")
        if any(a.dim != self.dim for a in atoms):
            raise ModelError("every matrix must be dim×dim")
        if self.entries:
            raise ModelError("entries are only meaningful for ENTRYWISE_IID")
        if self.kind is Kind.IID_FINITE:
            probs = tuple(float(p) for p in self.probs)
            object.__setattr__(self, "probs", probs)
            if len(probs) != len(atoms):
                raise ModelError("one probability per atom")
            if any(not math.isfinite(p) or p < 0 for p in probs):
                raise ModelError("probabilities must be non-negative")
            if abs(sum(probs) - 1.0) > PROB_TOL:
                raise ModelError(f"probabilities sum to {sum(probs)!r}, not 1")
            if self.phase is not None:
                raise ModelError("phase only applies to PERIODIC models")
        else:
            if self.probs:
                raise ModelError("PERIODIC models take no probabilities")
            if self.phase is not None and not 0 <= self.phase < len(atoms):
                raise ModelError("phase must index the cycle")
        # finite-support laws have bounded finite entries
        object.__setattr__(self, "integrable", True)

    def _check_entries(self):
        rows = tuple(tuple(e if isinstance(e, EntryDist) else EntryDist.from_json(e) for e in row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        if len(rows) != self.dim or any(len(r) != self.dim for r in rows):
            raise ModelError("entries must be a dim×dim grid")
        if self.atoms or self.probs or self.phase is not None:
            raise ModelError("ENTRYWISE_IID models take neither atoms, probs nor phase")
        shared: dict[str, tuple] = {}
        for row in rows:
            for e in row:
                if e.shared is None:
                    continue
                if shared.setdefault(e.shared, e.base_key()) != e.base_key():
                    raise ModelError(f"shared draw {e.shared!r} used with different base laws")

    # ----------------------------------------------------------------- helpers
    @classmethod
    def iid(cls, atoms, probs, **kw) -> "MatrixModel":
        atoms = tuple(TropicalMatrix(a) for a in atoms)
        return cls(Kind.IID_FINITE, atoms[0].dim, atoms=atoms, probs=tuple(probs), **kw)

    @classmethod
    def periodic(cls, cycle, phase: int | None = None, **kw) -> "MatrixModel":
        cycle = tuple(TropicalMatrix(a) for a in cycle)
        return cls(Kind.PERIODIC, cycle[0].dim, atoms=cycle, phase=phase, **kw)

    @classmethod
    def entrywise(cls, entries, integrable: bool, **kw) -> "MatrixModel":
        rows = tuple(tuple(e if isinstance(e, EntryDist) else EntryDist.from_json(e) for e in row) for row in entries)
        return cls(Kind.ENTRYWISE_IID, len(rows), entries=rows, integrable=integrable, **kw)

    @classmethod
    def constant(cls, matrix, **kw) -> "MatrixModel":
        return cls.iid([matrix], [1.0], **kw)

    @property
    def cycle(self) -> tuple[TropicalMatrix, ...]:
        if self.kind is not Kind.PERIODIC:
            raise AttributeError("only PERIODIC models have a cycle")
        return self.atoms

    @property
    def finite_support(self) -> bool:
        return self.kind is not Kind.ENTRYWISE_IID

    @property
    def is_iid(self) -> bool:
        return self.kind is not Kind.PERIODIC or len(minimal_cycle(self.atoms)) == 1

    def support_atoms(self) -> tuple[TropicalMatrix, ...]:
        """Matrices taken with positive probability (finite-support kinds)."""
        if self.kind is Kind.IID_FINITE:
            return tuple(a for a, p in zip(self.atoms, self.probs) if p > 0)
        return self.atoms

    def is_deterministic(self) -> bool:
        """True when every realization is the same matrix sequence up to phase."""
        if self.kind is Kind.IID_FINITE:
            return len(set(self.support_atoms())) == 1
        if self.kind is Kind.PERIODIC:
            return True
        return all(e.is_constant and e.bottom in (0.0, 1.0) for row in self.entries for e in row)

    def deterministic_cycle(self) -> tuple[TropicalMatrix, ...]:
        """The repeating block of a deterministic model (length 1 unless PERIODIC)."""
        if not self.is_deterministic():
            raise ModelError("model is random")
        if self.kind is Kind.IID_FINITE:
            return (self.support_atoms()[0],)
        if self.kind is Kind.PERIODIC:
            return minimal_cycle(self.atoms)
        return (TropicalMatrix([[NEG_INF if e.always_bottom else e.mean() for e in row] for row in self.entries]),)

    def restrict(self, nodes: Sequence[int]) -> "MatrixModel":
        """Submodel on the coordinates ``nodes`` (kept in the given order)."""
        nodes = [int(i) for i in nodes]
        if not nodes:
            raise ModelError("cannot restrict to an empty node set")
        if len(set(nodes)) != len(nodes) or not all(0 <= i < self.dim for i in nodes):
            raise ModelError(f"invalid node set {nodes}")
        base = self.index_map or tuple(range(self.dim))
        imap = tuple(base[i] for i in nodes)
        if self.kind is Kind.ENTRYWISE_IID:
            rows = tuple(tuple(self.entries[i][j] for j in nodes) for i in nodes)
            return replace(self, dim=len(nodes), entries=rows, index_map=imap)
        atoms = tuple(a.restrict(nodes) for a in self.atoms)
        return replace(self, dim=len(nodes), atoms=atoms, index_map=imap)

    def with_seed(self, seed: int) -> "MatrixModel":
        return replace(self, seed=int(seed))

    def non_integrable_rows(self) -> list[int]:
        """Rows holding an entry whose absolute value has infinite mean."""
        if self.kind is not Kind.ENTRYWISE_IID:
            return []
        bad = [i for i, row in enumerate(self.entries) if not all(e.integrable for e in row)]
        if not bad and not self.integrable:
            return list(range(self.dim))
        return bad


def minimal_cycle(cycle: Sequence[TropicalMatrix]) -> tuple[TropicalMatrix, ...]:
    """Shortest block whose repetition gives ``cycle``."""
    cycle = tuple(cycle)
    P = len(cycle)
    for q in range(1, P + 1):
        if P % q == 0 and all(cycle[k] == cycle[k % q] for k in range(P)):
            return cycle[:q]
    return cycle


# ------------------------------------------------------------------ sampling
def make_rng(seed: int, replicate: int) -> np.random.Generator:
    """Philox generator for stream ``replicate`` of ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replicate),))
    return np.random.Generator(np.random.Philox(ss))


class Realization:
    """Deterministic stream A(0), A(1), ... for one replicate of a model.

    ``take(k)`` returns the next ``k`` matrices as a ``(k, d, d)`` array.
    For finite-support models :attr:`last_indices` holds the atom (or cycle
    position) used for each matrix in the most recent ``take``.
    """

    def __init__(self, model: MatrixModel, replicate: int = 0):
        if replicate < 0:
            raise ModelError("replicate index must be non-negative")
        self.model = model
        self.replicate = replicate
        self._rng = make_rng(model.seed, replicate)
        self._buf = np.empty((0, model.dim, model.dim))
        self._buf_idx = np.empty(0, dtype=np.int64)
        self._generated = 0
        self.last_indices: np.ndarray | None = None
        if model.kind is Kind.IID_FINITE:
            cdf = np.cumsum(model.probs)
            cdf[-1] = 1.0
            self._cdf = cdf
            self._stack = np.stack([a.data for a in model.atoms])
        elif model.kind is Kind.PERIODIC:
            P = len(model.atoms)
            self._phase = model.phase if model.phase is not None else int(self._rng.integers(P))
            self._stack = np.stack([a.data for a in model.atoms])
        else:
            self._plan = _entrywise_plan(model)

    @property
    def phase(self) -> int:
        return self._phase

    def _block(self):
        m = self.model
        if m.kind is Kind.IID_FINITE:
            idx = np.searchsorted(self._cdf, self._rng.random(BLOCK), side="right")
            idx = np.minimum(idx, len(m.atoms) - 1)
            return self._stack[idx], idx
        if m.kind is Kind.PERIODIC:
            idx = (self._phase + self._generated + np.arange(BLOCK)) % len(m.atoms)
            return self._stack[idx], idx
        return _entrywise_block(self._plan, self._rng, m.dim), np.full(BLOCK, -1)

    def take(self, k: int) -> np.ndarray:
        if k < 0:
            raise ModelError("cannot take a negative number of matrices")
        parts, idx_parts, have = [self._buf], [self._buf_idx], self._buf.shape[0]
        while have < k:
            block, idx = self._block()
            self._generated += BLOCK
            parts.append(block)
            idx_parts.append(idx)
            have += BLOCK
        allm = np.concatenate(parts) if len(parts) > 1 else self._buf
        alli = np.concatenate(idx_parts) if len(idx_parts) > 1 else self._buf_idx
        out, self._buf = allm[:k], allm[k:]
        self.last_indices, self._buf_idx = alli[:k], alli[k:]
        return out


def _entrywise_plan(model: MatrixModel):
    groups: dict[str, EntryDist] = {}
    cells = []
    for i, row in enumerate(model.entries):
        for j, e in enumerate(row):
            if e.always_bottom:
                continue
            if e.shared is not None:
                groups.setdefault(e.shared, e)
            cells.append((i, j, e))
    return sorted(groups.items()), cells


def _entrywise_block(plan, rng: np.random.Generator, d: int) -> np.ndarray:
    groups, cells = plan
    shared = {name: e.draw(rng, BLOCK) for name, e in groups}
    out = np.full((BLOCK, d, d), NEG_INF)
    for i, j, e in cells:
        base = shared[e.shared] if e.shared is not None else e.draw(rng, BLOCK)
        vals = e.offset + e.scale * base
        if e.may_be_bottom:
            vals = np.where(rng.random(BLOCK) < e.bottom, NEG_INF, vals)
        out[:, i, j] = vals
    return out


def sample_array(model: MatrixModel, n: int, replicate: int = 0) -> np.ndarray:
    """A(0), ..., A(n-1) of one replicate as an ``(n, d, d)`` array."""
    if n < 0:
        raise ModelError("n must be non-negative")
    return Realization(model, replicate).take(n)


def sample_indices(model: MatrixModel, n: int, replicate: int = 0) -> np.ndarray:
    """Atom / cycle positions drawn for A(0), ..., A(n-1)."""
    if not model.finite_support:
        raise ModelError("only finite-support models have atom indices")
    r = Realization(model, replicate)
    r.take(n)
    return r.last_indices


def sample_sequence(model: MatrixModel, n: int, replicate: int = 0) -> list[TropicalMatrix]:
    return [TropicalMatrix(a) for a in sample_array(model, n, replicate)]


# ------------------------------------------------------------------ builtins
def _exchanges(phase: int | None = None, seed: int = 0) -> MatrixModel:
    a0 = [["-inf", 0], [0, "-inf"]]
    a1 = [["-inf", 1], [0, "-inf"]]
    return MatrixModel.periodic(
        [a0, a1],
        phase=phase,
        seed=seed,
        note="two-state exchange: fixed structure, strongly connected, theta^2 not ergodic",
    )


MAIRESSE_B = ((0, "-inf", "-inf"), (0, "-inf", "-inf"), (0, 1, 1))
MAIRESSE_C = ((0, "-inf", "-inf"), (0, "-inf", 0), (0, 0, "-inf"))


def _mairesse(p: float = 0.5, seed: int = 0) -> MatrixModel:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ModelError("mairesse needs 0 < p < 1")
    return MatrixModel.iid(
        [MAIRESSE_B, MAIRESSE_C],
        [p, 1.0 - p],
        seed=seed,
        note="i.i.d. B/C counterexample: two components, bottom line in A^{2} with probability p",
    )


def _integrability(alpha: float = 0.9, xmin: float = 1.0, seed: int = 0) -> MatrixModel:
    alpha, xmin = float(alpha), float(xmin)
    if alpha <= 0 or xmin < 1.0:
        raise ModelError("integrability needs alpha > 0 and X >= 1 (xmin >= 1)")
    negx = EntryDist("pareto", (alpha, xmin), scale=-1.0, shared="X")
    entries = [
        [negx, negx, EntryDist.constant(0.0)],
        [EntryDist.never(), EntryDist.constant(0.0), EntryDist.constant(0.0)],
        [EntryDist.never(), EntryDist.never(), EntryDist.constant(-1.0)],
    ]
    note = (
        "row 1 is (-X_n, -X_n, 0) with X_n Pareto; A33 is -1, not the printed 0, "
        "so that gamma^(3) = -1 and x_3(n,0) = -n hold.  Direct iteration gives "
        "x(n,0) = (max(-X_{n-1}, -(n-1)), 0, -n) and y(n,0) = (max(-X_0, -(n-1)), 0, -n) "
        "for n >= 1, where the right product uses X_0 for A(-1)"
    )
    integrable = alpha > 1.0
    return MatrixModel.entrywise(entries, integrable=integrable, seed=seed, note=note)


BUILTINS = {
    "exchanges": _exchanges,
    "mairesse": _mairesse,
    "integrability": _integrability,
}


def builtin_example(name: str, **params) -> MatrixModel:
    """One of the reference models: ``exchanges``, ``mairesse`` or ``integrability``."""
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise ModelError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ModelError(str(exc)) from None


# ----------------------------------------------------------------- structure
def support_matrix(model: MatrixModel) -> StructureMatrix:
    """0 where the entry is finite with positive probability, ⊥ elsewhere."""
    if model.finite_support:
        finite = np.zeros((model.dim, model.dim), dtype=bool)
        for a in model.support_atoms():
            finite |= np.isfinite(a.data)
    else:
        finite = np.array([[not e.always_bottom for e in row] for row in model.entries], dtype=bool)
    return StructureMatrix(np.where(finite, 0.0, NEG_INF))


def fixed_structure_check(model: MatrixModel) -> bool:
    """Whether every entry is almost surely finite or almost surely ⊥."""
    if model.finite_support:
        structures = {structure_of(a) for a in model.support_atoms()}
        return len(structures) == 1
    return all(e.bottom in (0.0, 1.0) for row in model.entries for e in row)


# ------------------------------------------------------------------- config
def model_to_dict(model: MatrixModel) -> dict:
    out: dict = {"dim": model.dim, "kind": model.kind.value}
    if model.kind is Kind.IID_FINITE:
        out["atoms"] = [a.to_rows() for a in model.atoms]
        out["probs"] = list(model.probs)
    elif model.kind is Kind.PERIODIC:
        out["cycle"] = [a.to_rows() for a in model.atoms]
        if model.phase is not None:
            out["phase"] = model.phase
    else:
        out["entries"] = [[e.to_json() for e in row] for row in model.entries]
    out["seed"] = model.seed
    out["integrable"] = model.integrable
    out["note"] = model.note
    return out


_KNOWN_FIELDS = {"dim", "kind", "atoms", "cycle", "entries", "probs", "phase", "seed", "integrable", "note"}


def model_from_dict(obj: dict) -> MatrixModel:
    if not isinstance(obj, dict):
        raise ModelError("model config must be a JSON object")
    unknown = set(obj) - _KNOWN_FIELDS
    if unknown:
        raise ModelError(f"unknown model fields {sorted(unknown)}")
    try:
        kind = Kind(obj["kind"])
        dim = int(obj["dim"])
    except KeyError as exc:
        raise ModelError(f"model config missing field {exc}") from None
    except ValueError as exc:
        raise ModelError(str(exc)) from None
    common = {"seed": int(obj.get("seed", 0)), "note": str(obj.get("note", ""))}
    try:
        if kind is Kind.IID_FINITE:
            model = MatrixModel.iid(obj["atoms"], obj["probs"], **common)
        elif kind is Kind.PERIODIC:
            model = MatrixModel.periodic(obj["cycle"], phase=obj.get("phase"), **common)
        else:
            if "integrable" not in obj:
                raise ModelError("ENTRYWISE_IID configs must declare 'integrable'")
            model = MatrixModel.entrywise(obj["entries"], integrable=bool(obj["integrable"]), **common)
    except KeyError as exc:
        raise ModelError(f"model config missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(str(exc)) from None
    if model.dim != dim:
        raise ModelError(f"declared dim {dim} does not match matrices of size {model.dim}")
    return model


def dumps_model(model: MatrixModel) -> str:
    return json.dumps(model_to_dict(model), indent=2, ensure_ascii=False) + "\n"


def loads_model(text: str) -> MatrixModel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"model config is not valid JSON: {exc}") from None
    return model_from_dict(obj)


def load_model(path) -> MatrixModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))


def dump_model(model: MatrixModel, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8", newline="\n")
