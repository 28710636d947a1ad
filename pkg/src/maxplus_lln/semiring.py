"""Exact (max, +) arithmetic on scalars, vectors and dense square matrices.

Entries live in R ∪ {⊥} where ⊥ plays the role of -inf:  a ⊕ b = max(a, b)
and a ⊗ b = a + b.  Matrices and vectors are immutable numpy float64 arrays
in which ⊥ is stored as IEEE ``-inf``.  Construction rejects ``+inf`` and
``nan``, so the only non-finite value that can ever appear is ``-inf`` and
the float operations ``max`` and ``+`` act on it exactly like ⊥ (there is
no ``-inf + inf`` to trip over).  Scalars handed out to callers are
:class:`TropicalScalar` values with an explicit bottom state.

Convention: entry ``(i, j)`` of a matrix weights the transition from
coordinate ``j`` to coordinate ``i``, so ``(A x)_i = max_j A[i, j] + x[j]``
and ``(A(n-1) ... A(0))[i, j]`` is the heaviest path that starts at ``j``.
The incidence graph built elsewhere draws the arc ``i -> j`` for a finite
``A[i, j]`` (coordinate ``i`` depends on coordinate ``j``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "BOTTOM",
    "ZERO",
    "TropicalScalar",
    "TropicalVector",
    "TropicalMatrix",
    "StructureMatrix",
    "DimensionError",
    "oplus",
    "otimes",
    "mat_vec",
    "mat_mul",
    "left_product",
    "right_product",
    "brute_force_power",
    "structure_of",
    "bottom_lines",
    "has_bottom_line",
    "parse_entry",
    "format_entry",
    "identity",
    "MAX_DIM",
    "BRUTE_FORCE_LIMIT",
]

MAX_DIM = 64
BRUTE_FORCE_LIMIT = 10**7

NEG_INF = -math.inf


class DimensionError(ValueError):
    """Operands of a tropical operation have incompatible shapes."""


@dataclass(frozen=True)
class TropicalScalar:
    """An element of R ∪ {⊥}; ``value is None`` encodes ⊥."""

    value: float | None = None

    def __post_init__(self):
        if self.value is not None:
            v = float(self.value)
            if v == NEG_INF:
                object.__setattr__(self, "value", None)
            elif not math.isfinite(v):
                raise ValueError(f"tropical scalar must be finite or ⊥, got {self.value!r}")
            else:
                object.__setattr__(self, "value", v)

    @classmethod
    def of(cls, x) -> "TropicalScalar":
        if isinstance(x, TropicalScalar):
            return x
        return cls(parse_entry(x))

    @property
    def is_bottom(self) -> bool:
        return self.value is None

    def oplus(self, other) -> "TropicalScalar":
        return oplus(self, other)

    def otimes(self, other) -> "TropicalScalar":
        return otimes(self, other)

    def __float__(self) -> float:
        return NEG_INF if self.value is None else self.value

    # total order with ⊥ minimal
    def __lt__(self, other):
        return float(self) < float(TropicalScalar.of(other))

    def __le__(self, other):
        return float(self) <= float(TropicalScalar.of(other))

    def __gt__(self, other):
        return float(self) > float(TropicalScalar.of(other))

    def __ge__(self, other):
        return float(self) >= float(TropicalScalar.of(other))

    def __repr__(self) -> str:
        return "⊥" if self.value is None else f"{self.value:g}"

    def to_json(self):
        return format_entry(float(self))


BOTTOM = TropicalScalar(None)
ZERO = TropicalScalar(0.0)


def oplus(a, b) -> TropicalScalar:
    a, b = TropicalScalar.of(a), TropicalScalar.of(b)
    if a.is_bottom:
        return b
    if b.is_bottom:
        return a
    return a if a.value >= b.value else b


def otimes(a, b) -> TropicalScalar:
    a, b = TropicalScalar.of(a), TropicalScalar.of(b)
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    return TropicalScalar(a.value + b.value)


def parse_entry(x) -> float:
    """Read one entry of the text form.  ``"-inf"`` (or ``"⊥"``/None) is ⊥."""
    if isinstance(x, TropicalScalar):
        return float(x)
    if x is None:
        return NEG_INF
    if isinstance(x, str):
        s = x.strip()
        if s in ("-inf", "⊥", "-Infinity"):
            return NEG_INF
        v = float(s)
    elif isinstance(x, bool):
        raise ValueError("booleans are not tropical entries")
    else:
        v = float(x)
    if math.isnan(v) or v == math.inf:
        raise ValueError(f"entry must be a finite real or -inf, got {x!r}")
    return v


def format_entry(v: float):
    """Inverse of :func:`parse_entry` on canonical values."""
    v = float(v)
    if v == NEG_INF:
        return "-inf"
    if v.is_integer() and abs(v) < 2**53:
        return int(v)
    return v


def _as_array(data, ndim: int) -> np.ndarray:
    if isinstance(data, np.ndarray) and data.dtype == np.float64:
        arr = np.array(data, dtype=np.float64)
    else:
        arr = _parse_nested(data)
    if arr.ndim != ndim:
        raise DimensionError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if np.isnan(arr).any() or np.isposinf(arr).any():
        raise ValueError("entries must be finite reals or -inf")
    arr.setflags(write=False)
    return arr


def _parse_nested(data) -> np.ndarray:
    if isinstance(data, np.ndarray):
        return data.astype(np.float64)
    if isinstance(data, (list, tuple)):
        if data and isinstance(data[0], (list, tuple, np.ndarray)):
            return np.array([_parse_nested(row) for row in data], dtype=np.float64)
        return np.array([parse_entry(v) for v in data], dtype=np.float64)
    raise TypeError(f"cannot build a tropical array from {type(data).__name__}")


class TropicalVector:
    """Immutable column vector over R ∪ {⊥}."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = _as_array(data.data if isinstance(data, TropicalVector) else data, 1)
        if arr.shape[0] < 1:
            raise DimensionError("vectors need at least one coordinate")
        self.data = arr

    @classmethod
    def zeros(cls, d: int) -> "TropicalVector":
        return cls(np.zeros(d))

    @classmethod
    def ones(cls, d: int) -> "TropicalVector":
        return cls(np.ones(d))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __len__(self):
        return self.dim

    def __getitem__(self, i) -> TropicalScalar:
        return TropicalScalar(float(self.data[i]))

    def __iter__(self):
        return (TropicalScalar(float(v)) for v in self.data)

    def __eq__(self, other):
        if not isinstance(other, TropicalVector):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash(self.data.tobytes())

    def shift(self, c: float) -> "TropicalVector":
        """Tropical scaling ``x ⊗ c``: add ``c`` to every coordinate."""
        return TropicalVector(self.data + float(c))

    def restrict(self, nodes: Sequence[int]) -> "TropicalVector":
        return TropicalVector(self.data[list(nodes)])

    def to_list(self) -> list:
        return [format_entry(v) for v in self.data]

    def __repr__(self):
        return f"TropicalVector({self.to_list()})"


class TropicalMatrix:
    """Immutable dense d×d matrix over R ∪ {⊥}."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = _as_array(data.data if isinstance(data, TropicalMatrix) else data, 2)
        d, e = arr.shape
        if d != e:
            raise DimensionError(f"matrix must be square, got {arr.shape}")
        if d < 1:
            raise DimensionError("matrix needs at least one row")
        if d > MAX_DIM:
            raise DimensionError(f"dimension {d} exceeds the configured cap {MAX_DIM}")
        self.data = arr

    @classmethod
    def from_rows(cls, rows) -> "TropicalMatrix":
        return cls(rows)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, ij) -> TropicalScalar:
        return TropicalScalar(float(self.data[ij]))

    def __eq__(self, other):
        if not isinstance(other, TropicalMatrix):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash(self.data.tobytes())

    def __matmul__(self, other):
        if isinstance(other, TropicalMatrix):
            return mat_mul(self, other)
        if isinstance(other, TropicalVector):
            return mat_vec(self, other)
        return NotImplemented

    def restrict(self, rows: Sequence[int], cols: Sequence[int] | None = None) -> "TropicalMatrix":
        cols = rows if cols is None else cols
        return TropicalMatrix(self.data[np.ix_(list(rows), list(cols))])

    def to_rows(self) -> list:
        return [[format_entry(v) for v in row] for row in self.data]

    def __repr__(self):
        return f"{type(self).__name__}({self.to_rows()})"


class StructureMatrix(TropicalMatrix):
    """A {0, ⊥}-valued matrix: the finite/⊥ skeleton of some matrix."""

    __slots__ = ()

    def __init__(self, data):
        super().__init__(data)
        if not np.all((self.data == 0.0) | (self.data == NEG_INF)):
            raise ValueError("structure matrices only hold 0 and ⊥")

    @property
    def finite(self) -> np.ndarray:
        return self.data == 0.0


def identity(d: int) -> TropicalMatrix:
    e = np.full((d, d), NEG_INF)
    np.fill_diagonal(e, 0.0)
    return TropicalMatrix(e)


def _check_same_dim(a: int, b: int):
    if a != b:
        raise DimensionError(f"dimension mismatch: {a} vs {b}")


def _matvec(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.max(a + x[None, :], axis=1)


def _matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.max(a[:, :, None] + b[None, :, :], axis=1)


def mat_vec(A: TropicalMatrix, x: TropicalVector) -> TropicalVector:
    _check_same_dim(A.dim, x.dim)
    return TropicalVector(_matvec(A.data, x.data))


def mat_mul(A: TropicalMatrix, B: TropicalMatrix) -> TropicalMatrix:
    _check_same_dim(A.dim, B.dim)
    return TropicalMatrix(_matmul(A.data, B.data))


def left_product(seq: Sequence[TropicalMatrix], x0: TropicalVector) -> TropicalVector:
    """``x(n, x0) = A(n-1) ... A(0) x0`` with ``seq[k] = A(k)``."""
    x = x0.data
    for A in seq:
        _check_same_dim(A.dim, x.shape[0])
        x = _matvec(A.data, x)
    return TropicalVector(x)


def right_product(seq: Sequence[TropicalMatrix], x0: TropicalVector) -> TropicalVector:
    """``y(n, x0) = A(-1) ... A(-n) x0`` with ``seq[k] = A(-k-1)``.

    The last element of ``seq`` acts first, so this equals
    ``left_product(seq[::-1], x0)``.
    """
    x = x0.data
    for A in reversed(seq):
        _check_same_dim(A.dim, x.shape[0])
        x = _matvec(A.data, x)
    return TropicalVector(x)


def brute_force_power(seq: Sequence[TropicalMatrix]) -> TropicalMatrix:
    """Product ``seq[n-1] ... seq[0]`` by explicit maximisation over index paths.

    Entry ``(i, j)`` is the maximum over ``i_0 = j, ..., i_n = i`` of
    ``sum_l seq[l][i_{l+1}, i_l]``.  No matrix product is used, which makes
    this an independent check on :func:`mat_mul`.
    """
    n = len(seq)
    if n == 0:
        raise ValueError("brute_force_power needs at least one matrix")
    d = seq[0].dim
    for A in seq:
        _check_same_dim(A.dim, d)
    if n * d**n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"path enumeration too large: n={n}, d={d}")
    rows = [A.data.tolist() for A in seq]
    out = [[NEG_INF] * d for _ in range(d)]
    for path in itertools.product(range(d), repeat=n + 1):
        w = 0.0
        for l in range(n):
            a = rows[l][path[l + 1]][path[l]]
            if a == NEG_INF:
                w = NEG_INF
                break
            w += a
        i, j = path[-1], path[0]
        if w > out[i][j]:
            out[i][j] = w
    return TropicalMatrix(out)


def structure_of(A: TropicalMatrix) -> StructureMatrix:
    return StructureMatrix(np.where(np.isfinite(A.data), 0.0, NEG_INF))


def bottom_lines(A: TropicalMatrix | np.ndarray) -> list[int]:
    """Indices of rows made entirely of ⊥."""
    data = A.data if isinstance(A, TropicalMatrix) else np.asarray(A)
    return [int(i) for i in np.flatnonzero(~np.isfinite(data).any(axis=1))]


def has_bottom_line(A: TropicalMatrix) -> bool:
    return bool(bottom_lines(A))
