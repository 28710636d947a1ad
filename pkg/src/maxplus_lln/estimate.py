"""Exponent values with provenance, and the tie rule used to compare them."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .semiring import BOTTOM, TropicalScalar

__all__ = ["ExponentEstimate", "Tie", "compare_exponents", "TIE_FLOOR"]

CLOSED_FORM = "closed_form"
MONTE_CARLO = "monte_carlo"
TIE_FLOOR = 1e-9


@dataclass(frozen=True)
class ExponentEstimate:
    """A Lyapunov exponent: exact value, or Monte Carlo mean with standard error.

    ``point`` may be ⊥ (the exponent is -inf).  ``stderr`` is set exactly
    when ``method == "monte_carlo"``.
    """

    point: TropicalScalar
    stderr: float | None = None
    method: str = CLOSED_FORM
    horizon: int | None = None
    replicates: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "point", TropicalScalar.of(self.point))
        if self.method not in (CLOSED_FORM, MONTE_CARLO):
            raise ValueError(f"unknown method {self.method!r}")
        if (self.stderr is not None) != (self.method == MONTE_CARLO):
            raise ValueError("stderr is required for, and only for, Monte Carlo estimates")

    @classmethod
    def exact(cls, value) -> "ExponentEstimate":
        return cls(TropicalScalar.of(value))

    @classmethod
    def bottom(cls) -> "ExponentEstimate":
        return cls(BOTTOM)

    @property
    def is_exact(self) -> bool:
        return self.method == CLOSED_FORM

    @property
    def value(self) -> float:
        return float(self.point)

    @property
    def sigma(self) -> float:
        return 0.0 if self.stderr is None else self.stderr

    def to_dict(self) -> dict:
        return {
            "point": self.point.to_json(),
            "stderr": self.stderr,
            "method": self.method,
            "horizon": self.horizon,
            "replicates": self.replicates,
        }

    def __repr__(self):
        if self.is_exact:
            return f"ExponentEstimate({self.point!r}, exact)"
        return f"ExponentEstimate({self.point!r} ± {self.stderr:.3g}, n={self.horizon}, R={self.replicates})"


@dataclass(frozen=True)
class Tie:
    equal: bool
    used_slack: bool
    tolerance: float
    difference: float


def compare_exponents(a: ExponentEstimate, b: ExponentEstimate) -> Tie:
    """Decide whether two exponents are equal.

    Two closed forms are compared exactly.  Otherwise the tolerance is
    ``max(1e-9, 3 SE_a + 3 SE_b)``; ``used_slack`` marks a tie granted to
    values that are not exactly equal.  ⊥ only ties with ⊥.
    """
    va, vb = a.value, b.value
    if a.point.is_bottom or b.point.is_bottom:
        both = a.point.is_bottom and b.point.is_bottom
        return Tie(both, False, 0.0, 0.0 if both else math.inf)
    diff = abs(va - vb)
    if a.is_exact and b.is_exact:
        return Tie(va == vb, False, 0.0, diff)
    tol = max(TIE_FLOOR, 3.0 * a.sigma + 3.0 * b.sigma)
    equal = diff <= tol
    return Tie(equal, equal and diff > 0.0, tol, diff)
