"""Closed-form leakage bounds for subset release and pooled testing.

Each evaluator returns a ``BoundReport`` carrying the raw value (which may
be negative for lower bounds), a regime flag stating whether the bound's
stated precondition holds at these parameters, and a short note.  Bounds
never error outside their regime -- sweep tooling wants to chart the
regime boundaries, and silent errors would hide them.

Exactness: with eps1 = eps2 = 0 every value is a ``fractions.Fraction``
and downstream comparisons against audited values are exact.  For
eps2 > 0 the factor e^eps2 is computed in double precision and the value
degrades to float; callers comparing against exact audits should allow a
1e-12 slack in that regime only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class PrivacyParams:
    """Problem parameters: ground set n, secret size d, distortion beta,
    accuracy slack eps1, multiplicative privacy slack eps2, leakage delta."""

    n: int
    d: int
    beta: int
    eps1: float = 0.0
    eps2: float = 0.0
    delta: float = 0.0

    def __post_init__(self) -> None:
        if not 0 < self.d < self.n:
            raise ValueError(f"need 0 < d < n, got d={self.d}, n={self.n}")
        if self.beta < 1:
            raise ValueError(f"need beta >= 1, got {self.beta}")
        if not 0 <= self.eps1 <= 1:
            raise ValueError(f"need eps1 in [0, 1], got {self.eps1}")
        if self.eps2 < 0:
            raise ValueError(f"need eps2 >= 0, got {self.eps2}")
        if not 0 <= self.delta <= 1:
            raise ValueError(f"need delta in [0, 1], got {self.delta}")


@dataclass(frozen=True)
class BoundReport:
    """A bound value plus the regime status of its precondition.

    ``value`` is raw (lower bounds may go negative); ``clipped`` is the
    reporting value, floored at zero.
    """

    value: Fraction | float
    regime_ok: bool
    regime_note: str

    @property
    def clipped(self) -> Fraction | float:
        return max(self.value, 0 * self.value)

    def to_json(self) -> dict:
        out: dict = {
            "value": float(self.value),
            "clipped": float(self.clipped),
            "regime_ok": self.regime_ok,
            "regime_note": self.regime_note,
        }
        if isinstance(self.value, Fraction):
            out["fraction"] = f"{self.value.numerator}/{self.value.denominator}"
        return out


def _check_nd(n: int, d: int) -> None:
    if not 0 < d < n:
        raise ValueError(f"need 0 < d < n, got d={d}, n={n}")


def _eps_terms(eps1: float, eps2: float) -> Fraction | float:
    # e^eps2 is the only transcendental ingredient: the result stays an
    # exact Fraction whenever eps2 == 0 and degrades to float otherwise
    if eps2 == 0:
        return 2 * Fraction(eps1)
    return 2.0 * eps1 + (math.exp(eps2) - 1.0)


def lower_bound_any(n: int, d: int, beta: int, eps1: float = 0.0, eps2: float = 0.0) -> BoundReport:
    """Leakage floor for ANY release mechanism:
    ((d-beta)(n-d-beta) - beta^2) / (d(n-d)) - 2*eps1 - (e^eps2 - 1).

    Valid whenever beta^2 <= n; reported raw (may be negative).
    """
    _check_nd(n, d)
    base = Fraction((d - beta) * (n - d - beta) - beta * beta, d * (n - d))
    regime_ok = beta * beta <= n
    note = "" if regime_ok else f"requires beta^2 <= n (got {beta * beta} > {n})"
    return BoundReport(base - _eps_terms(eps1, eps2), regime_ok, note)


def upper_bound_sphere(n: int, d: int, beta: int) -> BoundReport:
    """Leakage level claimed for the sphere release:
    (d-beta)(n-d-beta) / (d(n-d)) = (1 - beta/d)(1 - beta/(n-d)).

    The exact audit shows the ball variant attains this while the sphere
    variant itself can exceed it.
    """
    _check_nd(n, d)
    if not 1 <= beta <= min(d, n - d):
        raise ValueError(f"need 1 <= beta <= min(d, n-d), got beta={beta}")
    value = Fraction((d - beta) * (n - d - beta), d * (n - d))
    return BoundReport(value, True, "")


def lower_bound_independent(n: int, d: int, beta: int, eps2: float = 0.0) -> BoundReport:
    """Leakage floor for mechanisms whose noise is drawn independently of
    the input (output = input | noise): 1 - beta/(n-d) - (e^eps2 - 1).

    Valid for d + beta < n.
    """
    _check_nd(n, d)
    value = Fraction(1) - Fraction(beta, n - d) - _eps_terms(0.0, eps2)
    regime_ok = d + beta < n
    note = "" if regime_ok else f"requires d + beta < n (got {d + beta} >= {n})"
    return BoundReport(value, regime_ok, note)


def upper_bound_union(n: int, d: int, beta: int) -> BoundReport:
    """Leakage level attained by the union release: 1 - (beta-1)/(n-d).

    Guaranteed in the 2*d*beta^2 < n regime.
    """
    _check_nd(n, d)
    value = Fraction(1) - Fraction(beta - 1, n - d)
    regime_ok = 2 * d * beta * beta < n
    note = "" if regime_ok else f"requires 2*d*beta^2 < n (got {2 * d * beta * beta} >= {n})"
    return BoundReport(value, regime_ok, note)


def gt_lower_bound(n: int, d: int, beta: int, eps1: float = 0.0, eps2: float = 0.0) -> BoundReport:
    """Pooled-testing alias: any testing function obeys the same floor as
    any release mechanism.  Delegates to ``lower_bound_any``."""
    return lower_bound_any(n, d, beta, eps1, eps2)


def gt_upper_bound(n: int, d: int, beta: int) -> BoundReport:
    """Pooled-testing alias: contaminate-then-pool attains the union
    release's level.  Delegates to ``upper_bound_union``."""
    return upper_bound_union(n, d, beta)


def evaluate_all(
    n: int, d: int, beta: int, eps1: float = 0.0, eps2: float = 0.0
) -> dict[str, BoundReport | None]:
    """The four bounds at one parameter point, keyed by evaluator name.

    ``upper_sphere`` is None when beta exceeds min(d, n-d), where the
    sphere release is undefined.
    """
    return {
        "lower_any": lower_bound_any(n, d, beta, eps1, eps2),
        "upper_sphere": upper_bound_sphere(n, d, beta) if 1 <= beta <= min(d, n - d) else None,
        "lower_independent": lower_bound_independent(n, d, beta, eps2),
        "upper_union": upper_bound_union(n, d, beta),
    }
