"""Exact privacy and accuracy audits by brute-force enumeration.

For an ordered pair of neighboring inputs with output laws p and q, the
smallest additive slack delta such that

    p(S) <= t * q(S) + delta        for every event S

is attained by the event that collects exactly the outcomes with positive
margin.  The auditor therefore never enumerates events; it computes the
positive-part sum directly:

    delta*(p, q, t) = sum_s max(0, p(s) - t * q(s)).

The tight leakage of a mechanism is the maximum of delta* over all
ordered pairs of inputs at distance 1.  The multiplier t plays the role
of e^eps2 and is taken as an exact rational; converting an eps2 into a t
is the caller's (CLI's) business, which keeps this module free of
transcendental arithmetic: with rational t every audited value is an
exact ``fractions.Fraction`` and all comparisons downstream are
tolerance-free.

Mechanisms shipped by this package commute with relabelings of the ground
set, so their per-pair delta* is pair-independent.  The default fast path
audits one canonical pair and cross-checks a fixed sample of ten random
pairs; any disagreement escalates to the full scan, and mechanisms that
do not declare the symmetry get the full scan from the start.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Callable, Hashable

from .combinatorics import (
    Subset,
    distance,
    enumerate_sphere,
    enumerate_subsets,
    sample_uniform_subset,
    subset_count,
)
from .grouptesting import (
    NoiseSpec,
    PoolingDesign,
    decoded_distribution_exact,
    syndrome_distribution_exact,
)
from .mechanisms import CapExceededError, Mechanism, OutputDistribution

DEFAULT_OUTCOME_CAP = 10**6
DEFAULT_PAIR_CAP = 10**4
_VERIFY_PAIRS = 10
_VERIFY_SEED = 271828  # fixed so audits are bit-reproducible across runs

DistOf = Callable[[Subset], OutputDistribution]


@dataclass(frozen=True)
class AuditReport:
    """Tight leakage for the worst neighbor pair."""

    delta_star: Fraction
    worst_pair: tuple[Subset, Subset]
    pairs_scanned: int

    def to_json(self) -> dict:
        return {
            "delta_star": f"{self.delta_star.numerator}/{self.delta_star.denominator}",
            "delta_star_decimal": float(self.delta_star),
            "worst_pair": [self.worst_pair[0].to_json(), self.worst_pair[1].to_json()],
            "pairs_scanned": self.pairs_scanned,
        }


@dataclass(frozen=True)
class AccuracyReport:
    """Exact worst-case accuracy failure probability."""

    eps1_exact: Fraction
    worst_input: Subset
    inputs_scanned: int

    def to_json(self) -> dict:
        return {
            "eps1": f"{self.eps1_exact.numerator}/{self.eps1_exact.denominator}",
            "eps1_decimal": float(self.eps1_exact),
            "worst_input": self.worst_input.to_json(),
            "inputs_scanned": self.inputs_scanned,
        }


@dataclass(frozen=True)
class McDeltaReport:
    """Plug-in Monte-Carlo estimate of a single pair's delta*."""

    estimate: float
    samples: int
    t: float
    pair: tuple[Subset, Subset]
    note: str = "plug-in estimate; biased upward at small sample counts"

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "samples": self.samples,
            "t": self.t,
            "pair": [self.pair[0].to_json(), self.pair[1].to_json()],
            "note": self.note,
        }


def delta_star(p: OutputDistribution, q: OutputDistribution, t: Fraction | int = 1) -> Fraction:
    """Smallest delta with p(S) <= t*q(S) + delta over all events S.

    Computed as the positive-part sum over the support of p (an outcome
    outside supp(p) can never contribute a positive margin for t >= 1).
    Exact whenever t is rational.
    """
    t = Fraction(t)
    if t < 1:
        raise ValueError(f"need multiplier t >= 1, got {t}")
    total = Fraction(0)
    for s, ps in p.items():
        margin = ps - t * q.get(s)
        if margin > 0:
            total += margin
    return total


def canonical_pair(n: int, d: int) -> tuple[Subset, Subset]:
    """The reference neighbor pair {0..d-1} and {0..d-2, d}."""
    if not 0 < d < n:
        raise ValueError(f"need 0 < d < n, got d={d}, n={n}")
    e_i = Subset(n, tuple(range(d)))
    e_j = Subset(n, tuple(range(d - 1)) + (d,))
    return e_i, e_j


def random_neighbor_pair(n: int, d: int, rng: Random) -> tuple[Subset, Subset]:
    """A uniformly random input and a uniformly random neighbor of it."""
    e_i = sample_uniform_subset(n, d, rng)
    drop = e_i.items[rng.randrange(d)]
    comp = e_i.complement().items
    add = comp[rng.randrange(n - d)]
    e_j = (e_i - Subset(n, (drop,))) | Subset(n, (add,))
    return e_i, e_j


def neighbor_pairs(n: int, d: int):
    """All ordered pairs of size-d subsets at distance 1."""
    for e_i in enumerate_subsets(n, d):
        for e_j in enumerate_sphere(e_i, 1):
            yield e_i, e_j


def _resolve_mode(pairs: str, symmetric: bool) -> str:
    if pairs not in ("auto", "fast", "full"):
        raise ValueError(f"pairs must be 'auto', 'fast' or 'full', got {pairs!r}")
    if pairs == "auto":
        return "fast" if symmetric else "full"
    return pairs


def _audit_pairs(
    dist_of: DistOf,
    n: int,
    d: int,
    t: Fraction,
    mode: str,
    pair_cap: int,
) -> AuditReport:
    cache: dict[Subset, OutputDistribution] = {}

    def dist(e: Subset) -> OutputDistribution:
        if e not in cache:
            cache[e] = dist_of(e)
        return cache[e]

    def pair_delta(pair: tuple[Subset, Subset]) -> Fraction:
        return delta_star(dist(pair[0]), dist(pair[1]), t)

    if mode == "fast":
        pair = canonical_pair(n, d)
        value = pair_delta(pair)
        rng = Random(_VERIFY_SEED)
        scanned = 1
        for _ in range(_VERIFY_PAIRS):
            probe = random_neighbor_pair(n, d, rng)
            scanned += 1
            if pair_delta(probe) != value:
                # claimed symmetry does not hold: fall back to the full scan
                return _audit_pairs(dist_of, n, d, t, "full", pair_cap)
        return AuditReport(value, pair, scanned)

    total_pairs = subset_count(n, d) * d * (n - d)
    if total_pairs > pair_cap:
        raise CapExceededError(
            f"full scan needs {total_pairs} neighbor pairs, over the cap ({pair_cap}); "
            "raise --pair-cap",
            cap_flag="--pair-cap",
        )
    best: Fraction | None = None
    worst_pair: tuple[Subset, Subset] | None = None
    scanned = 0
    for pair in neighbor_pairs(n, d):
        scanned += 1
        value = pair_delta(pair)
        if best is None or value > best:
            best, worst_pair = value, pair
    assert best is not None and worst_pair is not None
    return AuditReport(best, worst_pair, scanned)


def audit_privacy(
    m: Mechanism,
    t: Fraction | int = 1,
    pairs: str = "auto",
    outcome_cap: int = DEFAULT_OUTCOME_CAP,
    pair_cap: int = DEFAULT_PAIR_CAP,
) -> AuditReport:
    """Maximum delta* over all ordered neighbor pairs of inputs.

    ``pairs`` selects the scan: "fast" audits the canonical pair and
    verifies ten random pairs agree, "full" scans every ordered pair,
    "auto" picks "fast" only for mechanisms declaring vertex transitivity.
    """
    t = Fraction(t)
    if t < 1:
        raise ValueError(f"need multiplier t >= 1, got {t}")
    mode = _resolve_mode(pairs, m.vertex_transitive)
    return _audit_pairs(
        lambda e: m.output_distribution(e, cap=outcome_cap), m.n, m.d, t, mode, pair_cap
    )


def _audit_inputs(
    dist_of: DistOf,
    n: int,
    d: int,
    beta: int,
    mode: str,
    input_cap: int,
) -> AccuracyReport:
    def failure(e: Subset) -> Fraction:
        return sum(
            (p for s, p in dist_of(e).items() if distance(s, e) > beta), Fraction(0)
        )

    if mode == "fast":
        e = Subset(n, tuple(range(d)))
        value = failure(e)
        rng = Random(_VERIFY_SEED)
        scanned = 1
        for _ in range(_VERIFY_PAIRS):
            probe = sample_uniform_subset(n, d, rng)
            scanned += 1
            if failure(probe) != value:
                return _audit_inputs(dist_of, n, d, beta, "full", input_cap)
        return AccuracyReport(value, e, scanned)

    total = subset_count(n, d)
    if total > input_cap:
        raise CapExceededError(
            f"full scan needs {total} inputs, over the cap ({input_cap}); raise --pair-cap",
            cap_flag="--pair-cap",
        )
    best: Fraction | None = None
    worst: Subset | None = None
    scanned = 0
    for e in enumerate_subsets(n, d):
        scanned += 1
        value = failure(e)
        if best is None or value > best:
            best, worst = value, e
    assert best is not None and worst is not None
    return AccuracyReport(best, worst, scanned)


def audit_accuracy(
    m: Mechanism,
    beta: int | None = None,
    inputs: str = "auto",
    outcome_cap: int = DEFAULT_OUTCOME_CAP,
    input_cap: int = DEFAULT_PAIR_CAP,
) -> AccuracyReport:
    """Exact max over inputs e of Pr[distance(output, e) > beta].

    ``beta`` defaults to the mechanism's own distortion budget.
    """
    radius = m.beta if beta is None else beta
    mode = _resolve_mode(inputs, m.vertex_transitive)
    return _audit_inputs(
        lambda e: m.output_distribution(e, cap=outcome_cap), m.n, m.d, radius, mode, input_cap
    )


def mc_estimate_delta(
    m: Mechanism,
    pair: tuple[Subset, Subset],
    t: float = 1.0,
    samples: int = 10**5,
    rng: Random | None = None,
) -> McDeltaReport:
    """Plug-in Monte-Carlo estimate of one pair's delta*.

    Draws ``samples`` outputs at each input, forms the two empirical
    distributions, and applies the positive-part sum.  The positive part
    is convex, so sampling noise inflates the estimate on average: the
    plug-in is biased upward at small sample counts.
    """
    if samples < 1:
        raise ValueError(f"need samples >= 1, got {samples}")
    if t < 1:
        raise ValueError(f"need multiplier t >= 1, got {t}")
    if rng is None:
        raise ValueError("an explicit rng is required for reproducibility")
    e_i, e_j = pair
    counts_i: Counter[Hashable] = Counter(m.sample(e_i, rng) for _ in range(samples))
    counts_j: Counter[Hashable] = Counter(m.sample(e_j, rng) for _ in range(samples))
    estimate = sum(
        max(0.0, c / samples - t * counts_j.get(s, 0) / samples) for s, c in counts_i.items()
    )
    return McDeltaReport(estimate, samples, float(t), pair)


def audit_testing_privacy(
    design: PoolingDesign,
    noise: NoiseSpec,
    n: int,
    d: int,
    t: Fraction | int = 1,
    pairs: str = "auto",
    outcome_cap: int = DEFAULT_OUTCOME_CAP,
    pair_cap: int = DEFAULT_PAIR_CAP,
) -> AuditReport:
    """Maximum delta* between neighbor syndrome distributions.

    The identity design with the shipped noise families commutes with
    relabelings, so "auto" takes the fast path there; any other design
    gets the full scan.
    """
    t = Fraction(t)
    if t < 1:
        raise ValueError(f"need multiplier t >= 1, got {t}")
    mode = _resolve_mode(pairs, design.is_identity)
    return _audit_pairs(
        lambda e: syndrome_distribution_exact(design, e, noise, cap=outcome_cap),
        n, d, t, mode, pair_cap,
    )


def audit_testing_accuracy(
    design: PoolingDesign,
    noise: NoiseSpec,
    n: int,
    d: int,
    beta: int,
    inputs: str = "auto",
    outcome_cap: int = DEFAULT_OUTCOME_CAP,
    input_cap: int = DEFAULT_PAIR_CAP,
) -> AccuracyReport:
    """Exact max over inputs of Pr[distance(decoded, e) > beta] for the
    full test-then-decode pipeline."""
    mode = _resolve_mode(inputs, design.is_identity)
    return _audit_inputs(
        lambda e: decoded_distribution_exact(design, e, noise, cap=outcome_cap),
        n, d, beta, mode, input_cap,
    )
