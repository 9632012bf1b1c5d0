"""Randomized subset-release mechanisms and their exact output distributions.

A mechanism perturbs a secret size-d subset e of {0, ..., n-1} under a
distortion budget beta.  The shipped families:

* ``a1sphere`` -- uniform over the subsets at distance exactly beta;
* ``a1ball``   -- uniform over the subsets at distance at most beta,
  center included;
* ``a2``       -- e | B for B uniform over all C(n, beta) size-beta
  subsets of the ground set (B may overlap e, so the output can equal e);
* ``identity`` and ``uniform`` -- the no-noise and all-noise baselines;
* ``clamp`` / ``resize`` -- wrappers that post-process any mechanism:
  clamp returns the input itself whenever the inner output strays beyond
  beta (forcing the accuracy failure rate to zero), resize restores output
  size exactly d by uniformly deleting excess or adding missing elements,
  never increasing the distance to the input.

The sphere and ball readings are deliberately both first-class: they look
interchangeable, but their audited leakage differs (the ball variant meets
the (d-beta)(n-d-beta)/(d(n-d)) level while the sphere variant strictly
exceeds it; see the acceptance suite).

Every mechanism exposes ``sample`` (explicit rng, exactly uniform draws)
and an exact output distribution with ``fractions.Fraction`` weights that
sum to exactly 1.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from fractions import Fraction
from math import comb
from random import Random
from typing import Callable, Hashable, Iterator, Mapping

from .combinatorics import (
    Subset,
    ball_size,
    combination_unrank,
    distance,
    enumerate_ball,
    enumerate_sphere,
    enumerate_subsets,
    sample_at_distance,
    sample_uniform_subset,
    sphere_size,
    subset_count,
)

DEFAULT_OUTCOME_CAP = 10**6

ONE = Fraction(1)


class CapExceededError(RuntimeError):
    """An exact enumeration would exceed its configured cap."""

    def __init__(self, message: str, cap_flag: str = "--outcome-cap"):
        super().__init__(message)
        self.cap_flag = cap_flag


class OutputDistribution:
    """Exact probability distribution over hashable outcomes.

    Probabilities are ``fractions.Fraction`` and must be nonnegative and
    sum to exactly 1 -- no tolerances anywhere.
    """

    __slots__ = ("_probs",)

    def __init__(self, probs: Mapping[Hashable, Fraction], validate: bool = True):
        self._probs = {s: Fraction(p) for s, p in probs.items() if p != 0}
        if validate:
            self.validate()

    def validate(self) -> None:
        if any(p < 0 for p in self._probs.values()):
            raise ValueError("negative probability")
        total = sum(self._probs.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @classmethod
    def from_counts(cls, counts: Mapping[Hashable, int], denominator: int) -> "OutputDistribution":
        """Build from integer multiplicities over a common denominator."""
        if sum(counts.values()) != denominator:
            raise ValueError("counts do not sum to the denominator")
        return cls({s: Fraction(c, denominator) for s, c in counts.items()}, validate=False)

    def get(self, outcome: Hashable, default: Fraction = Fraction(0)) -> Fraction:
        return self._probs.get(outcome, default)

    def __getitem__(self, outcome: Hashable) -> Fraction:
        return self._probs[outcome]

    def __contains__(self, outcome: Hashable) -> bool:
        return outcome in self._probs

    def __len__(self) -> int:
        return len(self._probs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OutputDistribution):
            return NotImplemented
        return self._probs == other._probs

    __hash__ = None  # type: ignore[assignment]

    def items(self):
        return self._probs.items()

    def support(self):
        return self._probs.keys()

    def total(self) -> Fraction:
        return sum(self._probs.values(), Fraction(0))

    def map(self, fn: Callable[[Hashable], Hashable]) -> "OutputDistribution":
        """Pushforward through ``fn`` (masses of merged outcomes add up)."""
        out: dict[Hashable, Fraction] = {}
        for s, p in self._probs.items():
            t = fn(s)
            out[t] = out.get(t, Fraction(0)) + p
        return OutputDistribution(out, validate=False)


def accumulate_distribution(
    weights: Iterator[tuple[Hashable, Fraction]], cap: int = DEFAULT_OUTCOME_CAP
) -> OutputDistribution:
    """Sum (outcome, weight) terms into a distribution, guarding the cap.

    The cap bounds both the number of enumerated terms and the support
    size, so pathological parameter choices fail fast instead of grinding.
    """
    probs: dict[Hashable, Fraction] = {}
    for steps, (s, p) in enumerate(weights, start=1):
        if steps > cap:
            raise CapExceededError(
                f"exact enumeration exceeds the outcome cap ({cap}); raise --outcome-cap"
            )
        probs[s] = probs.get(s, Fraction(0)) + p
    return OutputDistribution(probs)


class Mechanism(ABC):
    """A randomized map from a size-d input subset to an output subset.

    Subclasses provide exactly-uniform sampling and the exact output
    distribution.  ``vertex_transitive`` declares that relabeling the
    ground set commutes with the mechanism, which lets audits check a
    single canonical input/pair; unknown mechanisms must leave it False.
    """

    kind: str = "abstract"
    vertex_transitive: bool = False

    def __init__(self, n: int, d: int, beta: int):
        if not 0 < d < n:
            raise ValueError(f"need 0 < d < n, got d={d}, n={n}")
        if beta < 1:
            raise ValueError(f"need beta >= 1, got {beta}")
        self.n = n
        self.d = d
        self.beta = beta

    def _check_input(self, e: Subset) -> None:
        if e.n != self.n:
            raise ValueError(f"input over ground set of size {e.n}, mechanism uses {self.n}")
        if len(e) != self.d:
            raise ValueError(f"input size {len(e)} != d={self.d}")

    @abstractmethod
    def sample(self, e: Subset, rng: Random) -> Subset:
        """One draw from the output distribution at input ``e``."""

    @abstractmethod
    def outcome_weights(self, e: Subset) -> Iterator[tuple[Subset, Fraction]]:
        """Exact (outcome, weight) terms; outcomes may repeat."""

    def output_distribution(self, e: Subset, cap: int = DEFAULT_OUTCOME_CAP) -> OutputDistribution:
        self._check_input(e)
        return accumulate_distribution(self.outcome_weights(e), cap=cap)

    def to_json(self) -> dict:
        return {"kind": self.kind, "n": self.n, "d": self.d, "beta": self.beta}

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, d={self.d}, beta={self.beta})"


def sphere_release(e: Subset, beta: int, rng: Random) -> Subset:
    """Uniform over the subsets at distance exactly beta from ``e``."""
    return sample_at_distance(e, beta, rng)


def ball_release(e: Subset, beta: int, rng: Random) -> Subset:
    """Uniform over the subsets at distance at most beta from ``e``.

    Draws the radius with probability proportional to the sphere size,
    then a uniform point of that sphere.
    """
    n, d = e.n, len(e)
    sizes = [sphere_size(n, d, alpha) for alpha in range(beta + 1)]
    r = rng.randrange(sum(sizes))
    for alpha, size in enumerate(sizes):
        if r < size:
            return sample_at_distance(e, alpha, rng)
        r -= size
    raise AssertionError("unreachable")


def union_release(e: Subset, beta: int, rng: Random) -> Subset:
    """e | B for B uniform over all size-beta subsets of the ground set."""
    return e | sample_uniform_subset(e.n, beta, rng)


class SphereMechanism(Mechanism):
    """Uniform release over the distance-beta sphere."""

    kind = "a1sphere"
    vertex_transitive = True

    def __init__(self, n: int, d: int, beta: int):
        super().__init__(n, d, beta)
        if beta > min(d, n - d):
            raise ValueError(f"sphere is empty: beta={beta} > min(d, n-d)={min(d, n - d)}")

    def sample(self, e: Subset, rng: Random) -> Subset:
        self._check_input(e)
        return sphere_release(e, self.beta, rng)

    def outcome_weights(self, e: Subset) -> Iterator[tuple[Subset, Fraction]]:
        p = Fraction(1, sphere_size(self.n, self.d, self.beta))
        for s in enumerate_sphere(e, self.beta):
            yield s, p


class BallMechanism(Mechanism):
    """Uniform release over the distance-beta ball, center included."""

    kind = "a1ball"
    vertex_transitive = True

    def __init__(self, n: int, d: int, beta: int):
        super().__init__(n, d, beta)
        if beta > min(d, n - d):
            raise ValueError(f"ball radius too large: beta={beta} > min(d, n-d)={min(d, n - d)}")

    def sample(self, e: Subset, rng: Random) -> Subset:
        self._check_input(e)
        return ball_release(e, self.beta, rng)

    def outcome_weights(self, e: Subset) -> Iterator[tuple[Subset, Fraction]]:
        p = Fraction(1, ball_size(self.n, self.d, self.beta))
        for s in enumerate_ball(e, self.beta):
            yield s, p


class UnionMechanism(Mechanism):
    """Release e | B with input-independent uniform size-beta noise B.

    B is drawn from all of the ground set, so it may land inside e; the
    output size is d + |B \\ e|, between d and d + beta.
    """

    kind = "a2"
    vertex_transitive = True

    def __init__(self, n: int, d: int, beta: int):
        super().__init__(n, d, beta)
        if beta > n:
            raise ValueError(f"noise size beta={beta} exceeds ground set n={n}")

    def sample(self, e: Subset, rng: Random) -> Subset:
        self._check_input(e)
        return union_release(e, self.beta, rng)

    def outcome_weights(self, e: Subset) -> Iterator[tuple[Subset, Fraction]]:
        p = Fraction(1, comb(self.n, self.beta))
        for b_items in itertools.combinations(range(self.n), self.beta):
            yield e | Subset(self.n, b_items), p

    def size_marginal(self, alpha: int) -> Fraction:
        """Probability that the output has size d + alpha:
        C(d, beta-alpha) * C(n-d, alpha) / C(n, beta)."""
        if not 0 <= alpha <= self.beta:
            return Fraction(0)
        num = comb(self.d, self.beta - alpha) * comb(self.n - self.d, alpha)
        return Fraction(num, comb(self.n, self.beta))


class IdentityMechanism(Mechanism):
    """Point mass on the input; the no-privacy baseline."""

    kind = "identity"
    vertex_transitive = True

    def sample(self, e: Subset, rng: Random) -> Subset:
        self._check_input(e)
        return e

    def outcome_weights(self, e: Subset) -> Iterator[tuple[Subset, Fraction]]:
        yield e, ONE


class UniformMechanism(Mechanism):
    """Uniform over all C(n, d) size-d subsets; the no-accuracy baseline."""

    kind = "uniform"
    vertex_transitive = True

    def sample(self, e: Subset, rng: Random) -> Subset:
        self._check_input(e)
        return sample_uniform_subset(self.n, self.d, rng)

    def outcome_weights(self, e: Subset) -> Iterator[tuple[Subset, Fraction]]:
        p = Fraction(1, subset_count(self.n, self.d))
        for s in enumerate_subsets(self.n, self.d):
            yield s, p


class _WrappedMechanism(Mechanism):
    def __init__(self, inner: Mechanism):
        super().__init__(inner.n, inner.d, inner.beta)
        self.inner = inner

    @property
    def vertex_transitive(self) -> bool:  # type: ignore[override]
        # relabeling the ground set commutes with clamp/resize
        return self.inner.vertex_transitive

    def to_json(self) -> dict:
        data = super().to_json()
        data["inner"] = self.inner.to_json()
        return data

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.inner!r})"


class ClampedMechanism(_WrappedMechanism):
    """Return the inner output if it stays within distance beta, else the input.

    The clamped mechanism never fails the accuracy condition, so its
    audited failure rate is exactly zero.
    """

    kind = "clamp"

    def sample(self, e: Subset, rng: Random) -> Subset:
        self._check_input(e)
        s = self.inner.sample(e, rng)
        return s if distance(s, e) <= self.beta else e

    def outcome_weights(self, e: Subset) -> Iterator[tuple[Subset, Fraction]]:
        for s, p in self.inner.outcome_weights(e):
            yield (s if distance(s, e) <= self.beta else e), p


def resize_outcomes(s: Subset, d: int) -> Iterator[tuple[Subset, Fraction]]:
    """Exact distribution of resizing ``s`` to size d.

    Oversized inputs lose a uniform choice of excess elements; undersized
    ones gain a uniform choice from the complement.  Either way the result
    is never farther from any reference subset than ``s`` was.
    """
    k = len(s)
    if k == d:
        yield s, ONE
        return
    if k > d:
        p = Fraction(1, comb(k, k - d))
        for drop in itertools.combinations(s.items, k - d):
            yield s - Subset(s.n, drop), p
    else:
        comp = s.complement()
        p = Fraction(1, comb(s.n - k, d - k))
        for add in itertools.combinations(comp.items, d - k):
            yield s | Subset(s.n, add), p


def resize_sample(s: Subset, d: int, rng: Random) -> Subset:
    """One draw from ``resize_outcomes(s, d)``."""
    k = len(s)
    if k == d:
        return s
    if k > d:
        pos = combination_unrank(rng.randrange(comb(k, k - d)), k - d)
        return s - Subset(s.n, tuple(s.items[i] for i in pos))
    comp = s.complement()
    pos = combination_unrank(rng.randrange(comb(s.n - k, d - k)), d - k)
    return s | Subset(s.n, tuple(comp.items[i] for i in pos))


class ResizedMechanism(_WrappedMechanism):
    """Force the inner output to size exactly d by uniform deletion/addition."""

    kind = "resize"

    def sample(self, e: Subset, rng: Random) -> Subset:
        self._check_input(e)
        return resize_sample(self.inner.sample(e, rng), self.d, rng)

    def outcome_weights(self, e: Subset) -> Iterator[tuple[Subset, Fraction]]:
        for s, p in self.inner.outcome_weights(e):
            for r, w in resize_outcomes(s, self.d):
                yield r, p * w


def clamp_to_accuracy(m: Mechanism) -> Mechanism:
    """Wrap ``m`` so that outputs beyond distance beta collapse to the input."""
    return ClampedMechanism(m)


def resize_to_d(m: Mechanism) -> Mechanism:
    """Wrap ``m`` so that outputs are resized to exactly d elements."""
    return ResizedMechanism(m)


def exact_output_distribution(
    m: Mechanism, e: Subset, cap: int = DEFAULT_OUTCOME_CAP
) -> OutputDistribution:
    """Materialize the exact output distribution of ``m`` at input ``e``."""
    return m.output_distribution(e, cap=cap)


BASE_MECHANISMS: dict[str, type[Mechanism]] = {
    cls.kind: cls
    for cls in (SphereMechanism, BallMechanism, UnionMechanism, IdentityMechanism, UniformMechanism)
}

_WRAPPERS: dict[str, type[_WrappedMechanism]] = {
    ClampedMechanism.kind: ClampedMechanism,
    ResizedMechanism.kind: ResizedMechanism,
}


def make_mechanism(kind: str, n: int, d: int, beta: int) -> Mechanism:
    """Construct a base mechanism from its wire name.

    The wrapper kinds (clamp, resize) need an inner mechanism and are
    built from JSON descriptors via ``mechanism_from_json``.
    """
    try:
        cls = BASE_MECHANISMS[kind]
    except KeyError:
        raise ValueError(
            f"unknown mechanism kind {kind!r}; expected one of {sorted(BASE_MECHANISMS)}"
        ) from None
    return cls(n, d, beta)


def mechanism_from_json(data: Mapping) -> Mechanism:
    """Rebuild a mechanism from its JSON descriptor {kind, n, d, beta, inner?}."""
    kind = data["kind"]
    if kind in _WRAPPERS:
        return _WRAPPERS[kind](mechanism_from_json(data["inner"]))
    return make_mechanism(kind, int(data["n"]), int(data["d"]), int(data["beta"]))
