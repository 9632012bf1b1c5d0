"""Pooled testing: designs, noisy testing functions, decoding, simulation.

A pooling design is an ordered list of pools T_1..T_L over the ground set;
testing a secret subset e produces the L-bit syndrome whose bit i says
whether pool i intersects the tested material.  Three testing variants:

* noiseless          -- bit i = 1 iff T_i & e is nonempty;
* noise before pooling -- a contamination set B, drawn independently of e,
  is merged in first: bit i = 1 iff T_i & (e | B) is nonempty;
* noise after pooling  -- a per-pool overwrite code u_i in {0, 1, 2}
  forces the bit to 0, forces it to 1, or passes the noiseless bit
  through.

Before-noise embeds into after-noise: overwrite pool i with a forced 1
exactly when it meets B, pass it through otherwise.  The coupling is
bit-exact per realization, not just in distribution.

The decoder never sees the noise realization, only the design and the
noise type.  The shipped decoder is the standard eliminator: an item is
cleared iff it appears in some negative pool, and everything not cleared
is returned.  On an identity design (one singleton pool per item) this
reconstructs the tested material exactly, so the before-noise pipeline
returns e | B.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, lcm
from random import Random
from typing import Iterator, Union

from .combinatorics import Subset, distance, sample_uniform_subset
from .mechanisms import CapExceededError, OutputDistribution, accumulate_distribution

DEFAULT_OUTCOME_CAP = 10**6


@dataclass(frozen=True)
class PoolingDesign:
    """An ordered list of pools over {0, ..., n-1}.

    Pools may repeat or be empty; an empty pool always tests negative.
    """

    n: int
    pools: tuple[Subset, ...]

    def __post_init__(self) -> None:
        if len(self.pools) < 1:
            raise ValueError("a design needs at least one pool")
        for pool in self.pools:
            if pool.n != self.n:
                raise ValueError("pool ground-set size differs from the design's")

    @property
    def num_tests(self) -> int:
        return len(self.pools)

    @property
    def is_identity(self) -> bool:
        return self.num_tests == self.n and all(
            pool.mask == 1 << i for i, pool in enumerate(self.pools)
        )

    def to_json(self) -> dict:
        return {"n": self.n, "pools": [pool.to_json() for pool in self.pools]}

    @classmethod
    def from_json(cls, data: dict) -> "PoolingDesign":
        n = int(data["n"])
        return cls(n, tuple(Subset.from_json(n, p) for p in data["pools"]))


@dataclass(frozen=True)
class Syndrome:
    """The L-bit outcome vector of a pooled-test run."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("syndrome bits must be 0 or 1")

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    @classmethod
    def from_string(cls, s: str) -> "Syndrome":
        return cls(tuple(int(c) for c in s))


def identity_design(n: int) -> PoolingDesign:
    """n singleton pools: pool i tests item i alone."""
    if n < 1:
        raise ValueError("need n >= 1")
    return PoolingDesign(n, tuple(Subset(n, (i,)) for i in range(n)))


def bernoulli_design(n: int, num_tests: int, p: float, rng: Random) -> PoolingDesign:
    """num_tests random pools, each item included independently with probability p."""
    if not 0 < p < 1:
        raise ValueError(f"need 0 < p < 1, got {p}")
    pools = tuple(
        Subset(n, tuple(i for i in range(n) if rng.random() < p)) for _ in range(num_tests)
    )
    return PoolingDesign(n, pools)


# -- noise specifications -----------------------------------------------------

@dataclass(frozen=True)
class Noiseless:
    """No noise; bit i = 1 iff pool i meets the secret subset."""


@dataclass(frozen=True)
class NoiseBefore:
    """Contaminate a uniform size-beta subset before pooling."""

    beta: int

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise ValueError(f"need beta >= 0, got {self.beta}")


@dataclass(frozen=True)
class IndependentOverwrite:
    """I.i.d. per-pool overwrite codes: force-0 with q0, force-1 with q1,
    pass-through with q2.  The three probabilities must sum to exactly 1."""

    q0: Fraction
    q1: Fraction
    q2: Fraction

    def __post_init__(self) -> None:
        qs = (self.q0, self.q1, self.q2)
        if any(not isinstance(q, Fraction) for q in qs):
            raise ValueError("overwrite probabilities must be Fractions (exact path)")
        if any(q < 0 for q in qs):
            raise ValueError("overwrite probabilities must be nonnegative")
        if sum(qs) != 1:
            raise ValueError(f"overwrite probabilities sum to {sum(qs)}, not 1")


@dataclass(frozen=True)
class ContaminationInduced:
    """Overwrite codes derived from a uniform size-beta contamination set:
    pools meeting it are forced to 1, the rest pass through."""

    beta: int

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise ValueError(f"need beta >= 0, got {self.beta}")


UModel = Union[IndependentOverwrite, ContaminationInduced]


@dataclass(frozen=True)
class NoiseAfter:
    """Overwrite test outcomes after pooling, per the given overwrite model."""

    u_model: UModel


NoiseSpec = Union[Noiseless, NoiseBefore, NoiseAfter]

# a noise realization: nothing, a contamination set, or per-pool overwrite codes
NoiseRealization = Union[None, Subset, tuple[int, ...]]

PASS_THROUGH = 2  # overwrite code meaning "keep the noiseless bit"


def _noiseless_bits(design: PoolingDesign, material_mask: int) -> tuple[int, ...]:
    return tuple(1 if pool.mask & material_mask else 0 for pool in design.pools)


def run_tests(design: PoolingDesign, e: Subset, noise: NoiseRealization = None) -> Syndrome:
    """Apply the testing function to ``e`` under one noise realization.

    ``noise`` is None (noiseless), a Subset (contamination set, merged
    before pooling), or a length-L tuple of overwrite codes in {0, 1, 2}.
    """
    if e.n != design.n:
        raise ValueError("tested subset and design use different ground sets")
    if noise is None:
        return Syndrome(_noiseless_bits(design, e.mask))
    if isinstance(noise, Subset):
        if noise.n != design.n:
            raise ValueError("contamination set and design use different ground sets")
        return Syndrome(_noiseless_bits(design, e.mask | noise.mask))
    if len(noise) != design.num_tests:
        raise ValueError(f"overwrite vector length {len(noise)} != L={design.num_tests}")
    base = _noiseless_bits(design, e.mask)
    bits = []
    for u, b in zip(noise, base):
        if u == 0:
            bits.append(0)
        elif u == 1:
            bits.append(1)
        elif u == PASS_THROUGH:
            bits.append(b)
        else:
            raise ValueError(f"overwrite code must be 0, 1 or 2, got {u}")
    return Syndrome(tuple(bits))


def induced_overwrites(design: PoolingDesign, contamination: Subset) -> tuple[int, ...]:
    """The overwrite codes that replay before-pooling contamination after
    pooling: force-1 where a pool meets the contamination, pass-through
    elsewhere."""
    if contamination.n != design.n:
        raise ValueError("contamination set and design use different ground sets")
    return tuple(1 if pool.mask & contamination.mask else PASS_THROUGH for pool in design.pools)


def sample_noise(spec: NoiseSpec, design: PoolingDesign, rng: Random) -> NoiseRealization:
    """Draw one noise realization.  Never reads the tested subset."""
    if isinstance(spec, Noiseless):
        return None
    if isinstance(spec, NoiseBefore):
        return sample_uniform_subset(design.n, spec.beta, rng)
    if isinstance(spec, NoiseAfter):
        model = spec.u_model
        if isinstance(model, ContaminationInduced):
            return induced_overwrites(design, sample_uniform_subset(design.n, model.beta, rng))
        # exact categorical draw over a common denominator
        den = lcm(model.q0.denominator, model.q1.denominator, model.q2.denominator)
        c0 = model.q0.numerator * (den // model.q0.denominator)
        c1 = c0 + model.q1.numerator * (den // model.q1.denominator)
        codes = []
        for _ in range(design.num_tests):
            r = rng.randrange(den)
            codes.append(0 if r < c0 else 1 if r < c1 else PASS_THROUGH)
        return tuple(codes)
    raise TypeError(f"unknown noise spec {spec!r}")


def decode_comp(design: PoolingDesign, syndrome: Syndrome) -> Subset:
    """Eliminator decoding: clear every item that appears in a negative
    pool, return the rest.  Never clears a true positive as long as every
    pool containing one reads positive."""
    if len(syndrome) != design.num_tests:
        raise ValueError(f"syndrome length {len(syndrome)} != L={design.num_tests}")
    cleared = 0
    for bit, pool in zip(syndrome.bits, design.pools):
        if bit == 0:
            cleared |= pool.mask
    return Subset.from_mask(design.n, ~cleared & ((1 << design.n) - 1))


def syndrome_distribution_exact(
    design: PoolingDesign,
    e: Subset,
    spec: NoiseSpec,
    cap: int = DEFAULT_OUTCOME_CAP,
) -> OutputDistribution:
    """Exact rational distribution of the syndrome at input ``e``."""
    if e.n != design.n:
        raise ValueError("tested subset and design use different ground sets")
    if isinstance(spec, Noiseless):
        return OutputDistribution({run_tests(design, e): Fraction(1)})
    if isinstance(spec, NoiseBefore):
        return accumulate_distribution(_before_terms(design, e, spec.beta), cap=cap)
    if isinstance(spec, NoiseAfter):
        model = spec.u_model
        if isinstance(model, ContaminationInduced):
            return accumulate_distribution(_induced_terms(design, e, model.beta), cap=cap)
        return _independent_overwrite_distribution(design, e, model, cap)
    raise TypeError(f"unknown noise spec {spec!r}")


def _before_terms(design: PoolingDesign, e: Subset, beta: int) -> Iterator[tuple[Syndrome, Fraction]]:
    n = design.n
    p = Fraction(1, comb(n, beta))
    for b_items in itertools.combinations(range(n), beta):
        bmask = 0
        for i in b_items:
            bmask |= 1 << i
        yield Syndrome(_noiseless_bits(design, e.mask | bmask)), p


def _induced_terms(design: PoolingDesign, e: Subset, beta: int) -> Iterator[tuple[Syndrome, Fraction]]:
    n = design.n
    p = Fraction(1, comb(n, beta))
    base = _noiseless_bits(design, e.mask)
    for b_items in itertools.combinations(range(n), beta):
        bmask = 0
        for i in b_items:
            bmask |= 1 << i
        bits = tuple(
            1 if pool.mask & bmask else b for pool, b in zip(design.pools, base)
        )
        yield Syndrome(bits), p


def _independent_overwrite_distribution(
    design: PoolingDesign, e: Subset, model: IndependentOverwrite, cap: int
) -> OutputDistribution:
    # pools are overwritten independently, so the syndrome law is the
    # product of per-bit marginals; expansion is pruned at zero mass
    base = _noiseless_bits(design, e.mask)
    acc: dict[tuple[int, ...], Fraction] = {(): Fraction(1)}
    for b in base:
        p1 = model.q1 + (model.q2 if b == 1 else 0)
        p0 = model.q0 + (model.q2 if b == 0 else 0)
        nxt: dict[tuple[int, ...], Fraction] = {}
        for prefix, pr in acc.items():
            if p0 > 0:
                nxt[prefix + (0,)] = pr * p0
            if p1 > 0:
                nxt[prefix + (1,)] = pr * p1
        if len(nxt) > cap:
            raise CapExceededError(
                f"syndrome support exceeds the outcome cap ({cap}); raise --outcome-cap"
            )
        acc = nxt
    return OutputDistribution({Syndrome(bits): pr for bits, pr in acc.items()})


def decoded_distribution_exact(
    design: PoolingDesign,
    e: Subset,
    spec: NoiseSpec,
    cap: int = DEFAULT_OUTCOME_CAP,
) -> OutputDistribution:
    """Exact distribution of the decoded subset (syndrome law pushed
    through the eliminator decoder)."""
    return syndrome_distribution_exact(design, e, spec, cap=cap).map(
        lambda syn: decode_comp(design, syn)
    )


@dataclass(frozen=True)
class TrialResult:
    """One collector-to-lab round: syndrome, decoded subset, and its
    distance to the true subset."""

    syndrome: Syndrome
    decoded: Subset
    distance_to_e: int


def simulate(design: PoolingDesign, e: Subset, spec: NoiseSpec, rng: Random) -> TrialResult:
    """Run one full round: draw noise (independently of ``e``), pool and
    test, then decode without access to the noise realization."""
    realization = sample_noise(spec, design, rng)
    syndrome = run_tests(design, e, realization)
    decoded = decode_comp(design, syndrome)
    return TrialResult(syndrome, decoded, distance(decoded, e))
