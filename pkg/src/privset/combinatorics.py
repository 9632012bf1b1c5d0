"""Subsets of a finite ground set and the swap-distance geometry on them.

The ground set is V = {0, ..., n-1}.  For two subsets a and b,

    distance(a, b) = max(|a \\ b|, |b \\ a|),

which on equal-size subsets is the number of element swaps needed to turn
one into the other.  The sphere of radius alpha around a size-d subset
contains exactly C(d, alpha) * C(n-d, alpha) subsets of size d: choose the
alpha elements to drop and the alpha outside elements to add.  A ball is
the union of spheres of radius 0..beta.

Subsets carry a sorted item tuple (the canonical form: equality, ordering,
JSON) plus an integer bit mask for fast set algebra.  Sphere and ball
enumeration is lazy, so walking a ball never materializes more than the
caller consumes.  All samplers take an explicit ``random.Random`` and are
exactly uniform: they draw a single rank in [0, count) and unrank it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from random import Random
from typing import Iterable, Iterator, Sequence


def _mask_of(items: Iterable[int]) -> int:
    m = 0
    for i in items:
        m |= 1 << i
    return m


@dataclass(frozen=True, order=True)
class Subset:
    """Immutable subset of the ground set {0, ..., n-1}.

    ``items`` is the canonical sorted tuple; ``mask`` is the derived bit
    set (bit i set iff i is a member).  Equality and ordering use
    ``(n, items)`` only.
    """

    n: int
    items: tuple[int, ...]
    mask: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        items = tuple(sorted(self.items))
        if self.n < 0:
            raise ValueError(f"ground-set size must be nonnegative, got {self.n}")
        for lo, hi in zip(items, items[1:]):
            if lo == hi:
                raise ValueError(f"duplicate item {lo}")
        if items and not (0 <= items[0] and items[-1] < self.n):
            raise ValueError(f"items {items} out of range for ground set of size {self.n}")
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "mask", _mask_of(items))

    @classmethod
    def from_mask(cls, n: int, mask: int) -> "Subset":
        if mask < 0 or mask >> n:
            raise ValueError(f"mask {mask:#x} out of range for ground set of size {n}")
        items = tuple(i for i in range(n) if mask >> i & 1)
        return cls(n, items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[int]:
        return iter(self.items)

    def __contains__(self, item: int) -> bool:
        return 0 <= item < self.n and self.mask >> item & 1 == 1

    def _check_same_ground(self, other: "Subset") -> None:
        if self.n != other.n:
            raise ValueError(f"ground-set sizes differ: {self.n} != {other.n}")

    def union(self, other: "Subset") -> "Subset":
        self._check_same_ground(other)
        return Subset.from_mask(self.n, self.mask | other.mask)

    def intersection(self, other: "Subset") -> "Subset":
        self._check_same_ground(other)
        return Subset.from_mask(self.n, self.mask & other.mask)

    def difference(self, other: "Subset") -> "Subset":
        self._check_same_ground(other)
        return Subset.from_mask(self.n, self.mask & ~other.mask)

    __or__ = union
    __and__ = intersection
    __sub__ = difference

    def complement(self) -> "Subset":
        return Subset.from_mask(self.n, ~self.mask & ((1 << self.n) - 1))

    def to_json(self) -> list[int]:
        """Serialize as a sorted JSON integer array, e.g. [0, 3, 5]."""
        return list(self.items)

    @classmethod
    def from_json(cls, n: int, data: Sequence[int]) -> "Subset":
        return cls(n, tuple(int(i) for i in data))


def distance(a: Subset, b: Subset) -> int:
    """max(|a \\ b|, |b \\ a|); symmetric, zero iff a == b."""
    a._check_same_ground(b)
    return max((a.mask & ~b.mask).bit_count(), (b.mask & ~a.mask).bit_count())


def subset_count(n: int, d: int) -> int:
    """Number of size-d subsets of {0, ..., n-1}."""
    if not 0 <= d <= n:
        raise ValueError(f"need 0 <= d <= n, got d={d}, n={n}")
    return comb(n, d)


def sphere_size(n: int, d: int, alpha: int) -> int:
    """C(d, alpha) * C(n-d, alpha): size-d subsets at distance exactly alpha.

    Out-of-range alpha gives an empty sphere (0), not an error, so generic
    ball loops need no special-casing.
    """
    if not 0 <= d <= n:
        raise ValueError(f"need 0 <= d <= n, got d={d}, n={n}")
    if alpha < 0 or alpha > d or alpha > n - d:
        return 0
    return comb(d, alpha) * comb(n - d, alpha)


def ball_size(n: int, d: int, beta: int) -> int:
    """Size-d subsets at distance at most beta (center included)."""
    return sum(sphere_size(n, d, alpha) for alpha in range(beta + 1))


def enumerate_subsets(n: int, d: int) -> Iterator[Subset]:
    """All size-d subsets, in lexicographic item order."""
    if not 0 <= d <= n:
        raise ValueError(f"need 0 <= d <= n, got d={d}, n={n}")
    for items in itertools.combinations(range(n), d):
        yield Subset(n, items)


def enumerate_sphere(center: Subset, alpha: int) -> Iterator[Subset]:
    """Lazily yield all same-size subsets at distance exactly alpha.

    Generated by choosing alpha members of ``center`` to drop and alpha
    members of the complement to add; the number of subsets yielded equals
    ``sphere_size``.
    """
    n, d = center.n, len(center)
    if alpha == 0:
        yield center
        return
    if sphere_size(n, d, alpha) == 0:
        return
    comp_items = center.complement().items
    for drop in itertools.combinations(center.items, alpha):
        kept = center.mask ^ _mask_of(drop)
        for add in itertools.combinations(comp_items, alpha):
            yield Subset.from_mask(n, kept | _mask_of(add))


def enumerate_ball(center: Subset, beta: int) -> Iterator[Subset]:
    """Spheres of radius 0..beta, concatenated (center first)."""
    for alpha in range(beta + 1):
        yield from enumerate_sphere(center, alpha)


def combination_rank(items: Sequence[int]) -> int:
    """Colexicographic rank of a strictly increasing index tuple.

    The rank of {c_1 < ... < c_k} is sum_i C(c_i, i); this ordering is
    stable and is the one ``combination_unrank`` inverts.
    """
    return sum(comb(c, i) for i, c in enumerate(items, start=1))


def combination_unrank(rank: int, k: int) -> tuple[int, ...]:
    """Inverse of ``combination_rank``: the rank-th k-index tuple in colex order.

    Total for every rank >= 0 (colex order extends over an unbounded
    universe); callers sampling within {0, ..., n-1} must draw the rank
    from range(C(n, k)).
    """
    if rank < 0:
        raise ValueError(f"rank must be nonnegative, got {rank}")
    out = []
    for i in range(k, 0, -1):
        # largest c with comb(c, i) <= rank, by doubling then bisection
        lo, hi = i - 1, i
        while comb(hi, i) <= rank:
            hi *= 2
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if comb(mid, i) <= rank:
                lo = mid
            else:
                hi = mid
        out.append(lo)
        rank -= comb(lo, i)
    out.reverse()
    return tuple(out)


def sample_uniform_subset(n: int, k: int, rng: Random) -> Subset:
    """Uniform draw over all C(n, k) size-k subsets of {0, ..., n-1}."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    return Subset(n, combination_unrank(rng.randrange(comb(n, k)), k))


def sample_at_distance(center: Subset, alpha: int, rng: Random) -> Subset:
    """Uniform draw over the sphere of radius alpha around ``center``."""
    n, d = center.n, len(center)
    if alpha == 0:
        return center
    if sphere_size(n, d, alpha) == 0:
        raise ValueError(f"empty sphere: n={n}, d={d}, alpha={alpha}")
    drop_pos = combination_unrank(rng.randrange(comb(d, alpha)), alpha)
    add_pos = combination_unrank(rng.randrange(comb(n - d, alpha)), alpha)
    comp_items = center.complement().items
    drop_mask = _mask_of(center.items[i] for i in drop_pos)
    add_mask = _mask_of(comp_items[i] for i in add_pos)
    return Subset.from_mask(n, (center.mask ^ drop_mask) | add_mask)


def enumerate_excess_set(e_i: Subset, e_j: Subset, alpha: int) -> list[Subset]:
    """Subsets within distance alpha of ``e_i`` but strictly farther from ``e_j``.

    Returns every same-size subset e_l with distance(e_i, e_l) <= alpha and
    distance(e_j, e_l) > alpha.  For neighboring e_i, e_j the count is
    C(d-1, alpha) * C(n-d-1, alpha), independent of the pair chosen.
    """
    e_i._check_same_ground(e_j)
    if len(e_i) != len(e_j):
        raise ValueError("excess set is defined for equal-size subsets")
    return [e_l for e_l in enumerate_ball(e_i, alpha) if distance(e_j, e_l) > alpha]


def incidence_count(kind: str, a: Subset, b: Subset, alpha: int) -> int:
    """Count neighbors of ``a`` in a fixed relation to ``b``, by enumeration.

    kind="through": requires distance(a, b) == alpha; counts the neighbors
    e' of a for which b lies in the excess set of (a, e') at radius alpha,
    i.e. distance(e', b) > alpha.  The count is (d-alpha)(n-d-alpha).

    kind="middle": requires distance(a, b) == alpha + 1; counts the
    neighbors e' of a with distance(e', b) == alpha.  The count is
    (alpha+1)^2.

    Both closed forms are asserted by the test suite; this function always
    counts by walking the d(n-d) neighbors.
    """
    if kind == "through":
        if distance(a, b) != alpha:
            raise ValueError("kind='through' requires distance(a, b) == alpha")
        return sum(1 for e in enumerate_sphere(a, 1) if distance(e, b) > alpha)
    if kind == "middle":
        if distance(a, b) != alpha + 1:
            raise ValueError("kind='middle' requires distance(a, b) == alpha + 1")
        return sum(1 for e in enumerate_sphere(a, 1) if distance(e, b) == alpha)
    raise ValueError(f"unknown incidence kind {kind!r}")
