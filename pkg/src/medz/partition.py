"""Partition functions over the median set.

Z(B, w) sums, over all optimal medians mu, the product of w(H(nu, mu)) over the
members nu of B.  Medians sharing a distance profile contribute the same product, so
sums are accumulated per profile (a sorted distance vector) and the weights are
evaluated once per profile.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .median import MedianSet, SizeGuardError, distance_blocks, median_set
from .strings import LabeledBitString, StringMultiset, hamming

Number = int | Fraction

DEFAULT_MAX_AMBIGUOUS = 26


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    i = 3
    while i * i <= p:
        if p % i == 0:
            return False
        i += 2
    return True


@dataclass(frozen=True)
class WeightFunction:
    """A nonnegative weight on distances with exact, modular and log evaluators.

    ``kind`` is one of factorial, identity, table or custom.  Table weights hold
    exact rationals; custom weights wrap a picklable callable returning int or
    Fraction.
    """

    kind: str = "factorial"
    table: tuple[tuple[int, Fraction], ...] = ()
    func: Callable[[int], Number] | None = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("factorial", "identity", "table", "custom"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "custom" and self.func is None:
            raise ValueError("custom weight needs a function")

    @classmethod
    def factorial(cls) -> "WeightFunction":
        return cls("factorial")

    @classmethod
    def identity(cls) -> "WeightFunction":
        return cls("identity")

    @classmethod
    def from_table(cls, pairs: Iterable[tuple[int, Number]]) -> "WeightFunction":
        items = tuple(sorted((int(d), Fraction(w)) for d, w in pairs))
        if any(w < 0 for _, w in items):
            raise ValueError("weights must be nonnegative")
        if len({d for d, _ in items}) != len(items):
            raise ValueError("duplicate distance in weight table")
        return cls("table", table=items)

    @classmethod
    def parse_table(cls, text: str) -> "WeightFunction":
        pairs = []
        for ln in text.splitlines():
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            parts = ln.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError(f"weight table line needs two columns: {ln!r}")
            pairs.append((int(parts[0]), Fraction(parts[1])))
        return cls.from_table(pairs)

    @classmethod
    def custom(cls, func: Callable[[int], Number], name: str = "custom") -> "WeightFunction":
        return cls("custom", func=func, name=name)

    def exact(self, d: int) -> Number:
        if self.kind == "factorial":
            if d < 0:
                raise ValueError(f"factorial of negative distance {d}")
            return math.factorial(d)
        if self.kind == "identity":
            return d
        if self.kind == "table":
            for k, w in self.table:
                if k == d:
                    return w if w.denominator != 1 else int(w)
            raise KeyError(f"weight table has no entry for distance {d}")
        v = self.func(d)
        if isinstance(v, float):
            raise TypeError("custom weights must return int or Fraction")
        if v < 0:
            raise ValueError(f"negative weight at {d}")
        return v

    def mod(self, d: int, p: int) -> int:
        v = self.exact(d)
        if isinstance(v, Fraction):
            if v.denominator % p == 0:
                raise ZeroDivisionError(f"weight at {d} has denominator divisible by {p}")
            return v.numerator * pow(v.denominator, -1, p) % p
        return v % p

    def mod_table(self, p: int, dmax: int) -> np.ndarray:
        if self.kind == "factorial":
            out = np.zeros(dmax + 1, dtype=np.int64)
            acc = 1 % p
            for d in range(dmax + 1):
                if d:
                    acc = acc * d % p
                out[d] = acc
            return out
        return np.array([self.mod(d, p) for d in range(dmax + 1)], dtype=np.int64)

    def log(self, d: int) -> float:
        if self.kind == "factorial":
            return math.lgamma(d + 1)
        v = self.exact(d)
        if v == 0:
            return -math.inf
        if isinstance(v, Fraction):
            return math.log(v.numerator) - math.log(v.denominator)
        return math.log(v)

    def describe(self) -> str:
        return self.name or self.kind


FACTORIAL = WeightFunction.factorial()
IDENTITY = WeightFunction.identity()


Profile = tuple[tuple[int, int], ...]  # sorted (distance, multiplicity) pairs


def distance_multiset(B: StringMultiset, mu: LabeledBitString) -> Counter:
    return Counter(hamming(s, mu) for s in B)


def profile_weight(profile: Profile, w: WeightFunction) -> Number:
    out: Number = 1
    for d, c in profile:
        out *= w.exact(d) ** c
    return out


def profile_weight_mod(profile: Profile, w: WeightFunction, p: int) -> int:
    out = 1 % p
    for d, c in profile:
        out = out * pow(w.mod(d, p), c, p) % p
    return out


def profile_log(profile: Profile, w: WeightFunction) -> float:
    total = 0.0
    for d, c in profile:
        lw = w.log(d)
        if lw == -math.inf:
            return -math.inf
        total += c * lw
    return total


def _profiles_range(B: StringMultiset, ms: MedianSet, start: int, stop: int) -> Counter:
    out: Counter = Counter()
    for _, D in distance_blocks(B, ms, start, stop):
        rows, counts = np.unique(np.sort(D, axis=1), axis=0, return_counts=True)
        for row, c in zip(rows, counts):
            ds, mult = np.unique(row, return_counts=True)
            out[tuple(zip(ds.tolist(), mult.tolist()))] += int(c)
    return out


def median_profiles(B: StringMultiset, jobs: int = 1, max_ambiguous: int = DEFAULT_MAX_AMBIGUOUS,
                    ms: MedianSet | None = None) -> Counter:
    """Counter mapping each distance profile to the number of medians having it."""
    ms = ms or median_set(B)
    if len(ms.ambiguous) > max_ambiguous:
        raise SizeGuardError(f"{len(ms.ambiguous)} ambiguous coordinates exceed the cap of {max_ambiguous}")
    total = len(ms)
    if jobs <= 1 or total < 1 << 12:
        return _profiles_range(B, ms, 0, total)
    step = -(-total // jobs)
    bounds = [(lo, min(total, lo + step)) for lo in range(0, total, step)]
    out: Counter = Counter()
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        for part in ex.map(_profiles_range, [B] * len(bounds), [ms] * len(bounds),
                           [b[0] for b in bounds], [b[1] for b in bounds]):
            out.update(part)
    return out


def _check_median(B: StringMultiset, mu: LabeledBitString) -> None:
    if mu not in median_set(B):
        raise ValueError(f"{mu.bits()} is not an optimal median")


def weight_of_median(B: StringMultiset, mu: LabeledBitString, w: WeightFunction = FACTORIAL,
                     check: bool = True) -> Number:
    if check:
        _check_median(B, mu)
    out: Number = 1
    for s in B:
        out *= w.exact(hamming(s, mu))
    return out


def partition_function(B: StringMultiset, w: WeightFunction = FACTORIAL, jobs: int = 1,
                       max_ambiguous: int = DEFAULT_MAX_AMBIGUOUS) -> Number:
    if len(B) == 0:
        raise ValueError("empty multiset")
    z: Number = 0
    for prof, c in sorted(median_profiles(B, jobs, max_ambiguous).items()):
        z += c * profile_weight(prof, w)
    return z


def partition_function_mod_p(B: StringMultiset, p: int, w: WeightFunction = FACTORIAL, jobs: int = 1,
                             max_ambiguous: int = DEFAULT_MAX_AMBIGUOUS) -> int:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    profiles = median_profiles(B, jobs, max_ambiguous)
    dmax = max((d for prof in profiles for d, _ in prof), default=0)
    table = w.mod_table(p, dmax)
    z = 0
    for prof, c in profiles.items():
        v = 1
        for d, k in prof:
            v = v * pow(int(table[d]), k, p) % p
        z = (z + c * v) % p
    return z


@dataclass(frozen=True)
class LogThreshold:
    """Threshold given as a natural log, compared with an absolute tolerance."""

    value: float
    tol: float = 1e-9


class ThresholdAmbiguous(ArithmeticError):
    pass


def _compare(weight_log: float, prof: Profile, w: WeightFunction, D, direction: str) -> bool:
    if isinstance(D, LogThreshold):
        gap = weight_log - D.value
        if abs(gap) <= D.tol:
            raise ThresholdAmbiguous("median weight within tolerance of a log threshold")
        return gap < 0 if direction == "<=" else gap > 0
    D = Fraction(D)
    if D <= 0 or weight_log == -math.inf:
        v = profile_weight(prof, w)
        return v <= D if direction == "<=" else v >= D
    gap = weight_log - (math.log(D.numerator) - math.log(D.denominator))
    # the log screen decides clear cases, anything close is settled exactly
    if abs(gap) > 1e-6 * max(1.0, abs(weight_log)):
        return gap < 0 if direction == "<=" else gap > 0
    v = profile_weight(prof, w)
    return v <= D if direction == "<=" else v >= D


def count_medians_within_threshold(B: StringMultiset, w: WeightFunction, D, direction: str = "<=",
                                   jobs: int = 1, max_ambiguous: int = DEFAULT_MAX_AMBIGUOUS) -> int:
    if direction not in ("<=", ">="):
        raise ValueError("direction must be '<=' or '>='")
    count = 0
    for prof, c in median_profiles(B, jobs, max_ambiguous).items():
        if _compare(profile_log(prof, w), prof, w, D, direction):
            count += c
    return count


def amplify(B: StringMultiset, r: int) -> StringMultiset:
    if r < 1:
        raise ValueError("r must be positive")
    return StringMultiset(B.layout, B.members * r)
