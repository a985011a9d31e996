"""Optimal Hamming medians of a multiset.

Every median is the majority string with some subset of the tied coordinates
flipped, so the median set is described by a base string plus the list of tied
("ambiguous") coordinates.  Median number ``i`` flips ``ambiguous[j]`` for each
bit ``j`` set in ``i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .strings import LabeledBitString, Layout, StringMultiset


class SizeGuardError(RuntimeError):
    """Raised when a requested enumeration exceeds a configured cap."""


def bit_matrix(B: StringMultiset) -> np.ndarray:
    """Members as a (m, L) uint8 array."""
    L = B.layout.length
    if L == 0:
        return np.zeros((len(B), 0), dtype=np.uint8)
    text = "".join(m.bits() for m in B)
    return (np.frombuffer(text.encode(), dtype=np.uint8) - 48).reshape(len(B), L)


def column_ones(B: StringMultiset) -> np.ndarray:
    return bit_matrix(B).sum(axis=0, dtype=np.int64)


def ambiguous_coordinates(B: StringMultiset) -> tuple[int, ...]:
    if len(B) == 0:
        raise ValueError("empty multiset")
    ones = column_ones(B)
    return tuple(int(i) for i in np.flatnonzero(2 * ones == len(B)))


def majority_median(B: StringMultiset) -> LabeledBitString:
    if len(B) == 0:
        raise ValueError("empty multiset")
    ones = column_ones(B)
    bits = "".join("1" if 2 * c > len(B) else "0" for c in ones)
    return LabeledBitString.from_bits(bits, B.layout)


def total_distance(B: StringMultiset, mu: LabeledBitString) -> int:
    return sum((s.value ^ mu.value).bit_count() for s in B)


@dataclass(frozen=True)
class MedianSet:
    base: LabeledBitString
    ambiguous: tuple[int, ...]

    def __len__(self) -> int:
        return 1 << len(self.ambiguous)

    @property
    def layout(self):
        return self.base.layout

    def flip_mask(self, index: int) -> int:
        L = self.base.layout.length
        mask = 0
        j = 0
        while index:
            if index & 1:
                mask |= 1 << (L - 1 - self.ambiguous[j])
            index >>= 1
            j += 1
        return mask

    def member(self, index: int) -> LabeledBitString:
        return LabeledBitString(self.base.layout, self.base.value ^ self.flip_mask(index))

    def __contains__(self, mu: LabeledBitString) -> bool:
        if mu.layout != self.base.layout:
            return False
        free = self.flip_mask(len(self) - 1)
        return (mu.value ^ self.base.value) & ~free == 0

    def gray(self) -> Iterator[LabeledBitString]:
        """All members in reflected Gray-code order over the ambiguous bits."""
        L = self.base.layout.length
        masks = [1 << (L - 1 - a) for a in self.ambiguous]
        v = self.base.value
        yield self.base
        for step in range(1, len(self)):
            j = (step & -step).bit_length() - 1
            v ^= masks[j]
            yield LabeledBitString(self.base.layout, v)


def median_set(B: StringMultiset) -> MedianSet:
    return MedianSet(majority_median(B), ambiguous_coordinates(B))


def enumerate_medians(B: StringMultiset, max_ambiguous: int | None = None) -> Iterator[LabeledBitString]:
    ms = median_set(B)
    if max_ambiguous is not None and len(ms.ambiguous) > max_ambiguous:
        raise SizeGuardError(f"{len(ms.ambiguous)} ambiguous coordinates exceed the cap of {max_ambiguous}")
    return ms.gray()


def base_distances(B: StringMultiset, ms: MedianSet) -> tuple[np.ndarray, np.ndarray]:
    """Distances from each member to the base, and the +-1 effect of flipping each ambiguous bit.

    Flipping ambiguous coordinate a moves the median away from members that agree
    with the base at a (+1) and towards those that disagree (-1).
    """
    h0 = np.array([(s.value ^ ms.base.value).bit_count() for s in B], dtype=np.int64)
    if not ms.ambiguous:
        return h0, np.zeros((0, len(B)), dtype=np.int64)
    mat = bit_matrix(B)[:, list(ms.ambiguous)].T.astype(np.int64)  # (A, m)
    base_bits = np.array([ms.base[a] for a in ms.ambiguous], dtype=np.int64)[:, None]
    delta = np.where(mat == base_bits, 1, -1)
    return h0, delta


def distance_blocks(B: StringMultiset, ms: MedianSet | None = None, start: int = 0,
                    stop: int | None = None, chunk: int = 1 << 14) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (first_index, D) where D[r, i] is the distance from median first_index+r to member i."""
    ms = ms or median_set(B)
    h0, delta = base_distances(B, ms)
    A = len(ms.ambiguous)
    stop = len(ms) if stop is None else stop
    shifts = np.arange(A, dtype=np.int64)
    for lo in range(start, stop, chunk):
        hi = min(stop, lo + chunk)
        idx = np.arange(lo, hi, dtype=np.int64)
        flips = (idx[:, None] >> shifts) & 1
        yield lo, h0[None, :] + flips @ delta


@dataclass(frozen=True)
class TruthAssignment:
    values: tuple[bool, ...]

    def __getitem__(self, var: int) -> bool:
        """Value of variable ``var`` (1-based)."""
        return self.values[var - 1]

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Rejected:
    reason: str

    def __bool__(self) -> bool:
        return False


def assignment_of_median(mu: LabeledBitString) -> TruthAssignment | Rejected:
    lay = mu.layout
    if lay.n_pairs == 0:
        return Rejected("string has no coordinate pairs")
    if mu.extra_count:
        return Rejected("nonzero extra coordinate")
    vals = []
    for i in range(lay.n_pairs):
        x, y = mu[lay.x_index(i)], mu[lay.y_index(i)]
        if x == y:
            return Rejected(f"x{i + 1} equals y{i + 1}")
        vals.append(bool(x))
    return TruthAssignment(tuple(vals))


def median_of_assignment(a: TruthAssignment, t_extra: int = 0) -> LabeledBitString:
    bits = "".join("10" if v else "01" for v in a.values) + "0" * t_extra
    return LabeledBitString.from_bits(bits, Layout(a.n, t_extra))
