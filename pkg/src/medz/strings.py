"""Binary strings split into (x, y) coordinate pairs followed by extra coordinates.

Coordinate order is x_1, y_1, ..., x_n, y_n, e_1, ..., e_t.  Bits are packed into a
Python int with coordinate 0 as the most significant bit, so ``int(text, 2)``
reads a string directly.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class Layout:
    n_pairs: int
    t_extra: int

    def __post_init__(self):
        if self.n_pairs < 0 or self.t_extra < 0:
            raise LayoutError(f"negative layout {self.n_pairs}, {self.t_extra}")

    @property
    def length(self) -> int:
        return 2 * self.n_pairs + self.t_extra

    @property
    def pair_mask(self) -> int:
        """Mask selecting the 2n pair coordinates."""
        return ((1 << (2 * self.n_pairs)) - 1) << self.t_extra

    @property
    def extra_mask(self) -> int:
        return (1 << self.t_extra) - 1

    def x_index(self, i: int) -> int:
        return 2 * i

    def y_index(self, i: int) -> int:
        return 2 * i + 1

    def extra_index(self, j: int) -> int:
        return 2 * self.n_pairs + j


@dataclass(frozen=True)
class LabeledBitString:
    layout: Layout
    value: int

    def __post_init__(self):
        if self.value < 0 or self.value >> self.layout.length:
            raise LayoutError("bits do not fit the layout")

    @classmethod
    def from_bits(cls, bits: str | Sequence[int], layout: Layout | None = None) -> "LabeledBitString":
        text = bits if isinstance(bits, str) else "".join(str(int(b)) for b in bits)
        text = text.replace("|", "").replace(" ", "")
        if text and set(text) - {"0", "1"}:
            raise LayoutError(f"not a 0/1 string: {text!r}")
        if layout is None:
            layout = Layout(0, len(text))
        if len(text) != layout.length:
            raise LayoutError(f"length {len(text)} does not match layout length {layout.length}")
        return cls(layout, int(text, 2) if text else 0)

    def __len__(self) -> int:
        return self.layout.length

    def __getitem__(self, i: int) -> int:
        L = self.layout.length
        if not 0 <= i < L:
            raise IndexError(i)
        return (self.value >> (L - 1 - i)) & 1

    def bits(self) -> str:
        L = self.layout.length
        return format(self.value, f"0{L}b") if L else ""

    def __str__(self) -> str:
        return self.bits()

    @property
    def pair_value(self) -> int:
        """The 2n pair bits as an int (x_1 most significant)."""
        return self.value >> self.layout.t_extra

    @property
    def extra_count(self) -> int:
        return (self.value & self.layout.extra_mask).bit_count()

    def flip(self, i: int) -> "LabeledBitString":
        return LabeledBitString(self.layout, self.value ^ (1 << (self.layout.length - 1 - i)))


def _check_same(a: LabeledBitString, b: LabeledBitString) -> None:
    if a.layout != b.layout:
        raise LayoutError(f"layout mismatch: {a.layout} vs {b.layout}")


def hamming(a: LabeledBitString, b: LabeledBitString) -> int:
    _check_same(a, b)
    return (a.value ^ b.value).bit_count()


def structural_distance(pair_value: int, s: LabeledBitString) -> int:
    """Distance from s to the string with the given pair bits and all extras zero."""
    return (pair_value ^ s.pair_value).bit_count() + s.extra_count


def complement_on_pairs(s: LabeledBitString) -> LabeledBitString:
    return LabeledBitString(s.layout, s.value ^ s.layout.pair_mask)


@dataclass(frozen=True)
class BlueprintString:
    pair_bits: int
    extra: int


@dataclass(frozen=True)
class StringBlueprint:
    """Pair values and extra-one counts; extras become concrete on materialize."""

    n_pairs: int
    rows: tuple[BlueprintString, ...]

    @property
    def extras_needed(self) -> int:
        return sum(r.extra for r in self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __add__(self, other: "StringBlueprint") -> "StringBlueprint":
        if other.n_pairs != self.n_pairs:
            raise LayoutError("blueprints with different pair counts")
        return StringBlueprint(self.n_pairs, self.rows + other.rows)

    @classmethod
    def concat(cls, n_pairs: int, parts: Iterable["StringBlueprint"]) -> "StringBlueprint":
        rows: list[BlueprintString] = []
        for p in parts:
            if p.n_pairs != n_pairs:
                raise LayoutError("blueprints with different pair counts")
            rows.extend(p.rows)
        return cls(n_pairs, tuple(rows))

    def to_text(self) -> str:
        w = 2 * self.n_pairs
        return "".join(f"{format(r.pair_bits, f'0{w}b') if w else ''} +{r.extra}\n" for r in self.rows)


class StringMultiset:
    """Multiset of strings sharing one layout.  Order of members is kept."""

    def __init__(self, layout: Layout, members: Iterable[LabeledBitString]):
        self.layout = layout
        self.members: tuple[LabeledBitString, ...] = tuple(members)
        for m in self.members:
            if m.layout != layout:
                raise LayoutError("member layout differs from multiset layout")

    @classmethod
    def from_bits(cls, texts: Iterable[str], layout: Layout | None = None) -> "StringMultiset":
        texts = [t.strip() for t in texts]
        if layout is None:
            if not texts:
                raise LayoutError("cannot infer layout of an empty multiset")
            layout = Layout(0, len(texts[0].replace("|", "")))
        return cls(layout, [LabeledBitString.from_bits(t, layout) for t in texts])

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[LabeledBitString]:
        return iter(self.members)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StringMultiset):
            return NotImplemented
        return self.layout == other.layout and Counter(self.values()) == Counter(other.values())

    def values(self) -> list[int]:
        return [m.value for m in self.members]

    def __repr__(self) -> str:
        return f"StringMultiset({self.layout}, {[m.bits() for m in self.members]})"


def materialize(bp: StringBlueprint, t_extra: int | None = None) -> StringMultiset:
    """Turn a blueprint into strings, packing extra ones left to right in row order."""
    need = bp.extras_needed
    t = need if t_extra is None else t_extra
    if need > t:
        raise LayoutError(f"blueprint needs {need} extra coordinates, layout has {t}")
    layout = Layout(bp.n_pairs, t)
    out = []
    pos = 0
    for r in bp.rows:
        if r.extra < 0:
            raise LayoutError("negative extra count")
        if r.pair_bits >> (2 * bp.n_pairs):
            raise LayoutError("pair bits do not fit")
        # ones at extra coordinates pos .. pos+e-1
        ones = ((1 << r.extra) - 1) << (t - pos - r.extra) if r.extra else 0
        out.append(LabeledBitString(layout, (r.pair_bits << t) | ones))
        pos += r.extra
    return StringMultiset(layout, out)


def parse_raw(text: str, layout: Layout | None = None) -> StringMultiset:
    """Format A: one 0/1 string per line."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise LayoutError("no strings in input")
    lengths = {len(ln) for ln in lines}
    if len(lengths) != 1:
        raise LayoutError(f"strings of unequal length: {sorted(lengths)}")
    if layout is None:
        layout = Layout(0, lengths.pop())
    return StringMultiset.from_bits(lines, layout)


def parse_blueprint(text: str) -> StringBlueprint:
    """Format B: ``<2n pair bits> +<e>`` per line."""
    rows = []
    width = None
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split()
        if len(parts) == 1 and parts[0].startswith("+"):
            bits, extra = "", parts[0]
        elif len(parts) == 2 and parts[1].startswith("+"):
            bits, extra = parts
        else:
            raise LayoutError(f"bad blueprint line: {ln!r}")
        if set(bits) - {"0", "1"} or len(bits) % 2:
            raise LayoutError(f"pair bits must be an even-length 0/1 string: {bits!r}")
        if width is None:
            width = len(bits)
        elif width != len(bits):
            raise LayoutError("blueprint lines of unequal width")
        try:
            e = int(extra[1:])
        except ValueError:
            raise LayoutError(f"bad extra count: {extra!r}") from None
        if e < 0:
            raise LayoutError("negative extra count")
        rows.append(BlueprintString(int(bits, 2) if bits else 0, e))
    if width is None:
        raise LayoutError("empty blueprint")
    return StringBlueprint(width // 2, tuple(rows))


def load_strings(text: str, n_pairs: int | None = None, t_extra: int | None = None) -> StringMultiset:
    """Read either format; blueprint lines are recognised by their ``+e`` suffix."""
    first = next((ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")), "")
    if "+" in first:
        bp = parse_blueprint(text)
        return materialize(bp, t_extra)
    layout = None
    if n_pairs is not None or t_extra is not None:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        L = len(lines[0]) if lines else 0
        np_ = n_pairs if n_pairs is not None else (L - (t_extra or 0)) // 2
        te = t_extra if t_extra is not None else L - 2 * np_
        layout = Layout(np_, te)
    return parse_raw(text, layout)
