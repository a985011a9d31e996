"""Small parsimony on rooted binary trees and the tree-reduction scaffolding.

Per-coordinate labelings are tuples of bits indexed by vertex id.  Most
parsimonious labelings of full strings are Cartesian products of the
per-coordinate solution sets, since the objective splits over coordinates.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterator, Sequence

from .cnf import D3Formula, split_augmented
from .median import SizeGuardError
from .strings import LabeledBitString, Layout

INF = math.inf
DEFAULT_MAX_MPL = 1 << 16


class TreeError(ValueError):
    pass


@dataclass
class ParsimonyTree:
    """Rooted binary tree; ``children[v]`` is a pair of vertex ids or None for a leaf."""

    children: list[tuple[int, int] | None]
    labels: dict[int, LabeledBitString]
    names: dict[int, str] = field(default_factory=dict)
    root: int = 0

    def __post_init__(self):
        parent = [-1] * len(self.children)
        for v, ch in enumerate(self.children):
            if ch is None:
                continue
            if len(ch) != 2:
                raise TreeError(f"vertex {v} does not have exactly two children")
            for c in ch:
                if parent[c] != -1 or c == self.root:
                    raise TreeError(f"vertex {c} has more than one parent")
                parent[c] = v
        orphans = [v for v in range(len(self.children)) if parent[v] == -1 and v != self.root]
        if orphans:
            raise TreeError(f"vertices {orphans} are not reachable from the root")
        self.parent = parent
        leaves = self.leaves()
        missing = [v for v in leaves if v not in self.labels]
        if missing:
            raise TreeError(f"leaves {missing} have no label")
        layouts = {self.labels[v].layout for v in leaves}
        if len(layouts) > 1:
            raise TreeError("leaf labels use different layouts")
        self.layout = layouts.pop() if layouts else Layout(0, 0)

    def __len__(self) -> int:
        return len(self.children)

    def leaves(self) -> list[int]:
        return [v for v, ch in enumerate(self.children) if ch is None]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, c) for u, ch in enumerate(self.children) if ch for c in ch]

    def preorder(self) -> list[int]:
        out, stack = [], [self.root]
        while stack:
            v = stack.pop()
            out.append(v)
            ch = self.children[v]
            if ch:
                stack.extend(reversed(ch))
        return out

    def postorder(self) -> list[int]:
        return self.preorder()[::-1]

    @property
    def n_coords(self) -> int:
        return self.layout.length

    def leaf_bit(self, v: int, coord: int) -> int:
        return self.labels[v][coord]


_TOKEN = re.compile(r"\s*([(),;]|[A-Za-z0-9_]+)")


def parse_newick(text: str) -> tuple[list[tuple[int, int] | None], dict[int, str]]:
    """Parse ``((A,B),(C,D));`` into (children, leaf names) with root 0."""
    toks, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise TreeError(f"unexpected character at offset {pos}: {text[pos]!r}")
        toks.append(m.group(1))
        pos = m.end()
    while toks and toks[-1] == "":
        toks.pop()
    if not toks or toks[-1] != ";":
        raise TreeError("tree text must end with ';'")
    children: list[tuple[int, int] | None] = []
    names: dict[int, str] = {}
    i = 0

    def node() -> int:
        nonlocal i
        v = len(children)
        children.append(None)
        tok = toks[i]
        if tok == "(":
            i += 1
            kids = [node()]
            while toks[i] == ",":
                i += 1
                kids.append(node())
            if toks[i] != ")":
                raise TreeError(f"expected ')' but found {toks[i]!r}")
            i += 1
            if len(kids) != 2:
                raise TreeError(f"internal vertex with {len(kids)} children; trees must be binary")
            children[v] = (kids[0], kids[1])
        elif tok in "(),;":
            raise TreeError(f"unexpected token {tok!r}")
        else:
            if tok in names.values():
                raise TreeError(f"duplicate leaf name {tok!r}")
            names[v] = tok
            i += 1
        return v

    try:
        node()
    except IndexError:
        raise TreeError("unbalanced tree text") from None
    if toks[i:] != [";"]:
        raise TreeError("trailing tokens after the tree")
    return children, names


def parse_labels(text: str) -> dict[str, str]:
    """Sidecar lines ``name<TAB>bits``."""
    out = {}
    for ln in text.splitlines():
        if not ln.strip() or ln.startswith("#"):
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise TreeError(f"bad label line: {ln!r}")
        if parts[0] in out:
            raise TreeError(f"duplicate label for {parts[0]!r}")
        out[parts[0]] = parts[1]
    return out


def load_tree(tree_text: str, label_text: str, layout: Layout | None = None) -> ParsimonyTree:
    children, names = parse_newick(tree_text)
    labels = parse_labels(label_text)
    missing = sorted(set(names.values()) - set(labels))
    if missing:
        raise TreeError(f"no label for leaves {missing}")
    if layout is None:
        widths = {len(labels[nm]) for nm in names.values()}
        if len(widths) != 1:
            raise TreeError("leaf labels of unequal length")
        layout = Layout(0, widths.pop())
    lab = {v: LabeledBitString.from_bits(labels[nm], layout) for v, nm in names.items()}
    return ParsimonyTree(children, lab, names)


def tree_from_nested(spec, layout: Layout | None = None) -> ParsimonyTree:
    """Build from nested pairs whose leaves are bit strings, e.g. (("0", "1"), "1")."""
    children: list[tuple[int, int] | None] = []
    texts: dict[int, str] = {}

    def walk(x) -> int:
        v = len(children)
        children.append(None)
        if isinstance(x, str):
            texts[v] = x
        else:
            a, b = x
            children[v] = (walk(a), walk(b))
        return v

    walk(spec)
    if layout is None:
        layout = Layout(0, len(next(iter(texts.values()))))
    return ParsimonyTree(children, {v: LabeledBitString.from_bits(s, layout) for v, s in texts.items()})


# Fitch

def fitch_sets(tree: ParsimonyTree, coord: int) -> list[frozenset[int]]:
    B: list[frozenset[int]] = [frozenset()] * len(tree)
    for v in tree.postorder():
        ch = tree.children[v]
        if ch is None:
            B[v] = frozenset((tree.leaf_bit(v, coord),))
        else:
            a, b = B[ch[0]], B[ch[1]]
            B[v] = (a & b) or (a | b)
    return B


def fitch(tree: ParsimonyTree, coord: int, root_choice: int) -> tuple[int, ...]:
    B = fitch_sets(tree, coord)
    if root_choice not in B[tree.root]:
        raise TreeError(f"root choice {root_choice} not in {set(B[tree.root])}")
    lab = [0] * len(tree)
    lab[tree.root] = root_choice
    for v in tree.preorder():
        ch = tree.children[v]
        if ch:
            for c in ch:
                lab[c] = lab[v] if lab[v] in B[c] else 1 - lab[v]
    return tuple(lab)


def fitch_solutions(tree: ParsimonyTree, coord: int) -> set[tuple[int, ...]]:
    B = fitch_sets(tree, coord)
    return {fitch(tree, coord, r) for r in sorted(B[tree.root])}


def fitch_completeness_condition(tree: ParsimonyTree, coord: int) -> bool:
    """True when every child with set {0,1} sits under a parent with set {0,1}."""
    return _condition_from_sets(tree.children, fitch_sets(tree, coord))


def _condition_from_sets(children, B) -> bool:
    for u, ch in enumerate(children):
        if ch and len(B[u]) == 1 and any(len(B[c]) == 2 for c in ch):
            return False
    return True


# Sankoff

@dataclass(frozen=True)
class SankoffState:
    s0: tuple[float, ...]
    s1: tuple[float, ...]

    def score(self, v: int) -> int:
        return int(min(self.s0[v], self.s1[v]))


def sankoff_scores(tree: ParsimonyTree, coord: int) -> SankoffState:
    s0 = [INF] * len(tree)
    s1 = [INF] * len(tree)
    for v in tree.postorder():
        ch = tree.children[v]
        if ch is None:
            bit = tree.leaf_bit(v, coord)
            s0[v], s1[v] = (0, INF) if bit == 0 else (INF, 0)
        else:
            s0[v] = sum(min(s0[c], s1[c] + 1) for c in ch)
            s1[v] = sum(min(s0[c] + 1, s1[c]) for c in ch)
    return SankoffState(tuple(s0), tuple(s1))


def _child_options(st: SankoffState, v: int, parent_bit: int) -> tuple[int, ...]:
    c0 = st.s0[v] + (parent_bit != 0)
    c1 = st.s1[v] + (parent_bit != 1)
    best = min(c0, c1)
    return tuple(b for b, c in ((0, c0), (1, c1)) if c == best)


def _root_options(st: SankoffState, v: int) -> tuple[int, ...]:
    best = min(st.s0[v], st.s1[v])
    return tuple(b for b, c in ((0, st.s0[v]), (1, st.s1[v])) if c == best)


def _tracebacks(tree: ParsimonyTree, st: SankoffState) -> Iterator[tuple[int, ...]]:
    order = tree.preorder()
    parent = tree.parent
    assign = [0] * len(tree)

    def options(depth: int):
        v = order[depth]
        if depth == 0:
            return iter(_root_options(st, v))
        return iter(_child_options(st, v, assign[parent[v]]))

    stack = [options(0)]
    while stack:
        try:
            b = next(stack[-1])
        except StopIteration:
            stack.pop()
            continue
        depth = len(stack) - 1
        assign[order[depth]] = b
        if depth + 1 == len(order):
            yield tuple(assign)
        else:
            stack.append(options(depth + 1))


def sankoff(tree: ParsimonyTree, coord: int) -> tuple[SankoffState, Iterator[tuple[int, ...]]]:
    """Scores and a lazy stream of every labeling reachable by the tie-following traceback."""
    st = sankoff_scores(tree, coord)
    return st, _tracebacks(tree, st)


def sankoff_solutions(tree: ParsimonyTree, coord: int) -> set[tuple[int, ...]]:
    return set(sankoff(tree, coord)[1])


def mpl_count_coordinate(tree: ParsimonyTree, coord: int, st: SankoffState | None = None) -> int:
    """Number of most parsimonious labelings in one coordinate, by dynamic programming."""
    st = st or sankoff_scores(tree, coord)
    cnt = [[0, 0] for _ in range(len(tree))]
    for v in tree.postorder():
        ch = tree.children[v]
        for b in (0, 1):
            if (st.s0, st.s1)[b][v] == INF:
                continue
            if ch is None:
                cnt[v][b] = 1
                continue
            prod = 1
            for c in ch:
                prod *= sum(cnt[c][x] for x in _child_options(st, c, b))
            cnt[v][b] = prod
    return sum(cnt[tree.root][b] for b in _root_options(st, tree.root))


def parsimony_score(tree: ParsimonyTree) -> int:
    return sum(sankoff_scores(tree, c).score(tree.root) for c in range(tree.n_coords))


def mpl_count(tree: ParsimonyTree) -> int:
    return math.prod(mpl_count_coordinate(tree, c) for c in range(tree.n_coords))


def enumerate_mpl(tree: ParsimonyTree, cap: int | None = DEFAULT_MAX_MPL) -> Iterator[list[LabeledBitString]]:
    """Every most parsimonious labeling, as one LabeledBitString per vertex."""
    L = tree.n_coords
    if cap is not None and mpl_count(tree) > cap:
        raise SizeGuardError(f"more than {cap} most parsimonious labelings")
    per_coord = [sorted(sankoff_solutions(tree, c)) for c in range(L)]
    nv = len(tree)
    for combo in itertools.product(*per_coord):
        vals = [0] * nv
        for c, lab in enumerate(combo):
            shift = L - 1 - c
            for v in range(nv):
                if lab[v]:
                    vals[v] |= 1 << shift
        yield [LabeledBitString(tree.layout, x) for x in vals]


def labeling_cost(tree: ParsimonyTree, labeling: Sequence[LabeledBitString]) -> int:
    return sum((labeling[u].value ^ labeling[v].value).bit_count() for u, v in tree.edges())


def scenario_count_tree(tree: ParsimonyTree, cap: int | None = DEFAULT_MAX_MPL) -> int:
    """Sum over most parsimonious labelings of the product of edge-distance factorials."""
    edges = tree.edges()
    total = 0
    for lab in enumerate_mpl(tree, cap):
        prod = 1
        for u, v in edges:
            prod *= math.factorial((lab[u].value ^ lab[v].value).bit_count())
        total += prod
    return total


# equation-labelled trees used by the reduction

Coordinate = Hashable


@dataclass
class EquationTree:
    """Rooted binary tree whose vertices carry equations ``coordinate = bit``."""

    children: list[tuple[int, int] | None] = field(default_factory=list)
    equations: list[dict] = field(default_factory=list)
    parent: list[int] = field(default_factory=list)

    def add(self, eqs: dict | None = None, parent: int = -1) -> int:
        self.children.append(None)
        self.equations.append(dict(eqs or {}))
        self.parent.append(parent)
        return len(self.children) - 1

    def set_children(self, v: int, a: int, b: int) -> None:
        self.children[v] = (a, b)
        self.parent[a] = v
        self.parent[b] = v

    def __len__(self) -> int:
        return len(self.children)

    def leaves(self, root: int = 0) -> list[int]:
        out, stack = [], [root]
        while stack:
            v = stack.pop()
            ch = self.children[v]
            if ch is None:
                out.append(v)
            else:
                stack.extend(reversed(ch))
        return out

    def inherited(self, v: int) -> dict:
        """All equations on the path from the root to v (nearest wins)."""
        out: dict = {}
        while v != -1:
            for k, b in self.equations[v].items():
                out.setdefault(k, b)
            v = self.parent[v]
        return out

    def edge_count(self) -> int:
        return sum(2 for ch in self.children if ch)


def _hang_sorting_tree(t: EquationTree, root: int, coords: Sequence[Coordinate]) -> list[int]:
    """Grow S(a, b, c) below ``root``; return its 8 leaves left to right."""
    level = [root]
    for c in coords:
        nxt = []
        for v in level:
            lft = t.add({c: 0}, v)
            rgt = t.add({c: 1}, v)
            t.set_children(v, lft, rgt)
            nxt += [lft, rgt]
        level = nxt
    return level


def build_sorting_tree(a: Coordinate, b: Coordinate, c: Coordinate) -> EquationTree:
    if len({a, b, c}) != 3:
        raise TreeError("sorting tree coordinates must be distinct")
    t = EquationTree()
    _hang_sorting_tree(t, t.add(), (a, b, c))
    return t


def materialize_equations(t: EquationTree, coords: Sequence[Coordinate], default: int = 0) -> list[tuple[int, ...]]:
    """Label each vertex with its inherited equations, filling the rest with ``default``."""
    out = []
    for v in range(len(t)):
        inh = t.inherited(v)
        out.append(tuple(inh.get(c, default) for c in coords))
    return out


# the binary-tree reduction

SAT_UNIT_COUNT = 2 ** 156 * 3 ** 64
UNSAT_UNIT_COUNT = 2 ** 136 * 3 ** 76


@dataclass(frozen=True)
class UnitTree:
    """A concrete unit subtree: binary shape with root 0 and leaf labels over its own coordinates."""

    children: tuple[tuple[int, int] | None, ...]
    labels: dict[int, str]


@dataclass(frozen=True)
class UnitGadgetDescriptor:
    """Interface to the external unit subtree; only its size and scenario counts are known."""

    leaf_count: int = 248
    coord_count: int = 151
    sat_count: int = SAT_UNIT_COUNT
    unsat_count: int = UNSAT_UNIT_COUNT
    provider: Callable[[tuple[int, int, int]], UnitTree] | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("leaf_count", "coord_count", "sat_count", "unsat_count"):
            v = getattr(self, name)
            if not isinstance(v, int) or v <= 0:
                raise ValueError(f"{name} must be a positive integer")
        if self.coord_count < 3:
            raise ValueError("a unit needs its three variable coordinates")

    @property
    def extra_block(self) -> int:
        return self.coord_count - 3


def units_per_comb(n: int, k: int) -> int:
    return 16 * n * n + 8 * k * n


@dataclass(frozen=True)
class TreeSeparationVerdict:
    n: int
    k: int
    units_per_comb: int
    clauses: int
    ratio: Fraction
    log_ratio: float
    holds: bool
    unit_factor: Fraction
    printed_good_log_ratio: float
    printed_good_holds: bool

    def to_json(self) -> dict:
        return {
            "n": self.n, "k": self.k, "units_per_comb": self.units_per_comb, "clauses": self.clauses,
            "log_ratio": self.log_ratio, "holds": self.holds,
            "ratio_numerator_bits": self.ratio.numerator.bit_length(),
            "ratio_denominator_bits": self.ratio.denominator.bit_length(),
            "printed_good_log_ratio": self.printed_good_log_ratio,
            "printed_good_holds": self.printed_good_holds,
        }


def _flog(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def verify_tree_separation(n: int, k: int, unit: UnitGadgetDescriptor | None = None) -> TreeSeparationVerdict:
    """Exact check of 2^{2n} B_bad / B_good < 1.

    B_good uses the satisfying unit count per unit copy.  The variant that instead
    uses the unsatisfying count in B_good is reported alongside; it does not separate.
    """
    if n < 3:
        raise ValueError("the tree reduction needs n >= 3")
    if k < 0:
        raise ValueError("negative clause count")
    unit = unit or UnitGadgetDescriptor()
    U = units_per_comb(n, k)
    m = k + 4 * n
    S, X = unit.sat_count, unit.unsat_count
    ends = Fraction(math.factorial(2 * n - 6), math.factorial(n - 3) ** 2)  # binom(2n-6, n-3)
    unit_factor = Fraction(X, S) ** U
    ratio = 2 ** (2 * n) * ends ** m * unit_factor
    # B_good = ((n-3)!^2 X^U)^m instead: ratio = 2^{2n} binom^m (S/X)^{U(m-1)}
    printed_log = 2 * n * math.log(2) + m * _flog(ends) + U * (m - 1) * _flog(Fraction(S, X))
    return TreeSeparationVerdict(n, k, U, m, ratio, _flog(ratio), ratio < 1, unit_factor,
                                 printed_log, printed_log < 0)


@dataclass(frozen=True)
class UnitSlot:
    clause: int
    copy: int
    node: int
    coords: tuple[int, int, int]
    extra_start: int


@dataclass
class PsiSkeleton:
    n: int
    k: int
    shape: EquationTree
    layout: Layout
    pair_labels: dict[int, int]
    unit_slots: list[UnitSlot]
    clause_roots: list[int]
    verdict: TreeSeparationVerdict
    unit: UnitGadgetDescriptor
    tree: ParsimonyTree | None = None

    @property
    def units_per_comb(self) -> int:
        return units_per_comb(self.n, self.k)

    def leaf_label(self, v: int) -> LabeledBitString:
        return LabeledBitString(self.layout, self.pair_labels[v] << self.layout.t_extra)

    def fitch_sets(self, coord: int) -> list[frozenset[int]]:
        """Fitch sets with each unit slot standing in for its subtree root.

        A unit root has {0,1} on its three variable coordinates and {0} elsewhere.
        """
        t = self.shape
        slot_coords = {s.node: s.coords for s in self.unit_slots}
        B: list[frozenset[int]] = [frozenset()] * len(t)
        order = []
        stack = [0]
        while stack:
            v = stack.pop()
            order.append(v)
            if t.children[v]:
                stack.extend(t.children[v])
        for v in reversed(order):
            ch = t.children[v]
            if v in slot_coords:
                B[v] = frozenset((0, 1)) if coord in slot_coords[v] else frozenset((0,))
            elif ch is None:
                bit = (self.pair_labels[v] >> (2 * self.n - 1 - coord)) & 1 if coord < 2 * self.n else 0
                B[v] = frozenset((bit,))
            else:
                a, b = B[ch[0]], B[ch[1]]
                B[v] = (a & b) or (a | b)
        return B

    def fitch_condition(self, coord: int) -> bool:
        return _condition_from_sets(self.shape.children, self.fitch_sets(coord))


def _clause_coordinates(clause: tuple[int, int, int], ci: int, k: int, n: int):
    """(coordinates fixed at the first split, upper sorting coords, lower sorting coords)."""
    X = lambda j: 2 * (j - 1)          # noqa: E731
    Y = lambda j: 2 * (j - 1) + 1      # noqa: E731
    if ci < k:
        vs = [abs(x) for x in clause]
        return [j for j in range(1, n + 1) if j not in vs], [Y(j) for j in vs], [X(j) for j in vs]
    a = (ci - k) // 4 + 1
    a1 = a % n + 1
    a2 = a1 % n + 1
    return ([j for j in range(1, n + 1) if j not in (a, a1, a2)],
            [Y(a1), X(a2), Y(a2)], [X(a), Y(a), X(a1)])


def _comb(t: EquationTree, root: int, count: int) -> list[int]:
    """Turn ``root`` into a comb with ``count`` slots; return slot vertices in comb order."""
    slots = []
    v = root
    for _ in range(count - 1):
        a = t.add({}, v)
        b = t.add({}, v)
        t.set_children(v, a, b)
        slots.append(a)
        v = b
    slots.append(v)
    return slots


def build_psi_skeleton(gamma: D3Formula, unit: UnitGadgetDescriptor | None = None,
                       concrete: bool = False) -> PsiSkeleton:
    """Tree shape, inherited leaf labels and unit placement for an augmented formula."""
    unit = unit or UnitGadgetDescriptor()
    orig, k = split_augmented(gamma)
    n = orig.n
    if n < 3:
        raise TreeError("the tree reduction needs n >= 3")
    if concrete and unit.provider is None:
        raise TreeError("concrete leaves requested but the unit descriptor has no provider")
    U = units_per_comb(n, k)
    m = k + 4 * n
    E = unit.extra_block
    layout = Layout(n, E * U * m)
    t = EquationTree()
    top = _comb(t, t.add(), m) if m > 1 else [0]
    pair_labels: dict[int, int] = {}
    slots: list[UnitSlot] = []
    roots = []
    for ci, clause in enumerate(gamma.clauses):
        rho = top[ci]
        roots.append(rho)
        outside, upper, lower = _clause_coordinates(clause, ci, k, n)
        side = []
        for bit in (0, 1):
            eqs = {}
            for j in outside:
                eqs[2 * (j - 1)] = bit
                eqs[2 * (j - 1) + 1] = bit
            side.append(t.add(eqs, rho))
        t.set_children(rho, *side)
        hangs = []
        for s in side:
            hangs += _hang_sorting_tree(t, s, upper)
        for h in hangs[1:]:
            for leaf in _hang_sorting_tree(t, h, lower):
                eq = t.inherited(leaf)
                if len(eq) != 2 * n:
                    raise AssertionError("leaf equations do not fix every pair coordinate")
                pair_labels[leaf] = sum(b << (2 * n - 1 - c) for c, b in eq.items())
        for j, node in enumerate(_comb(t, hangs[0], U)):
            slots.append(UnitSlot(ci, j, node, tuple(lower), (ci * U + j) * E))
    sk = PsiSkeleton(n, k, t, layout, pair_labels, slots, roots, verify_tree_separation(n, k, unit), unit)
    if concrete:
        sk.tree = _materialize_units(sk, gamma)
    return sk


def _materialize_units(sk: PsiSkeleton, gamma: D3Formula) -> ParsimonyTree:
    unit = sk.unit
    E = unit.extra_block
    T = sk.layout.t_extra
    L = sk.layout.length
    children = list(sk.shape.children)
    labels = {v: sk.leaf_label(v) for v in sk.pair_labels}
    for slot in sk.unit_slots:
        u = unit.provider(gamma.clauses[slot.clause])
        ids = {0: slot.node}
        leaves = [v for v, ch in enumerate(u.children) if ch is None]
        if len(leaves) != unit.leaf_count:
            raise TreeError(f"unit provider returned {len(leaves)} leaves, expected {unit.leaf_count}")
        for v in range(1, len(u.children)):
            ids[v] = len(children)
            children.append(None)
        for v, ch in enumerate(u.children):
            if ch is not None:
                children[ids[v]] = (ids[ch[0]], ids[ch[1]])
        for v in leaves:
            bits = u.labels[v]
            if len(bits) != unit.coord_count:
                raise TreeError("unit label length differs from the descriptor")
            val = 0
            for c, b in zip(slot.coords, bits[:3]):
                if b == "1":
                    val |= 1 << (L - 1 - c)
            if E:
                val |= int(bits[3:], 2) << (T - slot.extra_start - E)
            labels[ids[v]] = LabeledBitString(sk.layout, val)
    return ParsimonyTree(children, labels)
