"""Three-literal CNF formulas: DIMACS input, the distinct-variable rewrite,
XOR augmentation and an exhaustive model counter.

Literals are signed ints as in DIMACS: ``3`` is v3 and ``-3`` its negation.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .median import SizeGuardError, TruthAssignment

BRUTE_FORCE_MAX_VARS = 26


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class CNF3:
    """Width-3 clauses that may repeat a literal or contain v and not-v."""

    n: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.n < 0:
            raise FormulaError("negative variable count")
        for c in self.clauses:
            if len(c) != 3:
                raise FormulaError(f"clause {c} does not have three literals")
            for lit in c:
                if lit == 0 or abs(lit) > self.n:
                    raise FormulaError(f"literal {lit} out of range for n={self.n}")

    @property
    def k(self) -> int:
        return len(self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n} {self.k}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def clause_is_d3(c: tuple[int, ...]) -> bool:
    return len(c) == 3 and len({abs(x) for x in c}) == 3


@dataclass(frozen=True)
class D3Formula(CNF3):
    """Every clause has three distinct variables."""

    def __post_init__(self):
        super().__post_init__()
        for c in self.clauses:
            if not clause_is_d3(c):
                raise FormulaError(f"clause {c} does not have three distinct variables")

    def variables_used(self) -> set[int]:
        return {abs(x) for c in self.clauses for x in c}

    def sign_pattern(self, i: int) -> str:
        return "".join("+" if x > 0 else "-" for x in self.clauses[i])

    def satisfied_by(self, a: TruthAssignment) -> bool:
        return all(any(a[abs(x)] == (x > 0) for x in c) for c in self.clauses)

    def clause_satisfied(self, i: int, a: TruthAssignment) -> bool:
        return any(a[abs(x)] == (x > 0) for x in self.clauses[i])


def parse_dimacs(text: str) -> CNF3:
    n = k = None
    clauses: list[tuple[int, ...]] = []
    cur: list[int] = []
    for raw in text.splitlines():
        ln = raw.strip()
        if not ln or ln.startswith("c") or ln.startswith("%"):
            continue
        if ln.startswith("p"):
            parts = ln.split()
            if n is not None or len(parts) != 4 or parts[1] != "cnf":
                raise FormulaError(f"malformed header: {ln!r}")
            try:
                n, k = int(parts[2]), int(parts[3])
            except ValueError:
                raise FormulaError(f"malformed header: {ln!r}") from None
            if n < 0 or k < 0:
                raise FormulaError(f"malformed header: {ln!r}")
            continue
        if n is None:
            raise FormulaError("clause before header")
        for tok in ln.split():
            try:
                lit = int(tok)
            except ValueError:
                raise FormulaError(f"bad literal {tok!r}") from None
            if lit == 0:
                if not cur:
                    raise FormulaError("empty clause")
                clauses.append(tuple(cur))
                cur = []
            else:
                if abs(lit) > n:
                    raise FormulaError(f"variable {abs(lit)} out of range 1..{n}")
                cur.append(lit)
    if n is None:
        raise FormulaError("missing 'p cnf' header")
    if cur:
        clauses.append(tuple(cur))
    if len(clauses) != k:
        raise FormulaError(f"header declares {k} clauses, found {len(clauses)}")
    padded = []
    for c in clauses:
        if len(c) > 3:
            raise FormulaError(f"clause {c} is wider than 3")
        if len(c) == 1:
            c = (c[0], c[0], c[0])
        elif len(c) == 2:
            c = (c[0], c[1], c[1])
        padded.append(c)
    return CNF3(n, tuple(padded))


def _fresh(n: int, used: set[int], count: int) -> list[int]:
    out = [v for v in range(1, n + 1) if v not in used][:count]
    if len(out) < count:
        raise FormulaError("not enough variables for the rewrite")
    return out


def to_d3cnf(f: CNF3) -> tuple[D3Formula, int]:
    """Rewrite into distinct-variable clauses.  Returns (formula, 2**dropped_vars)."""
    if f.n < 3:
        raise FormulaError("the rewrite needs at least three variables")
    out: list[tuple[int, int, int]] = []
    for c in f.clauses:
        lits = list(dict.fromkeys(c))
        if any(-x in lits for x in lits):
            continue
        if len(lits) == 3:
            out.append(tuple(lits))
        elif len(lits) == 2:
            a, b = lits
            (g,) = _fresh(f.n, {abs(a), abs(b)}, 1)
            out += [(a, b, g), (a, b, -g)]
        else:
            (a,) = lits
            b, g = _fresh(f.n, {abs(a)}, 2)
            out += [(a, b, g), (a, -b, g), (a, b, -g), (a, -b, -g)]
    used = sorted({abs(x) for c in out for x in c})
    remap = {v: i + 1 for i, v in enumerate(used)}
    clauses = tuple(tuple((1 if x > 0 else -1) * remap[abs(x)] for x in c) for c in out)
    return D3Formula(len(used), clauses), 1 << (f.n - len(used))


def _count_range(f: CNF3, lo: int, hi: int) -> int:
    total = 0
    chunk = 1 << 20
    for a in range(lo, hi, chunk):
        b = min(hi, a + chunk)
        idx = np.arange(a, b, dtype=np.int64)
        ok = np.ones(b - a, dtype=bool)
        for c in f.clauses:
            sat = np.zeros(b - a, dtype=bool)
            for x in c:
                bit = ((idx >> (abs(x) - 1)) & 1).astype(bool)
                sat |= bit if x > 0 else ~bit
            ok &= sat
        total += int(ok.sum())
    return total


def brute_force_count(f: CNF3, jobs: int = 1) -> int:
    """Count satisfying assignments by scanning all 2**n of them."""
    if f.n > BRUTE_FORCE_MAX_VARS:
        raise SizeGuardError(f"exhaustive count refused for n={f.n} > {BRUTE_FORCE_MAX_VARS}")
    total = 1 << f.n
    if jobs <= 1 or total < 1 << 22:
        return _count_range(f, 0, total)
    step = -(-total // jobs)
    bounds = list(range(0, total, step))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        parts = ex.map(_count_range, [f] * len(bounds), bounds, [min(total, b + step) for b in bounds])
        return sum(parts)


def xor_block(i: int, n: int) -> list[tuple[int, int, int]]:
    """Four clauses forcing v_i != w_i, padded with v_{i+1} (cyclically)."""
    v, w, u = i, n + i, i % n + 1
    return [(v, w, u), (v, w, -u), (-v, -w, u), (-v, -w, -u)]


def xor_augment(f: D3Formula) -> D3Formula:
    """Add variables w_i = n+i and clauses forcing w_i = not v_i."""
    if f.n < 2:
        raise FormulaError("augmentation needs at least two variables")
    clauses = list(f.clauses)
    for i in range(1, f.n + 1):
        clauses += xor_block(i, f.n)
    return D3Formula(2 * f.n, tuple(clauses))


def split_augmented(f: D3Formula) -> tuple[D3Formula, int]:
    """Inverse of xor_augment: recover the original formula; raise if f is not of that form."""
    if f.n % 2 or f.n < 4:
        raise FormulaError("not an augmented formula: odd or too few variables")
    n = f.n // 2
    k = f.k - 4 * n
    if k < 0:
        raise FormulaError("not an augmented formula: too few clauses")
    tail = [tuple(c) for c in f.clauses[k:]]
    expect = [c for i in range(1, n + 1) for c in xor_block(i, n)]
    if tail != expect:
        raise FormulaError("not an augmented formula: trailing XOR blocks do not match")
    head = f.clauses[:k]
    if any(abs(x) > n for c in head for x in c):
        raise FormulaError("not an augmented formula: original clauses mention w variables")
    return D3Formula(n, head), k


def assignment_from_int(a: int, n: int) -> TruthAssignment:
    return TruthAssignment(tuple(bool((a >> i) & 1) for i in range(n)))
