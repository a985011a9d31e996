"""String gadgets that encode a distinct-variable 3-CNF formula.

Each clause becomes a block of strings read from a table of rows (support bits on
the clause's six coordinates, a fill bit for all other pairs, and a count of extra
ones).  Around the clause blocks sit the "alpha" and "beta" strings that penalise
medians which are not of the form {01,10}^n.

Products of weights over a median's distances are kept symbolically as maps
``offset -> exponent`` standing for prod f(n + offset) ** exponent.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .cnf import D3Formula, FormulaError
from .partition import FACTORIAL, WeightFunction, is_prime
from .strings import BlueprintString, StringBlueprint, StringMultiset, materialize

# column headings M1..M8: the eight {01,10}^3 patterns, M8 = all variables false
HEADINGS = ("101010", "101001", "100110", "011010", "100101", "011001", "010110", "010101")
TABLES = {"table1": 50, "table3": 26}
EXTRA_SUMS = {"table1": 75, "table3": 39}

# distance multisets relative to n, for the satisfying columns and for M8
EXPECTED_COLUMNS = {
    "table1": ({-1: 7, 0: 6, 1: 12, 2: 12, 3: 6, 4: 7},
               {-2: 1, -1: 6, 0: 3, 1: 15, 2: 15, 3: 3, 4: 6, 5: 1}),
    "table3": ({-2: 1, -1: 3, 0: 3, 1: 6, 2: 6, 3: 3, 4: 3, 5: 1},
               {-1: 4, 0: 6, 1: 3, 2: 3, 3: 6, 4: 4}),
}


class GadgetError(ValueError):
    pass


class ChecksumError(RuntimeError):
    pass


def _data_text(name: str) -> str:
    return resources.files("medz").joinpath("data").joinpath(name).read_text()


@lru_cache(maxsize=None)
def _checksums() -> dict[str, str]:
    out = {}
    for ln in _data_text("SHA256SUMS").splitlines():
        if ln.strip():
            digest, fname = ln.split()
            out[fname] = digest
    return out


def read_data_file(name: str) -> str:
    text = _data_text(name)
    digest = hashlib.sha256(text.encode()).hexdigest()
    if _checksums().get(name) != digest:
        raise ChecksumError(f"checksum mismatch for {name}")
    return text


@dataclass(frozen=True)
class GadgetRow:
    row: int
    support: str
    kappa: int
    extra: int

    def __post_init__(self):
        if len(self.support) != 6 or set(self.support) - {"0", "1"}:
            raise GadgetError(f"row {self.row}: bad support bits {self.support!r}")
        if self.kappa not in (0, 1) or self.extra < 0:
            raise GadgetError(f"row {self.row}: bad fill or extra count")


def _table_name(table: str | int) -> str:
    key = str(table)
    aliases = {"50": "table1", "26": "table3", "50-row": "table1", "26-row": "table3"}
    key = aliases.get(key, key)
    if key not in TABLES:
        raise GadgetError(f"unknown table {table!r}")
    return key


@lru_cache(maxsize=None)
def load_table(table: str | int = "table1") -> tuple[GadgetRow, ...]:
    name = _table_name(table)
    rows = tuple(
        GadgetRow(int(r["row"]), r["support"], int(r["kappa"]), int(r["extra"]))
        for r in csv.DictReader(io.StringIO(read_data_file(f"{name}.csv")))
    )
    if len(rows) != TABLES[name]:
        raise GadgetError(f"{name} has {len(rows)} rows, expected {TABLES[name]}")
    if sum(r.extra for r in rows) != EXTRA_SUMS[name]:
        raise GadgetError(f"{name} extra column sums to {sum(r.extra for r in rows)}")
    return rows


@lru_cache(maxsize=None)
def load_printed(table: str | int = "table1") -> tuple[tuple[str, ...], ...]:
    name = _table_name(table)
    rows = list(csv.DictReader(io.StringIO(read_data_file(f"{name}_printed.csv"))))
    return tuple(tuple(r[f"M{j}"] for j in range(1, 9)) for r in rows)


@lru_cache(maxsize=None)
def load_key() -> dict[str, tuple[tuple[int, str], ...]]:
    """Sign pattern -> six slots, each (literal position in clause, 'x' or 'y')."""
    out = {}
    for r in csv.DictReader(io.StringIO(read_data_file("key.csv"))):
        slots = tuple((int(tok[1]), tok[0]) for tok in r["slot_order"].split())
        out[r["sign_pattern"]] = slots
    if len(out) != 8:
        raise GadgetError("key table must list all eight sign patterns")
    return out


def complementary_pairs(table: str | int = "table1") -> list[tuple[int, int]]:
    """Match rows into pairs complementary on support bits and fill bit."""
    rows = load_table(table)
    flip = str.maketrans("01", "10")
    free: dict[tuple[str, int], list[int]] = {}
    for r in rows:
        free.setdefault((r.support, r.kappa), []).append(r.row)
    pairs = []
    seen = set()
    for r in rows:
        if r.row in seen:
            continue
        free[(r.support, r.kappa)].remove(r.row)
        mates = free.get((r.support.translate(flip), 1 - r.kappa))
        if not mates:
            raise GadgetError(f"row {r.row} has no complementary partner")
        mate = mates.pop(0)
        seen |= {r.row, mate}
        pairs.append((r.row, mate))
    return pairs


# ---------------------------------------------------------------- blueprints

def _pair_bit(n: int, coord: int) -> int:
    return 1 << (2 * n - 1 - coord)


def clause_block(f: D3Formula, i: int, table: str | int = "table1", q: int = 0) -> StringBlueprint:
    """One blueprint string per table row for clause i (0-based), extras shifted by q."""
    if q < 0:
        raise GadgetError("extra offset must be nonnegative")
    clause = f.clauses[i]
    if len({abs(x) for x in clause}) != 3:
        raise FormulaError(f"clause {clause} does not have three distinct variables")
    n = f.n
    slots = load_key()[f.sign_pattern(i)]
    coords = [2 * (abs(clause[pos]) - 1) + (0 if xy == "x" else 1) for pos, xy in slots]
    support_mask = sum(_pair_bit(n, c) for c in coords)
    full = (1 << (2 * n)) - 1
    out = []
    for r in load_table(table):
        bits = full & ~support_mask if r.kappa else 0
        for c, b in zip(coords, r.support):
            if b == "1":
                bits |= _pair_bit(n, c)
        out.append(BlueprintString(bits, r.extra + q))
    return StringBlueprint(n, tuple(out))


def alpha_pair(n: int, extra: int, copies: int = 1) -> StringBlueprint:
    full = (1 << (2 * n)) - 1
    rows = (BlueprintString(full, extra),) * copies + (BlueprintString(0, extra),) * copies
    return StringBlueprint(n, rows)


def beta_pair(n: int, j: int, extra: int, copies: int = 1) -> StringBlueprint:
    """beta_j (pair j all ones, rest zero) and its complement; j is 1-based."""
    full = (1 << (2 * n)) - 1
    b = _pair_bit(n, 2 * (j - 1)) | _pair_bit(n, 2 * (j - 1) + 1)
    rows = (BlueprintString(b, extra),) * copies + (BlueprintString(full ^ b, extra),) * copies
    return StringBlueprint(n, rows)


@dataclass
class Gadget:
    """Named blueprint parts; strings are materialised in part order."""

    n: int
    k: int
    parts: list[tuple[str, StringBlueprint]]
    kind: str = ""
    q: int | None = None
    printed_t: int | None = None

    @property
    def blueprint(self) -> StringBlueprint:
        return StringBlueprint.concat(self.n, (bp for _, bp in self.parts))

    @property
    def t(self) -> int:
        return self.blueprint.extras_needed

    @property
    def size(self) -> int:
        return sum(len(bp) for _, bp in self.parts)

    @property
    def length(self) -> int:
        return 2 * self.n + self.t

    def multiset(self) -> StringMultiset:
        return materialize(self.blueprint, self.t)

    def part(self, name: str) -> StringBlueprint:
        for nm, bp in self.parts:
            if nm == name:
                return bp
        raise KeyError(name)


def sharp_extra_length(n: int, k: int, q: int) -> int:
    return 2 * (q + 4) + 2 * n * (q + 3) + k * (75 + 50 * q)


def build_sharp_gadget(f: D3Formula, p: int) -> Gadget:
    if f.n < 3:
        raise GadgetError("need at least three variables")
    if not is_prime(p):
        raise GadgetError(f"{p} is not prime")
    q = p - (f.n + 5)
    if q < 0:
        raise GadgetError(f"prime {p} is below n+5 = {f.n + 5}")
    parts = [("A", alpha_pair(f.n, q + 4))]
    parts += [(f"B{j}", beta_pair(f.n, j, q + 3)) for j in range(1, f.n + 1)]
    parts += [(f"C{i + 1}", clause_block(f, i, "table1", q)) for i in range(f.k)]
    g = Gadget(f.n, f.k, parts, kind="sharp", q=q)
    assert g.t == sharp_extra_length(f.n, f.k, q)
    return g


def K_exponents(n: int, k: int) -> dict[int, int]:
    """Exponents of (p - d)! in the weight of a satisfying median, keyed by d."""
    return {6: 7 * k, 5: 6 * k, 4: 12 * k, 3: 12 * k, 2: 6 * k + 2 * n, 1: 7 * k + 2}


@dataclass(frozen=True)
class KValue:
    p: int
    residue: int
    inverse: int
    exact: int | None = None


def K_of_p(n: int, k: int, p: int, exact: bool = False) -> KValue:
    if p <= 6:
        raise GadgetError("K(p) needs p > 6")
    if not is_prime(p):
        raise GadgetError(f"{p} is not prime")
    if p < n + 5:
        raise GadgetError(f"prime {p} is below n+5")
    facts = [1] * p
    for i in range(1, p):
        facts[i] = facts[i - 1] * i % p
    r = 1
    for d, e in K_exponents(n, k).items():
        r = r * pow(facts[p - d], e, p) % p
    val = None
    if exact:
        val = 1
        for d, e in K_exponents(n, k).items():
            val *= math.factorial(p - d) ** e
    return KValue(p, r, pow(r, -1, p), val)


# ---------------------------------------------------------------- threshold gadgets

VARIANTS = {
    # copies of alpha^{(+a)} (and its complement), then beta_i^{(+a)}, then the clause table
    "up": ({0: 1, 1: 8, 2: 18, 3: 18, 4: 8, 5: 1}, {1: 1, 2: 6, 3: 6, 4: 1}, "table1"),
    "up2": ({1: 4, 2: 14, 3: 14, 4: 4}, {2: 6, 3: 6}, "table3"),
}


def printed_threshold_length(n: int, k: int, variant: str) -> int:
    """String length as stated for the construction (see build_threshold_gadget)."""
    if variant == "up":
        return 2 * n + 260 * k + 35 * k * n
    return 2 * n + 245 * k + 60 * k * n


def build_threshold_blueprint(f: D3Formula, variant: str) -> Gadget:
    if variant not in VARIANTS:
        raise GadgetError(f"unknown variant {variant!r}")
    if f.n < 3:
        raise GadgetError("need at least three variables")
    a_sched, b_sched, table = VARIANTS[variant]
    n, k = f.n, f.k
    parts = [(f"A+{a}", alpha_pair(n, a, c * k)) for a, c in a_sched.items()]
    for j in range(1, n + 1):
        parts += [(f"B{j}+{a}", beta_pair(n, j, a, c * k)) for a, c in b_sched.items()]
    parts += [(f"C{i + 1}", clause_block(f, i, table, 1)) for i in range(k)]
    return Gadget(n, k, parts, kind=variant, printed_t=printed_threshold_length(n, k, variant) - 2 * n)


# symbolic products prod f(n+a)^e

Mono = dict[int, int]


def mono_mul(*ms: Mono) -> Mono:
    out: Counter = Counter()
    for m in ms:
        out.update(m)
    return {a: e for a, e in sorted(out.items()) if e}


def mono_pow(m: Mono, r: int) -> Mono:
    return {a: e * r for a, e in m.items() if e * r}


def mono_div(a: Mono, b: Mono) -> Mono:
    return mono_mul(a, mono_pow(b, -1))


def mono_eval(m: Mono, n: int, w: WeightFunction) -> Fraction:
    num, den = 1, 1
    for a, e in m.items():
        v = w.exact(n + a)
        if e > 0:
            num *= v ** e
        else:
            den *= v ** (-e)
    if den == 0:
        raise ZeroDivisionError("weight vanishes in a denominator")
    return Fraction(num) / Fraction(den)


def mono_log(m: Mono, n: int, w: WeightFunction) -> float:
    return sum(e * w.log(n + a) for a, e in m.items())


def table_column_offsets(table: str | int, column: int, extra_shift: int = 0) -> Counter:
    """Distances (relative to n) from the column-heading median to each row, as a multiset."""
    head = HEADINGS[column]
    out: Counter = Counter()
    for r in load_table(table):
        h = sum(a != b for a, b in zip(r.support, head))
        out[h - 3 + r.extra + extra_shift] += 1
    return out


def min_pair_mono(table: str | int, extra_shift: int) -> Mono:
    """Lower bound for a clause block: each complementary pair is at best balanced."""
    rows = {r.row: r for r in load_table(table)}
    out: Counter = Counter()
    for a, b in complementary_pairs(table):
        s = rows[a].extra + rows[b].extra + 2 * extra_shift
        out[s // 2] += 1
        out[s - s // 2] += 1
    return dict(sorted(out.items()))


@dataclass
class SeparationReport:
    variant: str
    n: int
    k: int
    weight: str
    quantities: dict[str, Mono]
    h: dict[str, Fraction]
    log_h: dict[str, float]
    hypothesis_ratio: Fraction
    gamma_ratio: Fraction
    verdicts: dict[str, bool]
    log_convex: bool
    second_differences: list[float] = field(default_factory=list)

    @property
    def separated(self) -> bool:
        return all(self.verdicts[k] for k in ("h3<h2", "h3<h1", "h3<h0"))

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "n": self.n,
            "k": self.k,
            "weight": self.weight,
            "h": {k: str(v) for k, v in self.h.items()},
            "log_h": self.log_h,
            "hypothesis_ratio": str(self.hypothesis_ratio),
            "gamma_ratio": str(self.gamma_ratio),
            "verdicts": self.verdicts,
            "log_convex": self.log_convex,
            "separated": self.separated,
        }


def separation_quantities(n: int, k: int, variant: str) -> dict[str, Mono]:
    if variant not in VARIANTS:
        raise GadgetError(f"unknown variant {variant!r}")
    a_sched, b_sched, table = VARIANTS[variant]
    alpha_good = {a: 2 * c * k for a, c in a_sched.items()}
    alpha_bad = mono_mul(*({a - 1: c * k, a + 1: c * k} for a, c in a_sched.items()))
    beta_good = {a: 2 * c * k for a, c in b_sched.items()}
    beta_bad = mono_mul(*({a - 2: c * k, a + 2: c * k} for a, c in b_sched.items()))
    gamma_good = dict(sorted(table_column_offsets(table, 0, 1).items()))
    gamma_bad = dict(sorted(table_column_offsets(table, 7, 1).items()))
    gamma_min = min_pair_mono(table, 1)
    q = {
        "alpha_good": alpha_good, "alpha_bad": alpha_bad,
        "beta_good": beta_good, "beta_bad": beta_bad,
        "gamma_good": gamma_good, "gamma_bad": gamma_bad, "gamma_min": gamma_min,
    }
    q["h3"] = mono_mul(alpha_good, mono_pow(beta_good, n), mono_pow(gamma_good, k))
    q["h2"] = mono_mul(alpha_good, mono_pow(beta_good, n), gamma_bad, mono_pow(gamma_good, k - 1))
    q["h1"] = mono_mul(alpha_good, beta_bad, mono_pow(beta_good, n - 1), mono_pow(gamma_min, k))
    q["h0"] = mono_mul(alpha_bad, mono_pow(beta_good, n), mono_pow(gamma_min, k))
    return q


HYPOTHESIS = {-2: 1, 1: 3, 2: 3, 5: 1, -1: -1, 0: -3, 3: -3, 4: -1}


def hypothesis_ratio(w: WeightFunction, n: int) -> Fraction:
    """f(n-2) f(n+1)^3 f(n+2)^3 f(n+5) / (f(n-1) f(n)^3 f(n+3)^3 f(n+4))."""
    return mono_eval(HYPOTHESIS, n, w)


def log_second_differences(w: WeightFunction, lo: int, hi: int) -> list[float]:
    return [w.log(x + 1) - 2 * w.log(x) + w.log(x - 1) for x in range(lo + 1, hi)]


def strictly_log_convex(w: WeightFunction, lo: int, hi: int) -> bool:
    """Exact check that f(x-1) f(x+1) > f(x)^2 for lo < x < hi, with f > 0 throughout."""
    vals = [Fraction(w.exact(x)) for x in range(lo, hi + 1)]
    if any(v <= 0 for v in vals):
        return False
    return all(vals[i - 1] * vals[i + 1] > vals[i] ** 2 for i in range(1, len(vals) - 1))


def product_inequality(w: WeightFunction, x: int, y: int, a: int) -> bool:
    """f(x) f(y) < f(x-a) f(y+a), the spreading inequality for log-convex f."""
    return Fraction(w.exact(x)) * w.exact(y) < Fraction(w.exact(x - a)) * w.exact(y + a)


def min_product_split(w: WeightFunction, total: int) -> tuple[int, int]:
    """The split a+b=total (a <= b) minimising f(a) f(b); ties go to the most balanced."""
    best = None
    for a in range(total // 2, -1, -1):
        v = Fraction(w.exact(a)) * w.exact(total - a)
        if best is None or v < best[0]:
            best = (v, a)
    return best[1], total - best[1]


def verify_separation(w: WeightFunction, n: int, k: int, variant: str = "up") -> SeparationReport:
    if n < 3 or k < 1:
        raise GadgetError("need n >= 3 and k >= 1")
    q = separation_quantities(n, k, variant)
    lo = min(a for m in q.values() for a in m) + n
    hi = 2 * n + 6
    for x in range(max(lo - 1, 0), hi + 1):
        if w.exact(x) <= 0:
            raise GadgetError(f"weight is not positive at {x}")
    h = {name: mono_eval(q[name], n, w) for name in ("h0", "h1", "h2", "h3")}
    log_h = {name: mono_log(q[name], n, w) for name in ("h0", "h1", "h2", "h3")}
    verdicts = {
        "h3<h2": h["h3"] < h["h2"],
        "h3<h1": h["h3"] < h["h1"],
        "h3<h0": h["h3"] < h["h0"],
        "h2<h1": h["h2"] < h["h1"],
        "h2<=h0": h["h2"] <= h["h0"],
    }
    grat = mono_eval(mono_div(q["gamma_bad"], q["gamma_good"]), n, w)
    verdicts["hypothesis"] = grat > 1
    return SeparationReport(
        variant=variant, n=n, k=k, weight=w.describe(), quantities=q, h=h, log_h=log_h,
        hypothesis_ratio=hypothesis_ratio(w, n), gamma_ratio=grat, verdicts=verdicts,
        log_convex=strictly_log_convex(w, max(lo - 1, 0), hi),
        second_differences=log_second_differences(w, max(lo - 1, 0), hi),
    )


def build_threshold_gadget(f: D3Formula, variant: str = "up",
                           w: WeightFunction = FACTORIAL) -> tuple[Gadget, SeparationReport]:
    g = build_threshold_blueprint(f, variant)
    return g, verify_separation(w, f.n, f.k, variant)


# ---------------------------------------------------------------- table verification

def _printed_offset(entry: str) -> int | None:
    """Offset of a printed entry such as 'n+2' or 'n-3'; None for a bare number."""
    e = entry.strip().replace("−", "-")
    if e == "n":
        return 0
    if e.startswith("n"):
        return int(e[1:])
    return None


def fmt_offset(a: int) -> str:
    return "n" if a == 0 else f"n{a:+d}"


def verify_table(table: str | int = "table1", n: int | None = None) -> dict:
    name = _table_name(table)
    rows = load_table(name)
    printed = load_printed(name)
    sat, unsat = EXPECTED_COLUMNS[name]
    typos = []
    columns = {}
    for j, head in enumerate(HEADINGS):
        col: Counter = Counter()
        for r, pr in zip(rows, printed):
            rec = sum(a != b for a, b in zip(r.support, head)) - 3 + r.extra
            col[rec] += 1
            if _printed_offset(pr[j]) != rec:
                entry = {"row": r.row, "column": f"M{j + 1}", "printed": pr[j], "recomputed": fmt_offset(rec)}
                if n is not None:
                    entry["recomputed_value"] = n + rec
                typos.append(entry)
        expected = unsat if j == 7 else sat
        columns[f"M{j + 1}"] = {
            "multiset": {fmt_offset(a): c for a, c in sorted(col.items())},
            "expected": "unsatisfied" if j == 7 else "satisfied",
            "matches": dict(col) == expected,
        }
    return {
        "table": name,
        "rows": len(rows),
        "extra_sum": sum(r.extra for r in rows),
        "typos": typos,
        "columns": columns,
        "multisets_match": all(c["matches"] for c in columns.values()),
    }


KNOWN_TYPOS = {("table1", 15, "M1"), ("table1", 50, "M8")}


def verify_distance_tables(n: int | None = None) -> dict:
    reports = {name: verify_table(name, n) for name in TABLES}
    found = {(name, t["row"], t["column"]) for name, rep in reports.items() for t in rep["typos"]}
    return {
        "tables": reports,
        "known_typos": sorted(f"{t}:{r}:{c}" for t, r, c in KNOWN_TYPOS),
        "typos_match_known": found == KNOWN_TYPOS,
        "unexpected_typos": sorted(f"{t}:{r}:{c}" for t, r, c in found - KNOWN_TYPOS),
        "multisets_match": all(r["multisets_match"] for r in reports.values()),
    }
