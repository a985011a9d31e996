"""Counting satisfying assignments through factorial partition sums modulo primes.

For each prime p the sharp gadget D(p) is built and T(p), the sum over all 2^{2n}
medians of prod H!, is reduced mod p.  Only medians encoding satisfying assignments
survive the reduction, each contributing K(p), so gamma = T(p) / K(p) mod p.  The
residues for enough primes are combined by the Chinese remainder theorem.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cnf import CNF3, D3Formula, to_d3cnf
from .gadget import K_of_p, build_sharp_gadget
from .median import SizeGuardError

DEFAULT_MAX_PAIR_BITS = 20


def primes_up_to(limit: int) -> list[int]:
    if limit < 2:
        return []
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return np.flatnonzero(sieve).tolist()


@dataclass(frozen=True)
class PrimePlan:
    mode: str
    primes: tuple[int, ...]

    @property
    def product(self) -> int:
        return math.prod(self.primes)

    @property
    def product_log2(self) -> float:
        return sum(math.log2(p) for p in self.primes)


def select_primes(n: int, mode: str = "practical") -> PrimePlan:
    if n < 3:
        raise ValueError("prime selection needs n >= 3")
    if mode == "theoretical":
        lo = max(300, n + 5)
        plan = PrimePlan(mode, tuple(p for p in primes_up_to(5 * lo) if p > lo))
    elif mode == "practical":
        start = max(7, n + 5)
        chosen: list[int] = []
        limit = 2 * start + 16
        while math.prod(chosen) <= 1 << n:
            chosen = []
            for p in primes_up_to(limit):
                if p < start:
                    continue
                chosen.append(p)
                if math.prod(chosen) > 1 << n:
                    break
            limit *= 2
        plan = PrimePlan(mode, tuple(chosen))
    else:
        raise ValueError(f"unknown prime mode {mode!r}")
    if plan.product <= 1 << n:
        raise AssertionError("prime product does not exceed 2^n")
    return plan


def crt(residues: list[int], moduli: list[int]) -> tuple[int, int]:
    """Garner-style combination; returns (x, M) with 0 <= x < M."""
    x, M = 0, 1
    for r, m in zip(residues, moduli):
        if math.gcd(M, m) != 1:
            raise ValueError("moduli are not pairwise coprime")
        t = (r - x) * pow(M, -1, m) % m
        x += M * t
        M *= m
    return x % M, M


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


def _median_classes(f: D3Formula, mus: np.ndarray) -> np.ndarray:
    """0: fails property 1, 1: fails property 2, 2: fails property 3, 3: satisfying."""
    n = f.n
    p1 = _popcount(mus) == n
    pairs_differ = np.ones(len(mus), dtype=bool)
    xs = np.zeros((n, len(mus)), dtype=bool)
    for i in range(n):
        x = (mus >> (2 * n - 1 - 2 * i)) & 1
        y = (mus >> (2 * n - 2 - 2 * i)) & 1
        pairs_differ &= x != y
        xs[i] = x.astype(bool)
    sat = np.ones(len(mus), dtype=bool)
    for c in f.clauses:
        cs = np.zeros(len(mus), dtype=bool)
        for lit in c:
            v = xs[abs(lit) - 1]
            cs |= v if lit > 0 else ~v
        sat &= cs
    cls = np.zeros(len(mus), dtype=np.int64)
    cls[p1] = 1
    cls[p1 & pairs_differ] = 2
    cls[p1 & pairs_differ & sat] = 3
    return cls


class ResidueCheckError(AssertionError):
    pass


def T_of_p(f: D3Formula, p: int, debug: bool = False, max_pair_bits: int = DEFAULT_MAX_PAIR_BITS,
           chunk: int = 1 << 16) -> int:
    """Sum over medians mu in {0,1}^{2n} x 0^t of prod H(nu, mu)! mod p.

    Distances use the gadget's structure: pair-bit mismatches plus the extra count,
    so the t(p) extra coordinates are never materialised.
    """
    if 2 * f.n > max_pair_bits:
        raise SizeGuardError(f"2^{2 * f.n} median scan exceeds the cap of 2^{max_pair_bits}")
    g = build_sharp_gadget(f, p)
    rows = g.blueprint.rows
    pbits = np.array([r.pair_bits for r in rows], dtype=np.int64)
    extras = np.array([r.extra for r in rows], dtype=np.int64)
    dmax = 2 * f.n + int(extras.max())
    fact = np.zeros(dmax + 1, dtype=np.int64)
    acc = 1
    for d in range(dmax + 1):
        if d:
            acc = acc * d % p
        fact[d] = acc
    K = K_of_p(f.n, f.k, p).residue if debug else None
    total = 0
    size = 1 << (2 * f.n)
    for lo in range(0, size, chunk):
        mus = np.arange(lo, min(size, lo + chunk), dtype=np.int64)
        D = _popcount(mus[:, None] ^ pbits[None, :]) + extras[None, :]
        W = fact[D]
        h = np.ones(len(mus), dtype=np.int64)
        for j in range(W.shape[1]):
            h = h * W[:, j] % p
        if debug:
            cls = _median_classes(f, mus)
            bad = (cls < 3) & (h != 0)
            if bad.any():
                raise ResidueCheckError(f"median {int(mus[bad][0])} without the clause property is nonzero mod {p}")
            if ((cls == 3) & (h != K)).any():
                raise ResidueCheckError(f"satisfying median weight differs from K({p})")
        total = (total + int(h.sum() % p)) % p
    return total


@dataclass(frozen=True)
class PrimeReport:
    p: int
    q: int
    t: int
    T_mod_p: int
    K_mod_p: int
    gamma_mod_p: int

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "t": self.t, "T_mod_p": self.T_mod_p,
                "K_mod_p": self.K_mod_p, "gamma_mod_p": self.gamma_mod_p}


def prime_report(f: D3Formula, p: int, debug: bool = False,
                 max_pair_bits: int = DEFAULT_MAX_PAIR_BITS) -> PrimeReport:
    T = T_of_p(f, p, debug, max_pair_bits)
    K = K_of_p(f.n, f.k, p)
    q = p - (f.n + 5)
    t = 2 * (q + 4) + 2 * f.n * (q + 3) + f.k * (75 + 50 * q)
    return PrimeReport(p, q, t, T, K.residue, T * K.inverse % p)


@dataclass
class CountResult:
    gamma: int
    reduced: D3Formula
    multiplier: int
    plan: PrimePlan | None
    primes: list[PrimeReport] = field(default_factory=list)
    reduced_gamma: int = 0

    def to_json(self) -> dict:
        return {
            "gamma": str(self.gamma),
            "reduced_gamma": str(self.reduced_gamma),
            "multiplier": str(self.multiplier),
            "n": self.reduced.n,
            "k": self.reduced.k,
            "mode": self.plan.mode if self.plan else None,
            "primes": [r.to_json() for r in self.primes],
        }


def count_sat(cnf: CNF3, mode: str = "practical", jobs: int = 1, debug: bool = False,
              max_pair_bits: int = DEFAULT_MAX_PAIR_BITS) -> CountResult:
    reduced, mult = to_d3cnf(cnf)
    if reduced.k == 0:
        return CountResult(mult, reduced, mult, None, [], 1)
    if 2 * reduced.n > max_pair_bits:
        raise SizeGuardError(f"2^{2 * reduced.n} median scan exceeds the cap of 2^{max_pair_bits}")
    plan = select_primes(reduced.n, mode)
    args = [(reduced, p, debug, max_pair_bits) for p in plan.primes]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            reports = list(ex.map(prime_report, *zip(*args)))
    else:
        reports = [prime_report(*a) for a in args]
    g, _ = crt([r.gamma_mod_p for r in reports], [r.p for r in reports])
    return CountResult(g * mult, reduced, mult, plan, reports, g)
