"""Markov chains on the median set.

States are median indices (bit j of the index flips ambiguous coordinate j).  The
primer chain stays put with probability 1/2 and otherwise flips a uniformly chosen
ambiguous bit; the Metropolis chain filters primer proposals so that the stationary
law is proportional to the product of per-member weights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .median import MedianSet, SizeGuardError, distance_blocks, median_set
from .partition import FACTORIAL, WeightFunction
from .strings import LabeledBitString, Layout, StringMultiset

DEFAULT_MAX_STATES = 1 << 20
EXACT_SOLVE_MAX = 512


class CutError(ValueError):
    pass


@dataclass
class ChainModel:
    B: StringMultiset
    kind: str = "metropolis"
    weight: WeightFunction = FACTORIAL
    seed: int = 0
    max_states: int = DEFAULT_MAX_STATES
    ms: MedianSet = field(init=False)

    def __post_init__(self):
        if self.kind not in ("primer", "metropolis"):
            raise ValueError(f"unknown chain kind {self.kind!r}")
        self.ms = median_set(self.B)
        self._logw: np.ndarray | None = None
        self._exact: list | None = None

    @property
    def n_ambiguous(self) -> int:
        return len(self.ms.ambiguous)

    @property
    def n_states(self) -> int:
        return len(self.ms)

    def _guard(self) -> None:
        if self.n_states > self.max_states:
            raise SizeGuardError(f"{self.n_states} states exceed the cap of {self.max_states}")

    def _distances(self) -> np.ndarray:
        self._guard()
        return np.concatenate([D for _, D in distance_blocks(self.B, self.ms)], axis=0)

    def log_weights(self) -> np.ndarray:
        if self._logw is None:
            D = self._distances()
            dmax = int(D.max()) if D.size else 0
            table = np.array([self.weight.log(d) for d in range(dmax + 1)])
            self._logw = table[D].sum(axis=1) if D.size else np.zeros(len(D))
        return self._logw

    def exact_weights(self) -> list:
        if self._exact is None:
            D = self._distances()
            dmax = int(D.max()) if D.size else 0
            table = [self.weight.exact(d) for d in range(dmax + 1)]
            out = []
            for row in D.tolist():
                v = 1
                for d in row:
                    v *= table[d]
                out.append(v)
            self._exact = out
        return self._exact

    def state(self, index: int) -> LabeledBitString:
        return self.ms.member(index)

    def index_of(self, mu: LabeledBitString) -> int:
        if mu not in self.ms:
            raise ValueError(f"{mu.bits()} is not an optimal median")
        L = self.ms.layout.length
        idx = 0
        for j, a in enumerate(self.ms.ambiguous):
            if mu[a] != self.ms.base[a]:
                idx |= 1 << j
        return idx if L else 0

    def rng(self, seed: int | None = None) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.seed if seed is None else seed))


def acceptance(w_from, w_to) -> float | Fraction:
    """min(1, w_to / w_from) with zero weights: from 0 always accept, into 0 always reject."""
    if w_from == 0:
        return 1
    if w_to == 0:
        return 0
    r = Fraction(w_to) / Fraction(w_from)
    return min(Fraction(1), r)


def _log_accept(lw_from: float, lw_to: float) -> float:
    if lw_from == -math.inf:
        return 1.0
    if lw_to == -math.inf:
        return 0.0
    return math.exp(min(0.0, lw_to - lw_from))


def step(chain: ChainModel, state: int, u: Iterable[float]) -> int:
    """One move driven by three uniforms (stay, bit choice, acceptance)."""
    u0, u1, u2 = u
    A = chain.n_ambiguous
    if A == 0 or u0 < 0.5:
        return state
    prop = state ^ (1 << min(int(u1 * A), A - 1))
    if chain.kind == "primer":
        return prop
    lw = chain.log_weights()
    return prop if u2 < _log_accept(lw[state], lw[prop]) else state


@dataclass(frozen=True)
class RunResult:
    steps: int
    start: int
    final: int
    visits: tuple[int, ...]
    seed: int

    def to_json(self, chain: ChainModel) -> dict:
        return {
            "steps": self.steps,
            "seed": self.seed,
            "start": chain.state(self.start).bits(),
            "final": chain.state(self.final).bits(),
            "visits": {chain.state(i).bits(): c for i, c in enumerate(self.visits) if c},
        }


def run_chain(chain: ChainModel, steps: int, start: int = 0, seed: int | None = None,
              block: int = 1 << 16) -> RunResult:
    if not 0 <= start < chain.n_states:
        raise ValueError("start state out of range")
    if steps < 0:
        raise ValueError("negative step count")
    chain._guard()
    seed = chain.seed if seed is None else seed
    rng = chain.rng(seed)
    A = chain.n_ambiguous
    visits = np.zeros(chain.n_states, dtype=np.int64)
    lw = chain.log_weights() if chain.kind == "metropolis" else None
    s = start
    done = 0
    while done < steps:
        size = min(block, steps - done)
        U = rng.random((size, 3))
        for u0, u1, u2 in U.tolist():
            if A and u0 >= 0.5:
                prop = s ^ (1 << min(int(u1 * A), A - 1))
                if lw is None or u2 < _log_accept(lw[s], lw[prop]):
                    s = prop
            visits[s] += 1
        done += size
    return RunResult(steps, start, s, tuple(int(x) for x in visits), seed)


@dataclass
class TransitionMatrix:
    """Sparse rows ``{target: probability}``; exact rationals when built exactly."""

    rows: list[dict[int, Fraction | float]]

    def __len__(self) -> int:
        return len(self.rows)

    def dense(self) -> np.ndarray:
        N = len(self.rows)
        M = np.zeros((N, N))
        for i, row in enumerate(self.rows):
            for j, p in row.items():
                M[i, j] = float(p)
        return M

    def row_sums(self) -> list:
        return [sum(r.values()) for r in self.rows]


def transition_matrix(chain: ChainModel, exact: bool = True) -> TransitionMatrix:
    chain._guard()
    A = chain.n_ambiguous
    N = chain.n_states
    if A == 0:
        return TransitionMatrix([{0: Fraction(1) if exact else 1.0}])
    prop = Fraction(1, 2 * A) if exact else 1.0 / (2 * A)
    w = (chain.exact_weights() if exact else chain.log_weights()) if chain.kind == "metropolis" else None
    rows = []
    for i in range(N):
        row: dict = {}
        out = 0
        for j in range(A):
            k = i ^ (1 << j)
            if w is None:
                a = 1
            elif exact:
                a = acceptance(w[i], w[k])
            else:
                a = _log_accept(w[i], w[k])
            if a:
                row[k] = prop * a
                out += row[k]
        row[i] = (1 - out) if exact else 1.0 - out
        rows.append(row)
    return TransitionMatrix(rows)


def _solve_fraction(M: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(M)
    A = [row[:] + [b[i]] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise ArithmeticError("singular system: the chain has more than one closed class")
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [A[i][n] for i in range(n)]


def positive_support(chain: ChainModel) -> list[int]:
    if chain.kind == "primer":
        return list(range(chain.n_states))
    return [i for i, v in enumerate(chain.exact_weights()) if v > 0]


def stationary_distribution(chain: ChainModel, tm: TransitionMatrix | None = None) -> list[Fraction]:
    """Solve pi P = pi, sum pi = 1 on the positive-weight support by exact elimination."""
    tm = tm or transition_matrix(chain, exact=True)
    support = positive_support(chain)
    if len(support) > EXACT_SOLVE_MAX:
        raise SizeGuardError(f"exact solve limited to {EXACT_SOLVE_MAX} states")
    pos = {s: i for i, s in enumerate(support)}
    n = len(support)
    # rows of (P^T - I), last one replaced by normalisation
    M = [[Fraction(0)] * n for _ in range(n)]
    for s in support:
        for t, p in tm.rows[s].items():
            if t in pos:
                M[pos[t]][pos[s]] += Fraction(p)
    for i in range(n):
        M[i][i] -= 1
    M[-1] = [Fraction(1)] * n
    b = [Fraction(0)] * (n - 1) + [Fraction(1)]
    sol = _solve_fraction(M, b)
    pi = [Fraction(0)] * chain.n_states
    for s, v in zip(support, sol):
        pi[s] = v
    return pi


def target_distribution(chain: ChainModel) -> list[Fraction]:
    """Normalised weights for Metropolis chains, uniform for the primer chain."""
    if chain.kind == "primer":
        return [Fraction(1, chain.n_states)] * chain.n_states
    w = chain.exact_weights()
    total = sum(w)
    if total == 0:
        raise ArithmeticError("every median has weight zero")
    return [Fraction(x) / total for x in w]


def balance_residual(tm: TransitionMatrix, pi: list) -> Fraction | float:
    worst = 0
    for i, row in enumerate(tm.rows):
        for j, p in row.items():
            if j == i:
                continue
            r = abs(pi[i] * p - pi[j] * tm.rows[j].get(i, 0))
            worst = max(worst, r)
    return worst


def spectral_gap(tm: TransitionMatrix) -> float:
    """1 minus the second-largest eigenvalue modulus."""
    if len(tm) == 1:
        return 1.0
    ev = np.sort(np.abs(np.linalg.eigvals(tm.dense())))[::-1]
    return float(1.0 - ev[1])


def _cut_indices(chain: ChainModel, S) -> set[int]:
    if callable(S):
        return {i for i in range(chain.n_states) if S(chain.state(i))}
    out = set()
    for x in S:
        out.add(chain.index_of(x) if isinstance(x, LabeledBitString) else int(x))
    return out


def conductance_of_cut(chain: ChainModel, S, pi: list | None = None,
                       tm: TransitionMatrix | None = None) -> Fraction:
    """Ergodic flow out of S divided by its stationary mass; needs 0 < pi(S) <= 1/2."""
    idx = _cut_indices(chain, S)
    pi = pi or target_distribution(chain)
    tm = tm or transition_matrix(chain, exact=True)
    cap = sum((Fraction(pi[i]) for i in idx), Fraction(0))
    if not 0 < cap <= Fraction(1, 2):
        raise CutError(f"cut has stationary mass {cap}, need 0 < mass <= 1/2")
    flow = Fraction(0)
    for i in idx:
        for j, p in tm.rows[i].items():
            if j not in idx:
                flow += Fraction(pi[i]) * Fraction(p)
    return flow / cap


def torpid_instance(n: int, t: int) -> StringMultiset:
    """t copies of the all-zero string and t of the all-one string, length n (odd)."""
    if n % 2 == 0 or n < 1:
        raise ValueError("the torpid instance needs odd n")
    if t < 1:
        raise ValueError("t must be positive")
    lay = Layout(0, n)
    zero = LabeledBitString(lay, 0)
    one = LabeledBitString(lay, (1 << n) - 1)
    return StringMultiset(lay, [zero] * t + [one] * t)


def torpid_partition_function(n: int, t: int) -> int:
    return sum(math.comb(n, k) * (math.factorial(k) * math.factorial(n - k)) ** t for k in range(n + 1))


def torpid_bound(n: int, t: int) -> Fraction:
    return Fraction(1, math.comb(n, n // 2) ** (t - 1))


def half_cut(n: int) -> Callable[[LabeledBitString], bool]:
    """Medians with at most floor(n/2) ones."""
    return lambda mu: mu.value.bit_count() <= n // 2


@dataclass(frozen=True)
class Diagnostics:
    states: list[str]
    pi: list[Fraction]
    gap: float
    balance_residual: Fraction
    matches_target: bool
    conductance: dict | None = None

    def to_json(self) -> dict:
        out = {
            "states": self.states,
            "pi": [str(p) for p in self.pi],
            "gap": round(self.gap, 12),
            "balance_residual": str(self.balance_residual),
            "matches_target": self.matches_target,
        }
        if self.conductance is not None:
            out["conductance"] = self.conductance
        return out


def chain_diagnostics(chain: ChainModel, cut=None, bound: Fraction | None = None,
                      cut_name: str = "custom") -> Diagnostics:
    tm = transition_matrix(chain, exact=True)
    pi = stationary_distribution(chain, tm)
    target = target_distribution(chain)
    cond = None
    if cut is not None:
        value = conductance_of_cut(chain, cut, pi, tm)
        cond = {"cut": cut_name, "value": str(value),
                "bound": None if bound is None else str(bound),
                "within_bound": None if bound is None else value <= bound}
    return Diagnostics([chain.state(i).bits() for i in range(chain.n_states)], pi,
                       spectral_gap(tm), balance_residual(tm, pi), pi == target, cond)
