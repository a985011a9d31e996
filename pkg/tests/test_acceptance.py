"""End-to-end acceptance checks.  Each test records one PASS/FAIL line."""
import itertools
import json
import math
import random
import subprocess
import sys
import time
from fractions import Fraction

import pytest

import oracles
from conftest import all_shapes, fill_shape, nested_to_children, random_d3
from medz.cli import main
from medz.cnf import brute_force_count, to_d3cnf
from medz.gadget import (K_of_p, build_sharp_gadget, build_threshold_gadget, verify_distance_tables,
                         verify_separation)
from medz.mcmc import (ChainModel, conductance_of_cut, half_cut, stationary_distribution, target_distribution,
                       torpid_bound, torpid_instance, torpid_partition_function)
from medz.median import ambiguous_coordinates, majority_median, total_distance
from medz.partition import FACTORIAL, count_medians_within_threshold, partition_function
from medz.pipeline import T_of_p, select_primes
from medz.strings import LabeledBitString, StringMultiset
from medz.trees import (enumerate_mpl, fitch_completeness_condition, fitch_solutions, parsimony_score,
                        sankoff_solutions, tree_from_nested, verify_tree_separation)


def corpus(seed=2024, size=200):
    rng = random.Random(seed)
    return [random_d3(rng, rng.choice((3, 4, 5)), rng.choice((1, 2, 3))) for _ in range(size)]


def test_criterion_1_count_sat(tmp_path, capsys, criterion):
    start = time.perf_counter()
    wrong = []
    for i, f in enumerate(corpus()):
        path = tmp_path / f"f{i}.cnf"
        path.write_text(f.to_dimacs())
        code = main(["count-sat", "--cnf", str(path), "--mode", "practical", "--jobs", "1"])
        out = capsys.readouterr().out
        gamma = int(json.loads(out)["gamma"]) if code == 0 else None
        if gamma != brute_force_count(f):
            wrong.append(i)
    elapsed = time.perf_counter() - start
    ok = not wrong and elapsed <= 60
    criterion(1, ok, f"200 formulas, {len(wrong)} mismatches, {elapsed:.1f}s")
    assert ok


def test_criterion_2_congruence(criterion):
    checked = 0
    bad = []
    for f in corpus():
        g, _ = to_d3cnf(f)
        gamma = brute_force_count(g)
        for p in select_primes(g.n).primes:
            checked += 1
            if T_of_p(g, p) != gamma * K_of_p(g.n, g.k, p).residue % p:
                bad.append((g, p))
    ok = not bad
    criterion(2, ok, f"{checked} (formula, prime) pairs, {len(bad)} failures")
    assert ok


@pytest.mark.xfail(strict=True, reason="recomputation finds five differing printed cells, not two; see notes")
def test_criterion_3_tables(criterion):
    rep = verify_distance_tables()
    t1, t3 = rep["tables"]["table1"], rep["tables"]["table3"]
    found = sorted(f"{t['row']}/{t['column']}" for t in t1["typos"])
    ok = (rep["typos_match_known"] and t1["multisets_match"]
          and t3["multisets_match"] and not t3["typos"])
    criterion(3, ok, f"table1 differing cells {found}; multisets match: table1 {t1['multisets_match']}, "
                     f"table3 {t3['multisets_match']}; table3 differing cells {len(t3['typos'])}")
    assert ok


def test_criterion_4_median_set(criterion):
    cases = 0
    ok = True
    rng = random.Random(4)
    for n in (3, 4):
        for k in (1, 2):
            for _ in range(2):
                f = random_d3(rng, n, k)
                for p in [p for p in (11, 13, 17) if p >= n + 5][:2]:
                    g = build_sharp_gadget(f, p)
                    B = g.multiset()
                    lay = B.layout
                    cols = [sum(s[c] for s in B) for c in range(lay.length)]
                    lower = sum(min(c, len(B) - c) for c in cols)
                    # every pair pattern with zero extras attains the coordinate-wise lower bound
                    attains = all(total_distance(B, LabeledBitString(lay, pair << lay.t_extra)) == lower
                                  for pair in range(1 << (2 * n)))
                    # and nothing else can: each extra column is a strict minority of ones
                    extras_strict = all(2 * cols[lay.extra_index(j)] < len(B) for j in range(lay.t_extra))
                    pairs_tied = all(2 * cols[c] == len(B) for c in range(2 * n))
                    consumed = (sum(cols[2 * n:]) == lay.t_extra == g.t and set(cols[2 * n:]) == {1})
                    ok &= (attains and extras_strict and pairs_tied and consumed
                           and ambiguous_coordinates(B) == tuple(range(2 * n))
                           and majority_median(B).value == 0)
                    cases += 1
    criterion(4, ok, f"{cases} gadgets with n<=4, k<=2")
    assert ok


def small_multisets():
    for L in range(1, 5):
        words = oracles.all_strings(L)
        for m in range(1, 5):
            for combo in itertools.combinations_with_replacement(words, m):
                yield list(combo)
    words = oracles.all_strings(5)
    for m in range(1, 4):
        for combo in itertools.combinations_with_replacement(words, m):
            yield list(combo)


def test_criterion_5_partition_oracle(criterion):
    checked = 0
    bad = []
    for texts in small_multisets():
        mu = oracles.medians(texts)[0]
        if sum(oracles.hamming(s, mu) for s in texts) > 8:
            continue
        checked += 1
        if partition_function(StringMultiset.from_bits(texts)) != oracles.scenario_count_star(texts):
            bad.append(texts)
    torpid = torpid_instance(3, 2)
    t_ok = (partition_function(torpid) == 96 == torpid_partition_function(3, 2)
            == oracles.scenario_count_star(["000", "000", "111", "111"]))
    ok = not bad and t_ok
    criterion(5, ok, f"{checked} multisets with min total distance <= 8, {len(bad)} mismatches; torpid 96: {t_ok}")
    assert ok


def test_criterion_6_separation(criterion):
    chain_ok = True
    for n in range(3, 7):
        for k in range(1, 4):
            r = verify_separation(FACTORIAL, n, k, "up")
            chain_ok &= r.h["h3"] < min(r.h["h0"], r.h["h1"], r.h["h2"])
    rng = random.Random(6)
    counts_ok = True
    formulas = 0
    for n in (3, 4):
        for k in (1, 2, 3):
            for _ in range(2):
                f = random_d3(rng, n, k)
                g, rep = build_threshold_gadget(f, "up", FACTORIAL)
                got = count_medians_within_threshold(g.multiset(), FACTORIAL, rep.h["h3"])
                counts_ok &= got == brute_force_count(f)
                formulas += 1
    ok = chain_ok and counts_ok
    criterion(6, ok, f"h3 < min(h0,h1,h2) on 12 (n,k) pairs: {chain_ok}; "
                     f"threshold count = #SAT on {formulas} formulas: {counts_ok}")
    assert ok


def test_criterion_7_small_parsimony(criterion):
    rng = random.Random(7)
    shapes = [s for leaves in (2, 3, 4) for s in all_shapes(leaves)]
    cases = 0
    mismatches = 0
    fitch_bad = 0
    converse = 0
    while cases < 600:
        for shape in shapes:
            leaves = sum(1 for _ in _leaves(shape))
            spec = fill_shape(shape, ["".join(rng.choice("01") for _ in range(3)) for _ in range(leaves)])
            children, labels = nested_to_children(spec)
            t = tree_from_nested(spec)
            best, argmin = oracles.tree_optimum(children, labels, 3)
            got = sorted(tuple(x.bits() for x in lab) for lab in enumerate_mpl(t))
            if parsimony_score(t) != best or got != sorted(argmin):
                mismatches += 1
            for c in range(3):
                fs, ss = fitch_solutions(t, c), sankoff_solutions(t, c)
                cond = fitch_completeness_condition(t, c)
                if not fs <= ss or (cond and fs != ss):
                    fitch_bad += 1
                if not cond and fs == ss:
                    converse += 1
            cases += 1
    ok = mismatches == 0 and fitch_bad == 0
    criterion(7, ok, f"{cases} trees: {mismatches} Sankoff mismatches, {fitch_bad} Fitch failures under the "
                     f"condition; {converse} coordinates with equal sets although the condition fails")
    assert ok


def _leaves(shape):
    if shape is None:
        yield None
    else:
        yield from _leaves(shape[0])
        yield from _leaves(shape[1])


def test_criterion_8_mcmc(criterion):
    exact_ok = True
    for texts in (["00", "11"], ["0011", "0101", "1110", "1000"], ["0000", "1111", "0011", "1100"]):
        c = ChainModel(StringMultiset.from_bits(texts))
        exact_ok &= stationary_distribution(c) == target_distribution(c)
    c32 = ChainModel(torpid_instance(3, 2))
    phi32 = conductance_of_cut(c32, half_cut(3))
    ok32 = phi32 == Fraction(1, 12) and phi32 <= torpid_bound(3, 2) == Fraction(1, 3)
    detail = [f"(3,2) {phi32}"]
    ok5 = True
    for t in (2, 3):
        phi = conductance_of_cut(ChainModel(torpid_instance(5, t)), half_cut(5))
        ok5 &= phi <= Fraction(1, math.comb(5, 2) ** (t - 1))
        detail.append(f"(5,{t}) {phi}")
    ok = exact_ok and ok32 and ok5
    criterion(8, ok, f"stationary = normalized weights: {exact_ok}; conductances " + ", ".join(detail))
    assert ok


def test_criterion_9_tree_separation(criterion):
    worst = -math.inf
    ok = True
    printed_fail = 0
    for n in range(3, 9):
        for k in range(1, 5):
            v = verify_tree_separation(n, k)
            ok &= v.holds and v.ratio < 1
            worst = max(worst, v.log_ratio)
            printed_fail += not v.printed_good_holds
    criterion(9, ok, f"24 (n,k) pairs, largest log ratio {worst:.1f}; "
                     f"the alternative unit constant fails on {printed_fail} of 24")
    assert ok


def _cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    assert code == 0
    return out


def test_criterion_10_reproducible(tmp_path, capsys, criterion):
    strings = tmp_path / "b.txt"
    strings.write_text("0011\n0101\n1110\n1000\n")
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 5 3\n1 2 3 0\n-3 4 5 0\n-1 -4 -5 0\n")
    tree = tmp_path / "t.nwk"
    tree.write_text("((A,B),(C,D));\n")
    labels = tmp_path / "t.tsv"
    labels.write_text("A\t001\nB\t110\nC\t011\nD\t100\n")
    runs = [
        ["z", "--strings", str(strings)],
        ["medians", "--strings", str(strings), "--profiles"],
        ["count-sat", "--cnf", str(cnf), "--debug"],
        ["reduce-d3", "--cnf", str(cnf)],
        ["xor-augment", "--cnf", str(cnf)],
        ["build-gadget", "--cnf", str(cnf), "--kind", "up"],
        ["verify-tables"],
        ["tree-score", "--tree", str(tree), "--labels", str(labels)],
        ["tree-count", "--tree", str(tree), "--labels", str(labels)],
        ["tree-separation", "--n", "4", "--k", "2"],
        ["sample", "--strings", str(strings), "--steps", "20000", "--seed", "9"],
        ["diagnose", "--torpid", "5,2"],
    ]
    differing = []
    for argv in runs:
        outs = {_cli(argv + ["--jobs", j], capsys) for j in ("1", "3", "1")}
        if len(outs) != 1:
            differing.append(argv[0])
    procs = set()
    for j in ("1", "2"):
        res = subprocess.run([sys.executable, "-m", "medz.cli", "count-sat", "--cnf", str(cnf), "--jobs", j],
                             capture_output=True)
        procs.add(res.stdout)
    ok = not differing and len(procs) == 1
    criterion(10, ok, f"{len(runs)} subcommands x 3 runs, differing: {differing or 'none'}")
    assert ok
