import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import all_shapes, fill_shape, nested_to_children, random_nested_tree
from freeze_oracles import TREES
from medz.cnf import D3Formula, FormulaError, xor_augment
from medz.median import SizeGuardError
from medz.partition import partition_function
from medz.strings import LabeledBitString, Layout, StringMultiset
from medz.trees import (ParsimonyTree, TreeError, UnitGadgetDescriptor, UnitTree, build_psi_skeleton,
                        build_sorting_tree, enumerate_mpl, fitch, fitch_completeness_condition, fitch_sets,
                        fitch_solutions, labeling_cost, load_tree, materialize_equations, mpl_count,
                        parse_newick, parsimony_score, sankoff, sankoff_solutions, scenario_count_tree,
                        tree_from_nested, units_per_comb, verify_tree_separation)


def frozen_tree(name):
    children, labels, L = TREES[name]
    lay = Layout(0, L)
    return ParsimonyTree(children, {v: LabeledBitString.from_bits(s, lay) for v, s in labels.items()})


def bits_of(labeling):
    return tuple(x.bits() for x in labeling)


def test_cherry():
    t = tree_from_nested(("0", "1"))
    assert fitch_sets(t, 0)[0] == {0, 1}
    assert fitch_solutions(t, 0) == {(0, 0, 1), (1, 0, 1)}
    st_, it = sankoff(t, 0)
    assert st_.s0[0] == st_.s1[0] == 1
    assert set(it) == fitch_solutions(t, 0)
    assert scenario_count_tree(t) == 2
    assert fitch_completeness_condition(t, 0)


def test_leaf_scores():
    t = tree_from_nested(("0", "1"))
    st_, _ = sankoff(t, 0)
    assert (st_.s0[1], st_.s1[1]) == (0, math.inf)
    assert (st_.s0[2], st_.s1[2]) == (math.inf, 0)


def test_fitch_top_down_rule():
    t = tree_from_nested((("0", "0"), ("1", "1")))
    assert fitch_sets(t, 0)[0] == {0, 1}
    lab = fitch(t, 0, 0)
    assert lab[1] == 0 and lab[4] == 1
    with pytest.raises(TreeError):
        fitch(tree_from_nested(("0", "0")), 0, 1)


def test_constant_leaves():
    t = tree_from_nested((("101", "101"), "101"))
    assert parsimony_score(t) == 0
    assert mpl_count(t) == 1
    assert scenario_count_tree(t) == 1
    assert [bits_of(x) for x in enumerate_mpl(t)] == [("101",) * 5]


def test_two_cherries():
    t = tree_from_nested((("0", "1"), ("0", "1")))
    sols = sankoff_solutions(t, 0)
    assert {(s[0], s[1], s[4]) for s in sols} == {(0, 0, 0), (1, 1, 1)}
    assert parsimony_score(t) == 2


def test_pair_00_11():
    t = tree_from_nested(("00", "11"))
    assert mpl_count(t) == 4
    assert scenario_count_tree(t) == 6
    assert scenario_count_tree(t) == partition_function(StringMultiset.from_bits(["00", "11"]))


def test_completeness_condition_false():
    t = tree_from_nested(((("0", "1"), "0"), "1"))
    assert not fitch_completeness_condition(t, 0)


def test_condition_is_not_necessary():
    # the condition fails here yet Fitch still finds every optimum
    t = tree_from_nested((("0", "1"), ("0", "0")))
    assert not fitch_completeness_condition(t, 0)
    assert fitch_solutions(t, 0) == sankoff_solutions(t, 0)


def test_frozen_trees(frozen):
    for name in TREES:
        t = frozen_tree(name)
        assert parsimony_score(t) == frozen["tree_score"][name]
        assert mpl_count(t) == frozen["tree_mpl_count"][name]
        assert str(scenario_count_tree(t)) == frozen["tree_scenarios"][name]


def test_sankoff_matches_exhaustive():
    rng = random.Random(21)
    for leaves in range(2, 5):
        for L in range(1, 4):
            for _ in range(6):
                spec = random_nested_tree(rng, leaves, L)
                children, labels = nested_to_children(spec)
                t = tree_from_nested(spec)
                best, argmin = oracles.tree_optimum(children, labels, L)
                assert parsimony_score(t) == best
                got = sorted(bits_of(x) for x in enumerate_mpl(t))
                assert got == sorted(argmin)
                assert all(labeling_cost(t, x) == best for x in enumerate_mpl(t))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.randoms(use_true_random=False))
def test_fitch_subset_and_implication(leaves, rng):
    t = tree_from_nested(random_nested_tree(rng, leaves, 1))
    fs, ss = fitch_solutions(t, 0), sankoff_solutions(t, 0)
    assert fs <= ss
    if fitch_completeness_condition(t, 0):
        assert fs == ss


def test_fitch_solutions_are_optimal():
    rng = random.Random(4)
    for _ in range(100):
        t = tree_from_nested(random_nested_tree(rng, rng.randint(2, 10), 1))
        st_ = sankoff(t, 0)[0]
        for lab in fitch_solutions(t, 0):
            assert sum(lab[u] != lab[v] for u, v in t.edges()) == st_.score(0)


def test_count_factorizes():
    rng = random.Random(9)
    for _ in range(20):
        t = tree_from_nested(random_nested_tree(rng, rng.randint(2, 6), 3))
        per = [len(sankoff_solutions(t, c)) for c in range(3)]
        assert mpl_count(t) == math.prod(per) == sum(1 for _ in enumerate_mpl(t))


def test_mpl_cap():
    t = tree_from_nested(("0" * 20, "1" * 20))
    assert mpl_count(t) == 2 ** 20
    with pytest.raises(SizeGuardError):
        next(enumerate_mpl(t))


def test_shapes_small():
    shapes = all_shapes(4)
    assert len(shapes) == 5
    t = tree_from_nested(fill_shape(shapes[0], ["0", "1", "1", "0"]))
    assert len(t) == 7


def test_parse_newick_and_labels():
    t = load_tree("((A,B),(C,D));", "A\t00\nB\t11\nC\t01\nD\t10\n")
    assert t.names[2] == "A" and len(t.leaves()) == 4
    assert mpl_count(t) == 4
    assert scenario_count_tree(t) == 8
    with pytest.raises(TreeError):
        parse_newick("((A,B),C")
    with pytest.raises(TreeError):
        parse_newick("(A,B,C);")
    with pytest.raises(TreeError):
        parse_newick("((A,B),A);")
    with pytest.raises(TreeError):
        load_tree("(A,B);", "A\t0\n")
    with pytest.raises(TreeError):
        load_tree("(A,B);", "A\t0\nB\t01\n")


def test_tree_validation():
    lay = Layout(0, 1)
    one = LabeledBitString.from_bits("1", lay)
    with pytest.raises(TreeError):
        ParsimonyTree([(1,), None], {1: one})
    with pytest.raises(TreeError):
        ParsimonyTree([(1, 2), None, None, None], {1: one, 2: one, 3: one})
    with pytest.raises(TreeError):
        ParsimonyTree([(1, 2), None, None], {1: one})


def test_sorting_tree():
    t = build_sorting_tree("a", "b", "c")
    assert len(t) == 15 and t.edge_count() == 14
    leaves = t.leaves()
    assert t.inherited(leaves[2]) == {"a": 0, "b": 1, "c": 0}
    assert sorted(tuple(sorted(t.inherited(v).items())) for v in leaves) == sorted(
        tuple(sorted({"a": i, "b": j, "c": k}.items())) for i in (0, 1) for j in (0, 1) for k in (0, 1))
    with pytest.raises(TreeError):
        build_sorting_tree("a", "a", "c")


def test_sorting_tree_edges_flip_one_bit():
    t = build_sorting_tree(0, 1, 2)
    labs = materialize_equations(t, (0, 1, 2, 3))
    for u, ch in enumerate(t.children):
        if ch:
            for c in ch:
                assert sum(x != y for x, y in zip(labs[u], labs[c])) <= 1
    # the equation labeling is optimal for its own leaves: one change per split
    lay = Layout(0, 4)
    pt = ParsimonyTree(list(t.children), {v: LabeledBitString.from_bits("".join(map(str, labs[v])), lay)
                                           for v in t.leaves()})
    full = [LabeledBitString.from_bits("".join(map(str, x)), lay) for x in labs]
    assert labeling_cost(pt, full) == parsimony_score(pt) == 7


def test_units_per_comb():
    assert units_per_comb(3, 1) == 168


def test_tree_separation():
    v = verify_tree_separation(3, 1)
    assert v.holds and v.units_per_comb == 168
    assert v.log_ratio == pytest.approx(6 * math.log(2) + 168 * (12 * math.log(3) - 20 * math.log(2)), abs=1e-9)
    assert v.log_ratio == pytest.approx(-110.01, abs=0.01)
    assert not v.printed_good_holds
    assert verify_tree_separation(4, 2).holds
    for n in range(3, 9):
        for k in range(1, 5):
            assert verify_tree_separation(n, k).holds


def test_separation_unit_factor():
    v = verify_tree_separation(5, 2)
    assert v.unit_factor == Fraction(3 ** 12, 2 ** 20) ** units_per_comb(5, 2)


def test_psi_skeleton_shape():
    gamma = xor_augment(D3Formula(3, ((1, 2, 3),)))
    sk = build_psi_skeleton(gamma)
    m = 1 + 4 * 3
    assert len(sk.unit_slots) == 168 * m
    assert len(sk.clause_roots) == m
    # 15 lower sorting trees of 8 leaves per clause, the 16th upper leaf holds the comb
    assert len(sk.pair_labels) == 15 * 8 * m
    assert sk.layout == Layout(3, 148 * 168 * m)
    assert sk.verdict.holds
    for c in range(6):
        assert sk.fitch_condition(c)


def test_psi_skeleton_leaf_labels():
    gamma = xor_augment(D3Formula(4, ((1, -2, 4),)))
    sk = build_psi_skeleton(gamma)
    for v, bits in sk.pair_labels.items():
        lab = sk.leaf_label(v)
        assert lab.extra_count == 0
        assert lab.value >> sk.layout.t_extra == bits
    # slots of one clause use disjoint extra blocks in comb order
    starts = [s.extra_start for s in sk.unit_slots]
    assert starts == sorted(starts) and len(set(starts)) == len(starts)


def test_psi_skeleton_requires_augmented():
    with pytest.raises(FormulaError):
        build_psi_skeleton(D3Formula(3, ((1, 2, 3),)))
    gamma = xor_augment(D3Formula(3, ((1, 2, 3),)))
    with pytest.raises(TreeError):
        build_psi_skeleton(gamma, concrete=True)


def toy_unit():
    def provide(clause):
        return UnitTree(((1, 4), (2, 3), None, None, (5, 6), None, None),
                        {2: "00010", 3: "11100", 5: "00001", 6: "11100"})
    return UnitGadgetDescriptor(leaf_count=4, coord_count=5, sat_count=9, unsat_count=8, provider=provide)


def test_psi_skeleton_concrete_with_toy_unit():
    gamma = xor_augment(D3Formula(3, ((1, 2, 3),)))
    sk = build_psi_skeleton(gamma, toy_unit(), concrete=True)
    t = sk.tree
    assert len(t.leaves()) == len(sk.pair_labels) + 4 * len(sk.unit_slots)
    assert t.layout == Layout(3, 2 * len(sk.unit_slots))
    for c in range(6):
        concrete = fitch_sets(t, c)
        abstract = sk.fitch_sets(c)
        assert concrete[:len(abstract)] == abstract
        assert fitch_completeness_condition(t, c)
    # every extra coordinate is 1 in exactly one leaf
    T = t.layout.t_extra
    extras = [t.labels[v].value & ((1 << T) - 1) for v in t.leaves()]
    union = 0
    for x in extras:
        union |= x
    assert union == (1 << T) - 1
    assert sum(x.bit_count() for x in extras) == T


def test_toy_unit_leaf_count_checked():
    u = toy_unit()
    bad = UnitGadgetDescriptor(leaf_count=6, coord_count=5, provider=u.provider)
    with pytest.raises(TreeError):
        build_psi_skeleton(xor_augment(D3Formula(3, ((1, 2, 3),))), bad, concrete=True)
