import json
import random
import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))


@pytest.fixture(scope="session")
def frozen():
    return json.loads((HERE / "frozen.json").read_text())


def random_d3(rng: random.Random, n: int, k: int):
    from medz.cnf import D3Formula
    clauses = []
    for _ in range(k):
        vs = rng.sample(range(1, n + 1), 3)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return D3Formula(n, tuple(clauses))


def random_nested_tree(rng: random.Random, leaves: int, width: int):
    nodes = ["".join(rng.choice("01") for _ in range(width)) for _ in range(leaves)]
    while len(nodes) > 1:
        i, j = rng.sample(range(len(nodes)), 2)
        a, b = nodes[i], nodes[j]
        nodes = [x for t, x in enumerate(nodes) if t not in (i, j)] + [(a, b)]
    return nodes[0]


def all_shapes(leaves: int):
    """Every ordered binary tree shape with the given number of leaves, leaves as None."""
    if leaves == 1:
        return [None]
    out = []
    for a in range(1, leaves):
        for left in all_shapes(a):
            for right in all_shapes(leaves - a):
                out.append((left, right))
    return out


def fill_shape(shape, labels):
    it = iter(labels)

    def walk(s):
        if s is None:
            return next(it)
        return (walk(s[0]), walk(s[1]))
    return walk(shape)


def nested_to_children(spec):
    """(children list, leaf label dict) with root 0, matching tree_from_nested's numbering."""
    children, labels = [], {}

    def walk(x):
        v = len(children)
        children.append(None)
        if isinstance(x, str):
            labels[v] = x
        else:
            a, b = x
            children[v] = (walk(a), walk(b))
        return v
    walk(spec)
    return children, labels


CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record a one-line verdict for an acceptance criterion; printed in the terminal summary."""
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} {detail}"
        CRITERIA[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])
