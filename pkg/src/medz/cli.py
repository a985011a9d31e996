"""Command-line entry point.  Every subcommand prints one JSON document.

Exit status: 0 on success, 2 for bad input, 3 when a size guard refuses the job.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__
from .cnf import CNF3, D3Formula, FormulaError, brute_force_count, parse_dimacs, to_d3cnf, xor_augment
from .gadget import GadgetError, build_sharp_gadget, build_threshold_gadget, verify_distance_tables
from .mcmc import ChainModel, CutError, chain_diagnostics, half_cut, run_chain, torpid_bound, torpid_instance
from .median import SizeGuardError, median_set
from .partition import (DEFAULT_MAX_AMBIGUOUS, FACTORIAL, IDENTITY, WeightFunction, median_profiles,
                        partition_function, partition_function_mod_p, profile_weight)
from .pipeline import count_sat
from .strings import LayoutError, load_strings
from .trees import (DEFAULT_MAX_MPL, TreeError, fitch_completeness_condition, load_tree, mpl_count_coordinate,
                    sankoff_scores, scenario_count_tree, verify_tree_separation)

INPUT_ERRORS = (FormulaError, LayoutError, TreeError, GadgetError, CutError, ValueError, KeyError, OSError)


class InputError(ValueError):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _weight(spec: str) -> WeightFunction:
    if spec == "factorial":
        return FACTORIAL
    if spec == "identity":
        return IDENTITY
    if spec.startswith("table:"):
        return WeightFunction.parse_table(_read(spec[len("table:"):]))
    raise InputError(f"unknown weight {spec!r}; use factorial, identity or table:PATH")


def _strings(args):
    return load_strings(_read(args.strings), args.n_pairs, args.t_extra)


def _cnf(path: str) -> CNF3:
    return parse_dimacs(_read(path))


def _d3(path: str) -> D3Formula:
    f = _cnf(path)
    try:
        return D3Formula(f.n, f.clauses)
    except FormulaError as e:
        raise InputError(f"formula is not a distinct-variable 3-CNF ({e}); run reduce-d3 first") from None


def _num(x) -> str:
    return str(x) if not isinstance(x, Fraction) or x.denominator != 1 else str(x.numerator)


def cmd_z(args) -> dict:
    B = _strings(args)
    w = _weight(args.weight)
    ms = median_set(B)
    out = {"weight": w.describe(), "medians": str(len(ms)), "strings": len(B)}
    if args.mod is not None:
        out["Z_mod_p"] = partition_function_mod_p(B, args.mod, w, args.jobs, args.max_ambiguous)
        out["p"] = args.mod
    else:
        out["Z"] = _num(partition_function(B, w, args.jobs, args.max_ambiguous))
    return out


def cmd_medians(args) -> dict:
    B = _strings(args)
    ms = median_set(B)
    if len(ms.ambiguous) > args.max_ambiguous:
        raise SizeGuardError(f"{len(ms.ambiguous)} ambiguous coordinates exceed the cap of {args.max_ambiguous}")
    listed = []
    for i, mu in enumerate(ms.gray()):
        if i >= args.limit:
            break
        listed.append(mu.bits())
    out = {"count": str(len(ms)), "base": ms.base.bits(), "ambiguous": list(ms.ambiguous),
           "medians": listed, "truncated": len(ms) > args.limit}
    if args.profiles:
        w = _weight(args.weight)
        out["profiles"] = [{"distances": {str(d): c for d, c in prof}, "medians": cnt,
                            "weight": _num(profile_weight(prof, w))}
                           for prof, cnt in sorted(median_profiles(B, args.jobs, args.max_ambiguous).items())]
    return out


def cmd_count_sat(args) -> dict:
    f = _cnf(args.cnf)
    res = count_sat(f, args.mode, args.jobs, args.debug, args.max_pair_bits)
    out = res.to_json()
    if args.check:
        bf = brute_force_count(f, args.jobs)
        out["brute_force"] = str(bf)
        out["agrees"] = bf == res.gamma
    return out


def cmd_reduce_d3(args) -> dict:
    f = _cnf(args.cnf)
    g, mult = to_d3cnf(f)
    return {"n": g.n, "k": g.k, "multiplier": str(mult), "dimacs": g.to_dimacs()}


def cmd_xor_augment(args) -> dict:
    g = xor_augment(_d3(args.cnf))
    return {"n": g.n, "k": g.k, "dimacs": g.to_dimacs()}


def cmd_build_gadget(args) -> dict:
    f = _d3(args.cnf)
    report = None
    if args.kind == "sharp":
        if args.p is None:
            raise InputError("--p is required for the sharp gadget")
        g = build_sharp_gadget(f, args.p)
    else:
        g, report = build_threshold_gadget(f, args.kind, _weight(args.weight))
    text = g.blueprint.to_text()
    out = {"kind": g.kind or args.kind, "n": g.n, "k": g.k, "strings": g.size, "t": g.t,
           "length": g.length, "q": g.q, "printed_t": g.printed_t,
           "parts": {name: len(bp) for name, bp in g.parts}}
    if args.out:
        Path(args.out).write_text(text)
        out["blueprint_file"] = args.out
    else:
        out["blueprint"] = text
    if report is not None:
        out["separation"] = report.to_json()
    return out


def cmd_verify_tables(args) -> dict:
    return verify_distance_tables(args.n)


def _tree(args):
    return load_tree(_read(args.tree), _read(args.labels))


def cmd_tree_score(args) -> dict:
    t = _tree(args)
    coords = []
    for c in range(t.n_coords):
        st = sankoff_scores(t, c)
        coords.append({"coordinate": c, "score": st.score(t.root),
                       "mpl_count": str(mpl_count_coordinate(t, c, st)),
                       "fitch_complete": fitch_completeness_condition(t, c)})
    total = 1
    for c in coords:
        total *= int(c["mpl_count"])
    return {"leaves": len(t.leaves()), "vertices": len(t), "score": sum(c["score"] for c in coords),
            "mpl_count": str(total), "coordinates": coords}


def cmd_tree_count(args) -> dict:
    t = _tree(args)
    return {"scenarios": str(scenario_count_tree(t, args.max_mpl)), "leaves": len(t.leaves())}


def cmd_tree_separation(args) -> dict:
    return verify_tree_separation(args.n, args.k).to_json()


def _chain(args) -> tuple[ChainModel, int | None]:
    if args.torpid:
        try:
            n, t = (int(x) for x in args.torpid.split(","))
        except ValueError:
            raise InputError("--torpid expects N,T") from None
        B = torpid_instance(n, t)
    elif args.strings:
        B, n = _strings(args), None
    else:
        raise InputError("give --strings or --torpid")
    return ChainModel(B, args.kind, _weight(args.weight), args.seed, args.max_states), (n if args.torpid else None)


def cmd_sample(args) -> dict:
    chain, _ = _chain(args)
    res = run_chain(chain, args.steps, args.start, args.seed)
    out = res.to_json(chain)
    out["kind"] = chain.kind
    return out


def cmd_diagnose(args) -> dict:
    chain, n = _chain(args)
    if n is not None:
        t = int(args.torpid.split(",")[1])
        d = chain_diagnostics(chain, half_cut(n), torpid_bound(n, t), "half")
    else:
        d = chain_diagnostics(chain)
    out = d.to_json()
    out["kind"] = chain.kind
    return out


COMMANDS = {
    "z": cmd_z,
    "medians": cmd_medians,
    "count-sat": cmd_count_sat,
    "reduce-d3": cmd_reduce_d3,
    "xor-augment": cmd_xor_augment,
    "build-gadget": cmd_build_gadget,
    "verify-tables": cmd_verify_tables,
    "tree-score": cmd_tree_score,
    "tree-count": cmd_tree_count,
    "tree-separation": cmd_tree_separation,
    "sample": cmd_sample,
    "diagnose": cmd_diagnose,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
    common.add_argument("--seed", type=int, default=0, help="RNG seed (MEDZ_SEED overrides)")
    common.add_argument("--output", "-o", help="write the JSON report here instead of stdout")

    strings = argparse.ArgumentParser(add_help=False)
    strings.add_argument("--strings", help="strings file (raw 0/1 lines or blueprint lines)")
    strings.add_argument("--n-pairs", type=int)
    strings.add_argument("--t-extra", type=int)
    strings.add_argument("--weight", default="factorial", help="factorial, identity or table:PATH")
    strings.add_argument("--max-ambiguous", type=int, default=DEFAULT_MAX_AMBIGUOUS)

    p = argparse.ArgumentParser(prog="medz", description="Partition functions over Hamming medians.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("z", parents=[common, strings], help="partition function")
    s.add_argument("--mod", type=int, help="reduce modulo this prime")

    s = sub.add_parser("medians", parents=[common, strings], help="list optimal medians")
    s.add_argument("--limit", type=int, default=64)
    s.add_argument("--profiles", action="store_true", help="include distance profiles")

    s = sub.add_parser("count-sat", parents=[common], help="count models through the median reduction")
    s.add_argument("--cnf", required=True)
    s.add_argument("--mode", choices=("practical", "theoretical"), default="practical")
    s.add_argument("--debug", action="store_true", help="check residues of every median")
    s.add_argument("--check", action="store_true", help="also run the exhaustive counter")
    s.add_argument("--max-pair-bits", type=int, default=20)

    s = sub.add_parser("reduce-d3", parents=[common], help="rewrite into distinct-variable clauses")
    s.add_argument("--cnf", required=True)

    s = sub.add_parser("xor-augment", parents=[common], help="add the w_i = not v_i clauses")
    s.add_argument("--cnf", required=True)

    s = sub.add_parser("build-gadget", parents=[common], help="emit a gadget blueprint")
    s.add_argument("--cnf", required=True)
    s.add_argument("--kind", choices=("sharp", "up", "up2"), default="sharp")
    s.add_argument("--p", type=int, help="prime for the sharp gadget")
    s.add_argument("--weight", default="factorial")
    s.add_argument("--out", help="blueprint output file")

    s = sub.add_parser("verify-tables", parents=[common], help="recompute the distance tables")
    s.add_argument("--n", type=int, help="evaluate symbolic entries at this n")

    for name, hlp in (("tree-score", "parsimony scores"), ("tree-count", "most parsimonious scenarios")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--tree", required=True)
        s.add_argument("--labels", required=True)
        s.add_argument("--max-mpl", type=int, default=DEFAULT_MAX_MPL)

    s = sub.add_parser("tree-separation", parents=[common], help="tree reduction separation check")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)

    for name, hlp in (("sample", "run a chain"), ("diagnose", "exact chain diagnostics")):
        s = sub.add_parser(name, parents=[common, strings], help=hlp)
        s.add_argument("--kind", choices=("primer", "metropolis"), default="metropolis")
        s.add_argument("--torpid", help="use the torpid instance N,T")
        s.add_argument("--max-states", type=int, default=1 << 20)
        if name == "sample":
            s.add_argument("--steps", type=int, default=10000)
            s.add_argument("--start", type=int, default=0, help="start state index")
    return p


def schema_for(command: str) -> dict:
    text = resources.files("medz").joinpath("schemas").joinpath(f"{command}.json").read_text()
    return json.loads(text)


def _emit(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if os.environ.get("MEDZ_SEED"):
        try:
            args.seed = int(os.environ["MEDZ_SEED"])
        except ValueError:
            print(json.dumps({"error": "MEDZ_SEED is not an integer", "kind": "input"}), file=sys.stderr)
            return 2
    if args.jobs < 1:
        print(json.dumps({"error": "--jobs must be positive", "kind": "input"}), file=sys.stderr)
        return 2
    try:
        doc = COMMANDS[args.command](args)
    except SizeGuardError as e:
        print(json.dumps({"error": str(e), "kind": "size-guard"}), file=sys.stderr)
        return 3
    except INPUT_ERRORS as e:
        print(json.dumps({"error": str(e), "kind": "input"}), file=sys.stderr)
        return 2
    doc = json.loads(json.dumps(doc))
    jsonschema.validate(doc, schema_for(args.command))
    _emit(doc, args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
