"""Batch command line front end.

Every subcommand delegates to one library operation and prints a JSON
report.  Exit status: 0 when the question was decided (either answer),
1 for usage or I/O trouble, 2 when an internal validation check failed.
Timings live under ``stats`` so golden tests can pin answers without
pinning wall clocks.
"""

import argparse
import json
import sys
import time

from .grid import (build_rich_path, check_gridding, classify, cell_graph,
                   find_gridding, format_gridding_json, format_matrix_json,
                   parse_matrix_json, staircase)
from .entries import parse_entry
from .matcher import NoTextGridding, solve_cppm
from .perm import contains, parse_perm
from .sat import ParseError, parse_dimacs, solve_sat
from .reduction import (Formula3CNF, ReductionError, normalize_3cnf, embedding_from_assignment,
                        read_instance_summary, rebuild_instance, reduce_formula,
                        simulate_grid_preserving, validate_instance,
                        write_instance)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}")


def _load_perm(path):
    try:
        return parse_perm(_read(path))
    except ValueError as exc:
        raise _UsageError(f"{path}: {exc}")


def _load_matrix(path):
    try:
        return parse_matrix_json(_read(path))
    except (ValueError, KeyError) as exc:
        raise _UsageError(f"{path}: {exc}")


def _load_cnf(path):
    try:
        cnf = parse_dimacs(_read(path))
        return normalize_3cnf(cnf.nvars, cnf.clauses)
    except (ParseError, ValueError) as exc:
        raise _UsageError(f"{path}: {exc}")


def _gridding_payload(g):
    return json.loads(format_gridding_json(g)) if g is not None else None


def _emit(report, out_path):
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_brute(args):
    pattern = _load_perm(args.pattern)
    text = _load_perm(args.text)
    t0 = time.perf_counter()
    emb = contains(text, pattern)
    return {"command": "brute", "found": emb is not None,
            "embedding": list(emb) if emb is not None else None,
            "stats": {"time_ms": (time.perf_counter() - t0) * 1000.0}}


def _cmd_match(args):
    matrix = _load_matrix(args.matrix)
    pattern = _load_perm(args.pattern)
    text = _load_perm(args.text)
    stats = {}
    t0 = time.perf_counter()
    emb = solve_cppm(pattern, text, matrix, stats=stats)
    elapsed = (time.perf_counter() - t0) * 1000.0
    return {
        "command": "match",
        "found": emb is not None,
        "gridding_text": _gridding_payload(stats.get("gridding_text")),
        "gridding_pattern": _gridding_payload(stats.get("gridding_pattern")),
        "embedding": list(emb) if emb is not None else None,
        "stats": {"griddings_tried": stats.get("griddings_tried", 0),
                  "clauses": stats.get("clauses", 0),
                  "time_ms": elapsed},
    }


def _cmd_gridcheck(args):
    matrix = _load_matrix(args.matrix)
    p = _load_perm(args.perm)
    t0 = time.perf_counter()
    g = find_gridding(p, matrix)
    return {"command": "gridcheck", "found": g is not None,
            "gridding": _gridding_payload(g),
            "stats": {"time_ms": (time.perf_counter() - t0) * 1000.0}}


def _cmd_richpath(args):
    matrix = _load_matrix(args.matrix)
    if args.length is None:
        raise _UsageError("richpath requires --length")
    try:
        refined, order, d_positions = build_rich_path(matrix, args.length)
    except ValueError as exc:
        raise _UsageError(str(exc))
    return {"command": "richpath",
            "matrix": json.loads(format_matrix_json(refined)),
            "shape": classify(cell_graph(refined)),
            "order": [list(c) for c in order],
            "d_positions": list(d_positions),
            "stats": {}}


def _cmd_staircase(args):
    if args.length is None:
        raise _UsageError("staircase requires --length (number of steps)")
    try:
        c = parse_entry(args.entries[0]) if args.entries else parse_entry("inc")
        d = parse_entry(args.entries[1]) if len(args.entries) > 1 \
            else parse_entry("av:321")
    except ValueError as exc:
        raise _UsageError(str(exc))
    m = staircase(args.length, c, d)
    return {"command": "staircase",
            "matrix": json.loads(format_matrix_json(m)),
            "shape": classify(cell_graph(m)),
            "stats": {}}


def _cmd_reduce(args):
    formula = _load_cnf(args.cnf)
    matrix = _load_matrix(args.matrix) if args.matrix else None
    t0 = time.perf_counter()
    inst = reduce_formula(formula, mode=args.mode, matrix=matrix)
    elapsed = (time.perf_counter() - t0) * 1000.0
    if args.out:
        write_instance(inst, args.out)
    return {"command": "reduce", "mode": inst.mode,
            "sizes": dict(inst.sizes), "layers": len(inst.layers),
            "d_used": inst.d_used, "out": args.out,
            "stats": {"time_ms": elapsed}}


def _rebuild(directory):
    summary = read_instance_summary(directory)
    inst = rebuild_instance(summary)
    stored_pattern = parse_perm(_read(f"{directory}/pattern.perm"))
    stored_text = parse_perm(_read(f"{directory}/text.perm"))
    if stored_pattern != inst.pattern or stored_text != inst.text:
        raise ReductionError(
            "stored permutations do not match a deterministic rebuild")
    return inst


def _cmd_verify(args):
    t0 = time.perf_counter()
    inst = _rebuild(args.directory)
    report = validate_instance(inst)
    simulated, _ = simulate_grid_preserving(inst)
    sat = _oracle(inst.formula)
    agree = simulated == (sat is not None)
    if not agree:
        report["violations"].append("simulation disagrees with SAT oracle")
        report["ok"] = False
    payload = {"command": "verify", "report": report,
               "simulate": simulated, "sat": sat is not None,
               "stats": {"time_ms": (time.perf_counter() - t0) * 1000.0}}
    return payload, (0 if report["ok"] else 2)


def _oracle(formula):
    from .sat import CNFFormula
    return solve_sat(CNFFormula(formula.nvars, formula.clauses))


def _cmd_embed(args):
    t0 = time.perf_counter()
    inst = _rebuild(args.directory)
    witness = _oracle(inst.formula)
    if witness is None:
        return {"command": "embed", "satisfiable": False, "embedding": None,
                "stats": {"time_ms": (time.perf_counter() - t0) * 1000.0}}
    rho = [witness[k] for k in range(1, inst.formula.nvars + 1)]
    emb = embedding_from_assignment(inst, rho)
    return {"command": "embed", "satisfiable": True,
            "assignment": {str(k + 1): v for k, v in enumerate(rho)},
            "embedding": list(emb),
            "stats": {"time_ms": (time.perf_counter() - t0) * 1000.0}}


def _cmd_sat(args):
    formula = _load_cnf(args.cnf)
    t0 = time.perf_counter()
    witness = _oracle(formula)
    payload = {"command": "sat", "satisfiable": witness is not None,
               "assignment": None,
               "stats": {"time_ms": (time.perf_counter() - t0) * 1000.0}}
    if witness is not None:
        payload["assignment"] = {str(k): witness[k] for k in sorted(witness)}
    return payload


def build_parser():
    top = _Parser(prog="gridppm", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, help_, **flags):
        p = sub.add_parser(name, help=help_)
        for flag, kw in flags.items():
            p.add_argument(flag, **kw)
        p.add_argument("--out", default=None)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        return p

    add("brute", "containment by exhaustive search",
        **{"--pattern": {"required": True}, "--text": {"required": True}})
    add("match", "polynomial C-PPM for a monotone gridding matrix",
        **{"--matrix": {"required": True}, "--pattern": {"required": True},
           "--text": {"required": True}})
    add("gridcheck", "find a gridding of a permutation",
        **{"--matrix": {"required": True}, "--perm": {"required": True}})
    add("richpath", "refine a cycle matrix into a rich proper-turning path",
        **{"--matrix": {"required": True},
           "--length": {"type": int, "default": None}})
    p = add("staircase", "build a staircase matrix",
            **{"--length": {"type": int, "default": None}})
    p.add_argument("entries", nargs="*",
                   help="cell entries: C then D (default: inc av:321)")
    add("reduce", "compile a 3-CNF formula into a C-PPM instance",
        **{"--cnf": {"required": True},
           "--mode": {"choices": ["gadgets", "juxtaposition"],
                      "default": "gadgets"},
           "--matrix": {"default": None}})
    p = add("verify", "re-derive and validate a reduce output directory")
    p.add_argument("directory")
    p = add("embed", "extract a concrete embedding for a satisfiable instance")
    p.add_argument("directory")
    add("sat", "desk-scale DPLL oracle", **{"--cnf": {"required": True}})
    return top


_DISPATCH = {
    "brute": _cmd_brute, "match": _cmd_match, "gridcheck": _cmd_gridcheck,
    "richpath": _cmd_richpath, "staircase": _cmd_staircase,
    "reduce": _cmd_reduce, "verify": _cmd_verify, "embed": _cmd_embed,
    "sat": _cmd_sat,
}


def run(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        result = _DISPATCH[args.command](args)
    except _UsageError as exc:
        sys.stderr.write(f"gridppm: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"gridppm: {exc}\n")
        return 1
    except (ReductionError, NoTextGridding) as exc:
        sys.stderr.write(f"gridppm: validation failure: {exc}\n")
        return 2
    if isinstance(result, tuple):
        report, code = result
    else:
        report, code = result, 0
    _emit(report, getattr(args, "out", None) if args.command != "reduce"
          else None)
    return code


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
