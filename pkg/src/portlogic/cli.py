"""Command-line front end: reproducible experiments with JSON reports.

Subcommands: run, check, compile, decompile, bisim, separate, gen, verify.
Every command is deterministic given its flags (all randomness sits behind
--seed), reports are JSON-serialisable with stable key order, and --json
prints the raw report document.  Exit codes: 2 for validation problems,
3 for a timed-out run.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import bisim as bisim_mod
from . import compiler as compiler_mod
from . import problems as problems_mod
from . import simulate as simulate_mod
from .graphs import (
    GraphError,
    PortedGraph,
    consistent_port_numbering,
    cycle,
    format_graph,
    format_ported,
    load_graph,
    load_ported,
    no_one_factor_cubic,
    random_port_numbering,
    star,
    symmetric_port_numbering,
    validate_port_numbering,
)
from .logic import (
    Signature,
    SignatureMismatchError,
    eval_formula,
    format_formula,
    kripke_model,
    parse,
    validate_signature,
)
from .machines import run as run_machine
from .machines import check_class_conformance, trace_to_json

EXIT_VALIDATION = 2
EXIT_TIMEOUT = 3

WRAPPERS = {
    "set_from_multiset": simulate_mod.set_from_multiset,
    "multiset_from_vector": simulate_mod.multiset_from_vector,
    "bcast_multiset_from_broadcast": simulate_mod.bcast_multiset_from_broadcast,
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


def _load_ported(args) -> PortedGraph:
    name = args.graph
    try:
        if name.endswith(".pn"):
            return load_ported(name)
        g = load_graph(name)
    except (OSError, GraphError) as exc:
        raise CliError(f"cannot load graph: {exc}") from exc
    seed = getattr(args, "seed", 0) or 0
    if getattr(args, "consistent", False):
        return PortedGraph(g, consistent_port_numbering(g, seed))
    return PortedGraph(g, random_port_numbering(g, seed))


def _machine_for(args, delta: int):
    names = []
    if getattr(args, "machine", None):
        names.append(args.machine)
    if getattr(args, "formula", None):
        names.append("--formula")
    if len(names) != 1:
        raise CliError("give exactly one of --machine or --formula")
    if getattr(args, "formula", None):
        try:
            formula = parse(args.formula)
            sig = Signature(args.delta or delta, args.variant or "--")
            return compiler_mod.compile_formula(formula, sig)
        except (ValueError, compiler_mod.CompileError) as exc:
            raise CliError(str(exc)) from exc
    name = args.machine
    base = name
    wrapper = None
    for wname in WRAPPERS:
        prefix = wname + ":"
        if name.startswith(prefix):
            wrapper = WRAPPERS[wname]
            base = name[len(prefix):]
            break
    if base not in problems_mod.MACHINES:
        raise CliError(
            f"unknown machine {base!r}; available: {', '.join(sorted(problems_mod.MACHINES))}"
        )
    machine = problems_mod.MACHINES[base](args.delta or delta)
    if wrapper is not None:
        try:
            machine = wrapper(machine)
        except simulate_mod.WrapperError as exc:
            raise CliError(str(exc)) from exc
    return machine


def _report(args, doc: dict) -> int:
    doc = {"command": args.command, **doc}
    if getattr(args, "json", False):
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for key, value in doc.items():
            if key == "command":
                continue
            print(f"{key}: {json.dumps(value, sort_keys=True)}")
    return 0


def cmd_run(args) -> int:
    started = time.perf_counter()
    pg = _load_ported(args)
    delta = max(1, pg.graph.max_degree())
    machine = _machine_for(args, delta)
    result = run_machine(machine, pg, args.max_rounds, record_messages=args.trace)
    doc = {
        "inputs": {"graph": args.graph, "nodes": pg.graph.n, "seed": getattr(args, "seed", 0)},
        "machine": machine.name,
        "class": machine.tag.code,
        "rounds": result.rounds,
        "timed_out": result.timed_out,
        "outputs": None
        if result.outputs is None
        else {str(v): result.outputs[v] for v in sorted(result.outputs)},
        "timing": round(time.perf_counter() - started, 6),
    }
    if args.trace:
        doc["trace"] = trace_to_json(machine, result)
    code = _report(args, doc)
    if result.timed_out:
        return EXIT_TIMEOUT
    return code


def cmd_check(args) -> int:
    started = time.perf_counter()
    pg = _load_ported(args)
    try:
        formula = parse(args.formula)
        delta = args.delta or max(1, pg.graph.max_degree())
        sig = Signature(delta, args.variant)
        problems = validate_signature(formula, sig)
        if problems:
            raise CliError("; ".join(problems))
        model = kripke_model(pg, args.variant, delta)
        worlds = eval_formula(model, formula)
    except SignatureMismatchError as exc:
        raise CliError(str(exc)) from exc
    return _report(
        args,
        {
            "inputs": {"graph": args.graph, "formula": args.formula, "variant": args.variant},
            "satisfying_worlds": sorted(worlds),
            "timing": round(time.perf_counter() - started, 6),
        },
    )


def cmd_compile(args) -> int:
    started = time.perf_counter()
    try:
        formula = parse(args.formula)
        sig = Signature(args.delta, args.variant)
        machine = compiler_mod.compile_formula(formula, sig)
    except (ValueError, compiler_mod.CompileError) as exc:
        raise CliError(str(exc)) from exc
    report = check_class_conformance(machine, samples=100, seed=args.seed)
    return _report(
        args,
        {
            "inputs": {"formula": args.formula, "variant": args.variant, "delta": args.delta},
            "class": machine.tag.code,
            "modal_depth": formula.md,
            "stopping_round": formula.md + 1,
            "closure_size": len(machine.closure.formulas),
            "conformance": bool(report.ok),
            "timing": round(time.perf_counter() - started, 6),
        },
    )


def cmd_decompile(args) -> int:
    started = time.perf_counter()
    delta = args.delta
    machine = _machine_for(args, delta)
    try:
        result = compiler_mod.decompile_details(
            machine,
            delta,
            args.horizon,
            args.variant,
            node_bound=args.node_bound,
        )
    except compiler_mod.DecompileError as exc:
        raise CliError(str(exc)) from exc
    return _report(
        args,
        {
            "inputs": {
                "machine": getattr(args, "machine", None),
                "variant": args.variant,
                "delta": delta,
                "horizon": args.horizon,
            },
            "modal_depth": result.formula.md,
            "formula": format_formula(result.formula),
            "timing": round(time.perf_counter() - started, 6),
        },
    )


def cmd_bisim(args) -> int:
    started = time.perf_counter()
    graphs = []
    for name in args.graph:
        try:
            if name.endswith(".pn"):
                pg = load_ported(name)
            else:
                g = load_graph(name)
                pg = PortedGraph(g, random_port_numbering(g, args.seed))
        except (OSError, GraphError) as exc:
            raise CliError(f"cannot load graph: {exc}") from exc
        graphs.append(pg)
    if not graphs:
        raise CliError("need at least one graph")
    delta = max(1, max(pg.graph.max_degree() for pg in graphs))
    models = [kripke_model(pg, args.variant, delta) for pg in graphs]
    model = models[0]
    for extra in models[1:]:
        model, _ = model.disjoint_union(extra)
    refine = (
        bisim_mod.coarsest_graded_bisimulation
        if args.graded
        else bisim_mod.coarsest_bisimulation
    )
    partition = refine(model)
    return _report(
        args,
        {
            "inputs": {"graphs": list(args.graph), "variant": args.variant, "graded": args.graded},
            "worlds": model.size,
            "blocks": partition.to_json(),
            "timing": round(time.perf_counter() - started, 6),
        },
    )


def _separation_star(seed: int) -> dict:
    g = star(3)
    machine = problems_mod.leaf_election_machine(3)
    problem = problems_mod.leaf_election()
    audit = []
    for k in range(5):
        pg = PortedGraph(g, random_port_numbering(g, seed + k))
        result = run_machine(machine, pg, 8)
        audit.append(result.stopped and problem.check(g, result.outputs))
    refutation = bisim_mod.impossibility_check(
        g, range(1, 4), problem, "vb", consistent_port_numbering(g, seed)
    )
    return {
        "demo": "star",
        "solved_in": machine.tag.code,
        "refuted_class": "vb",
        "positive_runs_valid": all(audit),
        "certificate": refutation,
    }


def _separation_parity(seed: int) -> dict:
    union, u, w = problems_mod.parity_union()
    machine = problems_mod.odd_odd_machine(3)
    problem = problems_mod.odd_odd()
    audit = []
    for k in range(5):
        pg = PortedGraph(union, random_port_numbering(union, seed + k))
        result = run_machine(machine, pg, 8)
        audit.append(result.stopped and problem.check(union, result.outputs))
    refutation = bisim_mod.impossibility_check(
        union, (u, w), problem, "sb", consistent_port_numbering(union, seed)
    )
    return {
        "demo": "parity",
        "solved_in": machine.tag.code,
        "refuted_class": "sb",
        "positive_runs_valid": all(audit),
        "certificate": refutation,
    }


def _separation_regular(seed: int) -> dict:
    g = no_one_factor_cubic()
    machine = problems_mod.symmetry_break_machine(3)
    problem = problems_mod.nonconstant_on_unmatchable()
    audit = []
    for k in range(3):
        pg = PortedGraph(g, consistent_port_numbering(g, seed + k))
        result = run_machine(machine, pg, 8)
        audit.append(result.stopped and problem.check(g, result.outputs))
    refutation = bisim_mod.impossibility_check(
        g, range(g.n), problem, "vv", symmetric_port_numbering(g)
    )
    return {
        "demo": "regular",
        "solved_in": machine.tag.code + " (assuming consistency)",
        "refuted_class": "vv",
        "positive_runs_valid": all(audit),
        "certificate": refutation,
    }


def cmd_separate(args) -> int:
    started = time.perf_counter()
    builders = {
        "star": _separation_star,
        "parity": _separation_parity,
        "regular": _separation_regular,
    }
    doc = builders[args.demo](args.seed)
    certificate = doc["certificate"]
    ok = doc["positive_runs_valid"]
    if isinstance(certificate, bisim_mod.Refutation):
        recheck = bisim_mod.verify_bisimulation(
            certificate.model, None, certificate.partition.as_pairs()
        )
        doc["certificate"] = certificate.to_json()
        doc["certificate"]["reverified"] = bool(recheck)
        ok = ok and bool(recheck)
    else:
        doc["certificate"] = certificate.to_json()
        ok = False
    doc["ok"] = ok
    doc["timing"] = round(time.perf_counter() - started, 6)
    code = _report(args, doc)
    if not ok:
        return 1
    return code


def cmd_gen(args) -> int:
    families = {
        "star": lambda: star(args.k),
        "cycle": lambda: cycle(args.k),
        "no_one_factor_cubic": no_one_factor_cubic,
        "parity_union": lambda: problems_mod.parity_union()[0],
    }
    g = families[args.family]()
    if args.numbering == "none":
        text = format_graph(g)
    else:
        if args.numbering == "random":
            p = random_port_numbering(g, args.seed)
        elif args.numbering == "consistent":
            p = consistent_port_numbering(g, args.seed)
        else:
            p = symmetric_port_numbering(g)
        text = format_ported(PortedGraph(g, p))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    started = time.perf_counter()
    doc: dict = {"inputs": {"graph": args.graph}}
    try:
        pg = load_ported(args.graph)
    except (OSError, GraphError) as exc:
        raise CliError(f"invalid ported graph: {exc}") from exc
    check = validate_port_numbering(pg.graph, pg.numbering)
    doc["port_numbering"] = {"ok": check.ok, "violation": check.violation}
    if args.machine:
        machine = _machine_for(args, max(1, pg.graph.max_degree()))
        report = check_class_conformance(machine, samples=args.samples, seed=args.seed)
        doc["conformance"] = {
            "machine": machine.name,
            "class": machine.tag.code,
            "ok": report.ok,
            "probes": report.probes,
            "violations": len(report.violations),
        }
        if not report.ok:
            doc["first_violation"] = repr(report.violations[0])
    doc["timing"] = round(time.perf_counter() - started, 6)
    code = _report(args, doc)
    if not check.ok or (args.machine and not report.ok):
        return EXIT_VALIDATION
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="portlogic",
        description="Weak port-numbering models: execution, model checking, certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="print the full JSON report")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("run", help="execute a machine or compiled formula on a graph")
    p.add_argument("--graph", required=True, help=".g or .pn file")
    p.add_argument("--machine", help="builtin machine name, optionally wrapper:name")
    p.add_argument("--formula", help="formula text to compile and run")
    p.add_argument("--variant", metavar="{++,-+,+-,--}", default="--")
    p.add_argument("--delta", type=int)
    p.add_argument("--max-rounds", type=int, default=64, dest="max_rounds")
    p.add_argument("--consistent", action="store_true", help="use a consistent numbering for .g files")
    p.add_argument("--trace", action="store_true", help="include the full trace in the report")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="model-check a formula on a ported graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--variant", metavar="{++,-+,+-,--}", default=None)
    p.add_argument("--delta", type=int)
    p.add_argument("--consistent", action="store_true")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compile", help="compile a formula to a local algorithm")
    p.add_argument("--formula", required=True)
    p.add_argument("--variant", metavar="{++,-+,+-,--}", default=None)
    p.add_argument("--delta", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("decompile", help="turn a finite-horizon machine into a formula")
    p.add_argument("--machine", required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--variant", metavar="{++,-+,+-,--}", default=None)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--node-bound", type=int, default=5, dest="node_bound")
    common(p)
    p.set_defaults(func=cmd_decompile)

    p = sub.add_parser("bisim", help="coarsest (graded) bisimulation partition")
    p.add_argument("--graph", action="append", required=True, help="repeat for a disjoint union")
    p.add_argument("--variant", metavar="{++,-+,+-,--}", default=None)
    p.add_argument("--graded", action="store_true")
    common(p)
    p.set_defaults(func=cmd_bisim)

    p = sub.add_parser("separate", help="run a separation demo and emit its certificate")
    p.add_argument("demo", choices=["star", "parity", "regular"])
    common(p)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("gen", help="emit a generator graph as .g/.pn text")
    p.add_argument("--family", choices=["star", "cycle", "no_one_factor_cubic", "parity_union"], required=True)
    p.add_argument("--k", type=int, default=3, help="size parameter for star/cycle")
    p.add_argument(
        "--numbering",
        choices=["none", "random", "consistent", "symmetric"],
        default="none",
    )
    p.add_argument("--out", help="output file (stdout if omitted)")
    common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="validate a .pn file and optionally a machine's class tag")
    p.add_argument("--graph", required=True)
    p.add_argument("--machine")
    p.add_argument("--formula")
    p.add_argument("--variant", metavar="{++,-+,+-,--}", default="--")
    p.add_argument("--delta", type=int)
    p.add_argument("--samples", type=int, default=200)
    common(p)
    p.set_defaults(func=cmd_verify)

    return parser


VARIANT_CODES = ("++", "-+", "+-", "--")


def _extract_variant(argv: list[str]) -> tuple[list[str], str | None]:
    """Pull ``--variant X`` / ``--variant=X`` out before argparse sees it.

    The variant codes start with - (or are exactly --), which argparse
    refuses to accept as option values.
    """
    out: list[str] = []
    value = None
    k = 0
    while k < len(argv):
        token = argv[k]
        if token == "--variant" and k + 1 < len(argv):
            value = argv[k + 1]
            k += 2
        elif token.startswith("--variant="):
            value = token.split("=", 1)[1]
            k += 1
        else:
            out.append(token)
            k += 1
    return out, value


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    rest, variant = _extract_variant(list(argv))
    args = parser.parse_args(rest)
    if variant is not None:
        if variant not in VARIANT_CODES:
            print(
                f"error: --variant must be one of {', '.join(VARIANT_CODES)}",
                file=sys.stderr,
            )
            return EXIT_VALIDATION
        args.variant = variant
    if getattr(args, "variant", None) is None and args.command in (
        "check",
        "compile",
        "decompile",
        "bisim",
    ):
        print("error: --variant is required", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except bisim_mod.EnumerationBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
