"""Command-line interface: generate / solve / bench / fit / estimate-luts.

Machine-readable JSON goes to stdout (or ``--out``); human summaries go to
stderr. Every run's JSON embeds the fully resolved configuration (all
defaults materialized, seed included) so it can be replayed exactly.

Exit codes: 0 success, 1 solve ended by budget exhaustion, 2 usage or input
errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from . import hwemu
from .cnf import parse_dimacs, serialize_dimacs
from .dynamics import Params
from .errors import MemsatError
from .generator import GeneratorConfig, generate
from .solver import BUDGET_EXHAUSTED, SolveConfig, solve, solve_traced

EXIT_OK = 0
EXIT_BUDGET = 1
EXIT_USAGE = 2


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="memsat", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="emit a planted 3-SAT instance as DIMACS + JSON sidecar")
    g.add_argument("-N", "--num-vars", type=int, required=True)
    g.add_argument("-r", "--ratio", type=float, required=True, help="clauses per variable")
    g.add_argument("--p0", type=float, default=0.08, help="probability of a 0-negation clause")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--out", required=True, help="DIMACS output path; sidecar is <out>.json")

    s = sub.add_parser("solve", help="solve a DIMACS instance")
    s.add_argument("cnf", help="DIMACS CNF path")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-steps", type=int, default=10_000_000)
    s.add_argument("--check-every", type=int, default=1)
    s.add_argument("--precision", choices=("float32", "float64"), default="float64")
    s.add_argument("--engine", choices=("float", "hw"), default="float")
    s.add_argument("--backend", choices=("numba", "numpy"), default=None,
                   help="kernel backend override (default: numba when available)")
    s.add_argument("--dt", type=float, default=None)
    for name in ("alpha", "beta", "gamma", "delta", "epsilon", "zeta"):
        s.add_argument(f"--{name}", type=float, default=None)
    s.add_argument("--rigidity-ties", choices=("all", "first"), default="all")
    s.add_argument("--int-bits", type=int, default=hwemu.DEFAULT_INT_BITS,
                   help="hw engine: integer bits of the voltage format")
    s.add_argument("--frac-bits", type=int, default=hwemu.DEFAULT_FRAC_BITS,
                   help="hw engine: fraction bits of the voltage format")
    s.add_argument("--trace", default=None, help="float engine: write a diagnostics CSV here")
    s.add_argument("--trace-every", type=int, default=1)
    s.add_argument("-o", "--out", default=None, help="write the JSON record here instead of stdout")

    b = sub.add_parser("bench", help="run a scaling sweep")
    b.add_argument("--sizes", default="10,30,50,70,90", help="comma-separated N values")
    b.add_argument("--ratios", default="4.3,7", help="comma-separated clause ratios")
    b.add_argument("--instances", type=int, default=10)
    b.add_argument("--engine", choices=("float", "hw"), default="float")
    b.add_argument("--base-seed", type=int, default=bench_mod.DEFAULT_BASE_SEED)
    b.add_argument("--max-steps", type=int, default=10_000_000)
    b.add_argument("--precision", choices=("float32", "float64"), default="float64")
    b.add_argument("--p0", type=float, default=0.08)
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.add_argument("--config", default=None, help="JSON file with sweep fields (flags override)")
    b.add_argument("-o", "--out", default=None)

    f = sub.add_parser("fit", help="allometric fit over exported sweep results")
    f.add_argument("results", help="results table from the bench subcommand")
    f.add_argument("--ratio", type=float, required=True)
    f.add_argument("--value", choices=("steps", "wall_s", "cycles", "projected_hw_s"),
                   default="steps")
    f.add_argument("--format", choices=("csv", "json"), default=None,
                   help="table format (default: by file extension)")
    f.add_argument("-o", "--out", default=None)

    e = sub.add_parser("estimate-luts", help="LUT resource model for a problem size")
    e.add_argument("N", type=int)
    e.add_argument("--board", default=None, help="board name, e.g. XC7A100T or VU9P")
    e.add_argument("-o", "--out", default=None)

    return ap


def _cmd_generate(args) -> int:
    cfg = GeneratorConfig(num_vars=args.num_vars, ratio=args.ratio, p0=args.p0, seed=args.seed)
    planted = generate(cfg)
    out = Path(args.out)
    out.write_text(serialize_dimacs(planted.instance))
    payload = {
        "command": "generate",
        "config": {
            "num_vars": cfg.num_vars,
            "ratio": cfg.ratio,
            "p0": cfg.p0,
            "seed": cfg.seed,
            "out": str(out),
        },
        "num_clauses": planted.instance.num_clauses,
        "instance_digest": planted.instance.digest,
        "planted": [int(b) for b in planted.planted],
    }
    sidecar = out.with_name(out.name + ".json")
    sidecar.write_text(json.dumps(payload, indent=2) + "\n")
    _emit(payload, None)
    _say(f"wrote {out} ({planted.instance.num_clauses} clauses) and {sidecar}")
    return EXIT_OK


def _resolved_solve_config(args, params: Params) -> dict:
    cfg = {
        "cnf": args.cnf,
        "engine": args.engine,
        "seed": args.seed,
        "max_steps": args.max_steps,
        "check_every": args.check_every,
        "precision": args.precision,
        "backend": args.backend,
        "params": {
            "alpha": params.alpha,
            "beta": params.beta,
            "gamma": params.gamma,
            "delta": params.delta,
            "epsilon": params.epsilon,
            "zeta": params.zeta,
            "dt": params.dt,
            "xl_max": params.xl_max,
            "rigidity_ties": params.rigidity_ties,
        },
    }
    if args.engine == "hw":
        cfg["int_bits"] = args.int_bits
        cfg["frac_bits"] = args.frac_bits
    if args.trace:
        cfg["trace"] = args.trace
        cfg["trace_every"] = args.trace_every
    return cfg


def _cmd_solve(args) -> int:
    instance = parse_dimacs(Path(args.cnf).read_text())
    params = Params.for_instance(
        instance,
        dt=args.dt,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        delta=args.delta,
        epsilon=args.epsilon,
        zeta=args.zeta,
        rigidity_ties=args.rigidity_ties,
    )
    config = SolveConfig(
        params=params,
        max_steps=args.max_steps,
        check_every=args.check_every,
        seed=args.seed,
        precision=args.precision,
    )
    if args.engine == "hw":
        if args.trace:
            raise MemsatError("--trace is supported by the float engine only")
        fmt = hwemu.FixedPointFormat(args.int_bits, args.frac_bits)
        record = hwemu.solve_hw(instance, config, fmt, backend=args.backend)
    elif args.trace:
        record, rows = solve_traced(instance, config, args.trace_every, backend=args.backend)
        with open(args.trace, "w") as fh:
            fh.write("t,unsat_clauses,max_clause_value,max_xl\n")
            for row in rows:
                fh.write(f"{row.t},{row.unsat_clauses},{row.max_clause_value!r},{row.max_xl!r}\n")
    else:
        record = solve(instance, config, backend=args.backend)
    payload = {
        "command": "solve",
        "config": _resolved_solve_config(args, params),
        "record": record.to_dict(),
    }
    _emit(payload, args.out)
    _say(f"{args.cnf}: {record.outcome} after {record.steps} steps ({record.wall_time:.3f}s)")
    return EXIT_OK if record.outcome != BUDGET_EXHAUSTED else EXIT_BUDGET


def _cmd_bench(args) -> int:
    fields = {
        "sizes": tuple(int(x) for x in str(args.sizes).split(",") if x),
        "ratios": tuple(float(x) for x in str(args.ratios).split(",") if x),
        "instances": args.instances,
        "engine": args.engine,
        "base_seed": args.base_seed,
        "max_steps": args.max_steps,
        "p0": args.p0,
        "precision": args.precision,
    }
    if args.config:
        file_cfg = json.loads(Path(args.config).read_text())
        for key, value in file_cfg.items():
            if key in ("sizes", "ratios"):
                value = tuple(value)
            fields[key] = value
    spec = bench_mod.SweepSpec(**fields)
    rows = bench_mod.run_sweep(spec)
    if args.format == "json":
        payload = {
            "command": "bench",
            "config": spec.to_dict(),
            "columns": list(bench_mod.COLUMNS),
            "results": [dict(zip(bench_mod.COLUMNS, r.as_tuple())) for r in rows],
        }
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = bench_mod.export_results(rows, "csv")
    if args.out:
        Path(args.out).write_text(text)
        if args.format == "csv":
            cfg_path = Path(args.out).with_suffix(Path(args.out).suffix + ".config.json")
            cfg_path.write_text(json.dumps({"command": "bench", "config": spec.to_dict()}, indent=2) + "\n")
    else:
        sys.stdout.write(text)
    solved = sum(1 for r in rows if r.outcome != BUDGET_EXHAUSTED)
    _say(f"bench: {solved}/{len(rows)} runs solved; config {json.dumps(spec.to_dict())}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    fmt = args.format
    if fmt is None:
        fmt = "json" if args.results.endswith(".json") else "csv"
    rows = bench_mod.parse_results(Path(args.results).read_text(), fmt)
    points = bench_mod.medians(rows, args.ratio, args.value)
    fit = bench_mod.fit_allometric(points)
    payload = {
        "command": "fit",
        "config": {"results": args.results, "ratio": args.ratio, "value": args.value, "format": fmt},
        "fit": fit.to_dict(),
    }
    _emit(payload, args.out)
    _say(f"fit over {args.value} at ratio {args.ratio}: exponent {fit.exponent:.3f}"
         f" +- {fit.exponent_stderr:.3f}, prefactor {fit.prefactor:.3g}")
    return EXIT_OK


def _cmd_estimate_luts(args) -> int:
    model = bench_mod.DEFAULT_RESOURCE_MODEL
    luts = bench_mod.estimate_luts(args.N, model)
    payload = {
        "command": "estimate-luts",
        "config": {"N": args.N, "board": args.board},
        "luts": luts,
        "crossover": model.crossover,
    }
    if args.board:
        if args.board not in model.boards:
            raise MemsatError(
                f"unknown board {args.board!r}; known: {', '.join(sorted(model.boards))}"
            )
        capacity = model.boards[args.board]
        payload["board"] = {
            "name": args.board,
            "capacity_luts": capacity,
            "fits": luts <= capacity,
            "max_vars": bench_mod.max_vars_for_capacity(capacity, model),
        }
    _emit(payload, args.out)
    _say(f"N={args.N}: {luts} LUTs")
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "fit": _cmd_fit,
    "estimate-luts": _cmd_estimate_luts,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except MemsatError as exc:
        _say(f"error: {exc}")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        _say(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
