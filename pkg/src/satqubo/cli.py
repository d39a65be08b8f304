"""Command-line interface.

Subcommands: generate, transform, solve, spectrum, hamming, stats,
experiment, pattern-search.  Failures exit nonzero after printing a
machine-readable JSON error record to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, cnf, harness, spectrum as spectrum_mod
from ._rng import derive
from .annealer import ScheduleParams, anneal, auto_schedule
from .harness import DEFAULT_SEED
from .patternsearch import SearchSpec, search_patterns
from .qubo import energy, qubo_to_json, qubo_to_triplets, scale_to_precision
from .transforms import (
    TRANSFORM_NAMES,
    apply_transform,
    decode,
    pattern_set_from_json,
)

ALL_TRANSFORMS = ",".join(TRANSFORM_NAMES)


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--out-dir", default=".")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")


def _instance_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", help="a .cnf file or a directory of .cnf files")
    parser.add_argument("--n", type=int, default=5)
    parser.add_argument("--m", type=int, default=20)
    parser.add_argument("--count", type=int, default=10)
    parser.add_argument("--allow-unsat", action="store_true")


def _schedule_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p-start", type=float, default=0.99)
    parser.add_argument("--p-trans", type=float, default=0.5)
    parser.add_argument("--nu", type=float, default=0.5)
    parser.add_argument("--k", type=float, default=10.0)
    parser.add_argument("--minima-samples", type=int, default=64)
    parser.add_argument("--precision", type=int, choices=(16, 64), default=64)


def _schedule_params(args) -> ScheduleParams:
    return ScheduleParams(
        p_start=args.p_start,
        p_trans=args.p_trans,
        nu=args.nu,
        k=args.k,
        minima_samples=args.minima_samples,
    )


def _resolve_instances(args) -> list[harness.LabeledInstance]:
    if args.input:
        path = Path(args.input)
        if path.is_dir():
            return harness.load_instance_dir(str(path))
        formula = cnf.parse_dimacs(path.read_text())
        sat = (
            cnf.exhaustive_sat(formula)[0]
            if formula.n <= harness.SAT_LABEL_LIMIT
            else None
        )
        return [harness.LabeledInstance(0, formula, sat)]
    return harness.instance_set(
        args.n,
        args.m,
        args.count,
        derive(args.seed, harness.SEED_INSTANCES),
        satisfiable_only=not args.allow_unsat,
    )


def _parse_transform_list(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    for name in names:
        if name not in TRANSFORM_NAMES:
            raise ValueError(f"unknown transform {name!r}; expected from {TRANSFORM_NAMES}")
    return names


def cmd_generate(args) -> int:
    instances = _resolve_instances(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    index = []
    for inst in instances:
        name = f"instance_{inst.instance_id:04d}.cnf"
        (out / name).write_text(cnf.write_dimacs(inst.formula))
        index.append(
            {
                "file": name,
                "n": inst.formula.n,
                "m": inst.formula.m,
                "satisfiable": inst.satisfiable,
            }
        )
    (out / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(instances)} instances to {out}")
    return 0


def cmd_transform(args) -> int:
    formula = cnf.parse_dimacs(Path(args.input).read_text())
    patterns = None
    if args.patterns:
        patterns = pattern_set_from_json(Path(args.patterns).read_text())
    result = apply_transform(args.transform, formula, patterns)
    q = result.qubo
    if args.precision:
        q = scale_to_precision(q, args.precision).qubo
    text = qubo_to_json(q) if args.format == "json" else qubo_to_triplets(q)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_solve(args) -> int:
    formula = cnf.parse_dimacs(Path(args.input).read_text())
    result = apply_transform(args.transform, formula)
    scaled = scale_to_precision(result.qubo, args.precision)
    sched = auto_schedule(
        scaled.qubo, _schedule_params(args), args.iterations, derive(args.seed, harness.SEED_SCHEDULE)
    )
    sample = anneal(
        scaled.qubo, sched, args.runs, derive(args.seed, harness.SEED_ANNEAL)
    )
    best = sample.best()
    assignment = decode(result, best.best_bits)
    doc = {
        "transform": args.transform,
        "iterations": args.iterations,
        "runs": args.runs,
        "best": {
            "assignment": list(assignment),
            "energy": energy(result.qubo, best.best_bits),
            "iteration_found": best.iteration_found,
            "violated_clauses": cnf.violated_count(formula, assignment),
            "correct": cnf.violated_count(formula, assignment) == 0,
        },
        "schedule": {
            "t_start": sched.t_start,
            "t_end": sched.t_end,
            "decay": sched.decay,
            "e_dyn_off": sched.e_dyn_off,
        },
        "sample_set": json.loads(sample.to_json()),
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _analysis_csvs(args, kind: str) -> int:
    instances = _resolve_instances(args)
    names = _parse_transform_list(args.transforms)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec_rows: list[tuple] = []
    ham_rows: list[tuple] = []
    means: dict = {}
    for name in names:
        analysis = spectrum_mod.averaged_analysis([i.formula for i in instances], name)
        spec_rows.extend(spectrum_mod.spectrum_csv_rows(analysis))
        ham_rows.extend(spectrum_mod.hamming_csv_rows(analysis))
        means[name] = {
            "level_means": dict(analysis.mean_report),
            "hamming_means": {
                pair: {str(d): v for d, v in hist.items()}
                for pair, hist in analysis.mean_histograms.items()
            },
        }
    if kind in ("spectrum", "both"):
        harness.write_csv(out / "spectrum.csv", spectrum_mod.SPECTRUM_CSV_HEADER, spec_rows)
    if kind in ("hamming", "both"):
        harness.write_csv(out / "hamming.csv", spectrum_mod.HAMMING_CSV_HEADER, ham_rows)
    (out / f"{kind}_means.json").write_text(json.dumps(means, indent=2, sort_keys=True) + "\n")
    print(f"analyzed {len(instances)} instances x {len(names)} transforms -> {out}")
    return 0


def cmd_spectrum(args) -> int:
    return _analysis_csvs(args, "spectrum")


def cmd_hamming(args) -> int:
    return _analysis_csvs(args, "hamming")


def cmd_stats(args) -> int:
    instances = _resolve_instances(args)
    names = _parse_transform_list(args.transforms)
    rows = harness.stats_report(instances, names)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        doc = [dict(zip(harness.STATS_CSV_HEADER, row)) for row in rows]
        (out / "stats.json").write_text(json.dumps(doc, indent=2) + "\n")
    else:
        harness.write_csv(out / "stats.csv", harness.STATS_CSV_HEADER, rows)
    print(f"wrote stats for {len(instances)} instances to {out}")
    return 0


def cmd_experiment(args) -> int:
    cfg = harness.ExperimentConfig(
        n=args.n,
        m=args.m,
        count=args.count,
        seed=args.seed,
        transforms=tuple(_parse_transform_list(args.transforms)),
        budgets=tuple(int(b) for b in args.budgets.split(",")),
        runs=args.runs,
        precision=args.precision,
        schedule=_schedule_params(args),
        out_dir=args.out_dir,
        instance_dir=args.input if args.input else None,
        satisfiable_only=not args.allow_unsat,
    )
    result = harness.run_experiment(cfg)
    for row in result.metrics:
        print(
            f"{row.transform} @ {row.budget}: solved {row.solved_instances_pct:.1f}% "
            f"correct {row.correct_solutions_pct:.2f}%"
        )
    print(f"outputs in {args.out_dir}")
    return 0


def cmd_pattern_search(args) -> int:
    values = tuple(float(v) for v in args.values.split(","))
    types = (0, 1, 2, 3) if args.type == "all" else (int(args.type),)
    catalog: dict[str, list] = {}
    total = 0
    for t in types:
        spec = SearchSpec(values=values, type_id=t, cap=args.cap)
        patterns = search_patterns(spec)
        catalog[str(t)] = [[list(row) for row in p.entries] for p in patterns]
        total += len(patterns)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "patterns.json"
    path.write_text(json.dumps(catalog, indent=2, sort_keys=True) + "\n")
    print(f"found {total} patterns -> {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satqubo",
        description="3-SAT to QUBO transformations, annealing, and spectrum analysis",
    )
    parser.add_argument("--version", action="version", version=f"satqubo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write random 3-SAT instances as DIMACS files")
    _common_flags(p)
    _instance_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("transform", help="compile one DIMACS file to a QUBO")
    _common_flags(p)
    p.add_argument("--input", required=True)
    p.add_argument("--transform", required=True, choices=TRANSFORM_NAMES)
    p.add_argument("--patterns", help="JSON pattern set overriding the built-in gadgets")
    p.add_argument("--precision", type=int, choices=(16, 64), default=0,
                   help="also scale to this integer precision (0 = no scaling)")
    p.add_argument("--output")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("solve", help="transform one instance and anneal it")
    _common_flags(p)
    _schedule_flags(p)
    p.add_argument("--input", required=True)
    p.add_argument("--transform", required=True, choices=TRANSFORM_NAMES)
    p.add_argument("--iterations", type=int, default=10**5)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("spectrum", help="exhaustive level statistics to CSV")
    _common_flags(p)
    _instance_flags(p)
    p.add_argument("--transforms", default=ALL_TRANSFORMS)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("hamming", help="Hamming-distance histograms to CSV")
    _common_flags(p)
    _instance_flags(p)
    p.add_argument("--transforms", default=ALL_TRANSFORMS)
    p.set_defaults(func=cmd_hamming)

    p = sub.add_parser("stats", help="QUBO matrix statistics to CSV")
    _common_flags(p)
    _instance_flags(p)
    p.add_argument("--transforms", default=ALL_TRANSFORMS)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("experiment", help="full sweep: metrics, runs, stats, manifest")
    _common_flags(p)
    _instance_flags(p)
    _schedule_flags(p)
    p.add_argument("--transforms", default=ALL_TRANSFORMS)
    p.add_argument("--budgets", default="1000,10000,100000,1000000")
    p.add_argument("--runs", type=int, default=100)
    # desk-scale default: 50 instances at the hard clause ratio (hours on one
    # core at the default budgets; start smaller for a quick look)
    p.set_defaults(func=cmd_experiment, n=11, m=46, count=50)

    p = sub.add_parser("pattern-search", help="enumerate valid clause gadgets")
    _common_flags(p)
    p.add_argument("--values", default="-1,0,1",
                   help="comma-separated coefficient set; use --values=-1,0,1 for negatives")
    p.add_argument("--type", default="all", choices=("0", "1", "2", "3", "all"))
    p.add_argument("--cap", type=int, default=10**8)
    p.set_defaults(func=cmd_pattern_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single CLI error boundary
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
