"""Experiment orchestration: instance sets, sweeps, metrics, persistence.

A run is CORRECT when its decoded best assignment satisfies the formula
(checked against the clause semantics, never by energy comparison); an
instance is SOLVED at a budget when at least one of its runs is correct.
All randomness flows from the config seed through fixed derivation tags, so
every output is reproducible byte-for-byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from ._rng import derive
from . import cnf
from .annealer import ScheduleParams, anneal, auto_schedule
from .qubo import energy, scale_to_precision, stats
from .transforms import TransformResult, apply_transform, decode

# seed derivation namespaces (documented so streams can be reproduced)
SEED_INSTANCES = 101
SEED_SCHEDULE = 202
SEED_ANNEAL = 303

SAT_LABEL_LIMIT = 24
DEFAULT_SEED = 2023


@dataclass(frozen=True)
class LabeledInstance:
    instance_id: int
    formula: cnf.Formula
    satisfiable: Optional[bool]  # None when n exceeded the labeling guard


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 11
    m: int = 46
    count: int = 50
    seed: int = DEFAULT_SEED
    transforms: tuple[str, ...] = ("chancellor-j1", "chancellor-j5", "algorithm", "counttrue")
    budgets: tuple[int, ...] = (10**3, 10**4, 10**5, 10**6)
    runs: int = 100
    precision: int = 64
    schedule: ScheduleParams = field(default_factory=ScheduleParams)
    out_dir: Optional[str] = None
    instance_dir: Optional[str] = None
    satisfiable_only: bool = True

    def __post_init__(self):
        if any(b < 1 for b in self.budgets) or not self.budgets:
            raise ValueError("iteration budgets must be >= 1")
        if self.runs < 1:
            raise ValueError("need at least one run per cell")


@dataclass(frozen=True)
class RunRecord:
    instance_id: int
    transform: str
    budget: int
    run_index: int
    best_energy: float
    iteration_found: int
    correct: bool


@dataclass(frozen=True)
class MetricsRow:
    transform: str
    budget: int
    solved_instances_pct: float
    correct_solutions_pct: float


@dataclass(frozen=True)
class ExperimentResult:
    metrics: tuple[MetricsRow, ...]
    records: tuple[RunRecord, ...]
    stats_rows: tuple[tuple, ...]
    instances: tuple[LabeledInstance, ...]
    manifest: dict


def instance_set(
    n: int,
    m: int,
    count: int,
    seed: int,
    satisfiable_only: bool = True,
) -> list[LabeledInstance]:
    """Draw `count` random instances; optionally keep only satisfiable ones.

    Candidate i uses the sub-seed derive(seed, i); filtering preserves the
    candidate order, so the kept set is reproducible from (n, m, seed).
    """
    if satisfiable_only and n > SAT_LABEL_LIMIT:
        raise ValueError(f"cannot filter satisfiable instances beyond n={SAT_LABEL_LIMIT}")
    out: list[LabeledInstance] = []
    candidate = 0
    while len(out) < count:
        formula = cnf.generate_random(n, m, derive(seed, candidate))
        candidate += 1
        sat: Optional[bool] = None
        if n <= SAT_LABEL_LIMIT:
            sat = cnf.exhaustive_sat(formula)[0]
        if satisfiable_only and not sat:
            continue
        out.append(LabeledInstance(instance_id=len(out), formula=formula, satisfiable=sat))
        if candidate > 100 * max(count, 1) + 1000:
            raise RuntimeError("instance generation rejected too many candidates")
    return out


def load_instance_dir(path: str) -> list[LabeledInstance]:
    """Read every *.cnf file in a directory (sorted by name)."""
    files = sorted(Path(path).glob("*.cnf"))
    if not files:
        raise ValueError(f"no .cnf files found in {path}")
    out = []
    for idx, fp in enumerate(files):
        formula = cnf.parse_dimacs(fp.read_text())
        sat = cnf.exhaustive_sat(formula)[0] if formula.n <= SAT_LABEL_LIMIT else None
        out.append(LabeledInstance(instance_id=idx, formula=formula, satisfiable=sat))
    return out


def format_number(value) -> str:
    """Deterministic CSV number formatting: integral floats print as ints."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if value.is_integer():
            return str(int(value))
        return repr(value)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_number(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def aggregate_metrics(records: Sequence[RunRecord]) -> list[MetricsRow]:
    """Pure fold from raw run records to the per-(transform, budget) metrics."""
    groups: dict[tuple[str, int], list[RunRecord]] = {}
    order: list[tuple[str, int]] = []
    for rec in records:
        key = (rec.transform, rec.budget)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)
    rows = []
    for key in order:
        recs = groups[key]
        by_instance: dict[int, bool] = {}
        for rec in recs:
            by_instance[rec.instance_id] = by_instance.get(rec.instance_id, False) or rec.correct
        solved = 100.0 * sum(by_instance.values()) / len(by_instance)
        correct = 100.0 * sum(r.correct for r in recs) / len(recs)
        rows.append(
            MetricsRow(
                transform=key[0],
                budget=key[1],
                solved_instances_pct=solved,
                correct_solutions_pct=correct,
            )
        )
    return rows


def stats_report(
    instances: Sequence[LabeledInstance], transforms: Sequence[str]
) -> list[tuple]:
    """Long-format MatrixStats rows: (instance_id, transform, bits, distinct, range)."""
    rows = []
    for inst in instances:
        for name in transforms:
            result = apply_transform(name, inst.formula)
            st = stats(result.qubo)
            rows.append((inst.instance_id, name, st.bits, st.distinct_quadratic, st.value_range))
    return rows


STATS_CSV_HEADER = ("instance_id", "transform", "bits", "distinct_quadratic", "value_range")
RUNS_CSV_HEADER = (
    "instance_id",
    "transform",
    "budget",
    "run_index",
    "best_energy",
    "iteration_found",
    "correct",
)
METRICS_CSV_HEADER = ("transform", "budget", "solved_instances_pct", "correct_solutions_pct")


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Full sweep over (instance, transform, budget, run); see module docs.

    Guard violations (oversized instances for a transform) are recorded in
    the manifest and skipped without aborting the sweep.
    """
    if cfg.instance_dir is not None:
        instances = load_instance_dir(cfg.instance_dir)
    else:
        instances = instance_set(
            cfg.n, cfg.m, cfg.count, derive(cfg.seed, SEED_INSTANCES), cfg.satisfiable_only
        )
    records: list[RunRecord] = []
    stats_rows: list[tuple] = []
    errors: list[dict] = []
    for inst in instances:
        for t_idx, name in enumerate(cfg.transforms):
            try:
                result = apply_transform(name, inst.formula)
            except ValueError as exc:
                errors.append(
                    {"instance_id": inst.instance_id, "transform": name, "error": str(exc)}
                )
                continue
            st = stats(result.qubo)
            stats_rows.append(
                (inst.instance_id, name, st.bits, st.distinct_quadratic, st.value_range)
            )
            scaled = scale_to_precision(result.qubo, cfg.precision)
            for b_idx, budget in enumerate(cfg.budgets):
                sched = auto_schedule(
                    scaled.qubo,
                    cfg.schedule,
                    budget,
                    derive(cfg.seed, SEED_SCHEDULE, inst.instance_id, t_idx),
                )
                sample = anneal(
                    scaled.qubo,
                    sched,
                    cfg.runs,
                    derive(cfg.seed, SEED_ANNEAL, inst.instance_id, t_idx, b_idx),
                )
                for run_idx, run in enumerate(sample.runs):
                    assignment = decode(result, run.best_bits)
                    correct = cnf.violated_count(inst.formula, assignment) == 0
                    records.append(
                        RunRecord(
                            instance_id=inst.instance_id,
                            transform=name,
                            budget=budget,
                            run_index=run_idx,
                            best_energy=energy(result.qubo, run.best_bits),
                            iteration_found=run.iteration_found,
                            correct=correct,
                        )
                    )
    metrics = aggregate_metrics(records)
    manifest = {
        # out_dir is where results land, not part of the experiment identity
        "config": {
            **{k: v for k, v in asdict(cfg).items() if k not in ("schedule", "out_dir")},
            "schedule": asdict(cfg.schedule),
        },
        "version": __version__,
        "instances": [
            {
                "instance_id": inst.instance_id,
                "n": inst.formula.n,
                "m": inst.formula.m,
                "satisfiable": inst.satisfiable,
            }
            for inst in instances
        ],
        "errors": errors,
    }
    result = ExperimentResult(
        metrics=tuple(metrics),
        records=tuple(records),
        stats_rows=tuple(stats_rows),
        instances=tuple(instances),
        manifest=manifest,
    )
    if cfg.out_dir is not None:
        persist_experiment(result, Path(cfg.out_dir))
    return result


def persist_experiment(result: ExperimentResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(
        out_dir / "metrics.csv",
        METRICS_CSV_HEADER,
        [
            (m.transform, m.budget, m.solved_instances_pct, m.correct_solutions_pct)
            for m in result.metrics
        ],
    )
    write_csv(
        out_dir / "runs.csv",
        RUNS_CSV_HEADER,
        [
            (
                r.instance_id,
                r.transform,
                r.budget,
                r.run_index,
                r.best_energy,
                r.iteration_found,
                r.correct,
            )
            for r in result.records
        ],
    )
    write_csv(out_dir / "instance_stats.csv", STATS_CSV_HEADER, result.stats_rows)
    (out_dir / "manifest.json").write_text(
        json.dumps(result.manifest, indent=2, sort_keys=True) + "\n"
    )
    inst_dir = out_dir / "instances"
    inst_dir.mkdir(exist_ok=True)
    for inst in result.instances:
        (inst_dir / f"instance_{inst.instance_id:04d}.cnf").write_text(
            cnf.write_dimacs(inst.formula)
        )


def read_runs_csv(path: Path) -> list[RunRecord]:
    """Parse runs.csv back into records (for metrics recomputation)."""
    lines = path.read_text().strip().splitlines()
    records = []
    for line in lines[1:]:
        inst, name, budget, run_idx, e, it, corr = line.split(",")
        records.append(
            RunRecord(
                instance_id=int(inst),
                transform=name,
                budget=int(budget),
                run_index=int(run_idx),
                best_energy=float(e),
                iteration_found=int(it),
                correct=corr == "1",
            )
        )
    return records


def first_correct_run(
    result: TransformResult,
    formula: cnf.Formula,
    budget: int,
    max_runs: int,
    seed: int,
    precision: int = 64,
    schedule_params: Optional[ScheduleParams] = None,
    schedule_seed: Optional[int] = None,
    batch: int = 10,
) -> Optional[int]:
    """Index of the first correct run among max_runs, or None.

    Runs are executed in batches but use their canonical per-run sub-seeds,
    so a hit at index r proves that the full max_runs grid contains at least
    one correct run without paying for the remaining runs.
    """
    params = schedule_params or ScheduleParams()
    scaled = scale_to_precision(result.qubo, precision)
    sched = auto_schedule(
        scaled.qubo, params, budget, seed if schedule_seed is None else schedule_seed
    )
    for start in range(0, max_runs, batch):
        count = min(batch, max_runs - start)
        sample = anneal(scaled.qubo, sched, count, seed, run_offset=start)
        for offset, run in enumerate(sample.runs):
            assignment = decode(result, run.best_bits)
            if cnf.violated_count(formula, assignment) == 0:
                return start + offset
    return None
