"""Digital-annealing-style QUBO search with a dynamic energy offset.

The solver does parallel trials: every sweep evaluates all single-bit flip
candidates at once, accepts each with the Metropolis probability, flips one
accepted bit chosen uniformly, and, when nothing is accepted, raises a
dynamic offset that makes escapes from the current minimum progressively
easier.  Temperatures decay exponentially; auto_schedule derives the whole
schedule from an estimate of the mean escape barrier at local minima.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._rng import SplitMix64, derive
from .qubo import Qubo


@dataclass(frozen=True)
class ScheduleParams:
    """Knobs for automatic schedule derivation."""

    p_start: float = 0.99
    p_trans: float = 0.5
    nu: float = 0.5
    k: float = 10.0
    minima_samples: int = 64

    def __post_init__(self):
        if not (0.0 < self.p_trans < self.p_start < 1.0):
            raise ValueError(
                f"need 0 < p_trans < p_start < 1, got p_trans={self.p_trans}, p_start={self.p_start}"
            )
        if not (0.0 < self.nu <= 1.0):
            raise ValueError(f"transition fraction must be in (0,1], got {self.nu}")
        if self.k < 1.0:
            raise ValueError(f"offset divisor must be >= 1, got {self.k}")
        if self.minima_samples < 1:
            raise ValueError(f"need at least one sampled minimum, got {self.minima_samples}")


@dataclass(frozen=True)
class Schedule:
    """Concrete annealing schedule: T(t) = t_start * decay**t over I steps."""

    t_start: float
    t_end: float
    decay: float
    e_dyn_off: float
    iterations: int

    def __post_init__(self):
        if not (self.t_start >= self.t_end > 0.0):
            raise ValueError(f"need t_start >= t_end > 0, got {self.t_start}, {self.t_end}")
        if not (0.0 < self.decay <= 1.0):
            raise ValueError(f"decay must be in (0,1], got {self.decay}")
        if self.iterations < 1:
            raise ValueError(f"need at least one iteration, got {self.iterations}")
        if self.e_dyn_off < 0.0:
            raise ValueError(f"offset increment must be >= 0, got {self.e_dyn_off}")


@dataclass(frozen=True)
class RunResult:
    best_bits: tuple[int, ...]
    best_energy: float
    iteration_found: int
    seed: int


@dataclass(frozen=True)
class SampleSet:
    """Results of independent annealing runs against one QUBO."""

    runs: tuple[RunResult, ...]
    qubo_size: int
    schedule: Schedule
    seed: int

    def best(self) -> RunResult:
        return min(self.runs, key=lambda r: (r.best_energy, r.seed))

    def to_json(self) -> str:
        doc = {
            "qubo_size": self.qubo_size,
            "seed": self.seed,
            "schedule": {
                "t_start": self.schedule.t_start,
                "t_end": self.schedule.t_end,
                "decay": self.schedule.decay,
                "e_dyn_off": self.schedule.e_dyn_off,
                "iterations": self.schedule.iterations,
            },
            "runs": [
                {
                    "bits": "".join(str(b) for b in r.best_bits),
                    "energy": r.best_energy,
                    "iteration_found": r.iteration_found,
                    "seed": r.seed,
                }
                for r in self.runs
            ],
        }
        return json.dumps(doc, indent=2) + "\n"

    @staticmethod
    def from_json(text: str) -> "SampleSet":
        doc = json.loads(text)
        sched = Schedule(**doc["schedule"])
        runs = tuple(
            RunResult(
                best_bits=tuple(int(ch) for ch in r["bits"]),
                best_energy=float(r["energy"]),
                iteration_found=int(r["iteration_found"]),
                seed=int(r["seed"]),
            )
            for r in doc["runs"]
        )
        return SampleSet(runs=runs, qubo_size=int(doc["qubo_size"]), schedule=sched, seed=int(doc["seed"]))


def estimate_mean_delta(q: Qubo, samples: int, seed: int) -> float:
    """Mean over sampled local minima of the average single-flip energy rise.

    Each sample starts from a uniform random state and greedy-descends
    (always flipping the most-improving bit, lowest index on ties) to a
    local minimum X; there the incremental delta array holds
    E(X^i) - E(X) >= 0 for every i and its mean is averaged over samples.
    """
    if samples < 1:
        raise ValueError(f"need samples >= 1, got {samples}")
    sym, diag = q.dense
    n = q.size
    rng = SplitMix64(seed)
    total = 0.0
    for _ in range(samples):
        x = np.array([1 if rng.next_double() < 0.5 else 0 for _ in range(n)], dtype=np.float64)
        d_e = (1.0 - 2.0 * x) * (diag + sym @ x)
        while True:
            k = int(np.argmin(d_e))
            if d_e[k] >= 0.0:
                break
            old = d_e[k]
            sgn = 1.0 - 2.0 * x[k]
            x[k] = 1.0 - x[k]
            d_e += (1.0 - 2.0 * x) * sgn * sym[k]
            d_e[k] = -old
        total += float(d_e.mean())
    return total / samples


def auto_schedule(q: Qubo, params: ScheduleParams, iterations: int, seed: int) -> Schedule:
    """Derive start/end temperatures and the offset step from the landscape.

    T_start and the transition temperature come from inverting the
    probability that a local minimum is escaped within one parallel sweep of
    N flips; the end temperature extends the exponential decay so that the
    transition point sits at fraction nu of the run.  A zero barrier
    estimate (flat landscape) falls back to T_start=1, T_end=0.01.
    """
    if iterations < 1:
        raise ValueError(f"need iterations >= 1, got {iterations}")
    ebar = estimate_mean_delta(q, params.minima_samples, seed)
    n = q.size
    if ebar == 0.0:
        t_start, t_end = 1.0, 0.01
    else:
        t_start = -ebar / math.log(1.0 - (1.0 - params.p_start) ** (1.0 / n))
        t_trans = -ebar / math.log(1.0 - (1.0 - params.p_trans) ** (1.0 / n))
        # power form keeps nu=1 exact: t_start**0 * t_trans**1 == t_trans
        t_end = t_start ** (1.0 - 1.0 / params.nu) * t_trans ** (1.0 / params.nu)
    decay = (t_end / t_start) ** (1.0 / iterations)
    return Schedule(
        t_start=t_start,
        t_end=t_end,
        decay=decay,
        e_dyn_off=ebar / params.k,
        iterations=iterations,
    )


def anneal(q: Qubo, schedule: Schedule, runs: int, seed: int, run_offset: int = 0) -> SampleSet:
    """Run `runs` independent annealing runs; deterministic given the seed.

    Run r (global index run_offset + r) uses the sub-stream derive(seed, r),
    so results are independent of batching and of executor parallelism.
    """
    if runs < 1:
        raise ValueError(f"need runs >= 1, got {runs}")
    sym, diag = q.dense
    out = []
    for r in range(run_offset, run_offset + runs):
        run_seed = derive(seed, r)
        best_x, best_e, best_iter, _, _, _ = _kernels.anneal_run(
            sym,
            diag,
            float(q.offset),
            schedule.t_start,
            schedule.decay,
            schedule.e_dyn_off,
            schedule.iterations,
            np.uint64(run_seed),
        )
        out.append(
            RunResult(
                best_bits=tuple(int(b) for b in best_x),
                best_energy=float(best_e),
                iteration_found=int(best_iter),
                seed=run_seed,
            )
        )
    return SampleSet(runs=tuple(out), qubo_size=q.size, schedule=schedule, seed=seed)


def reference_run(
    q: Qubo,
    schedule: Schedule,
    run_seed: int,
    record_trace: bool = False,
) -> tuple[tuple[int, ...], float, int, dict]:
    """Pure-Python twin of the compiled kernel, for tests.

    Replicates the kernel operation-for-operation (same draw order, same
    floating-point summation order), so its outputs must match bit-exactly.
    Optionally records a per-iteration trace of (accepted count, offset
    before the sweep, flipped bit, energy, best energy).
    """
    sym, diag = q.dense
    n = q.size
    rng = SplitMix64(run_seed)
    x = [0] * n
    for i in range(n):
        x[i] = 1 if rng.next_double() < 0.5 else 0

    e = float(q.offset)
    d_e = [0.0] * n
    for i in range(n):
        if x[i]:
            e += diag[i]
        acc = diag[i]
        for j in range(n):
            if x[j]:
                acc += sym[i, j]
                if j > i and x[i]:
                    e += sym[i, j]
        d_e[i] = (1.0 - 2.0 * x[i]) * acc

    best_e = e
    best_iter = 0
    best_x = list(x)
    t_cur = schedule.t_start
    e_off = 0.0
    trace: dict = {"accepted_counts": [], "e_off_before": [], "flipped": [], "energy": [], "best": []}

    for t in range(schedule.iterations):
        inv_t = 1.0 / t_cur
        accepted = []
        if record_trace:
            trace["e_off_before"].append(e_off)
        for i in range(n):
            u = rng.next_double()
            arg = (d_e[i] - e_off) * inv_t
            if arg <= 0.0:
                ok = True
            elif arg < _kernels._EXP_CUTOFF:
                ok = u < math.exp(-arg)
            else:
                ok = u == 0.0
            if ok:
                accepted.append(i)
        flipped = -1
        if accepted:
            u = rng.next_double()
            k = accepted[int(u * len(accepted))]
            flipped = k
            dk = d_e[k]
            e += dk
            sgn = 1.0 - 2.0 * x[k]
            x[k] = 1 - x[k]
            for j in range(n):
                d_e[j] += (1.0 - 2.0 * x[j]) * sgn * sym[k, j]
            d_e[k] = -dk
            e_off = 0.0
            if e < best_e:
                best_e = e
                best_iter = t + 1
                best_x = list(x)
        else:
            e_off += schedule.e_dyn_off
        if record_trace:
            trace["accepted_counts"].append(len(accepted))
            trace["flipped"].append(flipped)
            trace["energy"].append(e)
            trace["best"].append(best_e)
        t_cur *= schedule.decay
    return tuple(best_x), best_e, best_iter, trace


def kernel_final_state(
    q: Qubo, schedule: Schedule, run_seed: int
) -> tuple[np.ndarray, np.ndarray, float]:
    """Expose the kernel's final (x, delta array, energy) for invariant tests."""
    sym, diag = q.dense
    _, _, _, x, d_e, e = _kernels.anneal_run(
        sym,
        diag,
        float(q.offset),
        schedule.t_start,
        schedule.decay,
        schedule.e_dyn_off,
        schedule.iterations,
        np.uint64(run_seed),
    )
    return x, d_e, float(e)
