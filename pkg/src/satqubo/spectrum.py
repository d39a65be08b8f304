"""Exhaustive energy spectra of small QUBOs.

A Spectrum is the exact partition of all 2**N configurations into energy
levels, the diagonal view of the QUBO Hamiltonian.  Configurations are
integer codes with bit i = variable i.  Grouping is exact for
integer-coefficient QUBOs (all four transformations produce integers) and
uses a 1e-9 relative tolerance otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernels, cnf, transforms
from .qubo import Qubo

ENUMERATION_BIT_LIMIT = 26
FLOAT_LEVEL_RTOL = 1e-9
_COUNTING_BIN_LIMIT = 1 << 24


@dataclass(frozen=True, eq=False)
class EnergyLevel:
    energy: float
    configs: np.ndarray  # uint32 codes, ascending


@dataclass(frozen=True, eq=False)
class Spectrum:
    n_bits: int
    levels: tuple[EnergyLevel, ...]

    @property
    def energies(self) -> tuple[float, ...]:
        return tuple(level.energy for level in self.levels)

    def degeneracy(self, level_index: int) -> int:
        return int(self.levels[level_index].configs.shape[0])


@dataclass(frozen=True)
class LevelReport:
    ground_energy: float
    ground_degeneracy: int
    first_excited_energy: float
    first_excited_degeneracy: int
    gap: float


@dataclass(frozen=True)
class HammingHistogram:
    """Pair counts by Hamming distance d in 0..N.

    Within-set histograms count unordered pairs of distinct configurations;
    cross-set histograms count all pairs.
    """

    counts: Mapping[int, int]

    def total_pairs(self) -> int:
        return sum(self.counts.values())


def full_spectrum(q: Qubo) -> Spectrum:
    """Group all 2**N configurations by exact energy, ascending."""
    if q.size > ENUMERATION_BIT_LIMIT:
        raise ValueError(f"enumeration guard: size {q.size} > {ENUMERATION_BIT_LIMIT}")
    sym, diag = q.dense
    energies = _kernels.enumerate_energies(sym, diag, float(q.offset))
    if q.is_integer_valued():
        ints = energies.astype(np.int64)
        lo, hi = int(ints.min()), int(ints.max())
        if hi - lo < _COUNTING_BIN_LIMIT:
            # counting sort: one pass per 2**N codes, far cheaper than argsort
            counts, grouped, offsets = _kernels.counting_group(ints - lo, hi - lo + 1)
            levels = []
            for b in range(hi - lo + 1):
                if counts[b]:
                    configs = grouped[offsets[b] : offsets[b + 1]]
                    levels.append(EnergyLevel(energy=float(lo + b), configs=configs))
            return Spectrum(n_bits=q.size, levels=tuple(levels))
        exact = True
    else:
        exact = False
    order = np.argsort(energies, kind="stable")
    sorted_e = energies[order]
    if exact:
        breaks = np.nonzero(np.diff(sorted_e) != 0)[0] + 1
    else:
        tol = FLOAT_LEVEL_RTOL * np.maximum(1.0, np.abs(sorted_e[:-1]))
        breaks = np.nonzero(np.diff(sorted_e) > tol)[0] + 1
    bounds = [0, *breaks.tolist(), sorted_e.shape[0]]
    levels = []
    for lo_i, hi_i in zip(bounds[:-1], bounds[1:]):
        # stable sort keeps equal-energy configs in ascending code order
        configs = order[lo_i:hi_i].astype(np.uint32)
        levels.append(EnergyLevel(energy=float(sorted_e[lo_i]), configs=configs))
    return Spectrum(n_bits=q.size, levels=tuple(levels))


def level_report(spectrum: Spectrum) -> LevelReport:
    """Degeneracies of the two lowest levels and the gap between them."""
    if len(spectrum.levels) < 2:
        raise ValueError("spectrum has a single level; no gap exists")
    g, e1 = spectrum.levels[0], spectrum.levels[1]
    return LevelReport(
        ground_energy=g.energy,
        ground_degeneracy=int(g.configs.shape[0]),
        first_excited_energy=e1.energy,
        first_excited_degeneracy=int(e1.configs.shape[0]),
        gap=e1.energy - g.energy,
    )


SET_PAIRS = ("ground-ground", "excited-excited", "ground-excited")


def hamming_histograms(
    spectrum: Spectrum,
) -> tuple[HammingHistogram, HammingHistogram, HammingHistogram]:
    """Distance histograms within ground, within first excited, and across."""
    if len(spectrum.levels) < 2:
        raise ValueError("spectrum has a single level; nothing to compare")
    n = spectrum.n_bits
    ground = spectrum.levels[0].configs
    excited = spectrum.levels[1].configs
    within_g = _kernels.hamming_within(ground, n)
    within_e = _kernels.hamming_within(excited, n)
    cross = _kernels.hamming_cross(ground, excited, n)
    return (
        HammingHistogram({d: int(within_g[d]) for d in range(n + 1)}),
        HammingHistogram({d: int(within_e[d]) for d in range(n + 1)}),
        HammingHistogram({d: int(cross[d]) for d in range(n + 1)}),
    )


@dataclass(frozen=True)
class InstanceAnalysis:
    instance_id: int
    transform_name: str
    n_bits: int
    report: LevelReport
    histograms: tuple[HammingHistogram, HammingHistogram, HammingHistogram]


@dataclass(frozen=True)
class AveragedAnalysis:
    """Per-instance spectra plus cross-instance means for one transformation."""

    transform_name: str
    instances: tuple[InstanceAnalysis, ...]
    mean_report: Mapping[str, float]
    mean_histograms: Mapping[str, Mapping[int, float]]


def averaged_analysis(
    formulas: Sequence[cnf.Formula], transform_name: str
) -> AveragedAnalysis:
    """Spectrum and Hamming statistics for each instance, plus means.

    Mean histograms average raw pair counts per distance across instances
    (distances missing from an instance count as zero).
    """
    analyses = []
    for idx, formula in enumerate(formulas):
        result = transforms.apply_transform(transform_name, formula)
        spec = full_spectrum(result.qubo)
        analyses.append(
            InstanceAnalysis(
                instance_id=idx,
                transform_name=transform_name,
                n_bits=result.qubo.size,
                report=level_report(spec),
                histograms=hamming_histograms(spec),
            )
        )
    count = len(analyses)
    if count == 0:
        raise ValueError("need at least one instance")
    mean_report = {
        "ground_energy": sum(a.report.ground_energy for a in analyses) / count,
        "ground_degeneracy": sum(a.report.ground_degeneracy for a in analyses) / count,
        "first_excited_energy": sum(a.report.first_excited_energy for a in analyses) / count,
        "first_excited_degeneracy": sum(a.report.first_excited_degeneracy for a in analyses) / count,
        "gap": sum(a.report.gap for a in analyses) / count,
    }
    mean_histograms: dict[str, dict[int, float]] = {}
    for pair_idx, pair_name in enumerate(SET_PAIRS):
        dists: set[int] = set()
        for a in analyses:
            dists.update(a.histograms[pair_idx].counts)
        mean_histograms[pair_name] = {
            d: sum(a.histograms[pair_idx].counts.get(d, 0) for a in analyses) / count
            for d in sorted(dists)
        }
    return AveragedAnalysis(
        transform_name=transform_name,
        instances=tuple(analyses),
        mean_report=mean_report,
        mean_histograms=mean_histograms,
    )


SPECTRUM_CSV_HEADER = (
    "instance_id",
    "transform",
    "bits",
    "ground_energy",
    "ground_deg",
    "e1",
    "e1_deg",
    "gap",
)

HAMMING_CSV_HEADER = ("instance_id", "transform", "set_pair", "distance", "count")


def spectrum_csv_rows(analysis: AveragedAnalysis) -> list[tuple]:
    return [
        (
            a.instance_id,
            a.transform_name,
            a.n_bits,
            a.report.ground_energy,
            a.report.ground_degeneracy,
            a.report.first_excited_energy,
            a.report.first_excited_degeneracy,
            a.report.gap,
        )
        for a in analysis.instances
    ]


def hamming_csv_rows(analysis: AveragedAnalysis) -> list[tuple]:
    rows = []
    for a in analysis.instances:
        for pair_idx, pair_name in enumerate(SET_PAIRS):
            for d, count in sorted(a.histograms[pair_idx].counts.items()):
                rows.append((a.instance_id, a.transform_name, pair_name, d, count))
    return rows
