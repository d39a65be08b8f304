"""Exhaustive search for valid 4x4 clause-gadget matrices.

A candidate fills the 10 upper-triangular cells (diagonal included) of the
(a, b, c, K) matrix with values from a finite set; it is kept when it passes
the gadget check for the requested clause type.  Candidates are enumerated
in lexicographic order of the cell tuple (cells row-major, values sorted
ascending), so the output order is deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .transforms import PatternQubo, unsatisfying_bits

DEFAULT_CAP = 10**8
_CHUNK = 1 << 14

#: row-major upper-triangular cells of the 4x4 gadget, diagonal included
CELLS: tuple[tuple[int, int], ...] = (
    (0, 0), (0, 1), (0, 2), (0, 3),
    (1, 1), (1, 2), (1, 3),
    (2, 2), (2, 3),
    (3, 3),
)


@dataclass(frozen=True)
class SearchSpec:
    values: tuple[float, ...]
    type_id: int
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if not self.values:
            raise ValueError("value set must be nonempty")
        if self.type_id not in (0, 1, 2, 3):
            raise ValueError(f"type_id must be 0..3, got {self.type_id}")


def _feature_matrix() -> np.ndarray:
    """(10 cells x 16 states) products x_i x_j; states ordered (abc)*2 + K."""
    feats = np.zeros((len(CELLS), 16))
    for s, (abc, k) in enumerate(itertools.product(itertools.product((0, 1), repeat=3), (0, 1))):
        bits = (*abc, k)
        for c, (i, j) in enumerate(CELLS):
            feats[c, s] = bits[i] * bits[j]
    return feats


_FEATURES = _feature_matrix()


def search_patterns(spec: SearchSpec) -> list[PatternQubo]:
    """All matrices over the value set that pass the gadget check.

    The check requires one common min-over-K energy on the 7 satisfying
    (a,b,c) assignments and a strictly larger min on the falsifying one
    (equal satisfying minima are what makes superimposing additive).
    """
    values = tuple(sorted(set(float(v) for v in spec.values)))
    base = len(values)
    total = base ** len(CELLS)
    if total > spec.cap:
        raise ValueError(f"search space {base}^10 = {total} exceeds cap {spec.cap}")

    unsat_state = unsatisfying_bits(spec.type_id)
    unsat_idx = (unsat_state[0] * 4 + unsat_state[1] * 2 + unsat_state[2])
    sat_idx = np.array([i for i in range(8) if i != unsat_idx])
    value_arr = np.array(values)

    found: list[PatternQubo] = []
    powers = base ** np.arange(len(CELLS) - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % base
        coeffs = value_arr[digits]  # (chunk, 10)
        energies = coeffs @ _FEATURES  # (chunk, 16)
        min_over_k = energies.reshape(-1, 8, 2).min(axis=2)  # (chunk, 8)
        sat = min_over_k[:, sat_idx]
        ok = (sat == sat[:, :1]).all(axis=1) & (min_over_k[:, unsat_idx] > sat[:, 0])
        for row in coeffs[ok]:
            entries = [[0.0] * 4 for _ in range(4)]
            for c, (i, j) in enumerate(CELLS):
                entries[i][j] = float(row[c])
            found.append(
                PatternQubo(tuple(tuple(r) for r in entries), type_id=spec.type_id)
            )
    return found
