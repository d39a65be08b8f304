"""QUBO and pseudo-Boolean polynomial models.

A Qubo stores the linear coefficients (diagonal), a sparse strict
upper-triangular coupling map, and an explicit constant offset; the offset is
included in every reported energy so that per-clause ground energies carry
their natural constants.  BinaryPolynomial is the arbitrary-degree multilinear
form used before quadratization.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

Bits = Sequence[int]


@dataclass(frozen=True)
class Qubo:
    """Upper-triangular QUBO: offset + sum Q_ii x_i + sum_{i<j} Q_ij x_i x_j."""

    size: int
    diag: tuple[float, ...]
    upper: Mapping[tuple[int, int], float]
    offset: float = 0.0

    def __post_init__(self):
        if len(self.diag) != self.size:
            raise ValueError(f"diag length {len(self.diag)} != size {self.size}")
        for (i, j), v in self.upper.items():
            if not (0 <= i < j < self.size):
                raise ValueError(f"upper key ({i},{j}) is not a strict upper pair < {self.size}")
            if not math.isfinite(v):
                raise ValueError(f"non-finite coefficient at ({i},{j})")
        if not all(math.isfinite(v) for v in self.diag) or not math.isfinite(self.offset):
            raise ValueError("non-finite coefficient")

    @cached_property
    def _neighbors(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        """Per-row adjacency (j, Q'_ij) with the symmetric coupling value."""
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.size)]
        for (i, j), v in self.upper.items():
            adj[i].append((j, v))
            adj[j].append((i, v))
        return tuple(tuple(sorted(row)) for row in adj)

    @cached_property
    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """(symmetric off-diagonal matrix, diagonal vector) as float64 arrays."""
        sym = np.zeros((self.size, self.size), dtype=np.float64)
        for (i, j), v in self.upper.items():
            sym[i, j] = v
            sym[j, i] = v
        return sym, np.asarray(self.diag, dtype=np.float64)

    def max_abs_coefficient(self) -> float:
        """Largest |coefficient| over diagonal and off-diagonal entries."""
        vals = [abs(v) for v in self.diag] + [abs(v) for v in self.upper.values()]
        return max(vals, default=0.0)

    def is_integer_valued(self) -> bool:
        """True when every coefficient and the offset are integral."""
        return (
            all(float(v).is_integer() for v in self.diag)
            and all(float(v).is_integer() for v in self.upper.values())
            and float(self.offset).is_integer()
        )


class QuboBuilder:
    """Accumulates coefficients (superimposing): repeated adds sum up."""

    def __init__(self, size: int):
        self.size = size
        self._diag = [0.0] * size
        self._upper: dict[tuple[int, int], float] = {}
        self._offset = 0.0

    def add(self, i: int, j: int, value: float) -> "QuboBuilder":
        if i == j:
            self._diag[i] += value
            return self
        if i > j:
            i, j = j, i
        self._upper[(i, j)] = self._upper.get((i, j), 0.0) + value
        return self

    def add_offset(self, value: float) -> "QuboBuilder":
        self._offset += value
        return self

    def build(self) -> Qubo:
        upper = {k: v for k, v in sorted(self._upper.items()) if v != 0.0}
        return Qubo(
            size=self.size,
            diag=tuple(self._diag),
            upper=upper,
            offset=self._offset,
        )


@dataclass(frozen=True)
class IsingModel:
    """Spin model over s_i in {-1,+1}: offset + sum h_i s_i + sum J_ij s_i s_j."""

    h: tuple[float, ...]
    J: Mapping[tuple[int, int], float]
    offset: float = 0.0

    @property
    def size(self) -> int:
        return len(self.h)


@dataclass(frozen=True)
class BinaryPolynomial:
    """Multilinear pseudo-Boolean polynomial of arbitrary degree.

    Keys are strictly increasing index tuples; the empty tuple is the
    constant term.  num_vars may exceed the largest index so trailing unused
    variables keep their slots.
    """

    terms: Mapping[tuple[int, ...], float]
    num_vars: int = field(default=-1)

    def __post_init__(self):
        max_idx = -1
        for key, v in self.terms.items():
            if list(key) != sorted(set(key)):
                raise ValueError(f"term key {key} must be a strictly increasing index tuple")
            if key:
                max_idx = max(max_idx, key[-1])
            if not math.isfinite(v):
                raise ValueError(f"non-finite coefficient for term {key}")
        if self.num_vars < 0:
            object.__setattr__(self, "num_vars", max_idx + 1)
        elif self.num_vars < max_idx + 1:
            raise ValueError(f"num_vars={self.num_vars} below largest index {max_idx}")

    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def __add__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return BinaryPolynomial(
            {k: v for k, v in out.items() if v != 0.0},
            num_vars=max(self.num_vars, other.num_vars),
        )

    def __mul__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        out: dict[tuple[int, ...], float] = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                key = tuple(sorted(set(ka) | set(kb)))  # x_i^2 = x_i
                out[key] = out.get(key, 0.0) + va * vb
        return BinaryPolynomial(
            {k: v for k, v in out.items() if v != 0.0},
            num_vars=max(self.num_vars, other.num_vars),
        )

    def scaled(self, factor: float) -> "BinaryPolynomial":
        return BinaryPolynomial(
            {k: v * factor for k, v in self.terms.items() if v * factor != 0.0},
            num_vars=self.num_vars,
        )

    @staticmethod
    def constant(value: float, num_vars: int = 0) -> "BinaryPolynomial":
        return BinaryPolynomial({(): value} if value != 0.0 else {}, num_vars=num_vars)

    @staticmethod
    def variable(index: int, num_vars: int = -1) -> "BinaryPolynomial":
        return BinaryPolynomial({(index,): 1.0}, num_vars=num_vars)


@dataclass(frozen=True)
class MatrixStats:
    """Shape summary of a QUBO matrix (bit count, quadratic-value variety)."""

    bits: int
    distinct_quadratic: int
    value_range: float


@dataclass(frozen=True)
class ScaledQubo:
    """Integer-coefficient Qubo plus the power-of-two factor that produced it."""

    qubo: Qubo
    factor: float


def energy(q: Qubo, bits: Bits) -> float:
    """Evaluate offset + sum Q_ii x_i + sum_{i<j} Q_ij x_i x_j."""
    if len(bits) != q.size:
        raise ValueError(f"bit vector length {len(bits)} != size {q.size}")
    e = q.offset
    for i, v in enumerate(q.diag):
        if bits[i]:
            e += v
    for (i, j), v in q.upper.items():
        if bits[i] and bits[j]:
            e += v
    return e


def delta_energy(q: Qubo, bits: Bits, i: int) -> float:
    """Energy change from flipping bit i, in O(degree of row i)."""
    if not 0 <= i < q.size:
        raise ValueError(f"bit index {i} out of range for size {q.size}")
    if len(bits) != q.size:
        raise ValueError(f"bit vector length {len(bits)} != size {q.size}")
    acc = q.diag[i]
    for j, w in q._neighbors[i]:
        if bits[j]:
            acc += w
    return (1.0 - 2.0 * bits[i]) * acc


def to_ising(q: Qubo) -> IsingModel:
    """Map x_i = (s_i + 1)/2, preserving energies for every assignment."""
    h = [v / 2.0 for v in q.diag]
    J: dict[tuple[int, int], float] = {}
    offset = q.offset + sum(q.diag) / 2.0
    for (i, j), v in q.upper.items():
        J[(i, j)] = v / 4.0
        h[i] += v / 4.0
        h[j] += v / 4.0
        offset += v / 4.0
    return IsingModel(h=tuple(h), J={k: v for k, v in J.items() if v != 0.0}, offset=offset)


def ising_energy(model: IsingModel, spins: Sequence[int]) -> float:
    if len(spins) != model.size:
        raise ValueError(f"spin vector length {len(spins)} != size {model.size}")
    e = model.offset + sum(hi * s for hi, s in zip(model.h, spins))
    for (i, j), v in model.J.items():
        e += v * spins[i] * spins[j]
    return e


def ising_to_qubo(model: IsingModel) -> Qubo:
    """Inverse map s_i = 2 x_i - 1; exact energy equality on all assignments."""
    n = model.size
    builder = QuboBuilder(n)
    builder.add_offset(model.offset - sum(model.h))
    for i, hi in enumerate(model.h):
        builder.add(i, i, 2.0 * hi)
    for (i, j), v in model.J.items():
        builder.add(i, j, 4.0 * v)
        builder.add(i, i, -2.0 * v)
        builder.add(j, j, -2.0 * v)
        builder.add_offset(v)
    return builder.build()


def scale_to_precision(q: Qubo, p: int) -> ScaledQubo:
    """Scale coefficients by the largest power of two keeping them < 2**(p-1).

    Coefficients are multiplied by the factor and rounded half-to-even to
    integers; the offset is scaled and rounded the same way.  Power-of-two
    factors scale integer inputs exactly, so the argmin set is unchanged for
    the transformations in this package (all integer-valued).
    """
    if p not in (16, 64):
        raise ValueError(f"precision must be 16 or 64 bits, got {p}")
    max_abs = q.max_abs_coefficient()
    if max_abs == 0.0:
        scaled = Qubo(q.size, q.diag, dict(q.upper), float(np.rint(q.offset)))
        return ScaledQubo(qubo=scaled, factor=1.0)
    # frexp: max_abs = mant * 2**exp with mant in [0.5, 1); the tight factor
    # is 2**(p-1-exp) since mant * 2**(p-1) < 2**(p-1).
    _, exp = math.frexp(max_abs)
    factor = 2.0 ** (p - 1 - exp)
    diag = tuple(float(np.rint(v * factor)) for v in q.diag)
    upper = {k: float(np.rint(v * factor)) for k, v in q.upper.items()}
    upper = {k: v for k, v in upper.items() if v != 0.0}
    offset = float(np.rint(q.offset * factor))
    return ScaledQubo(qubo=Qubo(q.size, diag, upper, offset), factor=factor)


def stats(q: Qubo) -> MatrixStats:
    """Bit count, number of distinct nonzero quadratic values, and their range."""
    values = sorted({v for v in q.upper.values() if v != 0.0})
    if not values:
        return MatrixStats(bits=q.size, distinct_quadratic=0, value_range=0.0)
    return MatrixStats(
        bits=q.size,
        distinct_quadratic=len(values),
        value_range=values[-1] - values[0],
    )


def hobo_energy(h: BinaryPolynomial, bits: Bits) -> float:
    """Evaluate a multilinear polynomial at a bit vector."""
    e = 0.0
    for key, v in h.terms.items():
        if key and key[-1] >= len(bits):
            raise ValueError(f"term {key} references index beyond bit vector length {len(bits)}")
        if all(bits[i] for i in key):
            e += v
    return e


def quadratize(h: BinaryPolynomial) -> tuple[Qubo, dict[tuple[int, int], int]]:
    """Reduce a HOBO to a QUBO by pair substitution with penalty gadgets.

    While any term has degree >= 3, the variable pair occurring in the most
    degree->=3 terms (ties: lexicographically smallest pair) is replaced by a
    fresh auxiliary y, shared across every term containing the pair.  Each
    substitution adds the penalty M*(x_i x_j - 2 x_i y - 2 x_j y + 3 y) with
    M = 1 + sum |c| over the substituted terms, which is zero exactly on
    honest auxiliaries (y = x_i x_j) and >= M off them, so minima are
    preserved.  Returns the QUBO and the pair -> auxiliary index map.
    """
    terms: dict[tuple[int, ...], float] = dict(h.terms)
    next_aux = h.num_vars
    pair_aux: dict[tuple[int, int], int] = {}

    while True:
        high = [k for k in terms if len(k) >= 3]
        if not high:
            break
        pair_counts: dict[tuple[int, int], int] = {}
        for key in high:
            for a in range(len(key)):
                for b in range(a + 1, len(key)):
                    pair = (key[a], key[b])
                    pair_counts[pair] = pair_counts.get(pair, 0) + 1
        best_pair = min(pair_counts, key=lambda p: (-pair_counts[p], p))
        i, j = best_pair
        if best_pair in pair_aux:
            y = pair_aux[best_pair]
        else:
            y = next_aux
            next_aux += 1
            pair_aux[best_pair] = y

        substituted_abs = 0.0
        new_terms: dict[tuple[int, ...], float] = {}
        for key, v in terms.items():
            if len(key) >= 3 and i in key and j in key:
                substituted_abs += abs(v)
                key = tuple(sorted((set(key) - {i, j}) | {y}))
            new_terms[key] = new_terms.get(key, 0.0) + v
        terms = {k: v for k, v in new_terms.items() if v != 0.0}

        m_weight = 1.0 + substituted_abs
        for key, v in (
            ((i, j), m_weight),
            ((i, y), -2.0 * m_weight),
            ((j, y), -2.0 * m_weight),
            ((y,), 3.0 * m_weight),
        ):
            terms[key] = terms.get(key, 0.0) + v
        terms = {k: v for k, v in terms.items() if v != 0.0}

    size = max(next_aux, h.num_vars)
    builder = QuboBuilder(size)
    for key, v in terms.items():
        if len(key) == 0:
            builder.add_offset(v)
        elif len(key) == 1:
            builder.add(key[0], key[0], v)
        else:
            builder.add(key[0], key[1], v)
    return builder.build(), pair_aux


def penalty_gadget_value(xi: int, xj: int, y: int) -> float:
    """The unit pair-substitution penalty x_i x_j - 2 x_i y - 2 x_j y + 3 y."""
    return xi * xj - 2.0 * xi * y - 2.0 * xj * y + 3.0 * y


def qubo_to_json(q: Qubo) -> str:
    """Serialize to the interop JSON shape {size, offset, diag, upper}."""
    doc = {
        "size": q.size,
        "offset": q.offset,
        "diag": list(q.diag),
        "upper": [{"i": i, "j": j, "v": v} for (i, j), v in sorted(q.upper.items())],
    }
    return json.dumps(doc, indent=2) + "\n"


def qubo_from_json(text: str) -> Qubo:
    doc = json.loads(text)
    upper = {(int(e["i"]), int(e["j"])): float(e["v"]) for e in doc["upper"]}
    return Qubo(
        size=int(doc["size"]),
        diag=tuple(float(v) for v in doc["diag"]),
        upper=upper,
        offset=float(doc["offset"]),
    )


def qubo_to_triplets(q: Qubo) -> str:
    """Plain-text interop format: '# size N offset V' then 'i j value' lines."""
    lines = [f"# size {q.size} offset {q.offset!r}"]
    for i, v in enumerate(q.diag):
        if v != 0.0:
            lines.append(f"{i} {i} {v!r}")
    for (i, j), v in sorted(q.upper.items()):
        lines.append(f"{i} {j} {v!r}")
    return "\n".join(lines) + "\n"


def qubo_from_triplets(text: str) -> Qubo:
    size = None
    offset = 0.0
    entries: list[tuple[int, int, float]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line.split()
            if len(parts) >= 5 and parts[1] == "size":
                size = int(parts[2])
                offset = float(parts[4])
            continue
        i_s, j_s, v_s = line.split()
        entries.append((int(i_s), int(j_s), float(v_s)))
    if size is None:
        size = max((max(i, j) for i, j, _ in entries), default=-1) + 1
    builder = QuboBuilder(size)
    builder.add_offset(offset)
    for i, j, v in entries:
        builder.add(i, j, v)
    return builder.build()


def brute_force_minimum(q: Qubo, limit: int = 24) -> tuple[float, list[int]]:
    """Exhaustive minimum by enumeration; returns (energy, minimizing codes).

    Bit i of a code is variable i.  Intended for tests and small problems.
    """
    if q.size > limit:
        raise ValueError(f"brute force guard: size {q.size} > {limit}")
    best = math.inf
    argmin: list[int] = []
    for code in range(1 << q.size):
        bits = [(code >> i) & 1 for i in range(q.size)]
        e = energy(q, bits)
        if e < best - 1e-12:
            best = e
            argmin = [code]
        elif abs(e - best) <= 1e-12:
            argmin.append(code)
    return best, argmin
