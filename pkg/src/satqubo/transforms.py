"""The four 3-SAT to QUBO transformations.

All four place the formula variables at indices 0..n-1 and auxiliaries at
n..N-1, and all four superimpose per-clause gadgets by coefficient addition,
so formula energies are additive over clauses:

  * chancellor (J=1 / J=5): per clause, a spin-form gadget with one ancilla
    whose minimum is -3J-8 on satisfying assignments and 8 higher otherwise.
  * pattern QUBO ("algorithm"): a reusable 4x4 gadget per clause type, bound
    to the clause through its normalized literal order, one ancilla K per
    clause.
  * counttrue: per clause the multilinear polynomial that is 6 when no
    literal is true and 0 otherwise, quadratized with shared pair
    auxiliaries.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from . import cnf
from .qubo import (
    BinaryPolynomial,
    IsingModel,
    Qubo,
    QuboBuilder,
    ising_to_qubo,
    quadratize,
)

#: aux_map values: clause index (int) for per-clause ancillas, or the
#: substituted variable pair for counttrue auxiliaries.
AuxProvenance = Union[int, tuple[int, int]]

TRANSFORM_NAMES = ("chancellor-j1", "chancellor-j5", "algorithm", "counttrue")

PATTERN_SLOTS = 4  # a, b, c, K


@dataclass(frozen=True)
class TransformResult:
    """A formula QUBO plus the metadata needed to decode and predict energies."""

    qubo: Qubo
    n_formula: int
    aux_map: Mapping[int, AuxProvenance]
    transform_name: str
    per_clause_ground: tuple[float, ...]

    @property
    def predicted_ground_energy(self) -> float:
        """Ground energy of the QUBO when the formula is satisfiable."""
        return sum(self.per_clause_ground)


@dataclass(frozen=True)
class PatternQubo:
    """4x4 upper-triangular clause gadget over slots (a, b, c, K)."""

    entries: tuple[tuple[float, float, float, float], ...]
    type_id: int

    def __post_init__(self):
        if len(self.entries) != PATTERN_SLOTS or any(
            len(row) != PATTERN_SLOTS for row in self.entries
        ):
            raise ValueError("pattern must be a 4x4 matrix")
        for i in range(PATTERN_SLOTS):
            for j in range(i):
                if self.entries[i][j] != 0.0:
                    raise ValueError(f"pattern entry ({i},{j}) below the diagonal must be 0")
        if self.type_id not in (0, 1, 2, 3):
            raise ValueError(f"type_id must be 0..3, got {self.type_id}")

    def matrix(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.float64)


def _pattern(rows: Sequence[Sequence[float]], type_id: int) -> PatternQubo:
    return PatternQubo(tuple(tuple(float(v) for v in row) for row in rows), type_id)


#: The published best-performing pattern set, one gadget per clause type.
ALGORITHM_PATTERNS: tuple[PatternQubo, ...] = (
    _pattern([[0, 1, 0, -1], [0, 0, 0, -1], [0, 0, -1, 1], [0, 0, 0, 0]], 0),
    _pattern([[0, 0, 0, -1], [0, 0, -1, 1], [0, 0, 1, -1], [0, 0, 0, 1]], 1),
    _pattern([[0, -1, 0, 1], [0, 1, 0, -1], [0, 0, 0, 1], [0, 0, 0, 0]], 2),
    _pattern([[0, 0, 0, 1], [0, 0, 1, -1], [0, 0, 0, -1], [0, 0, 0, 1]], 3),
)


def unsatisfying_bits(type_id: int) -> tuple[int, int, int]:
    """The single (a,b,c) pattern that falsifies a normalized clause."""
    return tuple(0 if i < 3 - type_id else 1 for i in range(3))  # type: ignore[return-value]


def _pattern_energy(matrix: Sequence[Sequence[float]], bits: Sequence[int]) -> float:
    e = 0.0
    for i in range(PATTERN_SLOTS):
        if bits[i]:
            e += matrix[i][i]
            for j in range(i + 1, PATTERN_SLOTS):
                if bits[j]:
                    e += matrix[i][j]
    return e


def gadget_profile(
    matrix: Sequence[Sequence[float]], type_id: int
) -> tuple[Optional[float], float]:
    """(common satisfying min-over-K or None if not common, unsatisfying min)."""
    unsat = unsatisfying_bits(type_id)
    sat_min: Optional[float] = None
    common = True
    unsat_min = 0.0
    for abc in itertools.product((0, 1), repeat=3):
        best = min(
            _pattern_energy(matrix, (*abc, 0)),
            _pattern_energy(matrix, (*abc, 1)),
        )
        if abc == unsat:
            unsat_min = best
        elif sat_min is None:
            sat_min = best
        elif best != sat_min:
            common = False
    return (sat_min if common else None), unsat_min


def verify_gadget(matrix: Sequence[Sequence[float]], type_id: int) -> bool:
    """True iff min-over-K is one common value on all 7 satisfying (a,b,c)
    and strictly larger on the falsifying one."""
    sat_min, unsat_min = gadget_profile(matrix, type_id)
    return sat_min is not None and unsat_min > sat_min


def _chancellor_clause_spin(signs: Sequence[int], j_coupling: float):
    """Spin-form clause gadget: (h for the 3 vars, h for the ancilla,
    pair couplings dict over local slots 0..3 with 3 = ancilla, offset)."""
    c_prod = signs[0] * signs[1] * signs[2]
    h = [float(-c - c_prod) for c in signs]
    h_anc = -2.0 * c_prod
    pairs = {}
    for a in range(3):
        for b in range(a + 1, 3):
            pairs[(a, b)] = signs[a] * signs[b] + j_coupling
        pairs[(a, 3)] = 2.0 * j_coupling
    return h, h_anc, pairs, -7.0


def _chancellor_clause_minimum(signs: Sequence[int], j_coupling: float) -> float:
    """Satisfying minimum of one clause gadget by 16-state enumeration."""
    h, h_anc, pairs, offset = _chancellor_clause_spin(signs, j_coupling)
    best = None
    for bits in itertools.product((0, 1), repeat=4):
        s = [2 * b - 1 for b in bits]
        e = offset + sum(hi * si for hi, si in zip(h, s[:3])) + h_anc * s[3]
        for (a, b), v in pairs.items():
            e += v * s[a] * s[b]
        if best is None or e < best:
            best = e
    return float(best)


def chancellor(formula: cnf.Formula, j_coupling: float = 1.0) -> TransformResult:
    """Clause-by-clause spin-gadget transformation with one ancilla per clause.

    The free coupling strength j_coupling >= 1 tunes the ancilla parity
    gadget; J=1 and J=5 are the two variants studied by the experiment
    harness.  Coefficients are integers whenever j_coupling is.
    """
    if j_coupling < 1.0:
        raise ValueError(f"coupling strength must be >= 1, got {j_coupling}")
    n, m = formula.n, formula.m
    size = n + m
    h = [0.0] * size
    J: dict[tuple[int, int], float] = {}
    offset = 0.0
    aux_map: dict[int, AuxProvenance] = {}
    per_clause = []
    for idx, cl in enumerate(formula.clauses):
        anc = n + idx
        aux_map[anc] = idx
        local_vars = [lit.var for lit in cl.literals] + [anc]
        signs = [lit.sign for lit in cl.literals]
        h_loc, h_anc, pairs, off = _chancellor_clause_spin(signs, j_coupling)
        offset += off
        for k in range(3):
            h[local_vars[k]] += h_loc[k]
        h[anc] += h_anc
        for (a, b), v in pairs.items():
            i, j = sorted((local_vars[a], local_vars[b]))
            J[(i, j)] = J.get((i, j), 0.0) + v
        per_clause.append(_chancellor_clause_minimum(signs, j_coupling))
    model = IsingModel(h=tuple(h), J={k: v for k, v in J.items() if v != 0.0}, offset=offset)
    name = f"chancellor-j{j_coupling:g}"
    return TransformResult(
        qubo=ising_to_qubo(model),
        n_formula=n,
        aux_map=aux_map,
        transform_name=name,
        per_clause_ground=tuple(per_clause),
    )


def pattern_qubo(
    formula: cnf.Formula, patterns: Optional[Sequence[PatternQubo]] = None
) -> TransformResult:
    """Superimpose one 4x4 pattern gadget per clause; ancilla K per clause.

    Clause slots (a,b,c) are bound to the normalized literal order (positive
    literals first, original relative order inside each group).
    """
    if patterns is None:
        patterns = ALGORITHM_PATTERNS
    if len(patterns) != 4:
        raise ValueError(f"need one pattern per clause type, got {len(patterns)}")
    by_type: dict[int, PatternQubo] = {}
    for pat in patterns:
        by_type[pat.type_id] = pat
    if sorted(by_type) != [0, 1, 2, 3]:
        raise ValueError("patterns must cover clause types 0..3 exactly")
    profiles = {}
    for t, pat in by_type.items():
        if not verify_gadget(pat.entries, t):
            raise ValueError(f"pattern for clause type {t} fails gadget verification")
        profiles[t] = gadget_profile(pat.entries, t)[0]

    n, m = formula.n, formula.m
    builder = QuboBuilder(n + m)
    aux_map: dict[int, AuxProvenance] = {}
    per_clause = []
    for idx, cl in enumerate(formula.clauses):
        ct = cnf.normalize_clause(cl)
        anc = n + idx
        aux_map[anc] = idx
        slots = [*ct.ordered_vars, anc]
        pat = by_type[ct.type_id]
        for a in range(PATTERN_SLOTS):
            for b in range(a, PATTERN_SLOTS):
                v = pat.entries[a][b]
                if v != 0.0:
                    builder.add(slots[a], slots[b], v)
        per_clause.append(profiles[ct.type_id])
    return TransformResult(
        qubo=builder.build(),
        n_formula=n,
        aux_map=aux_map,
        transform_name="algorithm",
        per_clause_ground=tuple(per_clause),
    )


def clause_count_polynomial(cl: cnf.Clause, num_vars: int) -> BinaryPolynomial:
    """Multilinear -(t-1)(t-2)(t-3) where t counts true literals: 6 when the
    clause is violated, 0 otherwise."""
    t = BinaryPolynomial({}, num_vars=num_vars)
    for lit in cl.literals:
        if lit.sign > 0:
            t = t + BinaryPolynomial({(lit.var,): 1.0}, num_vars=num_vars)
        else:
            t = t + BinaryPolynomial({(): 1.0, (lit.var,): -1.0}, num_vars=num_vars)
    product = BinaryPolynomial({(): 1.0}, num_vars=num_vars)
    for shift in (-1.0, -2.0, -3.0):
        product = product * (t + BinaryPolynomial.constant(shift, num_vars=num_vars))
    return product.scaled(-1.0)


def count_true_polynomial(formula: cnf.Formula) -> BinaryPolynomial:
    """Formula-level violation-count polynomial (degree 3)."""
    total = BinaryPolynomial({}, num_vars=formula.n)
    for cl in formula.clauses:
        total = total + clause_count_polynomial(cl, formula.n)
    return total


def count_true(formula: cnf.Formula) -> TransformResult:
    """Quadratized violation-count transformation.

    Energy is 0 on satisfying assignments with honest auxiliaries and +6 per
    violated clause; auxiliaries are shared whenever clauses reuse a
    substituted variable pair, so the bit count is n + #distinct pairs.
    """
    hobo = count_true_polynomial(formula)
    q, pair_aux = quadratize(hobo)
    aux_map: dict[int, AuxProvenance] = {aux: pair for pair, aux in pair_aux.items()}
    return TransformResult(
        qubo=q,
        n_formula=formula.n,
        aux_map=aux_map,
        transform_name="counttrue",
        per_clause_ground=tuple(0.0 for _ in formula.clauses),
    )


def apply_transform(
    name: str,
    formula: cnf.Formula,
    patterns: Optional[Sequence[PatternQubo]] = None,
) -> TransformResult:
    """Dispatch by CLI transform name."""
    if name == "chancellor-j1":
        return chancellor(formula, 1.0)
    if name == "chancellor-j5":
        return chancellor(formula, 5.0)
    if name == "algorithm":
        return pattern_qubo(formula, patterns)
    if name == "counttrue":
        return count_true(formula)
    raise ValueError(f"unknown transform {name!r}; expected one of {TRANSFORM_NAMES}")


def decode(result: TransformResult, bits: Sequence[int]) -> tuple[int, ...]:
    """Project solver bits onto the formula variables (auxiliaries dropped)."""
    if len(bits) != result.qubo.size:
        raise ValueError(f"bit vector length {len(bits)} != qubo size {result.qubo.size}")
    return tuple(int(b) for b in bits[: result.n_formula])


def exact_ground_states(
    result: TransformResult, formula_bits_limit: int = 24
) -> tuple[float, tuple[int, ...]]:
    """Exact QUBO minimum and the formula-bit codes attaining it.

    Conditions on the formula bits and minimizes the auxiliaries exactly:
    auxiliaries are grouped into connected components of the aux-aux coupling
    graph and each component is enumerated (components are singletons for
    all four transformations here).  Equivalent to full enumeration of the
    2**N bitstrings, but costs 2**n_formula instead.
    """
    q = result.qubo
    n = result.n_formula
    if n > formula_bits_limit:
        raise ValueError(f"guard: n_formula={n} > {formula_bits_limit}")
    total = 1 << n
    codes = np.arange(total, dtype=np.int64)
    bit_cols = [((codes >> i) & 1).astype(np.float64) for i in range(n)]

    base = np.full(total, float(q.offset))
    for i in range(n):
        if q.diag[i] != 0.0:
            base += q.diag[i] * bit_cols[i]
    aux_lin: dict[int, np.ndarray] = {}
    aux_pairs: dict[tuple[int, int], float] = {}
    for (i, j), v in q.upper.items():
        if j < n:
            base += v * (bit_cols[i] * bit_cols[j])
        elif i < n:
            aux_lin.setdefault(j, np.full(total, float(q.diag[j])))
            aux_lin[j] += v * bit_cols[i]
        else:
            aux_pairs[(i, j)] = v
    for a in range(n, q.size):
        aux_lin.setdefault(a, np.full(total, float(q.diag[a])))

    # connected components over aux-aux couplings
    parent = {a: a for a in range(n, q.size)}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for (i, j) in aux_pairs:
        parent[find(i)] = find(j)
    comps: dict[int, list[int]] = {}
    for a in range(n, q.size):
        comps.setdefault(find(a), []).append(a)

    energies = base
    for members in comps.values():
        if len(members) == 1:
            energies = energies + np.minimum(0.0, aux_lin[members[0]])
            continue
        best = None
        for combo in itertools.product((0, 1), repeat=len(members)):
            contrib = np.zeros(total)
            for y, a in zip(combo, members):
                if y:
                    contrib = contrib + aux_lin[a]
            for (i, j), v in aux_pairs.items():
                if i in members and combo[members.index(i)] and combo[members.index(j)]:
                    contrib += v
            best = contrib if best is None else np.minimum(best, contrib)
        energies = energies + best

    min_e = float(energies.min())
    tol = 0.0 if q.is_integer_valued() else 1e-9 * max(1.0, abs(min_e))
    argmin = tuple(int(c) for c in codes[energies <= min_e + tol])
    return min_e, argmin


def pattern_set_to_json(patterns: Sequence[PatternQubo]) -> str:
    doc = {str(p.type_id): [list(row) for row in p.entries] for p in patterns}
    return json.dumps(doc, indent=2) + "\n"


def pattern_set_from_json(text: str) -> tuple[PatternQubo, ...]:
    doc = json.loads(text)
    patterns = []
    for t in range(4):
        rows = doc[str(t)]
        patterns.append(_pattern(rows, t))
    return tuple(patterns)
