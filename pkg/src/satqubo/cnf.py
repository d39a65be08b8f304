"""3-SAT formulas: model, DIMACS I/O, random generation, evaluation.

Clauses hold exactly three literals over pairwise-distinct variables.
Variables are 0-based everywhere in memory; DIMACS text uses the usual
1-based signed integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ._rng import SplitMix64

#: Bit vector over {0,1}, length Formula.n.
Assignment = Sequence[int]

EXHAUSTIVE_VAR_LIMIT = 30


class DimacsError(ValueError):
    """Raised for malformed DIMACS CNF input."""


@dataclass(frozen=True)
class Literal:
    """A signed variable occurrence: sign +1 for x, -1 for NOT x."""

    var: int
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"literal sign must be +1 or -1, got {self.sign}")
        if self.var < 0:
            raise ValueError(f"variable index must be >= 0, got {self.var}")

    def value(self, bits: Assignment) -> bool:
        """Truth value of this literal under the assignment."""
        x = bits[self.var]
        return bool(x) if self.sign > 0 else not x


@dataclass(frozen=True)
class Clause:
    """Disjunction of exactly three literals over distinct variables."""

    literals: tuple[Literal, Literal, Literal]

    def __post_init__(self):
        if len(self.literals) != 3:
            raise ValueError(f"clause must have exactly 3 literals, got {len(self.literals)}")
        vars_ = [lit.var for lit in self.literals]
        if len(set(vars_)) != 3:
            raise ValueError(f"clause variables must be pairwise distinct, got {vars_}")

    def satisfied_by(self, bits: Assignment) -> bool:
        return any(lit.value(bits) for lit in self.literals)


@dataclass(frozen=True)
class Formula:
    """A 3-CNF formula: n variables, an ordered tuple of clauses."""

    n: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"formula needs n >= 3 variables, got {self.n}")
        if len(self.clauses) < 1:
            raise ValueError("formula needs at least one clause")
        for idx, clause in enumerate(self.clauses):
            for lit in clause.literals:
                if lit.var >= self.n:
                    raise ValueError(
                        f"clause {idx} references variable {lit.var} >= n={self.n}"
                    )

    @property
    def m(self) -> int:
        return len(self.clauses)


@dataclass(frozen=True)
class ClauseType:
    """Clause normal form: positive literals first, negated last.

    type_id is the number of negated literals (0..3); ordered_vars lists the
    clause's variables in the normalized literal order.
    """

    type_id: int
    ordered_vars: tuple[int, int, int]


def clause(*ints: int) -> Clause:
    """Build a Clause from signed 1-based DIMACS-style integers."""
    lits = tuple(Literal(abs(v) - 1, 1 if v > 0 else -1) for v in ints)
    return Clause(lits)  # type: ignore[arg-type]


def parse_dimacs(text: str) -> Formula:
    """Parse DIMACS CNF text into a Formula.

    Accepts `c` comment lines, one `p cnf <n> <m>` header, and clauses as
    whitespace-separated nonzero integers each terminated by 0.  Clauses may
    span lines.  Rejects clauses that are not exactly three distinct
    variables, out-of-range indices, and a clause count that disagrees with
    the header.
    """
    n = None
    m_declared = None
    tokens: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if n is not None:
                raise DimacsError(f"line {lineno}: duplicate problem header")
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                n = int(parts[2])
                m_declared = int(parts[3])
            except ValueError as exc:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from exc
            continue
        if n is None:
            raise DimacsError(f"line {lineno}: clause data before header")
        try:
            tokens.extend(int(tok) for tok in line.split())
        except ValueError as exc:
            raise DimacsError(f"line {lineno}: non-integer clause token") from exc

    if n is None or m_declared is None:
        raise DimacsError("missing 'p cnf <n> <m>' header")

    clauses: list[Clause] = []
    current: list[int] = []
    for tok in tokens:
        if tok == 0:
            if len(current) != 3:
                raise DimacsError(
                    f"clause {len(clauses) + 1} has {len(current)} literals, expected 3"
                )
            lits = []
            for v in current:
                var = abs(v) - 1
                if var >= n:
                    raise DimacsError(
                        f"clause {len(clauses) + 1} references variable {abs(v)} > n={n}"
                    )
                lits.append(Literal(var, 1 if v > 0 else -1))
            if len({lit.var for lit in lits}) != 3:
                raise DimacsError(f"clause {len(clauses) + 1} repeats a variable")
            clauses.append(Clause(tuple(lits)))
            current = []
        else:
            current.append(tok)
    if current:
        raise DimacsError("trailing literals without terminating 0")
    if len(clauses) != m_declared:
        raise DimacsError(
            f"header declares {m_declared} clauses but {len(clauses)} were read"
        )
    return Formula(n=n, clauses=tuple(clauses))


def write_dimacs(formula: Formula) -> str:
    """Serialize a Formula to DIMACS CNF text (inverse of parse_dimacs)."""
    lines = [f"p cnf {formula.n} {formula.m}"]
    for cl in formula.clauses:
        lines.append(" ".join(str(lit.sign * (lit.var + 1)) for lit in cl.literals) + " 0")
    return "\n".join(lines) + "\n"


def generate_random(n: int, m: int, seed: int) -> Formula:
    """Generate a uniform random 3-SAT formula, reproducible from the seed.

    Uses the package SplitMix64 stream.  Per clause: three variables are
    drawn by floor(u * n) with rejection of duplicates, in order; then three
    sign draws (u < 0.5 means positive).  This fixed draw order is part of
    the generator's contract so other implementations can match streams.
    """
    if n < 3:
        raise ValueError(f"need n >= 3 to draw 3 distinct variables, got {n}")
    if m < 1:
        raise ValueError(f"need m >= 1 clauses, got {m}")
    rng = SplitMix64(seed)
    clauses = []
    for _ in range(m):
        vars_: list[int] = []
        while len(vars_) < 3:
            v = rng.next_below(n)
            if v not in vars_:
                vars_.append(v)
        signs = [1 if rng.next_double() < 0.5 else -1 for _ in range(3)]
        clauses.append(Clause(tuple(Literal(v, s) for v, s in zip(vars_, signs))))
    return Formula(n=n, clauses=tuple(clauses))


def violated_count(formula: Formula, bits: Assignment) -> int:
    """Number of clauses whose three literals are all false under bits."""
    if len(bits) != formula.n:
        raise ValueError(f"assignment length {len(bits)} != n={formula.n}")
    return sum(1 for cl in formula.clauses if not cl.satisfied_by(bits))


def satisfies(formula: Formula, bits: Assignment) -> bool:
    return violated_count(formula, bits) == 0


def exhaustive_sat(
    formula: Formula, chunk_bits: int = 20
) -> tuple[bool, Optional[tuple[int, ...]], int]:
    """Exact satisfiability by full enumeration (n <= 30 guard).

    Returns (satisfiable, witness, solution_count); the witness is the
    satisfying assignment with the smallest integer code (bit i of the code
    is variable i), or None if unsatisfiable.
    """
    n = formula.n
    if n > EXHAUSTIVE_VAR_LIMIT:
        raise ValueError(f"exhaustive_sat guard: n={n} > {EXHAUSTIVE_VAR_LIMIT}")
    total = 1 << n
    chunk = 1 << min(chunk_bits, n)
    count = 0
    witness: Optional[tuple[int, ...]] = None
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        sat = np.ones(codes.shape[0], dtype=bool)
        for cl in formula.clauses:
            cl_sat = np.zeros(codes.shape[0], dtype=bool)
            for lit in cl.literals:
                bit = (codes >> np.uint64(lit.var)) & np.uint64(1)
                cl_sat |= (bit == 1) if lit.sign > 0 else (bit == 0)
            sat &= cl_sat
            if not sat.any():
                break
        hits = int(sat.sum())
        if hits and witness is None:
            code = int(codes[np.argmax(sat)])
            witness = tuple((code >> i) & 1 for i in range(n))
        count += hits
    return count > 0, witness, count


def normalize_clause(cl: Clause) -> ClauseType:
    """Reorder a clause so positive literals precede negated ones.

    The relative order inside each sign group is preserved; type_id is the
    negation count, which is the only clause shape that matters for the
    pattern-QUBO encodings.
    """
    positives = [lit.var for lit in cl.literals if lit.sign > 0]
    negatives = [lit.var for lit in cl.literals if lit.sign < 0]
    ordered = tuple(positives + negatives)
    return ClauseType(type_id=len(negatives), ordered_vars=ordered)  # type: ignore[arg-type]


def formula_from_ints(n: int, clause_ints: Iterable[Iterable[int]]) -> Formula:
    """Build a Formula from 1-based signed integer triples."""
    return Formula(n=n, clauses=tuple(clause(*ints) for ints in clause_ints))
