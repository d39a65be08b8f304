import itertools

import pytest

from satqubo import cnf
from satqubo.qubo import brute_force_minimum, energy, hobo_energy
from satqubo.transforms import (
    ALGORITHM_PATTERNS,
    PatternQubo,
    TransformResult,
    apply_transform,
    chancellor,
    clause_count_polynomial,
    count_true,
    count_true_polynomial,
    decode,
    exact_ground_states,
    gadget_profile,
    pattern_qubo,
    pattern_set_from_json,
    pattern_set_to_json,
    unsatisfying_bits,
    verify_gadget,
)

EQ1 = cnf.formula_from_ints(5, [[1, 2, -3], [-1, 2, 3], [-1, 2, 3], [1, -4, 5]])


def clause_formula(signs, n=3) -> cnf.Formula:
    """Single-clause formula over variables 0..2 with the given signs."""
    ints = [s * (v + 1) for v, s in enumerate(signs)]
    return cnf.formula_from_ints(n, [ints])


def clause_is_satisfied(signs, bits) -> bool:
    return any(b == 1 if s > 0 else b == 0 for s, b in zip(signs, bits))


def naive_energy(q, bits):
    total = q.offset
    for i in range(q.size):
        total += q.diag[i] * bits[i]
    for (i, j), v in q.upper.items():
        total += v * bits[i] * bits[j]
    return total


def minima_by_assignment(result: TransformResult):
    """Min energy over auxiliary bits, keyed by formula assignment (oracle)."""
    q = result.qubo
    n = result.n_formula
    n_aux = q.size - n
    out = {}
    for abc in itertools.product((0, 1), repeat=n):
        best = min(
            naive_energy(q, abc + aux) for aux in itertools.product((0, 1), repeat=n_aux)
        )
        out[abc] = best
    return out


class TestVerifyGadget:
    def test_published_patterns_pass(self):
        for t, pat in enumerate(ALGORITHM_PATTERNS):
            assert pat.type_id == t
            assert verify_gadget(pat.entries, t)

    def test_zero_matrix_fails(self):
        zero = tuple(tuple(0.0 for _ in range(4)) for _ in range(4))
        assert not verify_gadget(zero, 0)

    def test_pattern_against_wrong_type_fails(self):
        assert not verify_gadget(ALGORITHM_PATTERNS[0].entries, 3)

    def test_published_profiles(self):
        # satisfying minima (-1, 0, 0, 0) with uniform gap 1
        for t, pat in enumerate(ALGORITHM_PATTERNS):
            sat_min, unsat_min = gadget_profile(pat.entries, t)
            assert sat_min == (-1.0 if t == 0 else 0.0)
            assert unsat_min - sat_min == 1.0

    def test_unsatisfying_bits(self):
        assert unsatisfying_bits(0) == (0, 0, 0)
        assert unsatisfying_bits(1) == (0, 0, 1)
        assert unsatisfying_bits(2) == (0, 1, 1)
        assert unsatisfying_bits(3) == (1, 1, 1)


class TestChancellor:
    def test_all_positive_clause_j1(self):
        result = chancellor(clause_formula((1, 1, 1)), 1.0)
        mins = minima_by_assignment(result)
        assert mins[(0, 0, 0)] == -3.0
        for bits, value in mins.items():
            if bits != (0, 0, 0):
                assert value == -11.0

    def test_gap_eight_all_types_both_couplings(self):
        for j_coupling in (1.0, 5.0):
            for negs in range(4):
                signs = tuple([1] * (3 - negs) + [-1] * negs)
                result = chancellor(clause_formula(signs), j_coupling)
                mins = minima_by_assignment(result)
                sat_vals = {v for b, v in mins.items() if clause_is_satisfied(signs, b)}
                unsat_vals = {v for b, v in mins.items() if not clause_is_satisfied(signs, b)}
                assert len(sat_vals) == 1 and len(unsat_vals) == 1
                (sat_min,), (unsat_min,) = sat_vals, unsat_vals
                assert unsat_min - sat_min == 8.0
                expected_sat = -11.0 if j_coupling == 1.0 else -23.0
                assert sat_min == expected_sat
                assert result.per_clause_ground == (expected_sat,)

    def test_cubic_replacement_is_parity_check(self):
        # I_cubic minimized over the ancilla spin: -4 for an odd number of
        # +1 factors, -2 for an even number (J=1, c1 c2 c3 = +1)
        j_coupling, c_prod = 1.0, 1.0
        for spins in itertools.product((-1, 1), repeat=3):
            vals = []
            for sa in (-1, 1):
                pairs = spins[0] * spins[1] + spins[0] * spins[2] + spins[1] * spins[2]
                total = (
                    j_coupling * pairs
                    - c_prod * sum(spins)
                    + 2.0 * j_coupling * sum(spins) * sa
                    - 2.0 * c_prod * sa
                )
                vals.append(total)
            odd = sum(1 for s in spins if s == 1) % 2 == 1
            assert min(vals) == (-4.0 if odd else -2.0)

    def test_bit_count(self):
        f = cnf.generate_random(11, 46, 123)
        result = chancellor(f, 1.0)
        assert result.qubo.size == 57
        assert result.n_formula == 11
        assert set(result.aux_map) == set(range(11, 57))

    def test_coupling_below_one_rejected(self):
        with pytest.raises(ValueError):
            chancellor(EQ1, 0.5)

    def test_integer_coefficients(self):
        for j_coupling in (1.0, 5.0):
            assert chancellor(EQ1, j_coupling).qubo.is_integer_valued()


class TestPatternQubo:
    def test_type0_clause_minima(self):
        result = pattern_qubo(clause_formula((1, 1, 1)))
        mins = minima_by_assignment(result)
        assert mins[(0, 0, 0)] == 0.0
        assert all(v == -1.0 for b, v in mins.items() if b != (0, 0, 0))

    def test_types_1_to_3_minima(self):
        for negs in range(1, 4):
            signs = tuple([1] * (3 - negs) + [-1] * negs)
            result = pattern_qubo(clause_formula(signs))
            mins = minima_by_assignment(result)
            sat_vals = {v for b, v in mins.items() if clause_is_satisfied(signs, b)}
            unsat_vals = {v for b, v in mins.items() if not clause_is_satisfied(signs, b)}
            assert sat_vals == {0.0} and unsat_vals == {1.0}

    def test_ground_energy_counts_type0_clauses(self):
        for seed in range(8):
            f = cnf.generate_random(5, 12, seed)
            if not cnf.exhaustive_sat(f)[0]:
                continue
            result = pattern_qubo(f)
            type0 = sum(1 for cl in f.clauses if cnf.normalize_clause(cl).type_id == 0)
            emin, _ = exact_ground_states(result)
            assert emin == -float(type0)
            assert result.predicted_ground_energy == -float(type0)

    def test_invalid_pattern_rejected(self):
        broken = PatternQubo(tuple(tuple(0.0 for _ in range(4)) for _ in range(4)), 0)
        patterns = (broken, *ALGORITHM_PATTERNS[1:])
        with pytest.raises(ValueError, match="verification"):
            pattern_qubo(EQ1, patterns)

    def test_bit_count(self):
        result = pattern_qubo(EQ1)
        assert result.qubo.size == 5 + 4

    def test_pattern_set_json_round_trip(self):
        text = pattern_set_to_json(ALGORITHM_PATTERNS)
        assert pattern_set_from_json(text) == ALGORITHM_PATTERNS


class TestCountTrue:
    def test_per_clause_truth_values(self):
        # -(t-1)(t-2)(t-3) is 6 at t=0 and 0 at t=1,2,3
        for negs in range(4):
            signs = tuple([1] * (3 - negs) + [-1] * negs)
            h = clause_count_polynomial(clause_formula(signs).clauses[0], 3)
            for bits in itertools.product((0, 1), repeat=3):
                t = sum(
                    1
                    for s, b in zip(signs, bits)
                    if (b == 1 if s > 0 else b == 0)
                )
                expected = 6.0 if t == 0 else 0.0
                assert hobo_energy(h, bits) == expected

    def test_all_positive_clause_expansion(self):
        h = clause_count_polynomial(cnf.clause(1, 2, 3), 3)
        assert h.terms == {
            (): 6.0,
            (0,): -6.0,
            (1,): -6.0,
            (2,): -6.0,
            (0, 1): 6.0,
            (0, 2): 6.0,
            (1, 2): 6.0,
            (0, 1, 2): -6.0,
        }

    def test_eq1_with_honest_auxiliaries(self):
        result = count_true(EQ1)
        assignment = (0, 1, 1, 1, 1)
        bits = list(assignment) + [0] * (result.qubo.size - 5)
        for aux, (i, j) in result.aux_map.items():
            bits[aux] = bits[i] * bits[j]
        assert energy(result.qubo, bits) == 0.0

    def test_violated_clauses_add_six_each(self):
        h = count_true_polynomial(EQ1)
        for code in range(32):
            bits = tuple((code >> i) & 1 for i in range(5))
            assert hobo_energy(h, bits) == 6.0 * cnf.violated_count(EQ1, bits)

    def test_auxiliary_layout_and_reuse(self):
        result = count_true(EQ1)
        # clauses 1-3 share variable triple {0,1,2}: one auxiliary covers them
        assert result.qubo.size < 5 + 4
        assert all(aux >= 5 for aux in result.aux_map)
        for aux, (i, j) in result.aux_map.items():
            assert i < j < 5

    def test_satisfiable_ground_zero(self):
        for seed in range(6):
            f = cnf.generate_random(5, 15, seed)
            if not cnf.exhaustive_sat(f)[0]:
                continue
            emin, _ = exact_ground_states(count_true(f))
            assert emin == 0.0


class TestDecode:
    def test_prefix_projection(self):
        result = chancellor(cnf.generate_random(11, 46, 3), 1.0)
        bits = [0] * 57
        assert len(decode(result, bits)) == 11

    def test_length_mismatch(self):
        result = chancellor(EQ1, 1.0)
        with pytest.raises(ValueError):
            decode(result, [0] * 3)

    def test_ground_bits_decode_to_satisfying(self):
        f = cnf.generate_random(4, 9, 17)
        assert cnf.exhaustive_sat(f)[0]
        for name in ("chancellor-j1", "chancellor-j5", "algorithm", "counttrue"):
            result = apply_transform(name, f)
            _, argmin = brute_force_minimum(result.qubo, limit=20)
            for code in argmin:
                bits = [(code >> i) & 1 for i in range(result.qubo.size)]
                assignment = decode(result, bits)
                assert cnf.violated_count(f, assignment) == 0, name


class TestExactGroundStates:
    def test_matches_full_enumeration(self):
        for seed in (0, 1, 2):
            f = cnf.generate_random(4, 8, seed)
            for name in ("chancellor-j1", "chancellor-j5", "algorithm", "counttrue"):
                result = apply_transform(name, f)
                if result.qubo.size > 16:
                    continue
                emin_cond, argmin_cond = exact_ground_states(result)
                emin_full, argmin_full = brute_force_minimum(result.qubo, limit=16)
                assert emin_cond == pytest.approx(emin_full, abs=1e-9)
                projected = {code & ((1 << 4) - 1) for code in argmin_full}
                assert set(argmin_cond) == projected

    def test_decodes_iff_satisfiable(self):
        for seed in range(12):
            f = cnf.generate_random(5, 21, 900 + seed)
            satisfiable, _, _ = cnf.exhaustive_sat(f)
            for name in ("chancellor-j1", "algorithm", "counttrue"):
                result = apply_transform(name, f)
                _, argmin = exact_ground_states(result)
                decoded_ok = all(
                    cnf.violated_count(f, tuple((c >> i) & 1 for i in range(5))) == 0
                    for c in argmin
                )
                assert decoded_ok == satisfiable, name

    def test_minimizers_equal_satisfying_set(self):
        for seed in range(6):
            f = cnf.generate_random(6, 25, 50 + seed)
            satisfiable, _, count = cnf.exhaustive_sat(f)
            if not satisfiable:
                continue
            sat_codes = {
                code
                for code in range(64)
                if cnf.violated_count(f, tuple((code >> i) & 1 for i in range(6))) == 0
            }
            for name in ("chancellor-j1", "chancellor-j5", "algorithm", "counttrue"):
                result = apply_transform(name, f)
                _, argmin = exact_ground_states(result)
                assert set(argmin) == sat_codes, name


class TestSuperimposing:
    def test_energy_additive_over_clauses(self):
        f = cnf.generate_random(5, 7, 31)
        for name in ("chancellor-j1", "algorithm"):
            whole = apply_transform(name, f)
            parts = [
                apply_transform(name, cnf.Formula(n=5, clauses=(cl,))) for cl in f.clauses
            ]
            for code in (0, 9, 21, 30):
                x = [(code >> i) & 1 for i in range(5)]
                aux = [(code >> (i % 5)) & 1 for i in range(f.m)]
                total = energy(whole.qubo, x + aux)
                summed = sum(
                    energy(part.qubo, x + [aux[c]]) for c, part in enumerate(parts)
                )
                assert total == pytest.approx(summed, abs=1e-9), name

    def test_hobo_additive_over_clauses(self):
        f = cnf.generate_random(5, 7, 32)
        whole = count_true_polynomial(f)
        for code in range(0, 32, 3):
            bits = tuple((code >> i) & 1 for i in range(5))
            summed = sum(
                hobo_energy(clause_count_polynomial(cl, 5), bits) for cl in f.clauses
            )
            assert hobo_energy(whole, bits) == summed


class TestApplyTransform:
    def test_names(self):
        for name in ("chancellor-j1", "chancellor-j5", "algorithm", "counttrue"):
            result = apply_transform(name, EQ1)
            assert result.transform_name == name
            assert result.n_formula == 5

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown transform"):
            apply_transform("choi", EQ1)
