import itertools
import math

import numpy as np
import pytest

from satqubo import cnf, transforms
from satqubo.qubo import (
    BinaryPolynomial,
    Qubo,
    QuboBuilder,
    brute_force_minimum,
    delta_energy,
    energy,
    hobo_energy,
    ising_energy,
    ising_to_qubo,
    penalty_gadget_value,
    quadratize,
    qubo_from_json,
    qubo_from_triplets,
    qubo_to_json,
    qubo_to_triplets,
    scale_to_precision,
    stats,
    to_ising,
)


def random_qubo(n, seed, density=0.5, lo=-4, hi=4, integer=True):
    rng = np.random.default_rng(seed)
    b = QuboBuilder(n)
    for i in range(n):
        v = rng.integers(lo, hi + 1) if integer else rng.uniform(lo, hi)
        b.add(i, i, float(v))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                v = rng.integers(lo, hi + 1) if integer else rng.uniform(lo, hi)
                b.add(i, j, float(v))
    b.add_offset(float(rng.integers(-3, 4)))
    return b.build()


def naive_energy(q: Qubo, bits) -> float:
    """Term-by-term recomputation, independent of energy()."""
    total = q.offset
    for i in range(q.size):
        total += q.diag[i] * bits[i]
    for (i, j), v in q.upper.items():
        total += v * bits[i] * bits[j]
    return total


class TestEnergy:
    def test_two_bit_example(self):
        q = Qubo(2, (-1.0, 0.0), {(0, 1): 2.0})
        assert energy(q, (1, 1)) == 1.0

    def test_all_zeros_gives_offset(self):
        q = random_qubo(5, 3)
        assert energy(q, (0,) * 5) == q.offset

    def test_matches_naive_for_all_states(self):
        q = random_qubo(6, 11)
        for code in range(64):
            bits = [(code >> i) & 1 for i in range(6)]
            assert energy(q, bits) == naive_energy(q, bits)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            energy(random_qubo(4, 0), (0, 1))


class TestDeltaEnergy:
    def test_worked_example(self):
        q = Qubo(2, (-1.0, 0.0), {(0, 1): 2.0})
        # E(1,1) - E(1,0) = 1 - (-1)
        assert delta_energy(q, (1, 0), 1) == 2.0

    def test_isolated_bit(self):
        q = Qubo(3, (0.0, 5.0, 0.0), {})
        assert delta_energy(q, (0, 0, 0), 1) == 5.0

    def test_exhaustive_against_full_recompute(self):
        for seed in range(5):
            q = random_qubo(5, 100 + seed)
            for code in range(32):
                bits = [(code >> i) & 1 for i in range(5)]
                for i in range(5):
                    flipped = list(bits)
                    flipped[i] ^= 1
                    expected = naive_energy(q, flipped) - naive_energy(q, bits)
                    assert delta_energy(q, bits, i) == pytest.approx(expected, abs=1e-12)

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            delta_energy(random_qubo(3, 0), (0, 0, 0), 3)


class TestIsing:
    def test_product_term(self):
        q = Qubo(2, (0.0, 0.0), {(0, 1): 1.0})
        m = to_ising(q)
        assert m.h == (0.25, 0.25)
        assert m.J == {(0, 1): 0.25}
        assert m.offset == 0.25

    def test_linear_term(self):
        q = Qubo(1, (1.0,), {})
        m = to_ising(q)
        assert m.h == (0.5,) and m.offset == 0.5

    def test_energy_equality_exhaustive(self):
        for seed in range(5):
            q = random_qubo(5, 200 + seed)
            m = to_ising(q)
            for code in range(32):
                bits = [(code >> i) & 1 for i in range(5)]
                spins = [2 * b - 1 for b in bits]
                assert ising_energy(m, spins) == pytest.approx(energy(q, bits), abs=1e-9)

    def test_round_trip_through_spin_form(self):
        for seed in range(5):
            q = random_qubo(4, 300 + seed)
            back = ising_to_qubo(to_ising(q))
            for code in range(16):
                bits = [(code >> i) & 1 for i in range(4)]
                assert energy(back, bits) == pytest.approx(energy(q, bits), abs=1e-9)


class TestScaleToPrecision:
    def test_factor_for_max_three(self):
        q = Qubo(2, (3.0, 0.0), {(0, 1): -2.0})
        scaled = scale_to_precision(q, 16)
        assert scaled.factor == 2.0**13
        assert 3.0 * scaled.factor < 2.0**15
        assert 3.0 * (2 * scaled.factor) >= 2.0**15

    def test_power_of_two_boundary(self):
        q = Qubo(1, (2.0,), {})
        assert scale_to_precision(q, 16).factor == 2.0**13

    def test_argmin_preserved_on_integer_input(self):
        for seed in range(5):
            q = random_qubo(6, 400 + seed)
            scaled = scale_to_precision(q, 16)
            _, argmin_orig = brute_force_minimum(q)
            _, argmin_scaled = brute_force_minimum(scaled.qubo)
            assert argmin_orig == argmin_scaled

    def test_p64_chancellor_exact(self):
        f = cnf.generate_random(11, 46, 5)
        q = transforms.chancellor(f, 5.0).qubo
        scaled = scale_to_precision(q, 64)
        assert scaled.qubo.is_integer_valued()
        for i in range(q.size):
            assert scaled.qubo.diag[i] == q.diag[i] * scaled.factor
        for key, v in q.upper.items():
            assert scaled.qubo.upper[key] == v * scaled.factor
        assert scaled.qubo.offset == q.offset * scaled.factor

    def test_all_zero_matrix(self):
        q = Qubo(3, (0.0, 0.0, 0.0), {}, offset=1.5)
        scaled = scale_to_precision(q, 16)
        assert scaled.factor == 1.0
        assert scaled.qubo.diag == (0.0, 0.0, 0.0)

    def test_invalid_precision(self):
        with pytest.raises(ValueError):
            scale_to_precision(random_qubo(2, 0), 32)

    def test_oversized_coefficients_shrink(self):
        q = Qubo(1, (float(2**20),), {})
        scaled = scale_to_precision(q, 16)
        assert scaled.factor < 1.0
        assert abs(scaled.qubo.diag[0]) < 2**15


class TestStats:
    def test_two_values(self):
        q = Qubo(3, (0.0,) * 3, {(0, 1): 2.0, (1, 2): -1.0})
        st = stats(q)
        assert st.bits == 3
        assert st.distinct_quadratic == 2
        assert st.value_range == 3.0

    def test_chancellor_bits(self):
        f = cnf.generate_random(11, 46, 9)
        st = stats(transforms.chancellor(f, 1.0).qubo)
        assert st.bits == 57

    def test_counttrue_bits_bounded(self):
        for seed in range(5):
            f = cnf.generate_random(6, 15, seed)
            st = stats(transforms.count_true(f).qubo)
            assert st.bits <= f.n + f.m

    def test_no_quadratic_entries(self):
        st = stats(Qubo(2, (1.0, 2.0), {}))
        assert st.distinct_quadratic == 0 and st.value_range == 0.0


class TestHobo:
    def test_cubic_plus_constant(self):
        h = BinaryPolynomial({(0, 1, 2): -6.0, (): 6.0})
        assert hobo_energy(h, (1, 1, 1)) == 0.0

    def test_empty_polynomial(self):
        assert hobo_energy(BinaryPolynomial({}), (0, 1)) == 0.0

    def test_single_positive_clause_all_false(self):
        cl = cnf.clause(1, 2, 3)
        h = transforms.clause_count_polynomial(cl, 3)
        assert hobo_energy(h, (0, 0, 0)) == 6.0

    def test_index_out_of_range(self):
        h = BinaryPolynomial({(0, 5): 1.0})
        with pytest.raises(ValueError):
            hobo_energy(h, (1, 1))

    def test_key_validation(self):
        with pytest.raises(ValueError):
            BinaryPolynomial({(2, 1): 1.0})
        with pytest.raises(ValueError):
            BinaryPolynomial({(1, 1): 1.0})


def brute_hobo_minimum(h: BinaryPolynomial, n: int) -> float:
    return min(
        hobo_energy(h, tuple((code >> i) & 1 for i in range(n))) for code in range(1 << n)
    )


class TestQuadratize:
    def test_single_cubic_term(self):
        h = BinaryPolynomial({(0, 1, 2): -6.0})
        q, pair_aux = quadratize(h)
        assert pair_aux == {(0, 1): 3}
        assert q.size == 4
        # penalty weight M = 1 + |-6| = 7
        assert q.upper[(0, 1)] == 7.0
        assert q.upper[(0, 3)] == -14.0
        assert q.upper[(1, 3)] == -14.0
        assert q.diag[3] == 21.0
        assert q.upper[(2, 3)] == -6.0
        # minimum over the reduced 16-state space equals the HOBO minimum
        emin, argmin = brute_force_minimum(q)
        assert emin == -6.0
        codes = [c for c in argmin]
        assert codes == [0b1111]  # x=(1,1,1), honest y=1

    def test_degree_two_unchanged(self):
        h = BinaryPolynomial({(0,): 2.0, (0, 1): -3.0, (): 1.0})
        q, pair_aux = quadratize(h)
        assert pair_aux == {}
        assert q.size == 2
        assert q.diag == (2.0, 0.0)
        assert q.upper == {(0, 1): -3.0}
        assert q.offset == 1.0

    def test_pair_reuse_across_clauses(self):
        # two cubic terms sharing the pair (1,2) get one shared auxiliary
        h = BinaryPolynomial({(0, 1, 2): -6.0, (1, 2, 3): -6.0})
        q, pair_aux = quadratize(h)
        assert len(pair_aux) == 1
        assert (1, 2) in pair_aux
        assert q.size == 5

    def test_penalty_zero_set(self):
        for xi, xj, y in itertools.product((0, 1), repeat=3):
            v = penalty_gadget_value(xi, xj, y)
            if y == xi * xj:
                assert v == 0.0
            else:
                assert v >= 1.0

    def test_minima_preserved_with_honest_auxiliaries(self):
        rng = np.random.default_rng(77)
        for trial in range(20):
            n = int(rng.integers(3, 6))
            terms = {}
            for _ in range(rng.integers(2, 6)):
                deg = int(rng.integers(1, 4))
                key = tuple(sorted(rng.choice(n, size=deg, replace=False).tolist()))
                terms[key] = float(rng.integers(-5, 6))
            terms = {k: v for k, v in terms.items() if v != 0.0}
            if not terms:
                continue
            h = BinaryPolynomial(terms, num_vars=n)
            q, pair_aux = quadratize(h)
            assert q.size <= 14
            emin_hobo = brute_hobo_minimum(h, n)
            emin_qubo, argmin = brute_force_minimum(q)
            assert emin_qubo == pytest.approx(emin_hobo, abs=1e-9)
            # every reduced minimizer has honest auxiliaries
            for code in argmin:
                bits = [(code >> i) & 1 for i in range(q.size)]
                for (a, b), y in pair_aux.items():
                    assert bits[y] == bits[a] * bits[b]

    def test_degree_four_chain(self):
        h = BinaryPolynomial({(0, 1, 2, 3): 5.0, (0,): -1.0})
        q, pair_aux = quadratize(h)
        assert len(pair_aux) == 2
        emin_hobo = brute_hobo_minimum(h, 4)
        emin_qubo, _ = brute_force_minimum(q)
        assert emin_qubo == pytest.approx(emin_hobo, abs=1e-9)


class TestPolynomialAlgebra:
    def test_addition_merges_terms(self):
        a = BinaryPolynomial({(0,): 1.0, (): 2.0})
        b = BinaryPolynomial({(0,): -1.0, (1,): 3.0})
        out = a + b
        assert out.terms == {(): 2.0, (1,): 3.0}

    def test_multiplication_is_multilinear(self):
        x0 = BinaryPolynomial.variable(0)
        out = x0 * x0
        assert out.terms == {(0,): 1.0}

    def test_product_distributes(self):
        a = BinaryPolynomial({(0,): 1.0, (): -1.0})
        b = BinaryPolynomial({(1,): 1.0, (): -2.0})
        out = a * b
        assert out.terms == {(0, 1): 1.0, (0,): -2.0, (1,): -1.0, (): 2.0}


class TestSerialization:
    def test_json_round_trip(self):
        q = random_qubo(5, 500)
        assert qubo_from_json(qubo_to_json(q)) == q

    def test_triplet_round_trip(self):
        q = random_qubo(5, 501)
        assert qubo_from_triplets(qubo_to_triplets(q)) == q

    def test_builder_drops_cancelled_entries(self):
        b = QuboBuilder(2)
        b.add(0, 1, 1.0)
        b.add(1, 0, -1.0)
        q = b.build()
        assert q.upper == {}

    def test_invalid_upper_key(self):
        with pytest.raises(ValueError):
            Qubo(2, (0.0, 0.0), {(1, 1): 1.0})
        with pytest.raises(ValueError):
            Qubo(2, (0.0, 0.0), {(1, 0): 1.0})
        with pytest.raises(ValueError):
            Qubo(2, (0.0, math.inf), {})
