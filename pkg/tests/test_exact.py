import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kernelshapiq.combinatorics import all_masks, masks_of_size
from kernelshapiq.exact import (
    discrete_derivative,
    exact_ksii,
    exact_sii,
    exact_sv,
    k_additive_approx,
    k_additive_approx_many,
    k_additive_from_ksii,
    ksii_recursive,
    moebius_transform,
)
from kernelshapiq.games import LookupGame, SoumGame, generate_soum, random_lookup_game
from kernelshapiq.wls import aggregate_sii_to_ksii

from conftest import additive_game, brute_force_sii, two_player_game

A, B, C = 0.7, -1.3, 2.9

lookup_tables = st.integers(2, 6).flatmap(
    lambda n: st.lists(st.floats(-10, 10, allow_nan=False), min_size=2**n, max_size=2**n)
)


class TestDiscreteDerivative:
    def test_additive_second_difference(self):
        g = additive_game([1.0, 2.0, -3.0, 0.5])
        for T in [0, 0b100, 0b1100]:
            assert discrete_derivative(g, 0b11, T) == pytest.approx(0.0)

    def test_two_players(self):
        assert discrete_derivative(two_player_game(A, B, C), 0b11) == pytest.approx(C - A - B)

    def test_rejects_overlap_and_empty(self):
        g = two_player_game(A, B, C)
        with pytest.raises(ValueError):
            discrete_derivative(g, 0b01, 0b01)
        with pytest.raises(ValueError):
            discrete_derivative(g, 0, 0b01)


class TestExactSii:
    def test_additive_sv(self):
        coefs = [1.5, -2.0, 0.25, 3.0, 0.0]
        sv = exact_sv(additive_game(coefs))
        np.testing.assert_allclose(sv.at_order(1), coefs, atol=1e-12)

    def test_two_players(self):
        sii = exact_sii(two_player_game(A, B, C), 2)
        assert sii[[1, 2]] == pytest.approx(C - A - B)
        assert sii[[1]] == pytest.approx((A + C - B) / 2)
        assert sii[[2]] == pytest.approx((B + C - A) / 2)

    def test_dummy_sv_zero(self):
        g = generate_soum(6, 10, 3, 1, seed=2)
        sv = exact_sv(g)
        assert sv[g.dummy_players] == pytest.approx(0.0, abs=1e-12)

    def test_unanimity_sv(self):
        R = [1, 3, 4]
        sv = exact_sv(SoumGame(5, [(R, 1.0)]))
        for i in range(1, 6):
            assert sv[[i]] == pytest.approx(1 / 3 if i in R else 0.0)

    def test_soum_seed1_order3(self):
        g = generate_soum(6, 10, None, 0, seed=1)
        brute, analytic = exact_sii(g, 3), g.exact_sii(3)
        for m, v in brute.values.items():
            assert analytic.values[m] == pytest.approx(v, abs=1e-10)

    def test_matches_definition_level_oracle(self):
        g = random_lookup_game(5, seed=4)
        vals = g.all_values()
        sii = exact_sii(g, 3)
        for s in (1, 2, 3):
            for S in itertools.combinations(range(5), s):
                assert sii[[i + 1 for i in S]] == pytest.approx(brute_force_sii(vals, 5, S), abs=1e-12)

    def test_centers_automatically(self):
        vals = random_lookup_game(4, seed=0, centered=False).all_values()
        a = exact_sii(LookupGame(4, vals), 2)
        b = exact_sii(LookupGame(4, vals - vals[0]), 2)
        np.testing.assert_allclose(a.stacked(), b.stacked(), atol=1e-12)

    def test_guard(self):
        g = generate_soum(21, 3, 2, seed=0)
        with pytest.raises(ValueError):
            exact_sii(g, 1)

    def test_accepts_value_table(self, lookup6):
        vals = lookup6.all_values()
        np.testing.assert_array_equal(exact_sii(vals, 2).stacked(), exact_sii(lookup6, 2).stacked())

    def test_dummy_axiom_soum(self):
        g = generate_soum(8, 30, 4, 2, seed=3)
        sii = exact_sii(g, 3)
        dummy_bits = sum(1 << (d - 1) for d in g.dummy_players)
        assert all(abs(v) <= 1e-12 for m, v in sii.values.items() if m & dummy_bits)

    @pytest.mark.parametrize("seed", range(3))
    def test_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        g = generate_soum(6, 12, 4, 0, seed=seed)
        perm = rng.permutation(6)

        def relabel(mask):
            return sum(1 << int(perm[i]) for i in range(6) if mask >> i & 1)

        permuted = SoumGame(6, [(relabel(int(m)), a) for m, a in zip(g.subsets, g.coefficients)])
        a, b = exact_sii(g, 3), exact_sii(permuted, 3)
        for m, v in a.values.items():
            assert b.values[relabel(m)] == pytest.approx(v, abs=1e-12)

    @given(lookup_tables, lookup_tables, st.floats(-3, 3), st.floats(-3, 3))
    def test_linearity(self, u, v, alpha, beta):
        if len(u) != len(v):
            return
        u, v = np.array(u), np.array(v)
        lhs = exact_sii(alpha * u + beta * v, 2).stacked()
        rhs = alpha * exact_sii(u, 2).stacked() + beta * exact_sii(v, 2).stacked()
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)


class TestKsii:
    def test_two_players_is_moebius(self):
        ks = exact_ksii(two_player_game(A, B, C), 2)
        assert ks[[1]] == pytest.approx(A)
        assert ks[[2]] == pytest.approx(B)
        assert ks[[1, 2]] == pytest.approx(C - A - B)

    def test_order_one_is_sv(self, lookup6):
        np.testing.assert_allclose(exact_ksii(lookup6, 1).stacked(), exact_sv(lookup6).stacked(), atol=1e-12)

    def test_soum_efficiency(self):
        g = generate_soum(6, 15, 4, seed=8)
        assert exact_ksii(g, 2).total() == pytest.approx(g.value(0b111111), abs=1e-10)

    def test_top_order_equals_sii(self, lookup6):
        np.testing.assert_allclose(exact_ksii(lookup6, 3).at_order(3), exact_sii(lookup6, 3).at_order(3))

    @pytest.mark.parametrize("n", [3, 5, 7, 8])
    def test_recursion_equals_explicit_form(self, n):
        g = random_lookup_game(n, seed=n)
        for k in range(1, n + 1):
            sii = exact_sii(g, k)
            a, b = ksii_recursive(sii, k), aggregate_sii_to_ksii(sii, k)
            for m, v in a.values.items():
                assert b.values[m] == pytest.approx(v, abs=1e-9)

    @pytest.mark.parametrize("n", [4, 6])
    def test_efficiency_all_orders(self, n):
        g = random_lookup_game(n, seed=1)
        for k in range(1, n + 1):
            assert exact_ksii(g, k).total() == pytest.approx(g.value(2**n - 1), abs=1e-9)


class TestMoebius:
    def test_unanimity(self):
        R = 0b1011
        a = moebius_transform(SoumGame(4, [(R, 1.0)]))
        assert all(v == (1.0 if m == R else 0.0) for m, v in a.values.items())

    def test_additive(self):
        coefs = [0.5, 1.5, -2.0]
        a = moebius_transform(additive_game(coefs))
        for m, v in a.values.items():
            expected = coefs[m.bit_length() - 1] if m.bit_count() == 1 else 0.0
            assert v == pytest.approx(expected, abs=1e-12)

    def test_two_players(self):
        assert moebius_transform(two_player_game(A, B, C))[[1, 2]] == pytest.approx(C - A - B)

    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_full_order_ksii_is_moebius(self, n):
        g = random_lookup_game(n, seed=n)
        ks, a = exact_ksii(g, n), moebius_transform(g)
        for m, v in a.values.items():
            assert ks.values[m] == pytest.approx(v, abs=1e-10)

    def test_soum_terms_recovered(self):
        g = generate_soum(7, 10, 4, seed=6)
        a = moebius_transform(g)
        expected = {}
        for m, c in zip(g.subsets.tolist(), g.coefficients):
            expected[m] = expected.get(m, 0.0) + c
        for m, v in a.values.items():
            assert v == pytest.approx(expected.get(m, 0.0), abs=1e-12)


class TestKAdditive:
    def test_order_one_sums_sv(self, lookup6):
        sii = exact_sii(lookup6, 2)
        assert k_additive_approx(sii, [1, 2], 1) == pytest.approx(sii[[1]] + sii[[2]])

    def test_order_two_formula(self, lookup6):
        sii = exact_sii(lookup6, 2)
        for T in [0b101, 0b111000, 0b10]:
            nu1 = sum(sii[[i + 1]] for i in range(6) if T >> i & 1)
            cut = sum(v for m, v in sii.values.items() if m.bit_count() == 2 and (m & T).bit_count() == 1)
            assert k_additive_approx(sii, T, 2) == pytest.approx(nu1 - 0.5 * cut)

    @pytest.mark.parametrize("n", [1, 3, 5, 8])
    def test_full_order_reproduces_game(self, n):
        g = random_lookup_game(n, seed=n + 10)
        sii = exact_sii(g, n)
        np.testing.assert_allclose(k_additive_approx_many(sii, all_masks(n), n), g.all_values(), atol=1e-9)

    def test_missing_orders(self, lookup6):
        with pytest.raises(ValueError):
            k_additive_approx(exact_sii(lookup6, 1), 3, 2)

    def test_from_ksii_matches(self, lookup6):
        for k in (1, 2, 3):
            sii = exact_sii(lookup6, k)
            ks = aggregate_sii_to_ksii(sii, k)
            for T in masks_of_size(6, 3).tolist()[:8]:
                assert k_additive_from_ksii(ks, T) == pytest.approx(k_additive_approx(sii, T, k), abs=1e-10)
