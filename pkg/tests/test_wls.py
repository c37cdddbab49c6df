import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kernelshapiq.benchmark import full_system, precision_matrix_error
from kernelshapiq.combinatorics import all_masks, kernel_weights, masks_of_size, popcount
from kernelshapiq.exact import exact_sii, exact_sv
from kernelshapiq.games import generate_soum, random_lookup_game
from kernelshapiq.values import InteractionValues
from kernelshapiq.wls import (
    WlsSystem,
    aggregate_sii_to_ksii,
    build_design_matrix,
    build_stacked_design_matrix,
    conjectured_precision_matrix,
    ksii_aggregation_matrix,
    sii_subset_weight,
    sii_weight_matrix,
    solve_wls,
    solve_wls_limit,
)


class TestDesignMatrix:
    def test_order_one_is_indicator(self):
        n = 5
        rows = all_masks(n)
        X = build_design_matrix(rows, 1, n)
        expected = np.array([[float(m >> i & 1) for i in range(n)] for m in range(32)])
        np.testing.assert_array_equal(X, expected)

    def test_order_two(self):
        n = 5
        X = build_design_matrix(all_masks(n), 2, n)
        cols = masks_of_size(n, 2)
        for T in range(32):
            for j, S in enumerate(cols.tolist()):
                assert X[T, j] == (-0.5 if (T & S).bit_count() == 1 else 0.0)

    def test_order_three_full_overlap_zero(self):
        n = 6
        cols = masks_of_size(n, 3)
        X = build_design_matrix(cols, 3, n)
        assert np.all(np.diag(X) == 0.0)

    def test_stacked_width(self):
        X = build_stacked_design_matrix(all_masks(6), 3, 6)
        assert X.shape == (64, 6 + 15 + 20)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            build_design_matrix(all_masks(3), 0, 3)


class TestSolve:
    def test_scalar(self):
        assert solve_wls(np.ones((1, 1)), np.array([3.0]), np.array([1.0]))[0] == pytest.approx(3.0)

    @given(st.integers(0, 2**32 - 1))
    def test_duplicate_row_split(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(8, 3))
        y = rng.normal(size=8)
        w = rng.uniform(0.5, 2.0, size=8)
        a = solve_wls(X, y, w)
        X2 = np.vstack([X, X[:1]])
        y2 = np.append(y, y[0])
        w2 = np.append(w, w[0] / 2)
        w2[0] /= 2
        np.testing.assert_allclose(solve_wls(X2, y2, w2), a, atol=1e-10)

    def test_matches_normal_equations(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(30, 5))
        y = rng.normal(size=30)
        w = rng.uniform(0.1, 3, 30)
        normal = np.linalg.solve(X.T @ (w[:, None] * X), X.T @ (w * y))
        np.testing.assert_allclose(solve_wls(X, y, w), normal, atol=1e-10)
        np.testing.assert_allclose(WlsSystem(X, y, w).solve(), normal, atol=1e-10)

    def test_underdetermined_minimum_norm(self):
        X = np.array([[1.0, 1.0]])
        phi = solve_wls(X, np.array([2.0]), np.array([1.0]))
        np.testing.assert_allclose(phi, [1.0, 1.0])

    @pytest.mark.parametrize(
        "X,y,w",
        [
            (np.ones((2, 1)), np.array([1.0, np.nan]), np.ones(2)),
            (np.ones((2, 1)), np.ones(2), np.array([1.0, 0.0])),
            (np.zeros((0, 1)), np.zeros(0), np.zeros(0)),
            (np.ones((2, 1)), np.ones(3), np.ones(2)),
        ],
    )
    def test_errors(self, X, y, w):
        with pytest.raises(ValueError):
            solve_wls(X, y, w)

    def test_full_enumeration_gives_sv(self, lookup6):
        masks, X, w = full_system(6, 1, 1e6)
        phi = solve_wls(X, lookup6(masks), w)
        np.testing.assert_allclose(phi, exact_sv(lookup6).at_order(1), atol=1e-6)

    @pytest.mark.parametrize("seed", range(5))
    def test_finite_weight_bias_shrinks_like_inverse_weight(self, seed):
        # the finite-mu_inf solution is off by O(|nu(N)| / mu_inf); the exact limit is not
        g = random_lookup_game(6, seed=seed)
        masks = all_masks(6)
        y = g(masks)
        sv = exact_sv(g).at_order(1)
        errs = []
        for mu in (1e4, 1e5, 1e6):
            _, X, w = full_system(6, 1, mu)
            errs.append(np.max(np.abs(solve_wls(X, y, w) - sv)))
        assert errs[0] / errs[1] == pytest.approx(10, rel=0.05)
        assert errs[1] / errs[2] == pytest.approx(10, rel=0.05)
        assert errs[2] <= 1e-6 * max(1.0, abs(y[-1]) * 2)
        outside = (popcount(masks) == 0) | (popcount(masks) == 6)
        limit = solve_wls_limit(X, y, np.where(outside, 1.0, w), outside)
        np.testing.assert_allclose(limit, sv, atol=1e-12)

    def test_limit_solver_matches_large_weight(self):
        g = random_lookup_game(7, seed=2)
        masks, X, w = full_system(7, 2, 1e6)
        t = popcount(masks)
        outside = (t < 2) | (t > 5)
        finite = np.where(outside, 1.0, w)
        sii = exact_sii(g, 2)
        residual = g(masks) - build_design_matrix(masks, 1, 7) @ sii.at_order(1)
        exact = solve_wls_limit(X, residual, finite, outside)
        np.testing.assert_allclose(exact, sii.at_order(2), atol=1e-10)
        np.testing.assert_allclose(solve_wls(X, residual, w), exact, atol=1e-5)


class TestPrecisionMatrix:
    def test_order_one_entries(self):
        n = 7
        A = conjectured_precision_matrix(n, 1)
        assert A[0, 0] == pytest.approx(1 / n)
        assert A[0, 1] == pytest.approx(-1 / (n * (n - 1)))

    def test_order_two_entries(self):
        n = 8
        A = conjectured_precision_matrix(n, 2)
        cols = masks_of_size(n, 2)
        i = {(int(a) & int(b)).bit_count(): (p, q) for p, a in enumerate(cols) for q, b in enumerate(cols)}
        assert A[i[2]] == pytest.approx(1 / (n - 1))
        assert A[i[0]] == pytest.approx(2 / ((n - 1) * (n - 2) * (n - 3)))

    def test_symmetric(self):
        A = conjectured_precision_matrix(9, 3)
        assert A.shape == (84, 84)
        np.testing.assert_array_equal(A, A.T)

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            conjectured_precision_matrix(3, 2)

    @pytest.mark.xfail(
        strict=True,
        reason="at finite mu_inf=1e7 the exact inverse differs from its limit by about 0.3-0.8 / mu_inf, above 1e-8",
    )
    def test_numerical_inverse_max_error_1e8(self):
        worst = 0.0
        for n in range(2, 12):
            for k in range(1, n // 2 + 1):
                _, X, w = full_system(n, k, 1e7)
                numeric = WlsSystem(X, np.zeros(len(w)), w).precision_matrix()
                worst = max(worst, np.max(np.abs(numeric - conjectured_precision_matrix(n, k))))
        assert worst <= 1e-8

    @pytest.mark.parametrize("n,k", [(n, k) for n in range(2, 12) for k in range(1, n // 2 + 1)])
    def test_numerical_inverse_converges(self, n, k):
        errs = []
        for mu in (1e5, 1e6, 1e7):
            _, X, w = full_system(n, k, mu)
            numeric = WlsSystem(X, np.zeros(len(w)), w).precision_matrix()
            errs.append(np.max(np.abs(numeric - conjectured_precision_matrix(n, k))))
        assert errs[2] <= 1e-7
        assert errs[0] / errs[1] == pytest.approx(10, rel=0.1)
        assert np.mean(errs[2] ** 2) < 1e-10

    def test_mse_helper(self):
        assert precision_matrix_error(6, 2) < 1e-10


class TestSiiWeights:
    def test_examples(self):
        assert sii_subset_weight(2, 0b11, 0) == pytest.approx(1.0)
        assert sii_subset_weight(4, 0b11, 0) == pytest.approx(1 / 3)

    def test_closed_form(self):
        n = 7
        for S in [0b1, 0b101, 0b10110]:
            s = S.bit_count()
            for T in range(2**n):
                t, r = T.bit_count(), (S & T).bit_count()
                expected = (-1) ** (s - r) * math.factorial(n - t - s + r) * math.factorial(t - r) / math.factorial(n - s + 1)
                assert sii_subset_weight(n, S, T) == pytest.approx(expected)

    @pytest.mark.parametrize("seed", range(3))
    def test_full_enumeration_representation(self, seed):
        g = generate_soum(8, 30, 4, 0, seed=seed)
        masks = all_masks(8)
        y = g(masks)
        gt = g.exact_sii(3)
        for ell in (1, 2, 3):
            np.testing.assert_allclose(sii_weight_matrix(masks, ell, 8) @ y, gt.at_order(ell), atol=1e-9)

    def test_empty_s_rejected(self):
        with pytest.raises(ValueError):
            sii_subset_weight(4, 0, 3)


class TestAggregation:
    def test_order_one_identity(self, lookup6):
        sii = exact_sii(lookup6, 1)
        np.testing.assert_array_equal(aggregate_sii_to_ksii(sii, 1).stacked(), sii.stacked())

    def test_top_order_unchanged(self, lookup6):
        sii = exact_sii(lookup6, 3)
        np.testing.assert_array_equal(aggregate_sii_to_ksii(sii, 3).at_order(3), sii.at_order(3))

    def test_two_players(self):
        a, b, c = 1.0, 2.0, 5.0
        sii = InteractionValues.from_orders(2, "SII", {1: [(a + c - b) / 2, (b + c - a) / 2], 2: [c - a - b]})
        ks = aggregate_sii_to_ksii(sii, 2)
        np.testing.assert_allclose(ks.stacked(), [a, b, c - a - b])

    def test_dense_matrix_agrees(self, lookup6):
        sii = exact_sii(lookup6, 4)
        Z = ksii_aggregation_matrix(6, 4)
        np.testing.assert_allclose(Z @ sii.stacked(), aggregate_sii_to_ksii(sii, 4).stacked(), atol=1e-12)

    def test_missing_orders(self, lookup6):
        with pytest.raises(ValueError):
            aggregate_sii_to_ksii(exact_sii(lookup6, 2), 3)

    def test_kernel_weights_shape(self):
        assert kernel_weights(2, 8).shape == (9,)
