"""Contraction bounds, layer specializations, and the Hessian machinery."""

import math

import numpy as np
import pytest

from sdpi import (
    Channel,
    Distribution,
    CorrelatedNoiseSpec,
    LayerNoiseSpec,
    SearchConfig,
    ValidationError,
    compose,
    contraction_bound,
    correlated_layer_bound_exact,
    correlated_layer_bound_leading,
    correlated_layer_channel,
    empirical_contraction,
    entropy_hessian,
    evans_schulman_bound,
    evans_schulman_raw,
    independent_layer_bound,
    independent_layer_channel,
    joint,
    matched_noise_slope,
    mutual_information,
    pushforward_entropy_hessian,
    quadratic_decomposition_check,
    rayleigh_supremum,
    shared_noise_ordering_holds,
    shared_noise_slope,
    shared_noise_slope_factored,
)


def random_channel(rng, n, m):
    return Channel(rng.dirichlet(np.ones(m), size=n))


def interior_distribution(rng, n, min_entry=1e-4):
    while True:
        v = rng.dirichlet(np.ones(n))
        if v.min() >= min_entry:
            return Distribution(v)


class TestContractionBound:
    def test_bsc_closed_form(self):
        for p in np.arange(0.0, 0.501, 0.05):
            got = contraction_bound(Channel.bsc(p))
            assert got.eta == pytest.approx((1 - 2 * p) ** 2, abs=1e-12)
            assert got.witness_pair == (0, 1)

    def test_identity_rows_orthogonal(self):
        assert contraction_bound(Channel.identity(2)).eta == 1.0
        assert contraction_bound(Channel.identity(5)).eta == 1.0

    def test_constant_rows_contract_everything(self):
        flat = Channel(np.tile([0.2, 0.5, 0.3], (4, 1)))
        assert contraction_bound(flat).eta == pytest.approx(0.0, abs=1e-12)

    def test_single_input_rejected(self):
        with pytest.raises(ValidationError):
            contraction_bound(Channel([[0.5, 0.5]]))

    def test_permutation_invariance(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            c = random_channel(rng, 5, 4)
            eta = contraction_bound(c).eta
            rows = rng.permutation(5)
            cols = rng.permutation(4)
            permuted = Channel(c.matrix[rows][:, cols])
            assert contraction_bound(permuted).eta == pytest.approx(eta, abs=1e-12)

    def test_witness_ties_resolve_lexicographically(self):
        # Three identical rows: every pair attains the minimum; (0, 1) wins.
        flat = Channel(np.tile([0.5, 0.5], (3, 1)))
        assert contraction_bound(flat).witness_pair == (0, 1)


class TestIndependentLayer:
    def test_noiseless_and_fully_noisy_limits(self):
        assert independent_layer_bound(LayerNoiseSpec(0.0, 4)) == 1.0
        assert independent_layer_bound(LayerNoiseSpec(0.5 - 1e-12, 4)) == pytest.approx(0.0, abs=1e-10)

    def test_direct_value(self):
        assert independent_layer_bound(LayerNoiseSpec(0.1, 3)) == pytest.approx(
            1 - 0.36**3, abs=1e-15
        )

    def test_channel_single_component_is_bsc(self):
        got = independent_layer_channel(LayerNoiseSpec(0.2, 1))
        np.testing.assert_allclose(got.matrix, Channel.bsc(0.2).matrix, atol=1e-15)

    def test_channel_entries_by_distance(self):
        got = independent_layer_channel(LayerNoiseSpec(0.1, 2))
        assert got.matrix[0, 3] == pytest.approx(0.01, abs=1e-15)
        assert got.matrix[0b01, 0b10] == pytest.approx(0.01, abs=1e-15)
        assert got.matrix[0, 0] == pytest.approx(0.81, abs=1e-15)

    def test_scan_matches_closed_form(self):
        for n in (1, 3, 5):
            for xi in (0.05, 0.25, 0.45):
                spec = LayerNoiseSpec(xi, n)
                scanned = contraction_bound(independent_layer_channel(spec)).eta
                assert scanned == pytest.approx(independent_layer_bound(spec), abs=1e-9)

    def test_monotone_in_noise_and_width(self):
        xis = np.arange(0.01, 0.5, 0.02)
        vals = [independent_layer_bound(LayerNoiseSpec(x, 3)) for x in xis]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        widths = [independent_layer_bound(LayerNoiseSpec(0.2, n)) for n in range(1, 9)]
        assert all(a < b for a, b in zip(widths, widths[1:]))

    def test_width_cap(self):
        with pytest.raises(ValidationError):
            independent_layer_channel(LayerNoiseSpec(0.1, 13))
        got = independent_layer_channel(LayerNoiseSpec(0.1, 13), max_neurons=13)
        assert got.n_inputs == 1 << 13

    def test_invalid_noise_rejected(self):
        with pytest.raises(ValidationError):
            LayerNoiseSpec(0.5, 3)
        with pytest.raises(ValidationError):
            LayerNoiseSpec(-0.1, 3)


class TestCorrelatedLayer:
    def test_no_shared_noise_reduces_to_independent(self):
        spec = CorrelatedNoiseSpec(0.0, 0.3, 4)
        got = correlated_layer_channel(spec)
        want = independent_layer_channel(LayerNoiseSpec(0.3, 4))
        np.testing.assert_allclose(got.matrix, want.matrix, atol=1e-15)
        assert correlated_layer_bound_exact(spec).eta == pytest.approx(
            independent_layer_bound(LayerNoiseSpec(0.3, 4)), abs=1e-12
        )

    def test_pure_shared_noise(self):
        got = correlated_layer_channel(CorrelatedNoiseSpec(xi1=0.05, xi2=0.0, n=2))
        assert got.matrix[0, 3] == pytest.approx(0.05, abs=1e-15)
        assert got.matrix[0, 1] == 0.0
        assert got.matrix[0, 0] == pytest.approx(0.95, abs=1e-15)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            spec = CorrelatedNoiseSpec(
                xi1=float(rng.uniform(0, 0.2)), xi2=float(rng.uniform(0, 0.49)),
                n=int(rng.integers(1, 7)),
            )
            sums = correlated_layer_channel(spec).matrix.sum(axis=1)
            np.testing.assert_allclose(sums, 1.0, atol=1e-12)

    def test_distance_class_scan_matches_brute_force(self):
        for xi1 in (0.0, 0.01, 0.05, 0.07, 0.2):
            spec = CorrelatedNoiseSpec(xi1=xi1, xi2=0.35, n=5)
            fast = correlated_layer_bound_exact(spec).eta
            brute = contraction_bound(correlated_layer_channel(spec)).eta
            assert fast == pytest.approx(brute, abs=1e-12)

    def test_ordering_against_matched_independent(self):
        for xi1 in np.arange(0.005, 0.0701, 0.005):
            spec = CorrelatedNoiseSpec(xi1=float(xi1), xi2=0.35, n=5)
            matched = xi1 * (1 - 0.35) + (1 - xi1) * 0.35
            ind = independent_layer_bound(LayerNoiseSpec(matched, 5))
            assert correlated_layer_bound_exact(spec).eta <= ind + 1e-9

    def test_leading_order_error_is_quadratic(self):
        def gap(xi1):
            spec = CorrelatedNoiseSpec(xi1=xi1, xi2=0.35, n=5)
            return abs(
                correlated_layer_bound_exact(spec).eta - correlated_layer_bound_leading(spec)
            )

        assert gap(0.07) / gap(0.01) >= 4.0

    def test_ordering_diagnostic_tracks_regime(self):
        assert shared_noise_ordering_holds(CorrelatedNoiseSpec(0.07, 0.35, 5))
        assert not shared_noise_ordering_holds(CorrelatedNoiseSpec(0.15, 0.35, 5))
        # The exact scan stays correct either way.
        spec = CorrelatedNoiseSpec(0.15, 0.35, 5)
        fast = correlated_layer_bound_exact(spec).eta
        brute = contraction_bound(correlated_layer_channel(spec)).eta
        assert fast == pytest.approx(brute, abs=1e-12)


class TestSlopes:
    def test_direct_value(self):
        # Oracle: direct evaluation of 2[(4 xi^2 - 4 xi + 2)^n - (4 xi - 4 xi^2)^n].
        expected = 2 * (1.09**5 - 0.91**5)
        assert shared_noise_slope(0.35, 5) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(1.829184, abs=1e-6)

    def test_factored_form_agrees(self):
        for xi2 in np.arange(0.0, 0.501, 0.05):
            for n in range(1, 9):
                assert shared_noise_slope(xi2, n) == pytest.approx(
                    shared_noise_slope_factored(xi2, n), rel=1e-12, abs=1e-12
                )

    def test_vanishes_at_half(self):
        for n in (1, 3, 7):
            assert shared_noise_slope(0.5, n) == 0.0

    def test_dominates_matched_slope(self):
        for xi2 in np.arange(0.0, 0.5, 0.025):
            for n in range(1, 9):
                assert shared_noise_slope(xi2, n) >= matched_noise_slope(xi2, n) - 1e-12

    def test_leading_bound_at_zero_shared_noise(self):
        spec = CorrelatedNoiseSpec(0.0, 0.3, 4)
        assert correlated_layer_bound_leading(spec) == pytest.approx(
            independent_layer_bound(LayerNoiseSpec(0.3, 4)), abs=1e-15
        )


class TestEvansSchulman:
    def test_zero_eta(self):
        assert evans_schulman_bound(0.0, 7) == 0.0

    def test_quarter_noise_three_components(self):
        eta = 1 - (4 * 0.25 - 4 * 0.25**2)
        assert eta == pytest.approx(0.25, abs=1e-15)
        assert evans_schulman_bound(eta, 3) == pytest.approx(0.75, abs=1e-15)

    def test_clamped_at_one_raw_is_not(self):
        assert evans_schulman_bound(0.9, 3) == 1.0
        assert evans_schulman_raw(0.9, 3) == pytest.approx(2.7, abs=1e-15)

    def test_always_dominates_layer_form(self):
        for eta in np.arange(0.01, 1.0, 0.01):
            for n in (2, 3, 5):
                assert evans_schulman_raw(eta, n) > 1 - (1 - eta) ** n


class TestHessians:
    def test_entropy_hessian_scalar_case(self):
        h = entropy_hessian(Distribution((0.5, 0.5)))
        assert h.shape == (1, 1)
        assert h[0, 0] == pytest.approx(-4.0, abs=1e-12)

    def test_entropy_hessian_symmetric_negative_definite(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            p = interior_distribution(rng, int(rng.integers(2, 7)))
            h = entropy_hessian(p)
            np.testing.assert_allclose(h, h.T, atol=0)
            c = rng.normal(size=h.shape[0])
            assert c @ h @ c < 0

    def test_boundary_rejected(self):
        with pytest.raises(ValidationError):
            entropy_hessian(Distribution((1.0, 0.0)))

    def test_pushforward_hessian_constant_rows_is_zero(self):
        flat = Channel(np.tile([0.2, 0.3, 0.5], (3, 1)))
        p = Distribution((0.2, 0.3, 0.5))
        np.testing.assert_allclose(pushforward_entropy_hessian(flat, p), 0.0, atol=1e-15)

    def test_pushforward_hessian_identity_channel_matches_entropy(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            n = int(rng.integers(2, 6))
            p = interior_distribution(rng, n)
            np.testing.assert_allclose(
                pushforward_entropy_hessian(Channel.identity(n), p),
                entropy_hessian(p),
                atol=1e-9,
            )

    def test_pushforward_hessian_negative_semidefinite(self):
        rng = np.random.default_rng(14)
        for _ in range(30):
            n, m = rng.integers(2, 7, size=2)
            c = random_channel(rng, n, m)
            p = interior_distribution(rng, n)
            coeffs = rng.normal(size=n - 1)
            assert coeffs @ pushforward_entropy_hessian(c, p) @ coeffs <= 1e-12


class TestRayleigh:
    def test_constant_rows_give_zero(self):
        flat = Channel(np.tile([0.5, 0.5], (3, 1)))
        assert rayleigh_supremum(flat, Distribution((0.2, 0.3, 0.5))) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_identity_gives_one(self):
        assert rayleigh_supremum(Channel.identity(3), Distribution((0.2, 0.3, 0.5))) == (
            pytest.approx(1.0, abs=1e-9)
        )

    def test_bsc_at_uniform(self):
        got = rayleigh_supremum(Channel.bsc(0.1), Distribution.uniform(2))
        assert got == pytest.approx(0.64, abs=1e-9)
        assert got <= 0.64 + 1e-9

    def test_never_exceeds_pair_bound(self):
        rng = np.random.default_rng(15)
        for _ in range(100):
            n, m = rng.integers(2, 6, size=2)
            c = random_channel(rng, n, m)
            p = interior_distribution(rng, n)
            assert rayleigh_supremum(c, p) <= contraction_bound(c).eta + 1e-9


class TestQuadraticDecomposition:
    def test_random_inputs_residuals(self):
        rng = np.random.default_rng(16)
        for _ in range(100):
            n, m = rng.integers(2, 7, size=2)
            c = random_channel(rng, n, m)
            p = interior_distribution(rng, n)
            coeffs = rng.normal(size=n - 1)
            report = quadratic_decomposition_check(c, p, coeffs)
            assert report.identity_residual < 1e-9
            assert report.min_square_term >= -1e-12
            assert report.sum_residual < 1e-9

    def test_constant_rows_reduce_to_square_sum(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n, m = rng.integers(2, 7, size=2)
            row = rng.dirichlet(np.ones(m))
            flat = Channel(np.tile(row, (n, 1)))
            p = interior_distribution(rng, n)
            coeffs = rng.normal(size=n - 1)
            report = quadratic_decomposition_check(flat, p, coeffs)
            assert report.identity_residual < 1e-9
            assert report.sum_residual < 1e-9

    def test_coefficient_length_checked(self):
        with pytest.raises(ValidationError):
            quadratic_decomposition_check(
                Channel.identity(3), Distribution((0.2, 0.3, 0.5)), [1.0]
            )


class TestEmpiricalContraction:
    def test_identity_channel_achieves_one(self):
        got = empirical_contraction(Channel.identity(2), SearchConfig(samples=50, refine_steps=0))
        assert got.achieved_ratio == pytest.approx(1.0, abs=1e-9)

    def test_constant_rows_achieve_nothing(self):
        flat = Channel(np.tile([0.5, 0.5], (2, 1)))
        got = empirical_contraction(flat, SearchConfig(samples=50, refine_steps=0))
        assert got.achieved_ratio < 1e-9
        assert got.samples > 0

    def test_bsc_search_respects_and_approaches_bound(self):
        got = empirical_contraction(Channel.bsc(0.1), SearchConfig(samples=2000, seed=1))
        assert got.achieved_ratio <= 0.64 + 1e-9
        assert got.achieved_ratio >= 0.6  # search-quality floor; 0.64 is the guarantee

    def test_reproducible_for_fixed_seed(self):
        cfg = SearchConfig(samples=200, seed=7)
        a = empirical_contraction(Channel.bsc(0.2), cfg)
        b = empirical_contraction(Channel.bsc(0.2), cfg)
        assert a.achieved_ratio == b.achieved_ratio
        np.testing.assert_array_equal(a.best_px.probs, b.best_px.probs)

    def test_ratio_never_exceeds_bound_during_search(self):
        rng = np.random.default_rng(18)
        for _ in range(5):
            c = random_channel(rng, int(rng.integers(2, 5)), int(rng.integers(2, 5)))
            got = empirical_contraction(c, SearchConfig(samples=100, seed=3))
            assert got.achieved_ratio <= contraction_bound(c).eta + 1e-9

    def test_search_json_round_trip(self):
        got = empirical_contraction(Channel.bsc(0.3), SearchConfig(samples=20, refine_steps=0))
        payload = got.to_json()
        assert payload["seed"] == 0
        assert payload["samples"] == got.samples
        assert len(payload["best_px"]) == 2
