"""Tests for fixed weight map construction."""

import json

import numpy as np
import pytest


class TestRandomUniform:
    """Seeded U(-sigma, sigma) maps."""

    def test_same_seed_same_matrix(self):
        from detrc.mapping import build_random_uniform

        a = build_random_uniform(30, 20, 0.5, seed=42)
        b = build_random_uniform(30, 20, 0.5, seed=42)
        assert np.array_equal(a.toarray(), b.toarray())

    def test_seed_and_stream_change_matrix(self):
        from detrc.mapping import build_random_uniform

        base = build_random_uniform(10, 10, 1.0, seed=1).toarray()
        assert not np.array_equal(base, build_random_uniform(10, 10, 1.0, seed=2).toarray())
        assert not np.array_equal(
            base, build_random_uniform(10, 10, 1.0, seed=1, stream=1).toarray()
        )

    def test_statistics(self):
        from detrc.mapping import build_random_uniform

        w = build_random_uniform(100, 100, 0.5, seed=3).toarray()
        assert np.max(np.abs(w)) <= 0.5
        assert abs(w.mean()) <= 3 * 0.5 / np.sqrt(w.size)

    @pytest.mark.parametrize("rows,cols,sigma", [(0, 3, 0.5), (3, 0, 0.5), (3, 3, 0.0)])
    def test_invalid_arguments(self, rows, cols, sigma):
        from detrc.errors import ParameterError
        from detrc.mapping import build_random_uniform

        with pytest.raises(ParameterError):
            build_random_uniform(rows, cols, sigma, seed=0)

    def test_recipe_names_generator(self):
        from detrc.mapping import PRNG_NAME, build_random_uniform

        w = build_random_uniform(4, 3, 0.5, seed=9)
        assert w.recipe.kind == "random_uniform"
        assert w.recipe.seed == 9
        assert w.recipe.prng.startswith(PRNG_NAME)


class TestChebyshev:
    """Deterministic Chebyshev maps."""

    def test_first_row_hand_values(self):
        from detrc.mapping import ChebyshevParams, build_chebyshev

        w = build_chebyshev(2, 3, ChebyshevParams(p=0.5, q=1.0, k_cheb=2.0)).toarray()
        h = 0.5 * np.sin(np.pi / 4)
        assert np.allclose(w[0], [-h, 0.0, h], atol=1e-12)

    def test_second_row_follows_chebyshev_identity(self):
        from detrc.mapping import ChebyshevParams, build_chebyshev

        w = build_chebyshev(2, 3, ChebyshevParams(p=0.5, q=1.0, k_cheb=2.0)).toarray()
        assert np.allclose(w[1], [-0.75, -1.0, -0.75], atol=1e-12)
        assert np.allclose(w[1], 2 * w[0] ** 2 - 1, atol=1e-12)

    @pytest.mark.parametrize("p,q,k", [(0.5, 1.0, 2.0), (1.0, 0.3, 3.7), (0.05, -2.0, 0.5)])
    def test_entries_in_unit_interval(self, p, q, k):
        from detrc.mapping import ChebyshevParams, build_chebyshev

        w = build_chebyshev(40, 17, ChebyshevParams(p=p, q=q, k_cheb=k)).toarray()
        assert np.all(np.abs(w) <= 1.0)

    def test_rows_depend_only_on_previous_row(self):
        from detrc.mapping import ChebyshevParams, build_chebyshev

        w = build_chebyshev(6, 5, ChebyshevParams(p=0.8, q=1.5, k_cheb=3.0)).toarray()
        for j in range(1, 6):
            assert np.array_equal(w[j], np.cos(3.0 * np.arccos(w[j - 1])))

    def test_deterministic(self):
        from detrc.mapping import ChebyshevParams, build_chebyshev

        params = ChebyshevParams(p=0.7, q=2.0, k_cheb=2.5)
        assert np.array_equal(
            build_chebyshev(12, 6, params).toarray(), build_chebyshev(12, 6, params).toarray()
        )

    @pytest.mark.parametrize("p,q", [(0.0, 1.0), (1.5, 1.0), (-0.5, 1.0), (0.5, 0.0)])
    def test_invalid_params(self, p, q):
        from detrc.errors import ParameterError
        from detrc.mapping import ChebyshevParams

        with pytest.raises(ParameterError):
            ChebyshevParams(p=p, q=q, k_cheb=2.0)


class TestLogistic:
    """Block-sparse logistic maps."""

    def test_chain_fixed_point(self):
        from detrc.mapping import logistic_chain

        assert np.all(logistic_chain(0.5, 2.0, 50) == 0.5)

    def test_chain_one_step(self):
        from detrc.mapping import logistic_chain

        chain = logistic_chain(0.3, 4.0, 2)
        assert chain[0] == 0.3
        assert chain[1] == pytest.approx(0.84, abs=1e-15)

    @pytest.mark.parametrize("r", [2.0, 3.5, 4.0])
    @pytest.mark.parametrize("seed", [0.0, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0])
    def test_chain_stays_in_unit_interval(self, r, seed):
        from detrc.mapping import logistic_chain

        chain = logistic_chain(seed, r, 10_000)
        assert chain.min() >= 0.0
        assert chain.max() <= 1.0

    def test_block_layout(self):
        from detrc.mapping import LogisticParams, build_logistic_sparse

        w = build_logistic_sparse(6, 3, LogisticParams(r=3.5, a=0.9, b=1.0, n_expand=2))
        assert w.is_sparse
        assert w.nnz == 6
        for c in range(3):
            assert {r for r, col in w.support() if col == c} == {2 * c, 2 * c + 1}

    def test_columns_follow_recurrence(self):
        from detrc.mapping import LogisticParams, build_logistic_sparse, logistic_chain

        params = LogisticParams(r=3.9, a=0.8, b=1.3, n_expand=4)
        cols = 5
        rows = 4 * cols
        dense = build_logistic_sparse(rows, cols, params).toarray()
        for c in range(cols):
            seed = 0.8 * np.sin(c * 4 * np.pi / ((rows - 1) * 1.3))
            expected = logistic_chain(seed, 3.9, 4)
            assert np.allclose(dense[4 * c:4 * c + 4, c], expected, rtol=0, atol=1e-14)
        assert np.all((dense >= 0.0) & (dense <= 1.0))

    def test_deterministic(self):
        from detrc.mapping import LogisticParams, build_logistic_sparse

        params = LogisticParams(r=4.0, a=0.5, b=2.0, n_expand=3)
        a = build_logistic_sparse(30, 10, params).toarray()
        b = build_logistic_sparse(30, 10, params).toarray()
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("a", [2.0, -0.5])
    def test_seed_outside_unit_interval(self, a):
        from detrc.errors import ParameterError
        from detrc.mapping import LogisticParams, build_logistic_sparse

        with pytest.raises(ParameterError):
            build_logistic_sparse(6, 3, LogisticParams(r=3.5, a=a, b=1.0, n_expand=2))

    def test_rows_must_match_blocks(self):
        from detrc.errors import ParameterError
        from detrc.mapping import LogisticParams, build_logistic_sparse

        with pytest.raises(ParameterError):
            build_logistic_sparse(5, 3, LogisticParams(r=3.5, a=0.5, b=1.0, n_expand=2))

    @pytest.mark.parametrize("kwargs", [
        {"r": 0.0, "a": 0.5, "b": 1.0, "n_expand": 1},
        {"r": 4.5, "a": 0.5, "b": 1.0, "n_expand": 1},
        {"r": 3.0, "a": 0.5, "b": 0.0, "n_expand": 1},
        {"r": 3.0, "a": 0.5, "b": 1.0, "n_expand": 0},
    ])
    def test_invalid_params(self, kwargs):
        from detrc.errors import ParameterError
        from detrc.mapping import LogisticParams

        with pytest.raises(ParameterError):
            LogisticParams(**kwargs)


class TestSpectralRadius:
    """Spectral radius estimation and rescaling."""

    def test_diagonal_rescale(self):
        from detrc.mapping import WeightMap, rescale_spectral_radius

        w = rescale_spectral_radius(WeightMap.from_dense(np.diag([2.0, 1.0])), 0.5)
        assert np.allclose(w.toarray(), np.diag([0.5, 0.25]), atol=1e-12)

    def test_rescale_to_current_radius_is_identity(self):
        from detrc.mapping import build_random_uniform, rescale_spectral_radius, spectral_radius

        w = build_random_uniform(20, 20, 1.0, seed=5)
        same = rescale_spectral_radius(w, spectral_radius(w))
        assert np.max(np.abs(same.toarray() - w.toarray())) < 1e-9

    @pytest.mark.parametrize("seed", range(15))
    def test_rescaled_radius_matches(self, seed):
        from detrc.mapping import build_random_uniform, rescale_spectral_radius, spectral_radius

        w = rescale_spectral_radius(build_random_uniform(300, 300, 0.5, seed, stream=1), 0.9)
        assert abs(spectral_radius(w) - 0.9) < 1e-6

    @pytest.mark.parametrize("matrix", [np.zeros((3, 3)), np.array([[0.0, 1.0], [0.0, 0.0]])])
    def test_zero_radius(self, matrix):
        from detrc.errors import SpectralRadiusZeroError
        from detrc.mapping import WeightMap, rescale_spectral_radius

        with pytest.raises(SpectralRadiusZeroError):
            rescale_spectral_radius(WeightMap.from_dense(matrix), 0.9)

    def test_non_square(self):
        from detrc.errors import ShapeError
        from detrc.mapping import build_random_uniform, rescale_spectral_radius

        with pytest.raises(ShapeError):
            rescale_spectral_radius(build_random_uniform(3, 4, 1.0, seed=0), 0.9)

    def test_sparse_power_iteration(self):
        from detrc.mapping import WeightMap, rescale_spectral_radius, spectral_radius

        w = WeightMap.from_triplets(3, 3, [(0, 0, 3.0), (1, 1, 1.0), (2, 2, -0.5)])
        assert abs(spectral_radius(w) - 3.0) < 1e-6
        scaled = rescale_spectral_radius(w, 1.5)
        assert scaled.is_sparse
        assert np.allclose(scaled.toarray(), np.diag([1.5, 0.5, -0.25]), atol=1e-6)

    def test_sparse_rotation(self):
        from detrc.mapping import WeightMap, spectral_radius

        # Eigenvalues +-2i
        w = WeightMap.from_triplets(2, 2, [(0, 1, -2.0), (1, 0, 2.0)])
        assert abs(spectral_radius(w, max_iter=50) - 2.0) < 1e-9


class TestApplyMap:
    """Matrix-vector products on dense and sparse storage."""

    def test_identity(self):
        from detrc.mapping import WeightMap, apply_map

        assert apply_map(WeightMap.from_dense(np.eye(2)), [1.0, 2.0]).tolist() == [1.0, 2.0]

    def test_sparse_single_entry(self):
        from detrc.mapping import WeightMap, apply_map

        w = WeightMap.from_triplets(2, 2, [(0, 0, 2.0)])
        assert apply_map(w, [3.0, 4.0]).tolist() == [6.0, 0.0]

    def test_dense_and_sparse_paths_agree(self):
        from detrc.mapping import apply_map, build_random_uniform

        dense = build_random_uniform(64, 32, 1.0, seed=11)
        sparse = dense.to_sparse()
        v = np.random.default_rng(0).normal(size=32)
        assert np.max(np.abs(apply_map(dense, v) - apply_map(sparse, v))) < 1e-12

    def test_batch_of_columns(self):
        from detrc.mapping import apply_map, build_random_uniform

        w = build_random_uniform(5, 4, 1.0, seed=2)
        batch = np.arange(12.0).reshape(4, 3)
        out = apply_map(w, batch)
        assert out.shape == (5, 3)
        assert np.allclose(out[:, 1], apply_map(w, batch[:, 1]), atol=1e-14)

    def test_dimension_mismatch(self):
        from detrc.errors import ShapeError
        from detrc.mapping import WeightMap, apply_map

        with pytest.raises(ShapeError):
            apply_map(WeightMap.from_dense(np.eye(3)), [1.0, 2.0])


class TestWeightMapStorage:
    """Storage invariants and conversions."""

    def test_duplicate_triplets_rejected(self):
        from detrc.errors import ParameterError
        from detrc.mapping import WeightMap

        with pytest.raises(ParameterError):
            WeightMap.from_triplets(2, 2, [(0, 0, 1.0), (0, 0, 2.0)])

    def test_out_of_range_triplet(self):
        from detrc.errors import ShapeError
        from detrc.mapping import WeightMap

        with pytest.raises(ShapeError):
            WeightMap.from_triplets(2, 2, [(2, 0, 1.0)])

    def test_non_finite_rejected(self):
        from detrc.errors import ParameterError
        from detrc.mapping import WeightMap

        with pytest.raises(ParameterError):
            WeightMap.from_dense([[1.0, np.inf]])

    def test_triplets_in_row_major_order(self):
        from detrc.mapping import WeightMap

        w = WeightMap.from_triplets(3, 2, [(2, 1, 5.0), (0, 1, 1.0), (1, 0, -2.0)])
        assert w.triplets() == [(0, 1, 1.0), (1, 0, -2.0), (2, 1, 5.0)]
        assert w.to_dense().triplets() == w.triplets()


class TestRecipes:
    """Maps are rebuilt from JSON recipes, never stored raw."""

    def _round_trip(self, w):
        from detrc.mapping import MapRecipe, rebuild_map

        recipe = MapRecipe.from_dict(json.loads(json.dumps(w.recipe.to_dict())))
        return rebuild_map(recipe)

    def test_random(self):
        from detrc.mapping import build_random_uniform

        w = build_random_uniform(7, 5, 0.3, seed=123, stream=2)
        assert np.array_equal(self._round_trip(w).toarray(), w.toarray())

    def test_chebyshev(self):
        from detrc.mapping import ChebyshevParams, build_chebyshev

        w = build_chebyshev(8, 4, ChebyshevParams(p=0.9, q=1.7, k_cheb=2.2))
        assert np.array_equal(self._round_trip(w).toarray(), w.toarray())

    def test_logistic(self):
        from detrc.mapping import LogisticParams, build_logistic_sparse

        w = build_logistic_sparse(12, 4, LogisticParams(r=3.7, a=0.6, b=1.1, n_expand=3))
        rebuilt = self._round_trip(w)
        assert rebuilt.is_sparse
        assert np.array_equal(rebuilt.toarray(), w.toarray())

    def test_spectral_rescale(self):
        from detrc.mapping import build_random_uniform, rescale_spectral_radius

        w = rescale_spectral_radius(build_random_uniform(10, 10, 0.5, seed=4, stream=1), 0.8)
        assert w.recipe.base.kind == "random_uniform"
        assert np.array_equal(self._round_trip(w).toarray(), w.toarray())

    def test_explicit_not_rebuildable(self):
        from detrc.errors import ParameterError
        from detrc.mapping import WeightMap, rebuild_map

        with pytest.raises(ParameterError):
            rebuild_map(WeightMap.from_dense(np.eye(2)).recipe)
