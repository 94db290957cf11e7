"""
Tests for exact Shapley values and bivariate matrices.
"""

from math import comb

import numpy as np
import pytest

from backend.app.core.exceptions import GameTooLarge
from backend.app.shapley.exact import exact_bivariate, exact_explain, exact_shapley, shapley_weights
from backend.app.utility.games import CoalitionGame, filter_game
from backend.app.utility.synthetic import synthetic


def interchangeable_pair_game():
    """Players 0 and 1 can be swapped without changing any coalition value"""

    def value(s):
        pair = len(s & {0, 1})
        both = 0.5 * (pair == 2)
        return pair + 2.0 * (2 in s) + 0.5 * (3 in s) + both + 0.7 * (2 in s and pair > 0) + 0.3 * (3 in s) * pair

    return CoalitionGame.from_function(4, value, name="interchangeable")


@pytest.mark.unit
class TestWeights:
    @pytest.mark.parametrize("d", [1, 2, 5, 10])
    def test_weights_form_a_distribution(self, d):
        w = shapley_weights(d)
        assert sum(comb(d - 1, s) * w[s] for s in range(d)) == pytest.approx(1.0)


@pytest.mark.unit
class TestExactShapley:
    def test_dictator(self):
        phi = exact_shapley(synthetic("dictator", 4, index=2)).phi
        np.testing.assert_allclose(phi, [0, 0, 1, 0], atol=1e-15)

    def test_and_all_splits_evenly(self):
        np.testing.assert_allclose(exact_shapley(synthetic("and_all", 4)).phi, 0.25)

    @pytest.mark.parametrize("seed", range(5))
    def test_efficiency(self, seed):
        u = synthetic("random", 6, seed=seed)
        phi = exact_shapley(u).phi
        assert phi.sum() == pytest.approx(u(u.full) - u(0), abs=1e-12)

    def test_size_guard(self):
        u = CoalitionGame(16, lambda masks: np.zeros(len(masks)))
        with pytest.raises(GameTooLarge):
            exact_explain(u)
        assert u.eval_count == 0


@pytest.mark.unit
class TestExactBivariate:
    def test_dictator_game(self):
        m = exact_bivariate(synthetic("dictator", 3, index=0)).m
        expected = np.array(
            [
                [1.0, 0.5, 0.5],
                [0.0, 0.5, 0.0],
                [0.0, 0.0, 0.5],
            ]
        )
        np.testing.assert_allclose(m, expected, atol=1e-15)

    def test_dictator_model(self, dictator_explanation):
        phi, matrix = dictator_explanation
        np.testing.assert_allclose(phi.phi, [0.5, 0.0, 0.0], atol=1e-15)
        off = matrix.m.copy()
        np.fill_diagonal(off, 0.0)
        expected = np.zeros((3, 3))
        expected[0, 1] = expected[0, 2] = 0.25
        np.testing.assert_allclose(off, expected, atol=1e-15)
        assert matrix.m[1, 0] == 0.0 and matrix.m[2, 1] == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_columns_are_filtered_shapley_values(self, seed):
        u = synthetic("random", 5, seed=seed)
        m = exact_bivariate(u).m
        for j in range(5):
            np.testing.assert_allclose(m[:, j], exact_shapley(filter_game(u, j)).phi, atol=1e-12)

    def test_column_sums_equal_full_value(self):
        u = synthetic("random", 5, seed=11)
        m = exact_bivariate(u).m
        np.testing.assert_allclose(m.sum(axis=0), u(u.full), atol=1e-12)

    def test_constant_game(self):
        u = CoalitionGame(4, lambda masks: np.full(len(masks), 2.5))
        phi, matrix = exact_explain(u)
        np.testing.assert_allclose(phi.phi, 0.0, atol=1e-15)
        off = matrix.m[~np.eye(4, dtype=bool)]
        np.testing.assert_allclose(off, 0.0, atol=1e-15)
        np.testing.assert_allclose(np.diag(matrix.m), 2.5)

    def test_shares_one_enumeration(self):
        u = synthetic("random", 6, seed=0)
        exact_explain(u)
        assert u.eval_count == 64

    def test_metadata(self):
        phi, matrix = exact_explain(synthetic("random", 3, seed=0))
        assert matrix.method == "exact"
        assert matrix.sample_count == 8
        np.testing.assert_array_equal(matrix.column(1), matrix.m[:, 1])

    @pytest.mark.parametrize(
        "u, d", [(synthetic("or_duplicate", 3, pair=(0, 1)), 3), (interchangeable_pair_game(), 4)]
    )
    def test_interchangeable_players(self, u, d):
        phi, matrix = exact_explain(u)
        m = matrix.m
        assert phi.phi[0] == pytest.approx(phi.phi[1], abs=1e-12)
        assert m[0, 1] == pytest.approx(m[1, 0], abs=1e-12)
        for j in range(2, d):
            assert m[0, j] == pytest.approx(m[1, j], abs=1e-12)
            assert m[j, 0] == pytest.approx(m[j, 1], abs=1e-12)
