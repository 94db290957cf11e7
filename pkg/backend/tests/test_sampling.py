"""
Tests for permutation-sampling estimates.
"""

import numpy as np
import pytest

from backend.app.core.exceptions import InvalidConfig
from backend.app.shapley.exact import exact_explain
from backend.app.shapley.sampling import feature_stream, sampling_bivariate
from backend.app.utility.games import CoalitionGame
from backend.app.utility.synthetic import synthetic


@pytest.mark.unit
class TestSampling:
    def test_seeded(self):
        a = sampling_bivariate(synthetic("random", 5, seed=1), M=200, seed=4)
        b = sampling_bivariate(synthetic("random", 5, seed=1), M=200, seed=4)
        np.testing.assert_array_equal(a[0].phi, b[0].phi)
        np.testing.assert_array_equal(a[1].m, b[1].m)

    def test_jobs_do_not_change_results(self):
        serial = sampling_bivariate(synthetic("random", 6, seed=2), M=100, seed=0, jobs=1)
        threaded = sampling_bivariate(synthetic("random", 6, seed=2), M=100, seed=0, jobs=3)
        np.testing.assert_array_equal(serial[1].m, threaded[1].m)

    def test_feature_streams_differ(self):
        assert feature_stream(0, 0).random() != feature_stream(0, 1).random()

    def test_dictator(self):
        phi, matrix = sampling_bivariate(synthetic("dictator", 4, index=0), M=2000, seed=0)
        np.testing.assert_array_equal(phi.phi, [1.0, 0.0, 0.0, 0.0])
        assert matrix.m[0, 0] == 1.0
        np.testing.assert_allclose(matrix.m[0, 1:], 0.5, atol=0.06)
        np.testing.assert_array_equal(matrix.m[1:, 0], 0.0)

    def test_constant_game(self):
        u = CoalitionGame(3, lambda masks: np.full(len(masks), 4.0))
        phi, matrix = sampling_bivariate(u, M=50, seed=0)
        np.testing.assert_array_equal(phi.phi, 0.0)
        np.testing.assert_array_equal(np.diag(matrix.m), 4.0)
        assert (matrix.m[~np.eye(3, dtype=bool)] == 0.0).all()

    def test_metadata(self):
        phi, matrix = sampling_bivariate(synthetic("random", 3, seed=0), M=10, seed=7)
        assert (matrix.method, matrix.sample_count, matrix.seed) == ("sampling", 10, 7)

    def test_sample_count(self):
        with pytest.raises(InvalidConfig):
            sampling_bivariate(synthetic("random", 3, seed=0), M=0)

    @pytest.mark.slow
    def test_converges_to_exact(self):
        u = synthetic("random", 5, seed=3)
        exact_phi, exact_matrix = exact_explain(u)
        phi, matrix = sampling_bivariate(u, M=20000, seed=1)
        np.testing.assert_allclose(phi.phi, exact_phi.phi, atol=0.03)
        np.testing.assert_allclose(matrix.m, exact_matrix.m, atol=0.03)

    def test_and_all(self):
        u = synthetic("and_all", 3)
        exact_phi, exact_matrix = exact_explain(u)
        phi, matrix = sampling_bivariate(u, M=10000, seed=0)
        assert np.max(np.abs(phi.phi - exact_phi.phi)) <= 0.03
        assert np.max(np.abs(matrix.m - exact_matrix.m)) <= 0.03

    @pytest.mark.slow
    def test_error_bound_at_twenty_thousand(self):
        u = synthetic("random", 6, seed=0)
        exact_matrix = exact_explain(u)[1]
        matrix = sampling_bivariate(u, M=20000, seed=0)[1]
        assert np.max(np.abs(matrix.m - exact_matrix.m)) <= 0.02

    @pytest.mark.slow
    def test_error_shrinks_with_samples(self):
        u = synthetic("random", 6, seed=1)
        exact_m = exact_explain(u)[1].m

        def median_error(M):
            errors = [np.max(np.abs(sampling_bivariate(u, M=M, seed=s)[1].m - exact_m)) for s in range(10)]
            return float(np.median(errors))

        assert median_error(80000) < median_error(5000)
