"""Test Gaussian-process surrogate module."""

import numpy as np
import pytest

from exceptions import NumericalError
from models.surrogate import (
    JITTER_FLOOR,
    JITTER_MAX,
    Dataset,
    GpConfig,
    GpHyperparameters,
)
from operations.gp_surrogate import GaussianProcessSurrogate, stable_cholesky


class TestKernel:
    """Test the Matern-5/2 kernel."""

    @pytest.mark.parametrize(
        "r,expected",
        [(0.0, 1.0), (1.0, 0.523994)],
    )
    def test_kernel_values(self, r, expected):
        """
        Test kernel values at known distances.

        :param r: scaled distance
        :param expected: kernel value for unit signal variance
        """
        assert GaussianProcessSurrogate.kernel_matern52(r, 1.0) == pytest.approx(
            expected, abs=1e-6
        )

    def test_kernel_decays(self):
        """Test the kernel is negligible far away and monotone."""
        r = np.linspace(0.0, 40.0, 401)
        values = GaussianProcessSurrogate.kernel_matern52(r, 1.0)
        assert np.all(np.diff(values) <= 0.0)
        assert np.all(values[r > 30.0] < 1e-12)

    def test_kernel_scales_with_variance(self):
        """Test the signal variance is a multiplier."""
        assert GaussianProcessSurrogate.kernel_matern52(0.0, 3.5) == pytest.approx(3.5)


class TestLogMarginalLikelihood:
    """Test the log marginal likelihood."""

    @pytest.mark.parametrize("y,expected", [(0.0, -0.918939), (1.0, -1.418939)])
    def test_single_point(self, y, expected):
        """
        Test the closed form for one observation with unit kernel.

        :param y: observed value
        :param expected: log marginal likelihood
        """
        data = Dataset(points=[[0.5]], values=[y])
        hyper = GpHyperparameters(lengthscales=(1.0,), signal_variance=1.0)
        lml = GaussianProcessSurrogate.log_marginal_likelihood(data, hyper)
        assert lml == pytest.approx(expected, abs=1e-6)

    def test_gradient_matches_finite_differences(self, rng):
        """Test the analytic gradient against central differences."""
        data = Dataset(points=rng.random((8, 2)), values=rng.normal(size=8))
        theta = np.log([0.3, 0.6, 1.5])

        def lml(vector):
            return GaussianProcessSurrogate.log_marginal_likelihood(
                data, GpHyperparameters.from_log_vector(vector), 1e-6
            )

        _, gradient = GaussianProcessSurrogate.log_marginal_likelihood(
            data, GpHyperparameters.from_log_vector(theta), 1e-6, eval_gradient=True
        )
        step = 1e-6
        numeric = np.array(
            [
                (lml(theta + step * e) - lml(theta - step * e)) / (2 * step)
                for e in np.eye(len(theta))
            ]
        )
        np.testing.assert_allclose(gradient, numeric, rtol=1e-4, atol=1e-6)

    def test_log_vector_layout(self):
        """Test log lengthscales come first and the log variance last."""
        hyper = GpHyperparameters(lengthscales=(0.5, 2.0), signal_variance=1.0)
        vector = hyper.to_log_vector()
        np.testing.assert_allclose(vector, [np.log(0.5), np.log(2.0), 0.0])
        restored = GpHyperparameters.from_log_vector(vector)
        assert restored.lengthscales == pytest.approx(hyper.lengthscales)
        assert restored.signal_variance == pytest.approx(1.0)


class TestStableCholesky:
    """Test jitter escalation."""

    def test_semidefinite_matrix_factorizes(self):
        """Test a rank-deficient kernel matrix is factorized with bounded jitter."""
        matrix = np.ones((3, 3))
        chol, jitter = stable_cholesky(matrix, 0.0)
        assert JITTER_FLOOR <= jitter <= JITTER_MAX
        expected = matrix + jitter * np.eye(3)
        np.testing.assert_allclose(chol @ chol.T, expected, atol=1e-9)

    def test_indefinite_matrix_raises(self):
        """Test NumericalError once the maximum jitter is exhausted."""
        with pytest.raises(NumericalError):
            stable_cholesky(np.diag([1.0, -1.0]), JITTER_FLOOR)


class TestGaussianProcessSurrogate:
    """Test GaussianProcessSurrogate operations class."""

    def test_single_point_interpolation(self):
        """Test a single observation is reproduced with collapsed variance."""
        surrogate = GaussianProcessSurrogate(GpConfig())
        model = surrogate.fit(Dataset(points=[[0.5, 0.5]], values=[2.0]), seed=0)
        mean, std = surrogate.predict(model, np.array([0.5, 0.5]))
        assert mean == pytest.approx(2.0, abs=1e-6)
        assert std <= 1e-3

    def test_interpolates_training_points(self):
        """Test noiseless interpolation on random datasets."""
        surrogate = GaussianProcessSurrogate(GpConfig(fit_restarts=3))
        for seed in range(20):
            generator = np.random.default_rng(seed)
            data = Dataset(
                points=generator.random((10, 2)), values=generator.random(10)
            )
            model = surrogate.fit(data, seed=seed)
            mean, std = surrogate.predict(model, data.points)
            np.testing.assert_allclose(mean, data.values, atol=1e-6)
            assert np.all(std >= 0.0)

    def test_symmetric_points_predict_shared_value(self):
        """Test the mean at the cube center between two equal observations."""
        surrogate = GaussianProcessSurrogate(GpConfig())
        data = Dataset(points=[[0.25, 0.25], [0.75, 0.75]], values=[1.5, 1.5])
        model = surrogate.fit(data, seed=1)
        mean, _ = surrogate.predict(model, np.array([0.5, 0.5]))
        assert mean == pytest.approx(1.5, abs=1e-6)

    def test_fit_is_deterministic(self, rng):
        """Test repeated fits with one seed give identical hyperparameters."""
        data = Dataset(points=rng.random((12, 3)), values=rng.normal(size=12))
        surrogate = GaussianProcessSurrogate(GpConfig(fit_restarts=3))
        first = surrogate.fit(data, seed=5)
        second = surrogate.fit(data, seed=5)
        assert first.hyperparameters == second.hyperparameters
        assert first.log_marginal_likelihood == second.log_marginal_likelihood

    def test_uncertainty_grows_away_from_data(self):
        """Test the posterior std is larger far from the observations."""
        surrogate = GaussianProcessSurrogate(GpConfig())
        data = Dataset(points=[[0.0], [0.05], [0.1]], values=[1.0, 2.0, 3.0])
        model = surrogate.fit(data, seed=0)
        _, std = surrogate.predict(model, np.array([[0.05], [1.0]]))
        assert std[1] > std[0]

    def test_predict_batch_shapes(self, rng):
        """Test batch predictions return one value per point."""
        data = Dataset(points=rng.random((6, 2)), values=rng.normal(size=6))
        surrogate = GaussianProcessSurrogate(GpConfig(fit_restarts=1))
        model = surrogate.fit(data, seed=0)
        mean, std = surrogate.predict(model, rng.random((4, 2)))
        assert mean.shape == (4,) and std.shape == (4,)
