"""Gaussian-process surrogate module."""

import math
from typing import Union

import numpy as np
from loguru import logger
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

from exceptions import FitError, NumericalError
from models.surrogate import (
    JITTER_FLOOR,
    JITTER_MAX,
    Dataset,
    GpConfig,
    GpHyperparameters,
    PosteriorModel,
)

SQRT5 = math.sqrt(5.0)
LOG_2PI = math.log(2.0 * math.pi)
# returned to the hyperparameter optimizer when the kernel matrix is singular
_LML_PENALTY = 1e25


def stable_cholesky(
    matrix: np.ndarray, noise_variance: float
) -> tuple[np.ndarray, float]:
    """
    Cholesky factor of ``matrix + jitter * I`` with jitter escalation.

    The jitter starts at ``max(noise_variance, JITTER_FLOOR)`` and grows x10 per
    failure up to ``JITTER_MAX``.

    :param matrix: symmetric kernel matrix without noise
    :param noise_variance: requested diagonal noise
    :return: lower Cholesky factor and the jitter actually used
    :raises NumericalError: if the factorization fails at the maximum jitter
    """
    jitter = max(noise_variance, JITTER_FLOOR)
    eye = np.eye(len(matrix))
    while True:
        try:
            return cholesky(matrix + jitter * eye, lower=True), jitter
        except LinAlgError as exc:
            if jitter >= JITTER_MAX:
                raise NumericalError(
                    f"Cholesky failed at maximum jitter {jitter:g}"
                ) from exc
            jitter = min(jitter * 10.0, JITTER_MAX)


class GaussianProcessSurrogate:
    """Matern-5/2 ARD Gaussian-process regression with a constant mean."""

    def __init__(self, config: GpConfig):
        """
        Inject class dependencies.

        :param config: GP configuration
        """
        self.config = config

    @staticmethod
    def kernel_matern52(
        r: Union[float, np.ndarray], signal_variance: float
    ) -> Union[float, np.ndarray]:
        """
        Matern-5/2 kernel on ARD-scaled distances.

        :param r: nonnegative scaled distance(s)
        :param signal_variance: kernel amplitude
        :return: kernel value(s)
        """
        sr = SQRT5 * np.asarray(r, dtype=float)
        value = signal_variance * (1.0 + sr + sr**2 / 3.0) * np.exp(-sr)
        return float(value) if np.ndim(value) == 0 else value

    @staticmethod
    def _scaled_distance(
        a: np.ndarray, b: np.ndarray, lengthscales: np.ndarray
    ) -> np.ndarray:
        return cdist(a / lengthscales, b / lengthscales)

    @staticmethod
    def log_marginal_likelihood(
        data: Dataset,
        hyperparameters: GpHyperparameters,
        noise_variance: float = JITTER_FLOOR,
        eval_gradient: bool = False,
    ) -> Union[float, tuple[float, np.ndarray]]:
        """
        Log marginal likelihood of the values under a zero-mean GP.

        Values are used as given; :meth:`fit` passes standardized values.

        :param data: points and values
        :param hyperparameters: kernel hyperparameters
        :param noise_variance: diagonal noise, floored at the jitter floor
        :param eval_gradient: also return the gradient w.r.t.
            ``[log l_1, ..., log l_d, log s2]``
        :return: log marginal likelihood (and gradient)
        :raises NumericalError: if the Cholesky factorization fails
        """
        x, y = data.points, data.values
        n = len(y)
        lengthscales = np.asarray(hyperparameters.lengthscales)
        variance = hyperparameters.signal_variance

        r = GaussianProcessSurrogate._scaled_distance(x, x, lengthscales)
        kernel = GaussianProcessSurrogate.kernel_matern52(r, variance)
        chol, _ = stable_cholesky(kernel, noise_variance)
        alpha = cho_solve((chol, True), y)

        lml = -0.5 * y @ alpha - np.log(np.diag(chol)).sum() - 0.5 * n * LOG_2PI
        if not eval_gradient:
            return float(lml)

        inner = np.outer(alpha, alpha) - cho_solve((chol, True), np.eye(n))
        sr = SQRT5 * r
        radial = variance * (5.0 / 3.0) * (1.0 + sr) * np.exp(-sr)
        gradient = np.empty(len(lengthscales) + 1)
        for k, scale in enumerate(lengthscales):
            diff_sq = ((x[:, k, None] - x[None, :, k]) / scale) ** 2
            gradient[k] = 0.5 * np.sum(inner * radial * diff_sq)
        gradient[-1] = 0.5 * np.sum(inner * kernel)
        return float(lml), gradient

    def fit(self, data: Dataset, seed: int) -> PosteriorModel:
        """
        Fit hyperparameters by multi-start L-BFGS-B on the log marginal likelihood.

        :param data: observed points (unit cube) and raw values
        :param seed: seed of the multi-start sampler
        :return: fitted posterior
        :raises FitError: if no start yields a positive definite kernel matrix
        """
        y_mean = float(np.mean(data.values))
        y_std = float(np.std(data.values))
        if len(data.values) < 2 or y_std < 1e-12:
            y_std = 1.0
        standardized = Dataset(
            points=data.points, values=(data.values - y_mean) / y_std
        )

        dimension = data.dimension
        log_bounds = [np.log(self.config.lengthscale_bounds)] * dimension + [
            np.log(self.config.variance_bounds)
        ]
        lower = np.array([b[0] for b in log_bounds])
        upper = np.array([b[1] for b in log_bounds])

        rng = np.random.default_rng(seed)
        default_start = np.clip(
            GpHyperparameters(
                lengthscales=(0.5,) * dimension, signal_variance=1.0
            ).to_log_vector(),
            lower,
            upper,
        )
        starts = [default_start] + [
            rng.uniform(lower, upper) for _ in range(self.config.fit_restarts - 1)
        ]

        def objective(theta: np.ndarray) -> tuple[float, np.ndarray]:
            try:
                lml, grad = self.log_marginal_likelihood(
                    standardized,
                    GpHyperparameters.from_log_vector(theta),
                    self.config.noise_variance,
                    eval_gradient=True,
                )
            except NumericalError:
                return _LML_PENALTY, np.zeros_like(theta)
            return -lml, -grad

        best_theta, best_value = None, math.inf
        for start in starts:
            start_value, _ = objective(start)
            result = minimize(
                objective,
                start,
                jac=True,
                method="L-BFGS-B",
                bounds=list(zip(lower, upper)),
            )
            theta, value = result.x, float(result.fun)
            if not np.isfinite(value) or value > start_value:
                theta, value = start, start_value
            if value < best_value:
                best_theta, best_value = theta, value

        if best_theta is None or best_value >= _LML_PENALTY:
            raise FitError("kernel matrix is singular for every hyperparameter start")

        hyperparameters = GpHyperparameters.from_log_vector(best_theta)
        lengthscales = np.asarray(hyperparameters.lengthscales)
        r = self._scaled_distance(data.points, data.points, lengthscales)
        kernel = self.kernel_matern52(r, hyperparameters.signal_variance)
        try:
            chol, jitter = stable_cholesky(kernel, self.config.noise_variance)
        except NumericalError as exc:
            raise FitError(str(exc)) from exc
        if jitter > max(self.config.noise_variance, JITTER_FLOOR):
            logger.warning(f"Kernel jitter escalated to {jitter:g}")

        return PosteriorModel(
            hyperparameters=hyperparameters,
            noise_variance=jitter,
            points=data.points.copy(),
            cholesky=chol,
            alpha=cho_solve((chol, True), standardized.values),
            y_mean=y_mean,
            y_std=y_std,
            log_marginal_likelihood=-best_value,
        )

    @staticmethod
    def predict(
        model: PosteriorModel, x: np.ndarray
    ) -> tuple[Union[float, np.ndarray], Union[float, np.ndarray]]:
        """
        Posterior mean and standard deviation.

        :param model: fitted posterior
        :param x: a point ``(d,)`` or a batch ``(m, d)`` in the unit cube
        :return: de-standardized mean and nonnegative std (floats for one point)
        """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        batch = np.atleast_2d(x)

        hyper = model.hyperparameters
        lengthscales = np.asarray(hyper.lengthscales)
        r = GaussianProcessSurrogate._scaled_distance(batch, model.points, lengthscales)
        cross = GaussianProcessSurrogate.kernel_matern52(r, hyper.signal_variance)

        mean = cross @ model.alpha
        v = solve_triangular(model.cholesky, cross.T, lower=True)
        variance = np.maximum(hyper.signal_variance - np.sum(v**2, axis=0), 0.0)

        mean = model.y_mean + model.y_std * mean
        std = model.y_std * np.sqrt(variance)
        if single:
            return float(mean[0]), float(std[0])
        return mean, std
