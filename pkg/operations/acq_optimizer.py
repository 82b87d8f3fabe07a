"""Acquisition optimizer module."""

from typing import Callable, Optional

import numpy as np

from models.search import SearchBudget, SearchSpace
from models.surrogate import PosteriorModel
from operations.acquisition import eval_bounds
from operations.gp_surrogate import GaussianProcessSurrogate

Utility = Callable[[np.ndarray], np.ndarray]


class AcquisitionOptimizer:
    """Random search followed by coordinate-wise local search."""

    def __init__(self, space: SearchSpace, budget: SearchBudget):
        """
        Inject class dependencies.

        :param space: search space
        :param budget: random/local search budget
        """
        self.space = space
        self.budget = budget

    def maximize(
        self,
        af: Utility,
        seed_points: Optional[np.ndarray],
        rng: np.random.Generator,
    ) -> tuple[np.ndarray, float]:
        """
        Maximize a batch-evaluatable utility over the space.

        Discrete spaces are enumerated. Continuous spaces evaluate uniform samples
        and the seed points, then run local search from the best candidates.
        Ties resolve to the first candidate in the order random samples, seed
        points, local search results.

        :param af: utility mapping ``(m, d)`` points to ``(m,)`` values
        :param seed_points: points always evaluated as candidates
        :param rng: random generator
        :return: best point and its utility
        """
        if self.space.kind == "discrete":
            table = self.space.candidates
            values = np.asarray(af(table), dtype=float)
            best = int(np.argmax(values))
            return table[best].copy(), float(values[best])

        lower, upper = self.space.lower, self.space.upper
        samples = rng.uniform(lower, upper, size=(self.budget.n_random, len(lower)))
        if seed_points is not None and len(seed_points):
            samples = np.vstack([samples, np.atleast_2d(seed_points)])
        values = np.asarray(af(samples), dtype=float)

        order = np.argsort(-values, kind="stable")[: self.budget.n_local_starts]
        local_points, local_values = self._local_search(
            af, samples[order], values[order], rng
        )

        candidates = np.vstack([samples, local_points])
        scores = np.concatenate([values, local_values])
        best = int(np.argmax(scores))
        return candidates[best].copy(), float(scores[best])

    def _local_search(
        self,
        af: Utility,
        starts: np.ndarray,
        start_values: np.ndarray,
        rng: np.random.Generator,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Gaussian coordinate moves from every start; step halves on failure."""
        lower, upper = self.space.lower, self.space.upper
        n_starts, dimension = starts.shape
        current, current_values = starts.copy(), start_values.copy()
        steps = np.tile(self.budget.step_scale * (upper - lower), (n_starts, 1))

        for _ in range(self.budget.local_steps):
            # one neighbour per (start, coordinate)
            noise = rng.normal(size=(n_starts, dimension)) * steps
            neighbours = np.repeat(current[:, None, :], dimension, axis=1)
            idx = np.arange(dimension)
            neighbours[:, idx, idx] += noise
            neighbours = np.clip(neighbours, lower, upper)

            neighbour_values = np.asarray(
                af(neighbours.reshape(-1, dimension)), dtype=float
            ).reshape(n_starts, dimension)
            best = np.argmax(neighbour_values, axis=1)
            best_values = neighbour_values[np.arange(n_starts), best]

            improved = best_values > current_values
            current[improved] = neighbours[improved, best[improved]]
            current_values[improved] = best_values[improved]
            steps[~improved] *= 0.5

        return current, current_values

    def minimize_lcb(
        self,
        model: PosteriorModel,
        coefficient: float,
        history_points: np.ndarray,
        rng: np.random.Generator,
    ) -> float:
        """
        Approximate minimum of the lower confidence bound over the space.

        History points are always candidates, so the result never exceeds the
        smallest LCB among them.

        :param model: fitted posterior
        :param coefficient: confidence-bound coefficient
        :param history_points: evaluated points
        :param rng: random generator
        :return: minimum LCB found
        """

        def negative_lcb(x: np.ndarray) -> np.ndarray:
            mean, std = GaussianProcessSurrogate.predict(model, x)
            _, lcb = eval_bounds(mean, std, coefficient)
            return -np.asarray(lcb)

        _, value = self.maximize(negative_lcb, history_points, rng)
        if self.space.kind == "discrete" and len(history_points):
            value = max(value, float(np.max(negative_lcb(history_points))))
        return -value
