"""Bayesian optimization loop module."""

import math
import time
import warnings
from typing import Callable, Optional

import numpy as np
from loguru import logger
from scipy.stats import qmc

from exceptions import DomainError
from models.acquisition import AcquisitionSpec, ConfidenceCoefficient, HedgeState
from models.controller import ControllerState
from models.run import (
    InitDesign,
    ObservationHistory,
    RunConfig,
    RunTrace,
    TraceRecord,
    log10_regret,
)
from models.search import SearchSpace
from models.surrogate import PosteriorModel
from operations.acq_optimizer import AcquisitionOptimizer
from operations.acquisition import (
    AcquisitionFunction,
    beta_t,
    hedge_init,
    hedge_select,
    hedge_update,
)
from operations.gp_surrogate import GaussianProcessSurrogate
from operations.objectives import Objective
from operations.sawei_controller import SaweiController, schedule_alpha


def initial_design(
    space: SearchSpace, design: InitDesign, rng: np.random.Generator
) -> np.ndarray:
    """
    Points evaluated before the surrogate takes over.

    Continuous spaces use scrambled Sobol', Latin hypercube or uniform sampling.
    Discrete spaces draw distinct table rows (all rows if the table is smaller).

    :param space: search space
    :param design: design kind and size
    :param rng: random generator
    :return: ``(size, d)`` points
    """
    if space.kind == "discrete":
        table = space.candidates
        size = min(design.size, len(table))
        rows = rng.choice(len(table), size=size, replace=False)
        return table[rows].copy()

    dimension = space.dimension
    if design.kind == "sobol":
        sampler = qmc.Sobol(dimension, scramble=True, seed=rng)
        with warnings.catch_warnings():
            # design sizes need not be powers of two
            warnings.simplefilter("ignore", UserWarning)
            unit = sampler.random(design.size)
    elif design.kind == "lhs":
        unit = qmc.LatinHypercube(dimension, seed=rng).random(design.size)
    else:
        unit = rng.random((design.size, dimension))
    return qmc.scale(unit, space.lower, space.upper)


class BayesianOptimizer:
    """Runs one sequential BO experiment on one objective."""

    def __init__(self, objective: Objective, config: RunConfig):
        """
        Inject class dependencies.

        :param objective: objective to minimize
        :param config: run configuration
        """
        self.objective = objective
        self.config = config
        self.space = objective.search_space
        self.surrogate = GaussianProcessSurrogate(config.gp)
        self.optimizer = AcquisitionOptimizer(self.space, config.search)
        self.controller = SaweiController(
            ControllerState.from_settings(config.controller)
        )
        streams = np.random.SeedSequence(config.seed).spawn(4)
        self._design_rng, self._acq_rng, self._ubr_rng, self._hedge_rng = [
            np.random.default_rng(s) for s in streams
        ]
        self._fit_calls = 0
        self._hedge: Optional[HedgeState] = None
        self._nominees: Optional[np.ndarray] = None

    @staticmethod
    def update_incumbent(history: ObservationHistory) -> tuple[np.ndarray, float]:
        """
        First-occurrence argmin of the history, stored as its incumbent.

        :param history: nonempty history
        :return: incumbent point and value
        """
        if not len(history):
            raise ValueError("history is empty")
        history.incumbent_index = int(np.argmin(history.values))
        history.f_min = history.values[history.incumbent_index]
        return history.incumbent, history.f_min

    def _fit(self, history: ObservationHistory) -> PosteriorModel:
        self._fit_calls += 1
        return self.surrogate.fit(
            history.to_dataset(), seed=self.config.seed * 100003 + self._fit_calls
        )

    def _regret(self, f_min: float) -> tuple[float, float]:
        regret = max(f_min - self.objective.f_opt, 0.0)
        return regret, log10_regret(regret, exact_zero=self.objective.exact_optimum)

    def _exclude_evaluated(
        self, utility: Callable[[np.ndarray], np.ndarray], history: ObservationHistory
    ) -> Callable[[np.ndarray], np.ndarray]:
        """Mask evaluated table rows while unevaluated ones remain."""
        if self.space.kind != "discrete":
            return utility
        seen = {tuple(p) for p in history.points}
        if len(seen) >= len(self.space.candidates):
            return utility

        def masked(x: np.ndarray) -> np.ndarray:
            values = np.asarray(utility(x), dtype=float)
            taken = np.array([tuple(row) in seen for row in np.atleast_2d(x)])
            return np.where(taken, -np.inf, values)

        return masked

    def _propose(
        self,
        spec: AcquisitionSpec,
        model: PosteriorModel,
        history: ObservationHistory,
        coefficient: float,
    ) -> tuple[np.ndarray, str]:
        """Maximize the iteration's acquisition function."""
        if spec.variant != "portfolio":
            utility = AcquisitionFunction(spec, model, history.f_min, coefficient)
            point, _ = self.optimizer.maximize(
                self._exclude_evaluated(utility, history),
                history.points_array,
                self._acq_rng,
            )
            return point, spec.label

        if self._hedge is None:
            self._hedge = hedge_init(spec)
        elif self._nominees is not None:
            mean, _ = GaussianProcessSurrogate.predict(model, self._nominees)
            self._hedge = hedge_update(self._hedge, -np.asarray(mean))

        per_arm = self.config.search.model_copy(
            update={
                "n_random": max(1, self.config.search.n_random // len(spec.arms))
            }
        )
        arm_optimizer = AcquisitionOptimizer(self.space, per_arm)
        nominees = []
        for arm in spec.arms:
            utility = AcquisitionFunction(arm, model, history.f_min, coefficient)
            point, _ = arm_optimizer.maximize(
                self._exclude_evaluated(utility, history),
                history.points_array,
                self._acq_rng,
            )
            nominees.append(point)
        self._nominees = np.vstack(nominees)
        chosen = hedge_select(self._hedge, self._hedge_rng)
        return self._nominees[chosen].copy(), f"Portfolio:{spec.arms[chosen].label}"

    def run(self, instance: Optional[int] = None) -> RunTrace:
        """
        Initial design, then ``bo_budget`` surrogate-guided evaluations.

        :param instance: instance id recorded in the trace
        :return: complete trace with ``init size + bo_budget`` records, the init
            size capped at the number of rows of a candidate table
        :raises FitError: if the surrogate cannot be fitted
        :raises DomainError: if a proposal lies outside the search space
        """
        config = self.config
        policy = config.schedule
        state = self.controller.state
        history = ObservationHistory()
        trace = RunTrace(
            objective_id=self.objective.name,
            schedule=policy.name,
            seed=config.seed,
            instance=instance,
            f_opt=self.objective.f_opt,
        )
        logger.info(
            f"Run {self.objective.name} / {policy.name} / seed {config.seed} started"
        )

        for point in initial_design(self.space, config.init_design, self._design_rng):
            started = time.perf_counter()
            value = float(self.objective(point))
            history.add(point, value)
            regret, log_regret = self._regret(history.f_min)
            trace.records.append(
                TraceRecord(
                    iteration=len(history),
                    phase="init",
                    point=list(point),
                    y=value,
                    incumbent=history.f_min,
                    regret=regret,
                    log10_regret=log_regret,
                    wall_time=time.perf_counter() - started,
                )
            )

        model = self._fit(history)
        dimension = self.space.dimension
        for t in range(config.bo_budget):
            started = time.perf_counter()
            spec = schedule_alpha(policy, t, config.bo_budget, state.alpha)
            coefficient = beta_t(
                ConfidenceCoefficient(d=dimension, t=t + 1, beta=config.beta)
            )
            point, label = self._propose(spec, model, history, coefficient)
            if not self.space.contains(point):
                raise DomainError(f"proposal {point.tolist()} lies outside the space")

            # attitude comes from the posterior that proposed the point
            mean, std = GaussianProcessSurrogate.predict(model, point)
            attitude = SaweiController.attitude_terms(
                mean, std, history.f_min, state.attitude_exploit_term
            )

            value = float(self.objective(point))
            changed = history.add(point, value)
            self.controller.record_attitude(
                attitude.a_explore, attitude.a_exploit, changed
            )

            model = self._fit(history)
            ubr = SaweiController.compute_ubr(
                model, history, self.optimizer, coefficient, self._ubr_rng
            )
            step = self.controller.step(ubr, adaptive=policy.kind == "sawei")

            regret, log_regret = self._regret(history.f_min)
            trace.records.append(
                TraceRecord(
                    iteration=len(history),
                    phase="bo",
                    point=list(point),
                    y=value,
                    incumbent=history.f_min,
                    regret=regret,
                    log10_regret=log_regret,
                    ubr_raw=step.ubr_raw,
                    ubr_smoothed=step.ubr_smoothed,
                    gradient=step.gradient,
                    max_abs_gradient=step.max_abs_gradient,
                    converged=step.converged,
                    alpha=spec.alpha if spec.variant == "wei" else math.nan,
                    alpha_after=step.alpha if step.adjusted else math.nan,
                    a_explore=attitude.a_explore,
                    a_exploit=attitude.a_exploit,
                    adjusted=step.adjusted,
                    acquisition=label,
                    wall_time=time.perf_counter() - started,
                )
            )
            logger.debug(
                f"t={t + 1} {label} y={value:.6g} f_min={history.f_min:.6g} "
                f"ubr={step.ubr_smoothed:.4g}"
            )

        logger.info(
            f"Run {self.objective.name} / {policy.name} / seed {config.seed} "
            f"finished with regret {trace.records[-1].regret:.4g}"
        )
        return trace


def run_bo(
    objective: Objective, config: RunConfig, instance: Optional[int] = None
) -> RunTrace:
    """
    Execute one BO run.

    :param objective: objective to minimize
    :param config: run configuration
    :param instance: instance id recorded in the trace
    :return: run trace
    """
    return BayesianOptimizer(objective, config).run(instance)
