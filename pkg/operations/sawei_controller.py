"""SAWEI controller module."""

import math
from typing import Sequence

import numpy as np
from loguru import logger
from scipy.stats import norm

from models.acquisition import AcquisitionSpec
from models.controller import (
    AttitudeExploitTerm,
    AttitudeRecord,
    ControllerState,
    ControllerStep,
    SchedulePolicy,
)
from models.run import ObservationHistory
from models.surrogate import PosteriorModel
from operations.acq_optimizer import AcquisitionOptimizer
from operations.acquisition import (
    SIGMA_FLOOR,
    default_portfolio_spec,
    eval_bounds,
)
from operations.gp_surrogate import GaussianProcessSurrogate
from operations.statistics import interquartile_mean


class SaweiController:
    """Tracks UBR convergence and search attitude, and adjusts the WEI weight."""

    def __init__(self, state: ControllerState):
        """
        Inject class dependencies.

        :param state: controller state owned by this run
        """
        self.state = state

    @staticmethod
    def compute_ubr(
        model: PosteriorModel,
        history: ObservationHistory,
        optimizer: AcquisitionOptimizer,
        coefficient: float,
        rng: np.random.Generator,
    ) -> float:
        """
        Upper bound regret: min UCB over the history minus min LCB over the space.

        :param model: posterior fitted on ``history``
        :param history: evaluated points
        :param optimizer: acquisition optimizer of the run's space
        :param coefficient: confidence-bound coefficient
        :param rng: random generator
        :return: regret estimate (nonnegative up to rounding)
        """
        points = history.points_array
        mean, std = GaussianProcessSurrogate.predict(model, points)
        ucb, _ = eval_bounds(mean, std, coefficient)
        lcb_min = optimizer.minimize_lcb(model, coefficient, points, rng)
        return float(np.min(ucb) - lcb_min)

    @staticmethod
    def smooth_iqm(series: Sequence[float], window: int = 7) -> float:
        """
        Moving interquartile mean of the last ``window`` values.

        :param series: nonempty series
        :param window: window size
        :return: smoothed value
        """
        if not len(series):
            raise ValueError("series must be nonempty")
        return interquartile_mean(list(series)[-window:])

    def observe_ubr(self, ubr: float) -> float:
        """
        Append a raw UBR value and its smoothed counterpart.

        :param ubr: raw UBR of this iteration
        :return: smoothed UBR
        """
        self.state.ubr_raw.append(float(ubr))
        smoothed = self.smooth_iqm(self.state.ubr_raw, self.state.window)
        self.state.ubr_smoothed.append(smoothed)
        return smoothed

    def gradient_converged(self) -> bool:
        """
        Whether the smoothed UBR gradient is within the tolerance band.

        The n-step finite difference ``g`` updates the running maximum of ``|g|``
        before the comparison ``|g| <= epsilon * max|g|``.

        :return: convergence signal; false until ``horizon + 1`` values exist
        """
        smoothed = self.state.ubr_smoothed
        horizon = self.state.horizon
        if len(smoothed) < horizon + 1:
            self.state.last_gradient = math.nan
            return False
        gradient = smoothed[-1] - smoothed[-1 - horizon]
        self.state.last_gradient = gradient
        self.state.max_abs_gradient = max(self.state.max_abs_gradient, abs(gradient))
        return abs(gradient) <= self.state.epsilon * self.state.max_abs_gradient

    def record_attitude(
        self, a_explore: float, a_exploit: float, incumbent_changed: bool
    ) -> None:
        """
        Accumulate the attitude terms according to the tracking mode.

        :param a_explore: exploration term at the proposed point
        :param a_exploit: exploitation term at the proposed point
        :param incumbent_changed: whether this evaluation improved the incumbent
        """
        state = self.state
        if state.attitude_mode == "last":
            state.explore_acc, state.exploit_acc = a_explore, a_exploit
            return
        if state.attitude_mode == "inc_change" and incumbent_changed:
            state.explore_acc, state.exploit_acc = 0.0, 0.0
        state.explore_acc += a_explore
        state.exploit_acc += a_exploit

    def adjust_alpha(self) -> float:
        """
        Move alpha against the dominant attitude by ``delta_alpha``.

        Exploration-dominant (strictly) increases alpha; otherwise it decreases.

        :return: new alpha
        """
        state = self.state
        if state.explore_acc > state.exploit_acc:
            state.alpha = min(1.0, state.alpha + state.delta_alpha)
        else:
            state.alpha = max(0.0, state.alpha - state.delta_alpha)
        if state.attitude_mode == "last_adjust":
            state.explore_acc, state.exploit_acc = 0.0, 0.0
        return state.alpha

    @staticmethod
    def attitude_terms(
        mean: float, std: float, f_min: float, mode: AttitudeExploitTerm = "pi"
    ) -> AttitudeRecord:
        """
        Exploration and exploitation terms at a proposed point.

        :param mean: posterior mean at the point
        :param std: posterior std at the point
        :param f_min: incumbent value
        :param mode: ``pi`` uses cdf(z), ``wei_term`` uses z * s * cdf(z)
        :return: attitude record
        """
        if std < SIGMA_FLOOR:
            exploit = (0.0 if mean > f_min else 1.0) if mode == "pi" else 0.0
            return AttitudeRecord(a_explore=0.0, a_exploit=exploit)
        z = (f_min - mean) / std
        cdf = float(norm.cdf(z))
        exploit = cdf if mode == "pi" else z * std * cdf
        return AttitudeRecord(a_explore=std * float(norm.pdf(z)), a_exploit=exploit)

    def step(self, ubr: float, adaptive: bool) -> ControllerStep:
        """
        Observe a UBR value, check convergence and possibly adjust alpha.

        :param ubr: raw UBR of this iteration
        :param adaptive: whether the schedule lets the controller adjust alpha
        :return: telemetry of the iteration
        """
        smoothed = self.observe_ubr(ubr)
        converged = self.gradient_converged()
        adjusted = False
        if converged and adaptive and self.state.adjust_enabled:
            before = self.state.alpha
            self.adjust_alpha()
            adjusted = True
            logger.debug(f"alpha adjusted {before:g} -> {self.state.alpha:g}")
        return ControllerStep(
            ubr_raw=ubr,
            ubr_smoothed=smoothed,
            gradient=self.state.last_gradient,
            max_abs_gradient=self.state.max_abs_gradient,
            converged=converged,
            adjusted=adjusted,
            alpha=self.state.alpha,
        )


def schedule_alpha(
    policy: SchedulePolicy, t: int, total: int, current_alpha: float = 0.5
) -> AcquisitionSpec:
    """
    Acquisition spec of BO iteration ``t`` under a schedule.

    :param policy: schedule policy
    :param t: 0-based BO iteration
    :param total: BO budget
    :param current_alpha: controller alpha, used by SAWEI
    :return: acquisition spec
    """
    if not 0 <= t < total:
        raise ValueError(f"iteration {t} outside [0, {total})")
    kind = policy.kind
    if kind == "sawei":
        return AcquisitionSpec(variant="wei", alpha=current_alpha)
    if kind == "static":
        return AcquisitionSpec(variant="wei", alpha=policy.alpha)
    if kind == "steps":
        segment = min(t * policy.n_steps // total, policy.n_steps - 1)
        if policy.n_steps == 1:
            return AcquisitionSpec(variant="wei", alpha=policy.alpha_from)
        share = segment / (policy.n_steps - 1)
        alpha = policy.alpha_from + (policy.alpha_to - policy.alpha_from) * share
        return AcquisitionSpec(variant="wei", alpha=alpha)
    if kind == "switch_ei_pi":
        switch = math.floor(policy.fraction * total)
        return AcquisitionSpec(variant="ei" if t < switch else "pi")
    if kind == "pulse":
        return AcquisitionSpec(variant="wei", alpha=policy.cycle[t % len(policy.cycle)])
    if kind == "portfolio":
        return default_portfolio_spec()
    return AcquisitionSpec(variant=kind)
