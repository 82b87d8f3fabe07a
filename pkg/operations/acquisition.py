"""Acquisition functions module."""

import math
from typing import Union

import numpy as np
from scipy.special import softmax
from scipy.stats import norm

from exceptions import DomainError
from models.acquisition import AcquisitionSpec, ConfidenceCoefficient, HedgeState
from models.surrogate import PosteriorModel
from operations.gp_surrogate import GaussianProcessSurrogate

SIGMA_FLOOR = 1e-12

ArrayLike = Union[float, np.ndarray]


def _out(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


def standard_normal(z: ArrayLike) -> tuple[ArrayLike, ArrayLike]:
    """
    Standard normal density and distribution function.

    :param z: finite argument(s)
    :return: ``(pdf, cdf)``
    """
    return _out(norm.pdf(z)), _out(norm.cdf(z))


def _standardized_improvement(
    mean: ArrayLike, std: ArrayLike, f_min: float, xi: float = 0.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``z``, the degenerate mask and the target value as arrays."""
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    target = f_min - xi * abs(f_min)
    degenerate = std < SIGMA_FLOOR
    safe_std = np.where(degenerate, 1.0, std)
    z = np.where(degenerate, 0.0, (target - mean) / safe_std)
    return z, degenerate, np.asarray(target)


def wei_terms(
    mean: ArrayLike, std: ArrayLike, f_min: float, xi: float = 0.0
) -> tuple[ArrayLike, ArrayLike]:
    """
    Exploitation and exploration summands of weighted expected improvement.

    :param mean: posterior mean(s)
    :param std: posterior std(s)
    :param f_min: incumbent value
    :param xi: relative improvement offset
    :return: ``(z * s * cdf(z), s * pdf(z))``, both zero where std < SIGMA_FLOOR
    """
    z, degenerate, _ = _standardized_improvement(mean, std, f_min, xi)
    std = np.asarray(std, dtype=float)
    pdf, cdf = norm.pdf(z), norm.cdf(z)
    exploit = np.where(degenerate, 0.0, z * std * cdf)
    explore = np.where(degenerate, 0.0, std * pdf)
    return _out(exploit), _out(explore)


def eval_wei(mean: ArrayLike, std: ArrayLike, f_min: float, alpha: float) -> ArrayLike:
    """
    Weighted expected improvement.

    :param mean: posterior mean(s)
    :param std: posterior std(s)
    :param f_min: incumbent value
    :param alpha: weight of the exploitation summand in [0, 1]
    :return: ``alpha * exploit + (1 - alpha) * explore``
    """
    exploit, explore = wei_terms(mean, std, f_min)
    return _out(alpha * np.asarray(exploit) + (1.0 - alpha) * np.asarray(explore))


def eval_ei(
    mean: ArrayLike, std: ArrayLike, f_min: float, xi: float = 0.0
) -> ArrayLike:
    """
    Expected improvement ``s * (z * cdf(z) + pdf(z))``.

    :param mean: posterior mean(s)
    :param std: posterior std(s)
    :param f_min: incumbent value
    :param xi: relative improvement offset
    :return: nonnegative expected improvement
    """
    exploit, explore = wei_terms(mean, std, f_min, xi)
    value = np.maximum(np.asarray(exploit) + np.asarray(explore), 0.0)
    return _out(value)


def eval_pi(
    mean: ArrayLike, std: ArrayLike, f_min: float, xi: float = 0.0
) -> ArrayLike:
    """
    Probability of improvement ``cdf(z)``; a step function where std < SIGMA_FLOOR.

    :param mean: posterior mean(s)
    :param std: posterior std(s)
    :param f_min: incumbent value
    :param xi: relative improvement offset
    :return: probability in [0, 1]
    """
    z, degenerate, target = _standardized_improvement(mean, std, f_min, xi)
    step = np.where(np.asarray(mean, dtype=float) > target, 0.0, 1.0)
    return _out(np.where(degenerate, step, norm.cdf(z)))


def beta_t(coefficient: ConfidenceCoefficient) -> float:
    """
    Confidence-bound coefficient ``2 ln(d t^2 / beta)``.

    :param coefficient: dimension, iteration and beta
    :return: nonnegative coefficient
    :raises DomainError: if ``d t^2 / beta < 1``
    """
    ratio = coefficient.d * coefficient.t**2 / coefficient.beta
    if ratio < 1.0:
        raise DomainError(f"d * t^2 / beta = {ratio:g} < 1")
    return 2.0 * math.log(ratio)


def eval_bounds(
    mean: ArrayLike, std: ArrayLike, coefficient: float
) -> tuple[ArrayLike, ArrayLike]:
    """
    Upper and lower confidence bounds.

    :param mean: posterior mean(s)
    :param std: posterior std(s)
    :param coefficient: nonnegative multiplier of std
    :return: ``(mean + c * std, mean - c * std)``
    """
    mean = np.asarray(mean, dtype=float)
    width = coefficient * np.asarray(std, dtype=float)
    return _out(mean + width), _out(mean - width)


class AcquisitionFunction:
    """Utility to maximize, built from a spec and a fitted posterior."""

    def __init__(
        self,
        spec: AcquisitionSpec,
        model: PosteriorModel,
        f_min: float,
        coefficient: float,
    ):
        """
        Inject class dependencies.

        :param spec: acquisition spec (not a portfolio)
        :param model: fitted posterior
        :param f_min: incumbent value
        :param coefficient: beta_t of the iteration, used when the spec has none
        """
        if spec.variant == "portfolio":
            raise ValueError("portfolio specs are resolved arm by arm")
        self.spec = spec
        self.model = model
        self.f_min = f_min
        self.coefficient = (
            coefficient if spec.coefficient is None else spec.coefficient
        )

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """
        Evaluate the utility on a batch.

        :param x: ``(m, d)`` points
        :return: ``(m,)`` utilities
        """
        mean, std = GaussianProcessSurrogate.predict(self.model, np.atleast_2d(x))
        variant = self.spec.variant
        if variant == "wei":
            return eval_wei(mean, std, self.f_min, self.spec.alpha)
        if variant == "ei":
            return eval_ei(mean, std, self.f_min, self.spec.xi)
        if variant == "pi":
            return eval_pi(mean, std, self.f_min, self.spec.xi)
        _, lcb = eval_bounds(mean, std, self.coefficient)
        return -np.asarray(lcb)


def default_portfolio_arms() -> list[AcquisitionSpec]:
    """Nine arms: EI and PI with offsets {0, 0.01, 0.1}, LCB with {0.1, 1, 2}."""
    offsets = [0.0, 0.01, 0.1]
    arms = [AcquisitionSpec(variant="ei", xi=xi) for xi in offsets]
    arms += [AcquisitionSpec(variant="pi", xi=xi) for xi in offsets]
    arms += [AcquisitionSpec(variant="lcb", coefficient=c) for c in (0.1, 1.0, 2.0)]
    return arms


def default_portfolio_spec(eta: float = 1.0) -> AcquisitionSpec:
    """Portfolio spec over :func:`default_portfolio_arms`."""
    return AcquisitionSpec(variant="portfolio", arms=default_portfolio_arms(), eta=eta)


def hedge_init(spec: AcquisitionSpec) -> HedgeState:
    """
    Zero-gain Hedge state for a portfolio spec.

    :param spec: portfolio spec
    :return: fresh state
    """
    return HedgeState(arms=spec.arms, gains=[0.0] * len(spec.arms), eta=spec.eta)


def hedge_probabilities(state: HedgeState) -> np.ndarray:
    """
    Arm probabilities ``softmax(eta * gains)``.

    :param state: Hedge state
    :return: probabilities summing to one
    """
    return softmax(state.eta * np.asarray(state.gains))


def hedge_select(state: HedgeState, rng: np.random.Generator) -> int:
    """
    Sample an arm index from the softmax of the gains.

    :param state: Hedge state
    :param rng: random generator
    :return: arm index
    """
    cumulative = np.cumsum(hedge_probabilities(state))
    draw = rng.random()
    return int(min(np.searchsorted(cumulative, draw, side="left"), len(cumulative) - 1))


def hedge_update(state: HedgeState, rewards: np.ndarray) -> HedgeState:
    """
    Add one reward per arm to the gains.

    :param state: Hedge state
    :param rewards: finite rewards, one per arm
    :return: updated state
    """
    rewards = np.asarray(rewards, dtype=float)
    if rewards.shape != (len(state.gains),) or not np.all(np.isfinite(rewards)):
        raise ValueError("need one finite reward per arm")
    gains = [float(g + r) for g, r in zip(state.gains, rewards)]
    return state.model_copy(update={"gains": gains})
