"""Gaussian segment costs, penalties and detector configuration.

All costs are Gaussian negative log-likelihoods with known scale and
include the ``0.5 * log(2 * pi * sigma**2)`` constant per point, so costs
computed under different scales (background vs nuisance) are comparable.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from numba import njit

from .errors import ConfigError, NonPositiveSigma, TooShort
from .series import TimeSeries

LOG_2PI = math.log(2.0 * math.pi)


class Pruning(enum.Enum):
    NONE = "none"
    GLOBAL = "global"
    WINDOW = "window"


class PenaltyScale(enum.Enum):
    """Units in which ``beta``, ``beta_prime`` and the pruning threshold are given.

    ``NLL`` adds penalties to the negative log-likelihood as they are.
    ``DEVIANCE`` treats them as penalties on ``-2 log L``, so they enter the
    NLL objective halved. The ``3 log(n)^1.1`` simulation penalty is on the
    deviance scale.
    """

    NLL = "nll"
    DEVIANCE = "deviance"


@dataclass(frozen=True)
class CostParams:
    """Parameters shared by both detectors.

    ``mu0`` is the background mean; it may be left as ``None`` for the
    epidemic detector, which estimates it. ``sigma_n`` and ``beta_prime``
    default to ``sigma0`` and ``beta``. The nuisance-start pruning threshold
    is ``alpha * log(n) ** (1 + delta)``; ``window`` is the width used by
    ``Pruning.WINDOW``. ``penalty_scale`` sets the units of the penalties
    and threshold; detectors use the ``*_eff`` values, which are in NLL
    units.
    """

    sigma0: float = 1.0
    beta: float = 1.0
    max_seg_len: int = 1
    mu0: float | None = None
    sigma_n: float | None = None
    beta_prime: float | None = None
    alpha: float = 3.0
    delta: float = 0.1
    pruning: Pruning = Pruning.NONE
    window: int | None = None
    max_nuisance_len: int | None = None
    penalty_scale: PenaltyScale = PenaltyScale.NLL

    def __post_init__(self):
        if isinstance(self.pruning, str):
            object.__setattr__(self, "pruning", Pruning(self.pruning.lower()))
        if isinstance(self.penalty_scale, str):
            object.__setattr__(self, "penalty_scale", PenaltyScale(self.penalty_scale.lower()))
        if self.sigma_n is None:
            object.__setattr__(self, "sigma_n", self.sigma0)
        if self.beta_prime is None:
            object.__setattr__(self, "beta_prime", self.beta)
        if not self.sigma0 > 0 or not self.sigma_n > 0:
            raise NonPositiveSigma("sigma0 and sigma_n must be positive")
        if not self.beta > 0 or not self.beta_prime > 0:
            raise ConfigError("penalties must be positive")
        if int(self.max_seg_len) != self.max_seg_len or self.max_seg_len < 1:
            raise ConfigError("max_seg_len must be a positive integer")
        object.__setattr__(self, "max_seg_len", int(self.max_seg_len))
        if not self.alpha > 0 or self.delta < 0:
            raise ConfigError("alpha must be positive and delta non-negative")
        if self.pruning is Pruning.WINDOW:
            if self.window is None or self.window < self.max_seg_len:
                raise ConfigError("window pruning needs window >= max_seg_len")
        if self.max_nuisance_len is not None and self.max_nuisance_len <= self.max_seg_len:
            raise ConfigError("max_nuisance_len must exceed max_seg_len")

    def validate(self, n: int) -> None:
        """Check the parameters against a series of length ``n``."""
        if n < 2:
            raise TooShort(f"need at least 2 observations, got {n}")
        if self.max_seg_len >= n:
            raise ConfigError(
                f"max_seg_len={self.max_seg_len} leaves no background anchor for n={n}"
            )

    @property
    def _unit(self) -> float:
        return 0.5 if self.penalty_scale is PenaltyScale.DEVIANCE else 1.0

    @property
    def beta_eff(self) -> float:
        """Signal penalty in NLL units."""
        return self.beta * self._unit

    @property
    def beta_prime_eff(self) -> float:
        """Nuisance penalty in NLL units."""
        return self.beta_prime * self._unit

    def prune_threshold(self, n: int) -> float:
        """Nuisance-start pruning threshold in NLL units."""
        return self.alpha * math.log(n) ** (1.0 + self.delta) * self._unit

    def with_(self, **changes) -> "CostParams":
        return replace(self, **changes)


def _check_sigma(sigma):
    if not sigma > 0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma}")


@njit(cache=True)
def _fixed_cost(s1, s2, k, mu, sigma):
    var = sigma * sigma
    resid = s2 - 2.0 * mu * s1 + k * mu * mu
    if resid < 0.0:
        resid = 0.0
    return 0.5 * k * (LOG_2PI + math.log(var)) + resid / (2.0 * var)


@njit(cache=True)
def _mle_cost(s1, s2, k, sigma):
    var = sigma * sigma
    resid = s2 - s1 * s1 / k
    if resid < 0.0:
        resid = 0.0
    return 0.5 * k * (LOG_2PI + math.log(var)) + resid / (2.0 * var)


@njit(cache=True)
def _point_cost(x, mu, sigma):
    var = sigma * sigma
    d = x - mu
    return 0.5 * (LOG_2PI + math.log(var)) + d * d / (2.0 * var)


def cost_fixed_mean(ts: TimeSeries, a: int, b: int, mu: float, sigma: float) -> float:
    """Gaussian NLL of ``x_a..x_b`` at mean ``mu`` and scale ``sigma``."""
    _check_sigma(sigma)
    s1 = ts.segment_sum(a, b)
    s2 = ts.segment_sumsq(a, b)
    return float(_fixed_cost(s1, s2, b - a + 1, float(mu), float(sigma)))


def cost_mle_mean(ts: TimeSeries, a: int, b: int, sigma: float) -> tuple[float, float]:
    """Gaussian NLL of ``x_a..x_b`` minimised over the mean.

    Returns
    -------
    cost : float
    theta_hat : float
        The segment mean, which is the minimiser.
    """
    _check_sigma(sigma)
    s1 = ts.segment_sum(a, b)
    s2 = ts.segment_sumsq(a, b)
    k = b - a + 1
    return float(_mle_cost(s1, s2, k, float(sigma))), s1 / k


def penalty(n: int, alpha: float = 3.0, delta: float = 0.1) -> float:
    """``alpha * log(n) ** (1 + delta)`` with the natural logarithm."""
    if n < 2:
        raise TooShort(f"penalty needs n >= 2, got {n}")
    return alpha * math.log(n) ** (1.0 + delta)


def default_penalty(n: int) -> float:
    """The ``3 * log(n) ** 1.1`` penalty used for both segment types."""
    return penalty(n, 3.0, 0.1)


def epidemic_cost(ts: TimeSeries, segments, theta0: float, sigma: float, beta: float) -> float:
    """Penalised epidemic cost of a set of disjoint signal segments.

    Background points are scored at ``theta0``; each segment at its own
    mean; every segment adds ``beta``.
    """
    _check_sigma(sigma)
    total = cost_fixed_mean(ts, 1, ts.n, theta0, sigma)
    for seg in segments:
        total -= cost_fixed_mean(ts, seg.start, seg.end, theta0, sigma)
        total += cost_mle_mean(ts, seg.start, seg.end, sigma)[0] + beta
    return total


def nuisance_cost(ts: TimeSeries, segments, cfg: CostParams) -> float:
    """Two-level cost of a nuisance/signal structure.

    Nuisance segments are scored at their reported ``level`` with scale
    ``sigma_n`` (excluding nested signal points), nested signal segments at
    their own mean with ``sigma_n``, outer signal segments at their own mean
    with ``sigma0`` and remaining points at ``mu0`` with ``sigma0``.
    Penalties are added in NLL units.
    """
    if cfg.mu0 is None:
        raise ConfigError("nuisance_cost needs mu0")
    nuis = [s for s in segments if s.kind == "nuisance"]
    total = cost_fixed_mean(ts, 1, ts.n, cfg.mu0, cfg.sigma0)
    for seg in nuis:
        total -= cost_fixed_mean(ts, seg.start, seg.end, cfg.mu0, cfg.sigma0)
        total += cost_fixed_mean(ts, seg.start, seg.end, seg.level, cfg.sigma_n) + cfg.beta_prime_eff
    for seg in segments:
        if seg.kind != "signal":
            continue
        if seg.parent is None:
            total -= cost_fixed_mean(ts, seg.start, seg.end, cfg.mu0, cfg.sigma0)
            total += cost_mle_mean(ts, seg.start, seg.end, cfg.sigma0)[0]
        else:
            host = nuis[seg.parent]
            total -= cost_fixed_mean(ts, seg.start, seg.end, host.level, cfg.sigma_n)
            total += cost_mle_mean(ts, seg.start, seg.end, cfg.sigma_n)[0]
        total += cfg.beta_eff
    return total
