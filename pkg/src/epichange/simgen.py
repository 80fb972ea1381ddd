"""Seeded generators for the five simulation scenarios.

Scenario intervals are given as fractions of ``n``; the half-open interval
``(a*n, b*n]`` covers indices ``floor(a*n) + 1 .. floor(b*n)``. Fractions
are handled exactly, so the mapping does not depend on float rounding.

==== ===================================================================
S1   N(theta_t, 1), theta = 3 on (0.3n, 0.5n]
S2   N(theta_t, 1), theta = -1 on (0.2n, 0.3n] and (0.7n, 0.8n], +1 on (0.5n, 0.6n]
S3   t(3) noise + theta_t, theta = 2 on (0.2n, 0.6n]
N1   N(sig + nuis, 1), nuisance 2 on (0.2n, 0.7n], signal +2 on (0.3n, 0.5n]
N2   N(sig + nuis, 1), nuisance 1 on (0.2n, 0.4n], signal 3 on (0.5n, 0.6n], -3 on (0.7n, 0.8n]
==== ===================================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cost import CostParams, PenaltyScale, Pruning, default_penalty
from .errors import ConfigError, UnknownScenario
from .series import TimeSeries, build

GENERATOR_ID = f"numpy.random.PCG64+SeedSequence(numpy {np.__version__})"

F = Fraction
_SCENARIOS = {
    "S1": {"signal": [(F(3, 10), F(5, 10), 3.0)], "nuisance": [], "noise": "normal"},
    "S2": {
        "signal": [(F(2, 10), F(3, 10), -1.0), (F(5, 10), F(6, 10), 1.0), (F(7, 10), F(8, 10), -1.0)],
        "nuisance": [],
        "noise": "normal",
    },
    "S3": {"signal": [(F(2, 10), F(6, 10), 2.0)], "nuisance": [], "noise": "t3"},
    "N1": {"signal": [(F(3, 10), F(5, 10), 2.0)], "nuisance": [(F(2, 10), F(7, 10), 2.0)], "noise": "normal"},
    "N2": {
        "signal": [(F(5, 10), F(6, 10), 3.0), (F(7, 10), F(8, 10), -3.0)],
        "nuisance": [(F(2, 10), F(4, 10), 1.0)],
        "noise": "normal",
    },
}
SCENARIOS = tuple(_SCENARIOS)
MIN_N = 10


@dataclass(frozen=True)
class ScenarioSpec:
    """Scenario id, length and seed; ``replicate`` selects an independent stream."""

    id: str
    n: int
    seed: int
    replicate: int = 0

    def __post_init__(self):
        if self.id not in _SCENARIOS:
            raise UnknownScenario(f"unknown scenario {self.id!r}; choose from {', '.join(SCENARIOS)}")
        if self.n < MIN_N:
            raise ConfigError(f"scenario length must be at least {MIN_N}, got {self.n}")


@dataclass
class GroundTruth:
    """True segments as ``(start, end, theta)`` triples, 1-based inclusive.

    For a signal inside a nuisance segment ``theta`` is the signal-specific
    shift on top of the nuisance level.
    """

    signal: list[tuple[int, int, float]] = field(default_factory=list)
    nuisance: list[tuple[int, int, float]] = field(default_factory=list)

    def to_dict(self, zero_based: bool = False) -> dict:
        shift = 1 if zero_based else 0
        return {
            "signal": [[s - shift, e - shift, th] for s, e, th in self.signal],
            "nuisance": [[s - shift, e - shift, th] for s, e, th in self.nuisance],
        }

    @classmethod
    def from_dict(cls, d: dict, zero_based: bool = False) -> "GroundTruth":
        shift = 1 if zero_based else 0
        return cls(
            [(int(s) + shift, int(e) + shift, float(th)) for s, e, th in d.get("signal", [])],
            [(int(s) + shift, int(e) + shift, float(th)) for s, e, th in d.get("nuisance", [])],
        )


def interval(a: Fraction, b: Fraction, n: int) -> tuple[int, int]:
    """Indices covered by ``(a*n, b*n]``."""
    return math.floor(a * n) + 1, math.floor(b * n)


def truth_for(id: str, n: int) -> GroundTruth:
    sc = _SCENARIOS[id]
    sig = [(*interval(a, b, n), th) for a, b, th in sc["signal"]]
    nui = [(*interval(a, b, n), th) for a, b, th in sc["nuisance"]]
    return GroundTruth(sig, nui)


def rng_for(seed: int, replicate: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(replicate,))))


def student_t3(rng: np.random.Generator, size: int) -> np.ndarray:
    """t(3) draws as a normal over the root of a scaled chi-square(3)."""
    z = rng.standard_normal(size)
    chi2 = (rng.standard_normal((size, 3)) ** 2).sum(axis=1)
    return z / np.sqrt(chi2 / 3.0)


def generate(spec: ScenarioSpec) -> tuple[TimeSeries, GroundTruth]:
    """Draw one series and its ground truth; a pure function of ``spec``."""
    truth = truth_for(spec.id, spec.n)
    rng = rng_for(spec.seed, spec.replicate)
    if _SCENARIOS[spec.id]["noise"] == "t3":
        x = student_t3(rng, spec.n)
    else:
        x = rng.standard_normal(spec.n)
    for s, e, th in truth.nuisance + truth.signal:
        x[s - 1:e] += th
    return build(x), truth


def default_config(id: str, n: int, pruning: Pruning | str = Pruning.GLOBAL) -> CostParams:
    """Detector settings used with each scenario.

    Epidemic scenarios: penalty ``3 log(n)^1.1``, ``max_seg_len = 0.5n``,
    scale 1 (``sqrt(3)`` for the t(3) scenario). Nuisance scenarios:
    ``mu0 = 0``, ``sigma0 = 1``, both penalties ``3 log(n)^1.1`` and
    ``max_seg_len`` of ``0.33n`` (N1) or ``0.15n`` (N2). Penalties are on
    the deviance scale.
    """
    if id not in _SCENARIOS:
        raise UnknownScenario(f"unknown scenario {id!r}")
    beta = default_penalty(n)
    if id.startswith("S"):
        sigma = math.sqrt(3.0) if id == "S3" else 1.0
        return CostParams(sigma0=sigma, beta=beta, max_seg_len=math.floor(F(1, 2) * n), pruning=pruning,
                          penalty_scale=PenaltyScale.DEVIANCE)
    frac = F(33, 100) if id == "N1" else F(15, 100)
    return CostParams(mu0=0.0, sigma0=1.0, beta=beta, beta_prime=beta,
                      max_seg_len=math.floor(frac * n), pruning=pruning, penalty_scale=PenaltyScale.DEVIANCE)
