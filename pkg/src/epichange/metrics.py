"""Evaluation metrics: TPR, segment counts, relative bias and SIC.

A true positive requires every true changepoint (the start and the end
of every true segment) to have a detected changepoint within ``0.05 n``
indices. Starts and ends are pooled, so a detected start may match a
true end. With ``type_aware`` only detections of the same kind count.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .cost import LOG_2PI
from .epidetect import DetectionResult
from .errors import EmptyInput, NonPositiveSigma
from .series import TimeSeries
from .simgen import GroundTruth

QUANTILES = (0.025, 0.25, 0.5, 0.75, 0.975)


def changepoints(spans) -> np.ndarray:
    out = []
    for s in spans:
        out.extend((s[0], s[1]))
    return np.asarray(out, dtype=np.int64)


def _all_matched(true_cp: np.ndarray, det_cp: np.ndarray, tol: float) -> bool:
    if true_cp.size == 0:
        return True
    if det_cp.size == 0:
        return False
    gap = np.abs(true_cp[:, None] - det_cp[None, :]).min(axis=1)
    return bool(np.all(gap <= tol))


def tpr(detected: DetectionResult, truth: GroundTruth, n: int, type_aware: bool = False,
        kind: str | None = None) -> int:
    """1 if every true changepoint has a detection within ``0.05 n``, else 0.

    Parameters
    ----------
    detected, truth
        Detector output and the true structure.
    n : int
        Series length, which sets the tolerance.
    type_aware : bool
        Signal changepoints must be matched by signal detections and
        nuisance changepoints by nuisance detections.
    kind : {"signal", "nuisance"}, optional
        Score only true changepoints of this kind (implies type matching).
    """
    tol = 0.05 * n
    kinds = ("signal", "nuisance") if kind is None else (kind,)
    if not type_aware and kind is None:
        det = changepoints(detected.intervals())
        tru = changepoints([(s, e) for s, e, _ in truth.signal + truth.nuisance])
        return int(_all_matched(tru, det, tol))
    for k in kinds:
        tru = changepoints([(s, e) for s, e, _ in getattr(truth, k)])
        if not _all_matched(tru, changepoints(detected.intervals(k)), tol):
            return 0
    return 1


def fitted_means(ts: TimeSeries, result: DetectionResult, mu0: float) -> np.ndarray:
    """Per-point fitted mean: segment levels, with nested signals overriding nuisance."""
    m = np.full(ts.n, float(mu0))
    for kind in ("nuisance", "signal"):
        for seg in result.segments:
            if seg.kind == kind:
                m[seg.start - 1:seg.end] = seg.level
    return m


def sic(ts: TimeSeries, result: DetectionResult, mu0: float, sigma0: float) -> float:
    """Schwarz criterion ``2 NLL + (3k + 2) log n``.

    ``k`` counts every reported segment. The likelihood is Gaussian with
    scale ``sigma0`` everywhere and the fitted mean of each point's
    segment (``mu0`` outside segments).
    """
    if not sigma0 > 0:
        raise NonPositiveSigma(f"sigma0 must be positive, got {sigma0}")
    r = ts.values - fitted_means(ts, result, mu0)
    var = sigma0 * sigma0
    nll = 0.5 * ts.n * (LOG_2PI + math.log(var)) + float(r @ r) / (2.0 * var)
    k = len(result.segments)
    return 2.0 * nll + (3 * k + 2) * math.log(ts.n)


@dataclass(frozen=True)
class RunRecord:
    """What one replication contributes to a summary."""

    n_segments: int
    tpr: int
    theta0: float = float("nan")
    n_signal: int | None = None
    n_nuisance: int | None = None
    true_signal: int | None = None
    true_nuisance: int | None = None
    tpr_signal: int | None = None
    tpr_nuisance: int | None = None


def record(detected: DetectionResult, truth: GroundTruth, n: int, type_aware: bool = False) -> RunRecord:
    return RunRecord(
        n_segments=len(detected.segments),
        tpr=tpr(detected, truth, n, type_aware),
        theta0=float(detected.theta0),
        n_signal=detected.k_signal,
        n_nuisance=detected.m_nuisance,
        true_signal=len(truth.signal),
        true_nuisance=len(truth.nuisance),
        tpr_signal=tpr(detected, truth, n, kind="signal"),
        tpr_nuisance=tpr(detected, truth, n, kind="nuisance"),
    )


@dataclass(frozen=True)
class ReplicationSummary:
    mean_segments: float
    tpr: float
    bias_signal: float
    bias_nuisance: float
    theta0_quantiles: tuple[float, ...]
    tpr_signal: float = float("nan")
    tpr_nuisance: float = float("nan")
    reps: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _mean_of(vals) -> float:
    vals = [v for v in vals if v is not None]
    return float(np.mean(vals)) if vals else float("nan")


def _rel_bias(found, true) -> float:
    pairs = [(f, t) for f, t in zip(found, true) if f is not None and t is not None]
    if not pairs:
        return float("nan")
    t_mean = np.mean([t for _, t in pairs])
    if t_mean == 0:
        return float("nan")
    return float((np.mean([f for f, _ in pairs]) - t_mean) / t_mean)


def summarize(replications) -> ReplicationSummary:
    """Aggregate per-run records.

    Relative bias is ``(mean detected count - true count) / true count``
    per segment kind, ``nan`` when the true count is zero.
    """
    recs = list(replications)
    if not recs:
        raise EmptyInput("summarize needs at least one replication")
    th = np.array([r.theta0 for r in recs], dtype=float)
    th = th[np.isfinite(th)]
    q = tuple(float(v) for v in np.quantile(th, QUANTILES)) if th.size else (float("nan"),) * len(QUANTILES)
    return ReplicationSummary(
        mean_segments=float(np.mean([r.n_segments for r in recs])),
        tpr=float(np.mean([r.tpr for r in recs])),
        bias_signal=_rel_bias([r.n_signal for r in recs], [r.true_signal for r in recs]),
        bias_nuisance=_rel_bias([r.n_nuisance for r in recs], [r.true_nuisance for r in recs]),
        theta0_quantiles=q,
        tpr_signal=_mean_of([r.tpr_signal for r in recs]),
        tpr_nuisance=_mean_of([r.tpr_nuisance for r in recs]),
        reps=len(recs),
    )
