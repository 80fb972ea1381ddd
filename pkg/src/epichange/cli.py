"""Command-line entry point: ``detect``, ``simulate`` and ``evaluate``.

Segment indices in every file written here are 0-based and inclusive.
Exit status is 0 on success, 2 for invalid configuration and 3 for
input/output failures.
"""

from __future__ import annotations

import argparse
import glob
import json
import math
import os
import sys
import time
from dataclasses import asdict
from fractions import Fraction

from . import __version__
from .cost import CostParams, PenaltyScale, Pruning, default_penalty
from .epidetect import DetectionResult, Segment, detect_epidemic, op_fixed_background
from .errors import EmptySeries, EpichangeError, MissingColumn, ParseError
from .ingest import bin_mean, read_series, robust_background, write_series
from .metrics import record, sic, summarize
from .nuisance import detect_nuisance
from .oracle import EnumerationBudget, brute_nuisance, brute_unknown_bg
from .simgen import GENERATOR_ID, SCENARIOS, GroundTruth, ScenarioSpec, generate

EXIT_CONFIG = 2
EXIT_IO = 3
_IO_ERRORS = (OSError, ParseError, MissingColumn, EmptySeries, json.JSONDecodeError)


class UsageError(EpichangeError):
    pass


def _manifest(argv, config=None, seeds=None, started=None, **extra) -> dict:
    m = {
        "command_line": list(argv),
        "config": config,
        "seeds": seeds,
        "generator": GENERATOR_ID,
        "version": __version__,
        "duration_s": None if started is None else round(time.perf_counter() - started, 6),
    }
    m.update(extra)
    return m


def _dump(obj, path=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def parse_seg_len(text: str, n: int) -> int:
    """``"25"`` or a fraction of ``n`` such as ``"0.33n"`` (floored)."""
    t = text.strip().lower()
    try:
        if t.endswith("n"):
            return math.floor(Fraction(t[:-1] or "1") * n)
        return int(t)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse --max-seg-len {text!r}") from None


def _real_or(text, word):
    if text is None or text == word:
        return None
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"expected a number or {word!r}, got {text!r}") from None


def result_to_json(res: DetectionResult, mode: str) -> dict:
    nuis_ids = {}
    segs = []
    for seg in res.segments:
        item = {"kind": seg.kind, "start": seg.start - 1, "end": seg.end - 1,
                "mean": seg.mean, "level": seg.level, "offset_from": seg.parent}
        if seg.kind == "nuisance":
            item["id"] = nuis_ids.setdefault(seg.start, len(nuis_ids))
        segs.append(item)
    return {"n": res.n, "mode": mode, "theta0": res.theta0, "cost": res.total_cost, "segments": segs}


def result_from_json(d: dict) -> DetectionResult:
    segs = []
    for s in d["segments"]:
        level = s.get("level", s["mean"])
        segs.append(Segment(s["kind"], int(s["start"]) + 1, int(s["end"]) + 1, float(s["mean"]),
                            float(level), s.get("offset_from")))
    return DetectionResult(segs, float(d["theta0"]), float(d.get("cost", float("nan"))), int(d["n"]))


def cmd_detect(args, argv) -> int:
    started = time.perf_counter()
    ts = read_series(args.input, args.column, args.delimiter)
    if args.bins is not None:
        ts = bin_mean(ts, args.bins)
    n = ts.n
    mu0 = _real_or(args.mu0, "auto")
    sigma0 = _real_or(args.sigma0, "auto")
    estimates = None
    if mu0 is None or sigma0 is None:
        m, s = robust_background(ts)
        estimates = {"mu0": m, "sigma0": s}
        if sigma0 is None:
            sigma0 = s
        if mu0 is None and args.mode == "nuisance":
            mu0 = m
    beta = _real_or(args.beta, "default")
    beta = default_penalty(n) if beta is None else beta
    beta_p = _real_or(args.beta_prime, "default")
    beta_p = default_penalty(n) if beta_p is None else beta_p
    seg_len = args.max_seg_len or ("0.5n" if args.mode == "epidemic" else "0.33n")
    cfg = CostParams(sigma0=sigma0, beta=beta, max_seg_len=parse_seg_len(seg_len, n), mu0=mu0,
                     beta_prime=beta_p, alpha=args.alpha, delta=args.delta,
                     pruning=args.pruning, window=args.window, penalty_scale=args.penalty_scale)
    cfg.validate(n)
    if args.oracle:
        budget = EnumerationBudget()
        if args.mode == "epidemic":
            res = brute_unknown_bg(ts, cfg, budget)
        else:
            res = brute_nuisance(ts, cfg)
    elif args.mode == "epidemic":
        # a user-supplied background turns the detector into plain optimal partitioning
        res = op_fixed_background(ts, mu0, cfg) if mu0 is not None else detect_epidemic(ts, cfg, online=args.online)
    else:
        res = detect_nuisance(ts, cfg)
    snap = asdict(cfg)
    snap["pruning"] = cfg.pruning.value
    snap["penalty_scale"] = cfg.penalty_scale.value
    out = result_to_json(res, args.mode)
    out["manifest"] = _manifest(argv, snap, started=started, estimates=estimates, input=str(args.input),
                                online=bool(args.online), oracle=bool(args.oracle), bins=args.bins)
    if res.warning:
        out["manifest"]["warning"] = res.warning
    _dump(out, args.output)
    return 0


def cmd_simulate(args, argv) -> int:
    started = time.perf_counter()
    if args.reps < 1:
        raise UsageError("--reps must be at least 1")
    specs = [ScenarioSpec(args.scenario, args.n, args.seed, r) for r in range(args.reps)]
    os.makedirs(args.out, exist_ok=True)
    for spec in specs:
        ts, truth = generate(spec)
        stem = os.path.join(args.out, f"{spec.id}_n{spec.n}_rep{spec.replicate:04d}")
        write_series(stem + ".csv", ts)
        doc = truth.to_dict(zero_based=True)
        doc.update(scenario=spec.id, n=spec.n, seed=spec.seed, replicate=spec.replicate)
        doc["manifest"] = _manifest(argv, seeds={"seed": spec.seed, "replicate": spec.replicate})
        _dump(doc, stem + ".truth.json")
    _dump(_manifest(argv, {"scenario": args.scenario, "n": args.n, "reps": args.reps},
                    seeds={"seed": args.seed, "replicates": args.reps}, started=started),
          os.path.join(args.out, "manifest.json"))
    return 0


def _expand(pattern):
    return sorted(glob.glob(pattern))


def cmd_evaluate(args, argv) -> int:
    started = time.perf_counter()
    dets, truths = _expand(args.detections), _expand(args.truth)
    if not dets or not truths:
        raise UsageError("no files matched --detections or --truth")
    if len(dets) != len(truths):
        raise UsageError(f"{len(dets)} detection files but {len(truths)} truth files")
    series = _expand(args.series) if args.series else []
    if args.sic and len(series) != len(dets):
        raise UsageError("--sic needs one --series file per detection file")
    recs, rows = [], []
    for i, (dp, tp) in enumerate(zip(dets, truths)):
        with open(dp, encoding="utf-8") as fh:
            dj = json.load(fh)
        with open(tp, encoding="utf-8") as fh:
            tj = json.load(fh)
        res = result_from_json(dj)
        truth = GroundTruth.from_dict(tj, zero_based=True)
        n = args.n or res.n
        if "n" in tj and int(tj["n"]) != res.n:
            raise UsageError(f"{dp} has n={res.n} but {tp} has n={tj['n']}")
        rec = record(res, truth, n, args.type_aware)
        recs.append(rec)
        row = {"detections": dp, "truth": tp, "segments": rec.n_segments, "tpr": rec.tpr,
               "tpr_signal": rec.tpr_signal, "tpr_nuisance": rec.tpr_nuisance, "theta0": rec.theta0}
        if args.sic:
            ts = read_series(series[i], args.column)
            conf = (dj.get("manifest") or {}).get("config") or {}
            mu0 = conf.get("mu0")
            mu0 = res.theta0 if mu0 is None else mu0
            row["sic"] = sic(ts, res, mu0, conf.get("sigma0") or 1.0)
        rows.append(row)
    summ = summarize(recs).to_dict()
    out = {"summary": summ, "runs": rows,
           "manifest": _manifest(argv, {"type_aware": args.type_aware, "n": args.n}, started=started)}
    _dump(out, args.output)
    if args.csv:
        keys = list(rows[0])
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(",".join(keys) + "\n")
            for r in rows:
                fh.write(",".join("" if r[k] is None else str(r[k]) for k in keys) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="epichange", description="Epidemic changepoint detection.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="segment a series read from a delimited text file")
    d.add_argument("--input", required=True)
    d.add_argument("--column", default="0", help="header name or 0-based position")
    d.add_argument("--delimiter", choices=[",", "\t"], default=None)
    d.add_argument("--mode", choices=["epidemic", "nuisance"], default="epidemic")
    d.add_argument("--mu0", default="auto")
    d.add_argument("--sigma0", default="auto")
    d.add_argument("--beta", default="default")
    d.add_argument("--beta-prime", default="default")
    d.add_argument("--penalty-scale", choices=[m.value for m in PenaltyScale], default="deviance",
                   help="units of --beta, --beta-prime and the pruning threshold")
    d.add_argument("--max-seg-len", default=None, help="integer or fraction of n such as 0.33n")
    d.add_argument("--pruning", choices=[m.value for m in Pruning], default="global")
    d.add_argument("--window", type=int, default=None)
    d.add_argument("--alpha", type=float, default=3.0)
    d.add_argument("--delta", type=float, default=0.1)
    d.add_argument("--online", action="store_true")
    d.add_argument("--bins", type=int, default=None)
    d.add_argument("--oracle", action="store_true", help="exact enumeration, small inputs only")
    d.add_argument("--output", default=None)
    d.set_defaults(func=cmd_detect)

    s = sub.add_parser("simulate", help="write seeded scenario replications")
    s.add_argument("--scenario", required=True, help="one of " + ", ".join(SCENARIOS))
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--reps", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("evaluate", help="summarise detections against ground truth")
    e.add_argument("--detections", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--n", type=int, default=None)
    e.add_argument("--type-aware", action="store_true")
    e.add_argument("--sic", action="store_true")
    e.add_argument("--series", default=None, help="series files for --sic, paired in sorted order")
    e.add_argument("--column", default="0")
    e.add_argument("--output", default=None)
    e.add_argument("--csv", default=None)
    e.set_defaults(func=cmd_evaluate)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, ["epichange", *argv])
    except _IO_ERRORS as exc:
        print(f"epichange: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (EpichangeError, ValueError) as exc:
        print(f"epichange: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
