"""Command-line front end.

Subcommands: gen-data, train, adapt, eval, simulate, reproduce-fig2.
Diagnostics go to stderr; stdout carries only the requested report.
Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import io as dio
from .adaptive import adapt
from .core import evaluate_mse
from .experiments import gen_synthetic, run_figure2
from .scheme import TrainConfig, train_agnostic, train_distributed
from .simnet import run_session


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("DISTQ_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"DISTQ_THREADS is not an integer: {env!r}")
    return 1


def _require_files(*paths):
    for p in paths:
        if p is not None and not os.path.isfile(p):
            raise FileNotFoundError(f"input file not found: {p}")


def _parse_bits(text: str, m: int):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("--bits must be a comma-separated list of integers")
    bits = [int(p) for p in parts]
    if len(bits) == 1 and m > 1:
        bits = bits * m
    if len(bits) != m:
        raise ValueError(f"--bits has {len(bits)} entries for {m} sensors")
    return tuple(bits)


def cmd_gen_data(args) -> int:
    _require_files(args.spec)
    spec = dio.synthetic_spec_from_dict(dio.load_json(args.spec))
    if args.seed is not None:
        spec = dio.synthetic_spec_from_dict(
            {**dio.synthetic_spec_to_dict(spec), "seed": args.seed})
    cal, X_test, model, partition = gen_synthetic(spec)
    os.makedirs(args.out, exist_ok=True)
    dio.save_matrix_csv(os.path.join(args.out, "calibration.csv"), cal.X)
    dio.save_matrix_csv(os.path.join(args.out, "test.csv"), X_test)
    dio.save_json(os.path.join(args.out, "model.json"), dio.model_to_dict(model))
    dio.save_json(os.path.join(args.out, "partition.json"), dio.partition_to_dict(partition))
    print(f"wrote calibration.csv test.csv model.json partition.json to {args.out}",
          file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    _require_files(args.cal, args.model, args.partition)
    model = dio.model_from_dict(dio.load_json(args.model))
    partition = dio.partition_from_dict(dio.load_json(args.partition))
    cal = dio.load_calibration_csv(args.cal)
    bits = _parse_bits(args.bits, partition.m)
    cfg = TrainConfig(bits_per_sensor=bits, baseline_seed=args.seed or 0)
    threads = _threads(args)
    if args.strategy == "distributed":
        q = train_distributed(cal, model, partition, cfg, threads=threads)
    else:
        q = train_agnostic(cal, partition, model, cfg, threads=threads)
    dio.save_quantizer(args.out, q)
    mse, stderr = evaluate_mse(q, cal.X)
    print(json.dumps({"strategy": args.strategy, "bits": list(bits),
                      "calibration_mse": mse, "calibration_stderr": stderr,
                      "codebook": args.out}))
    return 0


def cmd_adapt(args) -> int:
    _require_files(args.codebook)
    q = dio.load_quantizer(args.codebook)
    bits = _parse_bits(args.bits, q.m)
    clamps = [(i, b, cb.bits) for i, (b, cb) in enumerate(zip(bits, q.codebooks))
              if b > cb.bits]
    for i, b, mx in clamps:
        print(f"warning: sensor {i}: {b} bits above trained maximum, clamped to {mx}",
              file=sys.stderr)
    q_new = adapt(q, q, bits)
    dio.save_quantizer(args.out, q_new)
    print(json.dumps({"bits": [min(b, cb.bits) for b, cb in zip(bits, q.codebooks)],
                      "codebook": args.out}))
    return 0


def cmd_eval(args) -> int:
    _require_files(args.codebook, args.test)
    q = dio.load_quantizer(args.codebook)
    X = dio.load_matrix_csv(args.test)
    mse, stderr = evaluate_mse(q, X)
    print(json.dumps({"n": int(X.shape[0]), "mse": mse, "stderr": stderr}))
    return 0


def cmd_simulate(args) -> int:
    _require_files(args.codebook, args.schedule, args.test)
    q = dio.load_quantizer(args.codebook)
    schedule = dio.schedule_from_dict(dio.load_json(args.schedule))
    X = dio.load_matrix_csv(args.test)
    transcript = run_session(q, schedule, X)
    for w in transcript.warnings:
        print(f"warning: {w}", file=sys.stderr)
    with open(args.out, "w") as f:
        f.write(transcript.to_csv())
    print(json.dumps({"steps": len(transcript.records), "mse": transcript.mse,
                      "total_bits": transcript.records[-1].cumulative_bits,
                      "transcript": args.out}))
    return 0


def cmd_reproduce_fig2(args) -> int:
    _require_files(args.spec)
    spec = dio.synthetic_spec_from_dict(dio.load_json(args.spec))
    if args.seed is not None:
        spec = dio.synthetic_spec_from_dict(
            {**dio.synthetic_spec_to_dict(spec), "seed": args.seed})
    results = run_figure2(spec, threads=_threads(args))
    csv = results.to_csv()
    if args.out:
        with open(args.out, "w") as f:
            f.write(csv)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(csv)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="distquant",
                                description="Distributed rate-adaptive feature quantization")

    def common(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: DISTQ_THREADS or 1)")

    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen-data", help="generate a synthetic instance")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--out", required=True, help="output directory")
    common(sp)
    sp.set_defaults(func=cmd_gen_data)

    sp = sub.add_parser("train", help="train a distributed quantizer")
    sp.add_argument("--cal", required=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--partition", required=True)
    sp.add_argument("--bits", required=True, help="comma list, or one value for all sensors")
    sp.add_argument("--strategy", choices=["distributed", "agnostic"], default="distributed")
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("adapt", help="re-derive codebooks for a new bit budget")
    sp.add_argument("--codebook", required=True)
    sp.add_argument("--bits", required=True)
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_adapt)

    sp = sub.add_parser("eval", help="evaluate MSE on a test set")
    sp.add_argument("--codebook", required=True)
    sp.add_argument("--test", required=True)
    common(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("simulate", help="run a bit-accounted session")
    sp.add_argument("--codebook", required=True)
    sp.add_argument("--schedule", required=True)
    sp.add_argument("--test", required=True, help="input stream CSV")
    sp.add_argument("--out", required=True, help="transcript CSV path")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("reproduce-fig2", help="strategy sweep over bit budgets")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--out", default=None, help="results CSV path (default: stdout)")
    common(sp)
    sp.set_defaults(func=cmd_reproduce_fig2)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, PermissionError, IsADirectoryError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
