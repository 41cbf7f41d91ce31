"""
Module Name: main.py
Description: Command-line entry point. Run from the repository root:

                 python -m harness.main run --config exp.cfg --seed 3
                 python -m harness.main compare --config power_ef.cfg --config naive.cfg
                 python -m harness.main saddle --config saddle.cfg --offset 0.5
                 python -m harness.main schedule --config exp.cfg --order second

             Errors exit with the numeric code of configs.config.
Date: 2026-10-19
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from configs import config
from configs.config import SUCCESS, IO_ERROR, SUPPORTED_ALGORITHMS, SUPPORTED_COMPRESSORS, logger
from configs.errors import PowerEFError
from configs.experiment import ExperimentConfig
from harness.compare import compare
from harness.experiment import run_experiment, resolve_run
from harness.saddle import saddle_escape_trial
from stationarity.schedule import schedule_for_problem, FIRST, SECOND

# CLI flag -> experiment key
OVERRIDES = {
    "seed": "seeds",
    "out_dir": "output.out_dir",
    "algo": "algorithm.name",
    "compressor": "compressor.kind",
    "k": "compressor.k",
    "p": "algorithm.p",
    "eta": "algorithm.eta",
    "r": "algorithm.r",
    "T": "algorithm.T",
    "n": "problem.n",
    "d": "problem.d",
    "heterogeneity": "problem.heterogeneity",
    "sigma": "problem.sigma",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="poweref",
                                     description="Compressed distributed SGD simulator.")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="run a single seed")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--algo", choices=SUPPORTED_ALGORITHMS)
    common.add_argument("--compressor", choices=SUPPORTED_COMPRESSORS)
    common.add_argument("--k", type=int)
    common.add_argument("--p", type=int)
    common.add_argument("--eta", type=float)
    common.add_argument("--r", type=float)
    common.add_argument("--T", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--d", type=int)
    common.add_argument("--heterogeneity", type=float)
    common.add_argument("--sigma", type=float)
    common.add_argument("--threads", type=int, help="worker threads (default POWEREF_THREADS)")

    run = sub.add_parser("run", parents=[common], help="run one experiment config")
    run.add_argument("--config", help="experiment file")

    cmp_ = sub.add_parser("compare", parents=[common], help="compare configs on one problem")
    cmp_.add_argument("--config", action="append", required=True,
                      help="experiment file; repeat for each config")

    saddle = sub.add_parser("saddle", parents=[common], help="saddle-escape trial")
    saddle.add_argument("--config", help="experiment file")
    saddle.add_argument("--offset", type=float, default=0.0, help="start offset along e_1")

    schedule = sub.add_parser("schedule", parents=[common], help="print the parameter schedule")
    schedule.add_argument("--config", help="experiment file")
    schedule.add_argument("--order", choices=[FIRST, SECOND])
    return parser


def load_config(path, args):
    cfg = ExperimentConfig.load(path) if path else ExperimentConfig()
    overrides = {key: getattr(args, flag) for flag, key in OVERRIDES.items()}
    if args.k is not None:
        overrides["compressor.k_fraction"] = ""
    return cfg.with_overrides(overrides)


def configure_logging(verbose):
    config.DEBUG = verbose
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def cmd_run(args):
    cfg = load_config(args.config, args)
    results = run_experiment(cfg, workers=args.threads)
    for result in results:
        s = result.summary
        print(f"seed {s['seed']}: final f {s['final_f']:.6g}, grad norm {s['final_grad_norm']:.3e}, "
              f"uplink {s['uplink_bytes']} bytes, downlink {s['downlink_bytes']} bytes")
    print(f"wrote {os.path.join(cfg.output.out_dir, 'summary.csv')}")


def cmd_compare(args):
    cfgs = [load_config(path, args) for path in args.config]
    table = compare(cfgs, workers=args.threads)
    out_dir = cfgs[0].output.out_dir
    os.makedirs(out_dir, exist_ok=True)
    table.write(os.path.join(out_dir, "compare.csv"))
    for row in table.rows:
        print(f"{row.label:40s} f={row.final_f:.6g} |grad|={row.final_grad_norm:.3e} "
              f"bytes-to-{table.threshold:g}={row.bytes_to_threshold:g} ({row.reached}/{row.seeds})")
    for a in range(len(table.rows)):
        for b in range(len(table.rows)):
            if a != b:
                print(f"{table.rows[a].label} beats {table.rows[b].label} on "
                      f"{table.wins(a, b)}/{len(table.seeds)} seeds ({table.win_fraction(a, b):.0%})")


def cmd_saddle(args):
    cfg = load_config(args.config, args)
    stats = saddle_escape_trial(cfg, args.offset, workers=args.threads)
    print(json.dumps(stats.to_dict(), default=float))


def cmd_schedule(args):
    cfg = load_config(args.config, args)
    order = args.order or (cfg.algorithm.schedule if cfg.algorithm.schedule != "none" else FIRST)
    plan = resolve_run(cfg, cfg.seeds[0])
    alg = cfg.algorithm
    schedule = schedule_for_problem(order, plan.problem, plan.noise, plan.compressor, alg.epsilon,
                                    x0=plan.x0, seed=cfg.seeds[0], kappas=alg.kappas, delta=alg.delta,
                                    r=alg.r)
    print(json.dumps(schedule.to_dict(), sort_keys=True, indent=2))


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "saddle": cmd_saddle, "schedule": cmd_schedule}


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    np.seterr(over="ignore", invalid="ignore")
    try:
        COMMANDS[args.command](args)
    except PowerEFError as exc:
        logger.error(str(exc))
        return exc.errno
    except OSError as exc:
        logger.error(f"{config.ERROR_MSGS[IO_ERROR]} {exc}")
        return IO_ERROR
    return SUCCESS


if __name__ == "__main__":
    sys.exit(main())
