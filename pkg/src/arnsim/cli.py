"""Command-line entry point: batch experiments and the live operator server."""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from .engine import (CONFIG_WITH, CONFIG_WITHOUT, results_csv, run_batch, run_trial,
                     summary_json)
from .world import Scenario, ScenarioError, load_world

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BATCH_FAILED = 2

BUILTIN_SCENARIOS = ("office3",)


def load_scenario(ref: str) -> Scenario:
    """Load a scenario from a builtin name or a JSON file path."""
    if ref in BUILTIN_SCENARIOS:
        text = resources.files("arnsim").joinpath(f"scenarios/{ref}.json").read_text()
        return load_world(json.loads(text), name=ref)
    path = Path(ref)
    if not path.exists():
        raise ScenarioError("scenario", f"no such scenario file or builtin: {ref}")
    return load_world(json.loads(path.read_text()), name=path.stem)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arn-sim",
        description="Human-multi-robot collaborative delivery simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a batch experiment or the live server")
    run.add_argument("--scenario", default="office3",
                     help="builtin scenario name or path to a scenario JSON file")
    run.add_argument("--mode", choices=("batch", "live"), default="batch")
    run.add_argument("--trials", type=int, default=100,
                     help="trials per configuration (batch mode)")
    run.add_argument("--seed", type=int, default=1, help="base seed")
    run.add_argument("--feedback", choices=("on", "off"),
                     help="batch: restrict to a single configuration "
                          "(default: run both, paired); live: enable/disable the "
                          "feedback channel")
    run.add_argument("--out", default="out", help="output directory (batch mode)")
    run.add_argument("--trace", action="store_true",
                     help="also write a newline-delimited JSON event log per trial")
    run.add_argument("--port", type=int, default=8700, help="live server port")
    return parser


def _run_batch(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.trials < 2:
        print("error: --trials must be at least 2", file=sys.stderr)
        return EXIT_USAGE
    if args.feedback == "on":
        configs = (CONFIG_WITH,)
    elif args.feedback == "off":
        configs = (CONFIG_WITHOUT,)
    else:
        configs = (CONFIG_WITH, CONFIG_WITHOUT)

    batch = run_batch(scenario, args.trials, args.seed, configs=configs)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_csv(batch, scenario.n_robots))
    (out / "summary.json").write_text(summary_json(batch))

    if args.trace:
        trace_dir = out / "traces"
        trace_dir.mkdir(exist_ok=True)
        for seed in range(args.seed, args.seed + args.trials):
            for config in configs:
                _, trace = run_trial(scenario, seed, config == CONFIG_WITH)
                (trace_dir / f"trial_{seed}_{config}.ndjson").write_text(trace.to_ndjson())

    for config, stats in batch.summary.items():
        print(f"{config}: T_all {stats['t_all']['mean']:.1f} ({stats['t_all']['sd']:.1f}) s, "
              f"T_H {stats['t_h']['mean']:.1f} s, T_R_last {stats['t_r_last']['mean']:.1f} s, "
              f"aborts {stats['aborts']}/{stats['n']}")
    if batch.p_value_t_all is not None:
        note = " [low power]" if batch.low_power else ""
        print(f"Welch t-test on T_all: p = {batch.p_value_t_all:.6g}{note}")
    print(f"wrote {out / 'results.csv'} and {out / 'summary.json'}")

    if batch.failed:
        print(f"batch failed: abort fraction {batch.abort_fraction:.0%} exceeds 20%",
              file=sys.stderr)
        return EXIT_BATCH_FAILED
    return EXIT_OK


def _run_live(args) -> int:
    from .gateway import serve  # imported lazily; aiohttp not needed for batch runs

    scenario = load_scenario(args.scenario)
    serve(scenario, port=args.port, seed=args.seed,
          feedback_enabled=args.feedback != "off")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.mode == "batch":
            return _run_batch(args)
        return _run_live(args)
    except ScenarioError as err:
        print(f"scenario error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
