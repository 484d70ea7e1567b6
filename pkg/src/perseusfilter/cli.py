"""Command-line interface: sample, filter, solve, eval and experiment.

State numbers on the command line (``--goals``) and in CSV output are 1-based;
everything inside the library is 0-based.

Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 one or more
experiment cells failed.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import yaml

from . import __version__
from .evaluate import DEFAULT_MAX_STEPS, EvalConfig, sample_rewards
from .experiment import HALLWAY2_COMPARISON, ExperimentConfig, format_report, resolve_model, run_experiment
from .filter import filter_beliefs
from .parser import PomdpParseError
from .sampler import read_belief_set, sample_belief_set, write_belief_set
from .solver import SolveConfig, load_policy, save_policy, solve

log = logging.getLogger("perseusfilter")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CELLS = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_goals(text):
    """'69-72' or '69,70,71,72' (1-based) -> list of 1-based ints."""
    if text is None:
        return None
    goals = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            goals.extend(range(int(lo), int(hi) + 1))
        else:
            goals.append(int(part))
    if any(g < 1 for g in goals):
        raise UsageError("goal states are 1-based")
    return goals


def _model(args):
    return resolve_model(args.model, parse_goals(args.goals))


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_sample(args):
    model = _model(args)
    beliefs = sample_belief_set(model, args.n, args.seed)
    write_belief_set(beliefs, args.out)
    log.info("wrote %d beliefs of dimension %d to %s", len(beliefs), model.num_states, args.out)
    return EXIT_OK


def cmd_filter(args):
    beliefs = read_belief_set(args.beliefs)
    kept, report = filter_beliefs(beliefs, args.threshold, method=args.method)
    write_belief_set(kept, args.out)
    if args.report:
        path = Path(args.report)
        fresh = not path.exists() or path.stat().st_size == 0
        with path.open("a", encoding="utf-8") as fh:
            fh.write(report.to_csv(header=fresh))
    else:
        sys.stdout.write(report.to_csv())
    log.info("kept %d of %d beliefs (threshold %g)", report.kept_count, report.input_count, report.threshold)
    return EXIT_OK


def cmd_solve(args):
    model = _model(args)
    beliefs = read_belief_set(args.beliefs)
    if beliefs.dimension != model.num_states:
        raise ValueError(f"belief dimension {beliefs.dimension} does not match {model.num_states} states")
    config = SolveConfig(args.convergence, args.max_iterations, args.time_budget, args.seed)
    result = solve(model, beliefs, config,
                   callback=lambda r: log.info("iteration %d: |V|=%d convergence=%.3g",
                                               r.iteration, r.policy_size, r.convergence))
    save_policy(args.out, model, result.value_function)
    if args.trace:
        _write(args.trace, result.trace_csv())
    log.info("%d iterations, |V|=%d, stop: %s", result.iterations, len(result.value_function), result.stop_reason)
    return EXIT_OK


def cmd_eval(args):
    model = _model(args)
    V = load_policy(args.policy, model)
    config = EvalConfig(args.trials_per_start, args.discount, args.max_steps, args.seed)
    result = sample_rewards(model, V, config)
    _write(args.out, result.to_csv())
    log.info("expected reward %.4f over %d episodes (%d truncated)",
             result.mean_reward, len(result.episode_rewards), result.episodes_truncated)
    return EXIT_OK


def cmd_experiment(args):
    if args.config:
        config = ExperimentConfig.load(args.config)
    else:
        config = ExperimentConfig.from_dict(HALLWAY2_COMPARISON)
    if args.seed is not None:
        config.seeds = [args.seed]
    if args.workers is not None:
        config.workers = args.workers
    rows = run_experiment(config, progress=lambda r: log.info(
        "cell %s/seed %s: reward %s, |V|=%s, %s iterations%s", r["arm"], r["seed"],
        r["expected_reward"], r["policy_size"], r["iterations"],
        f", error {r['error']}" if r["error"] else ""))
    _write(args.out, format_report(config, rows))
    return EXIT_CELLS if any(r["error"] for r in rows) else EXIT_OK


def cmd_show_config(args):
    sys.stdout.write(yaml.safe_dump(HALLWAY2_COMPARISON, sort_keys=False))
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="perseusfilter", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_flags(p):
        p.add_argument("--model", required=True, help="'tiger', 'hallway2' or a path to a .POMDP file")
        p.add_argument("--goals", help="1-based goal states, e.g. '69-72' (builtin models know theirs)")

    p = sub.add_parser("sample", help="random-walk belief sampling")
    model_flags(p)
    p.add_argument("-n", type=int, required=True, help="number of beliefs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("filter", help="drop near-duplicate beliefs")
    p.add_argument("--beliefs", required=True, help="belief-set file from 'sample'")
    p.add_argument("--threshold", type=float, required=True, help="L-inf similarity threshold in (0, 1)")
    p.add_argument("--method", choices=("plain", "sorted"), default="plain",
                   help="sorted: scan only survivors within the threshold on the first coordinate")
    p.add_argument("--report", help="append the CSV report row to this file (default: stdout)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("solve", help="randomized point-based value iteration")
    model_flags(p)
    p.add_argument("--beliefs", required=True)
    p.add_argument("--convergence", type=float, default=1e-4)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--time-budget", type=float, help="seconds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="per-iteration CSV trace")
    p.add_argument("--out", required=True, help="policy document (JSON)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", help="Monte-Carlo expected reward of a policy")
    model_flags(p)
    p.add_argument("--policy", required=True)
    p.add_argument("--trials-per-start", type=int, default=10)
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--discount", type=float, help="reward discount (default: the model's)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="episode CSV (default: stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="filtered-vs-unfiltered comparison")
    p.add_argument("--config", help="YAML experiment config (default: the Hallway2 two-arm setup)")
    p.add_argument("--seed", type=int, help="run only this seed")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", default="-", help="report CSV (default: stdout)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("show-config", help="print the default experiment config")
    p.set_defaults(func=cmd_show_config)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"perseusfilter: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PomdpParseError, OSError, ValueError) as exc:
        print(f"perseusfilter: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
