"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--beliefs 10000] [--episodes 880] [--repeat 3]

Filters Hallway2 random-walk beliefs at threshold 0.01 (plain and sorted scans)
and simulates greedy-policy episodes, checking that both backends agree.
"""
import argparse
import time

import numpy as np

from perseusfilter import EvalConfig, SolveConfig, kernels, sample_belief_set, sample_rewards, solve
from perseusfilter.benchmarks import load_hallway2


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--beliefs", type=int, default=10_000)
    ap.add_argument("--episodes", type=int, default=880, help="rounded to a multiple of the 88 start states")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if kernels.compiled_backend is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    model = load_hallway2()
    X = sample_belief_set(model, args.beliefs, seed=1).beliefs
    backends = ("python", "cython")

    print(f"filter: {args.beliefs} Hallway2 beliefs, threshold 0.01")
    for name in ("greedy_filter", "greedy_filter_sorted"):
        results = {}
        for be in backends:
            fn = getattr(kernels.get_backend(be), name)
            results[be] = best_of(lambda: fn(X, 0.01), 1 if be == "python" else args.repeat)
        assert np.array_equal(results["python"][1], results["cython"][1])
        py, cy = results["python"][0], results["cython"][0]
        print(f"  {name:22s} python {py:8.3f}s  cython {cy:8.4f}s  speedup {py / cy:7.1f}x"
              f"  ({len(results['cython'][1])} kept)")

    V = solve(model, sample_belief_set(model, 500, seed=2), SolveConfig(1e-3, max_iterations=30, seed=1)).value_function
    trials = max(1, args.episodes // len(model.non_terminal_states))
    cfg = EvalConfig(trials_per_start=trials, seed=3)
    print(f"episodes: {trials * len(model.non_terminal_states)} Hallway2 episodes, |V| = {len(V)}")
    results = {be: best_of(lambda: sample_rewards(model, V, cfg, backend=be), args.repeat) for be in backends}
    assert np.array_equal(results["python"][1].episode_steps, results["cython"][1].episode_steps)
    py, cy = results["python"][0], results["cython"][0]
    print(f"  {'sample_rewards':22s} python {py:8.3f}s  cython {cy:8.4f}s  speedup {py / cy:7.1f}x"
          f"  (mean reward {results['cython'][1].mean_reward:.4f})")


if __name__ == "__main__":
    main()
