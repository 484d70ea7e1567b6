"""Monte-Carlo measurement of control quality.

Every non-terminal state is used as the hidden start state ``trials_per_start``
times. The agent always starts from the model's initial belief, acts with the
action of the maximizing alpha vector, updates its belief by Bayes' rule and
collects discounted reward until it enters a terminal state or hits the step
cap. The score is the mean discounted return over all episodes.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .core import PomdpModel, ValueFunction

DEFAULT_MAX_STEPS = 251


@dataclass
class EvalConfig:
    trials_per_start: int = 10
    discount: Optional[float] = None  # None: use the model's discount
    max_steps_per_episode: int = DEFAULT_MAX_STEPS
    seed: int = 0

    def __post_init__(self):
        if self.trials_per_start < 1:
            raise ValueError("trials_per_start must be >= 1")
        if self.max_steps_per_episode < 1:
            raise ValueError("max_steps_per_episode must be >= 1")


@dataclass
class EvalResult:
    mean_reward: float
    per_start_means: dict
    episode_rewards: np.ndarray
    episodes_truncated: int
    episode_starts: np.ndarray = field(default=None)
    episode_steps: np.ndarray = field(default=None)
    truncated: np.ndarray = field(default=None)

    @property
    def std_reward(self) -> float:
        return float(np.std(self.episode_rewards, ddof=1)) if len(self.episode_rewards) > 1 else 0.0

    def to_csv(self) -> str:
        """One row per episode, then a summary row with the mean reward."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["episode", "start_state", "reward", "steps", "truncated"])
        for e, (s, r, n, t) in enumerate(zip(self.episode_starts, self.episode_rewards,
                                             self.episode_steps, self.truncated)):
            writer.writerow([e + 1, int(s) + 1, repr(float(r)), int(n), int(bool(t))])
        writer.writerow(["summary", "", repr(self.mean_reward), int(self.episode_steps.sum()),
                         self.episodes_truncated])
        return buf.getvalue()


class _EpisodeRunner:
    def __init__(self, model: PomdpModel, V: ValueFunction, discount: float, max_steps: int, backend=None):
        self.impl = kernels.get_backend(backend)
        self.T = model.transition
        self.O = model.observation
        self.R = model.reward
        self.T_cdf = np.cumsum(self.T, axis=2)
        self.O_cdf = np.cumsum(self.O, axis=2)
        self.alphas = np.ascontiguousarray(V.alphas)
        self.actions = np.ascontiguousarray(V.actions, dtype=np.int64)
        self.b0 = np.array(model.initial_belief)
        self.terminal = np.zeros(model.num_states, dtype=np.uint8)
        self.terminal[list(model.terminal_states)] = 1
        self.discount = discount
        self.max_steps = max_steps

    def run(self, s0: int, rng: np.random.Generator):
        uniforms = rng.random((self.max_steps, 2))
        return self.impl.simulate_episode(
            self.T_cdf, self.O_cdf, self.T, self.O, self.R, self.alphas, self.actions,
            self.b0, int(s0), self.terminal, float(self.discount), int(self.max_steps), uniforms,
        )


def _episode_rng(seed: int, episode: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(episode)])))


def run_episode(model: PomdpModel, V: ValueFunction, s0: int, config: EvalConfig, rng=None,
                backend=None) -> tuple[float, int, bool]:
    """One episode from hidden state ``s0``; returns (discounted reward, steps, truncated)."""
    if s0 in model.terminal_states:
        raise ValueError(f"start state {s0} is terminal")
    discount = model.discount if config.discount is None else config.discount
    runner = _EpisodeRunner(model, V, discount, config.max_steps_per_episode, backend)
    if rng is None:
        rng = _episode_rng(config.seed, 0)
    reward, steps, truncated = runner.run(s0, rng)
    return float(reward), int(steps), bool(truncated)


def sample_rewards(model: PomdpModel, V: ValueFunction, config: EvalConfig, backend=None) -> EvalResult:
    """Episode e (1-based) starts in the ceil(e / trials_per_start)-th non-terminal state.

    Episode e draws from its own stream seeded by (seed, e), so results do not
    depend on the order episodes are run in.
    """
    starts = model.non_terminal_states
    if not starts:
        raise ValueError("model has no non-terminal start state")
    discount = model.discount if config.discount is None else config.discount
    runner = _EpisodeRunner(model, V, discount, config.max_steps_per_episode, backend)
    n = len(starts) * config.trials_per_start
    rewards = np.empty(n)
    steps = np.empty(n, dtype=np.int64)
    truncated = np.empty(n, dtype=bool)
    start_of = np.empty(n, dtype=np.int64)
    for e in range(1, n + 1):
        s0 = starts[-(-e // config.trials_per_start) - 1]
        r, k, t = runner.run(s0, _episode_rng(config.seed, e))
        rewards[e - 1], steps[e - 1], truncated[e - 1], start_of[e - 1] = r, k, t, s0
    per_start = {int(s): float(rewards[start_of == s].mean()) for s in starts}
    return EvalResult(
        mean_reward=float(rewards.mean()),
        per_start_means=per_start,
        episode_rewards=rewards,
        episodes_truncated=int(truncated.sum()),
        episode_starts=start_of,
        episode_steps=steps,
        truncated=truncated,
    )
