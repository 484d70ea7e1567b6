"""Belief-set generation by a random walk of Bayes updates.

Actions are drawn uniformly, the next state from the transition model and the
observation from the observation model of the hidden state the walk tracks.
Reaching a terminal state restarts the walk from the initial belief.

Random streams are numpy ``Generator`` objects (PCG64) built from a
``SeedSequence``; independent streams for parallel work come from
``SeedSequence(seed).spawn(n)`` (see :func:`spawn_rngs`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .core import ImpossibleObservation, PomdpModel, as_belief

UNDERFLOW = 1e-300


class BeliefUnderflow(ImpossibleObservation):
    """Every entry of the unnormalized updated belief fell below ``UNDERFLOW``."""


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_rngs(seed, n: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(ss)) for ss in np.random.SeedSequence(seed).spawn(n)]


def draw(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw from a discrete distribution; zero-mass outcomes are never returned."""
    cdf = np.cumsum(probs)
    j = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    if j >= len(cdf):
        j = int(np.flatnonzero(probs > 0)[-1])
    return j


@dataclass
class BeliefSet:
    beliefs: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.beliefs = np.asarray(self.beliefs, dtype=np.float64)
        if self.beliefs.ndim == 1:
            self.beliefs = self.beliefs.reshape(1, -1) if self.beliefs.size else self.beliefs.reshape(0, 0)

    def __len__(self) -> int:
        return self.beliefs.shape[0]

    def __iter__(self):
        return iter(self.beliefs)

    def __getitem__(self, i):
        return self.beliefs[i]

    @property
    def dimension(self) -> int:
        return self.beliefs.shape[1]

    @classmethod
    def concatenate(cls, sets: Iterable["BeliefSet"]) -> "BeliefSet":
        sets = list(sets)
        seeds = [s for bs in sets for s in bs.provenance.get("seeds", [])]
        counts = sum(bs.provenance.get("requested", len(bs)) for bs in sets)
        model = next((bs.provenance.get("model") for bs in sets if "model" in bs.provenance), None)
        beliefs = np.concatenate([bs.beliefs for bs in sets]) if sets else np.empty((0, 0))
        return cls(beliefs, {"model": model, "seeds": seeds, "requested": counts})


def sample_successor(model: PomdpModel, b, s: int, rng) -> tuple[int, int, int, np.ndarray]:
    """Draw (a, s', o) from the generative model and return them with the updated belief."""
    b = as_belief(b, model.num_states)
    a = int(rng.integers(model.num_actions))
    s2 = draw(model.transition[a, s], rng)
    o = draw(model.observation[a, s2], rng)
    unnormalized = (b @ model.transition[a]) * model.observation[a, :, o]
    if not np.any(unnormalized >= UNDERFLOW):
        raise BeliefUnderflow(f"belief underflow after action {a}, observation {o}")
    return a, s2, o, unnormalized / unnormalized.sum()


def sample_belief_set(model: PomdpModel, n: int, seed=0, initial_belief: Optional[np.ndarray] = None) -> BeliefSet:
    """Collect ``n`` successive beliefs of a random walk from the initial belief."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = make_rng(seed)
    b0 = model.initial_belief if initial_belief is None else as_belief(initial_belief, model.num_states)
    out = np.empty((n, model.num_states))
    terminal = model.terminal_states
    b, s = b0, draw(b0, rng)
    for i in range(n):
        try:
            _, s2, _, b2 = sample_successor(model, b, s, rng)
        except BeliefUnderflow:
            b, s = b0, draw(b0, rng)
            _, s2, _, b2 = sample_successor(model, b, s, rng)
        out[i] = b2
        if s2 in terminal:
            b, s = b0, draw(b0, rng)
        else:
            b, s = b2, s2
    seed_repr = seed if not isinstance(seed, np.random.Generator) else None
    return BeliefSet(out, {"model": model.name, "seeds": [seed_repr], "requested": n})


def write_belief_set(bs: BeliefSet, path) -> None:
    """Header ``<count> <dimension>``, then one belief per line at full precision."""
    n = len(bs)
    d = bs.dimension if n else (bs.beliefs.shape[1] if bs.beliefs.ndim == 2 else 0)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{n} {d}\n")
        for row in bs.beliefs:
            fh.write(" ".join(repr(float(x)) for x in row))
            fh.write("\n")


def read_belief_set(path) -> BeliefSet:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: header must be '<count> <dimension>'")
        n, d = int(header[0]), int(header[1])
        rows = [line.split() for line in fh if line.strip()]
    if len(rows) != n:
        raise ValueError(f"{path}: header announces {n} beliefs, found {len(rows)}")
    beliefs = np.array([[float(x) for x in r] for r in rows], dtype=np.float64).reshape(n, d)
    return BeliefSet(beliefs, {"source": str(path), "requested": n})
