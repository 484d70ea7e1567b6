"""Discrete POMDP model, value-function containers and Bayes belief updating.

Array layout used throughout the package:

    transition[a, s, s']   p(s' | s, a)
    observation[a, s', o]  p(o | s', a)
    reward[a, s, s']       R(s, a, s')

Beliefs are plain 1-D float64 arrays of length ``num_states``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

ROW_SUM_TOL = 1e-6
BELIEF_SUM_TOL = 1e-9


class ImpossibleObservation(ValueError):
    """Raised when an observation has zero probability under (belief, action)."""


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PomdpModel:
    transition: np.ndarray
    observation: np.ndarray
    reward: np.ndarray
    discount: float
    terminal_states: frozenset = frozenset()
    initial_belief: Optional[np.ndarray] = None
    state_labels: Optional[Sequence[str]] = None
    action_labels: Optional[Sequence[str]] = None
    observation_labels: Optional[Sequence[str]] = None
    name: str = "pomdp"

    def __post_init__(self):
        T = np.ascontiguousarray(self.transition, dtype=np.float64)
        O = np.ascontiguousarray(self.observation, dtype=np.float64)
        R = np.ascontiguousarray(self.reward, dtype=np.float64)
        if T.ndim != 3 or T.shape[1] != T.shape[2]:
            raise DimensionMismatch(f"transition must be (A, S, S), got {T.shape}")
        A, S, _ = T.shape
        if O.ndim != 3 or O.shape[:2] != (A, S):
            raise DimensionMismatch(f"observation must be (A, S, O), got {O.shape}")
        if R.shape != (A, S, S):
            raise DimensionMismatch(f"reward must be {(A, S, S)}, got {R.shape}")
        b0 = self.initial_belief
        b0 = np.full(S, 1.0 / S) if b0 is None else np.asarray(b0, dtype=np.float64)
        if b0.shape != (S,):
            raise DimensionMismatch(f"initial belief must have length {S}")
        for arr in (T, O, R, b0):
            arr.flags.writeable = False
        object.__setattr__(self, "transition", T)
        object.__setattr__(self, "observation", O)
        object.__setattr__(self, "reward", R)
        object.__setattr__(self, "initial_belief", b0)
        object.__setattr__(self, "discount", float(self.discount))
        object.__setattr__(self, "terminal_states", frozenset(int(s) for s in self.terminal_states))

    @property
    def num_states(self) -> int:
        return self.transition.shape[1]

    @property
    def num_actions(self) -> int:
        return self.transition.shape[0]

    @property
    def num_observations(self) -> int:
        return self.observation.shape[2]

    @property
    def non_terminal_states(self) -> list[int]:
        return [s for s in range(self.num_states) if s not in self.terminal_states]

    def with_terminal_states(self, terminal_states) -> "PomdpModel":
        return PomdpModel(
            self.transition, self.observation, self.reward, self.discount,
            frozenset(terminal_states), self.initial_belief,
            self.state_labels, self.action_labels, self.observation_labels, self.name,
        )


@dataclass(frozen=True)
class AlphaVector:
    coefficients: np.ndarray
    action: int


@dataclass(eq=False)
class ValueFunction:
    """A finite set of alpha vectors stored as a ``(k, S)`` matrix plus action labels."""

    alphas: np.ndarray
    actions: np.ndarray = field(default=None)

    def __post_init__(self):
        self.alphas = np.atleast_2d(np.asarray(self.alphas, dtype=np.float64))
        if self.actions is None:
            self.actions = np.zeros(len(self.alphas), dtype=np.int64)
        self.actions = np.asarray(self.actions, dtype=np.int64).reshape(-1)
        if len(self.alphas) == 0:
            raise ValueError("a value function needs at least one alpha vector")
        if len(self.actions) != len(self.alphas):
            raise DimensionMismatch("one action label per alpha vector")

    @classmethod
    def from_vectors(cls, vectors: Sequence[AlphaVector]) -> "ValueFunction":
        return cls(np.array([v.coefficients for v in vectors]), np.array([v.action for v in vectors]))

    def __len__(self) -> int:
        return len(self.alphas)

    def __getitem__(self, i: int) -> AlphaVector:
        return AlphaVector(self.alphas[i].copy(), int(self.actions[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def num_states(self) -> int:
        return self.alphas.shape[1]


def as_belief(b, num_states: Optional[int] = None) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 1 or (num_states is not None and b.shape[0] != num_states):
        raise DimensionMismatch(f"belief must be a vector of length {num_states}, got shape {b.shape}")
    return b


def is_belief(b, tol: float = BELIEF_SUM_TOL) -> bool:
    b = np.asarray(b, dtype=np.float64)
    return bool(np.all(b >= 0.0) and abs(b.sum() - 1.0) <= tol)


def observation_likelihoods(model: PomdpModel, b: np.ndarray, a: int) -> np.ndarray:
    """Pr(o | b, a) for every observation o."""
    predicted = b @ model.transition[a]
    return predicted @ model.observation[a]


def belief_update(model: PomdpModel, b, a: int, o: int) -> np.ndarray:
    """Bayes filter step: b'(s') ∝ p(o|s',a) · Σ_s p(s'|s,a) b(s)."""
    b = as_belief(b, model.num_states)
    unnormalized = (b @ model.transition[a]) * model.observation[a, :, o]
    total = unnormalized.sum()
    if not total > 0.0:
        raise ImpossibleObservation(f"observation {o} has zero probability after action {a}")
    return unnormalized / total


def immediate_reward_vector(model: PomdpModel, a: int) -> np.ndarray:
    """r_a(s) = Σ_{s'} p(s'|s,a) R(s,a,s')."""
    return np.einsum("ij,ij->i", model.transition[a], model.reward[a])


def immediate_rewards(model: PomdpModel) -> np.ndarray:
    """All ``r_a`` stacked as an ``(A, S)`` matrix."""
    return np.einsum("aij,aij->ai", model.transition, model.reward)


def validate_model(model: PomdpModel) -> list[str]:
    """Check the stochasticity and metadata invariants; returns one message per problem."""
    diagnostics = []
    S = model.num_states
    for name, table in (("transition", model.transition), ("observation", model.observation)):
        for a in range(table.shape[0]):
            for s in range(table.shape[1]):
                row = table[a, s]
                if np.any(row < 0.0):
                    diagnostics.append(
                        f"{name} row (action {a}, state {s}) has negative entry {row.min():.6g}"
                    )
                total = row.sum()
                if abs(total - 1.0) > ROW_SUM_TOL:
                    diagnostics.append(
                        f"{name} row (action {a}, state {s}) sums to {total:.6g}, expected 1"
                    )
    if not (0.0 <= model.discount < 1.0):
        diagnostics.append(f"discount {model.discount} outside [0, 1)")
    bad = sorted(s for s in model.terminal_states if not 0 <= s < S)
    if bad:
        diagnostics.append(f"terminal states {bad} outside 0..{S - 1}")
    b0 = model.initial_belief
    if np.any(b0 < 0.0) or abs(b0.sum() - 1.0) > ROW_SUM_TOL:
        diagnostics.append(f"initial belief sums to {b0.sum():.6g} or has negative entries")
    return diagnostics
