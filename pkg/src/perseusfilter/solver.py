"""Randomized point-based value iteration over a fixed belief set.

Each stage improves the value of every belief in the set, backing up only
beliefs whose value has not already been improved by a vector added earlier
in the same stage. Stages repeat until the relative change in the summed
belief-set value drops below a threshold, or an iteration/time budget runs out.
"""
from __future__ import annotations

import csv
import io
import json
import time
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import AlphaVector, PomdpModel, ValueFunction, as_belief, immediate_rewards
from .sampler import BeliefSet, make_rng


class DegenerateDenominator(ZeroDivisionError):
    pass


@dataclass
class SolveConfig:
    convergence_threshold: Optional[float] = 1e-4
    max_iterations: Optional[int] = None
    time_budget: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.convergence_threshold is None and self.max_iterations is None and self.time_budget is None:
            raise ValueError("set at least one of convergence_threshold, max_iterations, time_budget")
        if self.convergence_threshold is not None and self.convergence_threshold <= 0:
            raise ValueError("convergence_threshold must be positive")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    policy_size: int
    convergence: float
    elapsed: float
    sum_vb: float


@dataclass
class SolveResult:
    value_function: ValueFunction
    iterations: int
    trace: list = field(default_factory=list)
    stop_reason: str = ""
    elapsed: float = 0.0

    TRACE_FIELDS = ("iteration", "policy_size", "convergence", "sum_vb", "elapsed_seconds")

    def trace_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.TRACE_FIELDS)
        for r in self.trace:
            writer.writerow([r.iteration, r.policy_size, repr(r.convergence), repr(r.sum_vb), f"{r.elapsed:.3f}"])
        return buf.getvalue()


def initial_value_function(model: PomdpModel) -> ValueFunction:
    """A single vector with every coefficient min(R) / (1 - discount), labelled action 0.

    The quotient is formed exactly from the shortest decimal forms of min(R) and
    the discount and rounded once, so a discount of 0.95 with min(R) = -100
    gives exactly -2000 rather than the -1999.9999999999982 of float division.
    """
    if not model.discount < 1.0:
        raise ValueError("discount must be < 1")
    min_r = Fraction(repr(float(model.reward.min())))
    value = float(min_r / (1 - Fraction(repr(float(model.discount)))))
    return ValueFunction(np.full((1, model.num_states), value), np.zeros(1, dtype=np.int64))


def value_at(V: ValueFunction, b) -> tuple[float, int]:
    """max_i b·alpha_i and the smallest maximizing index."""
    vals = V.alphas @ np.asarray(b, dtype=np.float64)
    i = int(np.argmax(vals))
    return float(vals[i]), i


def values_at(V: ValueFunction, beliefs: np.ndarray) -> np.ndarray:
    return (np.asarray(beliefs) @ V.alphas.T).max(axis=1)


def convergence_metric(sum_vb_next: float, sum_vb_prev: float) -> float:
    """Relative change of the summed belief-set value: next / prev - 1."""
    if sum_vb_prev == 0:
        raise DegenerateDenominator("summed belief-set value of the previous iterate is 0")
    return sum_vb_next / sum_vb_prev - 1.0


class BackupOperator:
    """Point-based Bellman backup against a fixed value function.

    For belief b and action a, the observation-specific projection of alpha_i is
    g_{a,o}^i(s) = sum_{s'} p(o|s',a) p(s'|s,a) alpha_i(s'). Its value at b is
    computed as ((b T_a) ∘ O_a[:, o]) · alpha_i, so one matrix product scores all
    (a, o, i) triples without materializing the projections.
    """

    def __init__(self, model: PomdpModel, V: ValueFunction):
        self.model = model
        self.V = V
        self.T = model.transition
        self.O = model.observation
        self.Ot = np.ascontiguousarray(model.observation.transpose(0, 2, 1))  # (A, O, S')
        self.r = immediate_rewards(model)
        self.gamma = model.discount
        self.alphasT = np.ascontiguousarray(V.alphas.T)

    def __call__(self, b) -> AlphaVector:
        alpha, action = self.backup(b)
        return AlphaVector(alpha, action)

    def backup(self, b: np.ndarray) -> tuple[np.ndarray, int]:
        A, nobs, S = self.Ot.shape
        predicted = np.einsum("i,aij->aj", b, self.T)  # (A, S')
        weighted = self.Ot * predicted[:, None, :]  # (A, O, S')
        scores = weighted.reshape(A * nobs, S) @ self.alphasT  # (A*O, K)
        best = scores.argmax(axis=1).reshape(A, nobs)
        chosen = self.V.alphas[best]  # (A, O, S')
        combined = np.einsum("aoj,aoj->aj", chosen, self.Ot)
        q = self.r + self.gamma * np.einsum("aij,aj->ai", self.T, combined)
        a = int(np.argmax(q @ b))
        return q[a], a


def backup(model: PomdpModel, V: ValueFunction, b) -> AlphaVector:
    return BackupOperator(model, V)(as_belief(b, model.num_states))


def _belief_matrix(B) -> np.ndarray:
    return np.ascontiguousarray(B.beliefs if isinstance(B, BeliefSet) else np.atleast_2d(B), dtype=np.float64)


def _column_values(Bm: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    # One matrix-vector product per alpha so V_n(b) and V_{n+1}(b) are computed
    # identically; the >= test below relies on bit-equal values.
    out = np.empty((Bm.shape[0], len(alphas)))
    for k, alpha in enumerate(alphas):
        out[:, k] = Bm @ alpha
    return out


def perseus_stage(model: PomdpModel, B, Vn: ValueFunction, rng) -> ValueFunction:
    """One randomized backup stage; afterwards V_{n+1}(b) >= V_n(b) for every b in B."""
    Bm = _belief_matrix(B)
    if Bm.shape[0] == 0:
        raise ValueError("belief set is empty")
    rng = make_rng(rng)
    op = BackupOperator(model, Vn)
    prev = _column_values(Bm, Vn.alphas)
    prev_best = prev.argmax(axis=1)
    vn = prev[np.arange(len(Bm)), prev_best]

    new_alphas: list[np.ndarray] = []
    new_actions: list[int] = []
    seen: set = set()
    vnext = np.full(len(Bm), -np.inf)
    pending = np.arange(len(Bm))
    while pending.size:
        i = int(pending[rng.integers(pending.size)])
        alpha, action = op.backup(Bm[i])
        vals = Bm @ alpha
        if not vals[i] >= vn[i]:
            k = int(prev_best[i])
            alpha, action = Vn.alphas[k], int(Vn.actions[k])
            vals = prev[:, k]
        key = (action, alpha.tobytes())
        if key not in seen:
            seen.add(key)
            new_alphas.append(np.array(alpha))
            new_actions.append(action)
            np.maximum(vnext, vals, out=vnext)
        pending = np.flatnonzero(vnext < vn)
    return ValueFunction(np.array(new_alphas), np.array(new_actions, dtype=np.int64))


def sum_belief_values(V: ValueFunction, B) -> float:
    return float(values_at(V, _belief_matrix(B)).sum())


def solve(model: PomdpModel, B, config: SolveConfig, callback=None) -> SolveResult:
    """Iterate stages from the min(R)/(1-discount) initial vector until a stop rule fires.

    A stage whose predecessor has a summed value of exactly 0 records an infinite
    convergence metric and never counts as converged.
    """
    start = time.monotonic()
    Bm = _belief_matrix(B)
    rng = make_rng(config.seed)
    V = initial_value_function(model)
    sum_prev = sum_belief_values(V, Bm)
    trace: list[IterationRecord] = []
    reason = ""
    while True:
        if config.max_iterations is not None and len(trace) >= config.max_iterations:
            reason = "max_iterations"
            break
        if config.time_budget is not None and time.monotonic() - start >= config.time_budget:
            reason = "time_budget"
            break
        V = perseus_stage(model, Bm, V, rng)
        sum_next = sum_belief_values(V, Bm)
        try:
            metric = convergence_metric(sum_next, sum_prev)
        except DegenerateDenominator:
            metric = float("inf")
        record = IterationRecord(len(trace) + 1, len(V), metric, time.monotonic() - start, sum_next)
        trace.append(record)
        if callback is not None:
            callback(record)
        sum_prev = sum_next
        if config.convergence_threshold is not None and abs(metric) < config.convergence_threshold:
            reason = "converged"
            break
    return SolveResult(V, len(trace), trace, reason, time.monotonic() - start)


# ---------------------------------------------------------------------------
# policy documents
# ---------------------------------------------------------------------------

POLICY_FORMAT = "perseusfilter-policy"


def policy_to_dict(model: PomdpModel, V: ValueFunction) -> dict:
    return {
        "format": POLICY_FORMAT,
        "version": 1,
        "num_states": model.num_states,
        "num_actions": model.num_actions,
        "num_observations": model.num_observations,
        "discount": model.discount,
        "alphas": [
            {"action": int(a), "coefficients": [float(x) for x in alpha]}
            for alpha, a in zip(V.alphas, V.actions)
        ],
    }


def save_policy(path, model: PomdpModel, V: ValueFunction) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(policy_to_dict(model, V), fh, indent=1)
        fh.write("\n")


def load_policy(path, model: Optional[PomdpModel] = None) -> ValueFunction:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != POLICY_FORMAT:
        raise ValueError(f"{path}: not a {POLICY_FORMAT} document")
    if model is not None and (doc["num_states"], doc["num_actions"]) != (model.num_states, model.num_actions):
        raise ValueError(f"{path}: policy dimensions do not match the model")
    alphas = np.array([entry["coefficients"] for entry in doc["alphas"]], dtype=np.float64)
    actions = np.array([entry["action"] for entry in doc["alphas"]], dtype=np.int64)
    return ValueFunction(alphas.reshape(len(actions), doc["num_states"]), actions)
