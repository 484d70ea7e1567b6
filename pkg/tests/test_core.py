import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import identity_model
from oracles import bayes_update_loops, random_model
from perseusfilter import (
    ImpossibleObservation, PomdpModel, ValueFunction, belief_update, immediate_reward_vector,
    validate_model,
)
from perseusfilter.benchmarks import HEAR_LEFT, LISTEN, OPEN_LEFT
from perseusfilter.core import DimensionMismatch, is_belief, observation_likelihoods


def test_tiger_listen_update(tiger):
    b = belief_update(tiger, [0.5, 0.5], LISTEN, HEAR_LEFT)
    expected = bayes_update_loops(tiger.transition, tiger.observation, [0.5, 0.5], LISTEN, HEAR_LEFT)
    np.testing.assert_allclose(b, expected, rtol=0, atol=1e-15)
    np.testing.assert_allclose(b, [0.85, 0.15], atol=1e-15)


def test_update_with_identity_and_certain_observation_is_noop():
    m = identity_model(num_states=4)
    b = np.array([0.1, 0.2, 0.3, 0.4])
    np.testing.assert_allclose(belief_update(m, b, 0, 0), b, atol=1e-15)


def test_impossible_observation():
    T = np.eye(2)[None]
    O = np.array([[[1.0, 0.0], [0.0, 1.0]]])
    m = PomdpModel(T, O, np.zeros((1, 2, 2)), 0.9)
    with pytest.raises(ImpossibleObservation):
        belief_update(m, [1.0, 0.0], 0, 1)


def test_update_rejects_wrong_dimension(tiger):
    with pytest.raises(DimensionMismatch):
        belief_update(tiger, [1.0, 0.0, 0.0], 0, 0)


def test_validate_tiger_clean(tiger):
    assert validate_model(tiger) == []


def test_validate_reports_row_sum():
    T = np.array([[[0.5, 0.4], [0.0, 1.0]]])
    O = np.ones((1, 2, 1))
    m = PomdpModel(T, O, np.zeros((1, 2, 2)), 0.9)
    diags = validate_model(m)
    assert len(diags) == 1
    assert "action 0, state 0" in diags[0] and "0.9" in diags[0]


def test_validate_reports_negative_observation():
    T = np.eye(2)[None]
    O = np.array([[[1.2, -0.2], [0.5, 0.5]]])
    m = PomdpModel(T, O, np.zeros((1, 2, 2)), 0.9)
    diags = validate_model(m)
    assert len(diags) == 1
    assert "negative" in diags[0]


def test_validate_discount_and_terminals():
    m = identity_model(discount=1.0, terminal=[7])
    diags = validate_model(m)
    assert any("discount" in d for d in diags)
    assert any("terminal" in d for d in diags)


def test_immediate_reward_tiger(tiger):
    r = immediate_reward_vector(tiger, LISTEN)
    oracle = [sum(tiger.transition[LISTEN, s, s2] * tiger.reward[LISTEN, s, s2] for s2 in range(2))
              for s in range(2)]
    np.testing.assert_array_equal(r, oracle)
    np.testing.assert_array_equal(r, [-1.0, -1.0])
    np.testing.assert_array_equal(immediate_reward_vector(tiger, OPEN_LEFT), [-100.0, 10.0])


def test_immediate_reward_zero_model():
    np.testing.assert_array_equal(immediate_reward_vector(identity_model(), 0), np.zeros(3))


def test_immediate_reward_hallway2_stay_next_to_goal(hallway2):
    # states in the cell left of the goal: forward when facing right enters the goal w.p. 0.9
    facing_goal = 4 * 16 + 1
    forward, stay = 0, 4
    r = immediate_reward_vector(hallway2, forward)
    brute = sum(hallway2.transition[forward, facing_goal, s2] * hallway2.reward[forward, facing_goal, s2]
                for s2 in range(92))
    assert r[facing_goal] == pytest.approx(brute, abs=1e-15)
    assert r[facing_goal] == pytest.approx(0.9)
    assert np.all(immediate_reward_vector(hallway2, stay) == 0.0)


def test_model_is_immutable(tiger):
    with pytest.raises(ValueError):
        tiger.transition[0, 0, 0] = 0.3


def test_value_function_needs_vectors():
    with pytest.raises(ValueError):
        ValueFunction(np.empty((0, 3)))


dims = st.tuples(st.integers(1, 5), st.integers(1, 3), st.integers(1, 4), st.integers(0, 2**32 - 1))


@settings(max_examples=60, deadline=None)
@given(dims)
def test_update_stays_on_simplex_and_marginals_sum_to_one(params):
    S, A, nobs, seed = params
    rng = np.random.default_rng(seed)
    T, O, R, g = random_model(rng, S, A, nobs)
    m = PomdpModel(T, O, R, g)
    b = rng.dirichlet(np.ones(S))
    for a in range(A):
        likelihoods = observation_likelihoods(m, b, a)
        assert abs(likelihoods.sum() - 1.0) < 1e-9
        for o in range(nobs):
            if likelihoods[o] > 0:
                assert is_belief(belief_update(m, b, a, o))


@settings(max_examples=40, deadline=None)
@given(dims, st.floats(1e-3, 1e3))
def test_update_is_scale_invariant(params, scale):
    S, A, nobs, seed = params
    rng = np.random.default_rng(seed)
    T, O, R, g = random_model(rng, S, A, nobs)
    m = PomdpModel(T, O, R, g)
    b = rng.dirichlet(np.ones(S))
    a, o = int(rng.integers(A)), int(rng.integers(nobs))
    np.testing.assert_allclose(belief_update(m, b * scale, a, o), belief_update(m, b, a, o), rtol=1e-12, atol=1e-15)
