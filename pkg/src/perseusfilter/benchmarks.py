"""Tiger and Hallway2 benchmark models.

Tiger uses the standard literature parameters (listen accuracy 0.85, listen
cost -1, +10 / -100 for opening the correct / wrong door, discount 0.95).

Hallway2 is 23 grid cells x 4 headings = 92 states, 5 actions and 17
observations. Cell layout, state numbering, sensor model and goal reward are
taken from the published problem description. The original ``hallway2.POMDP``
file could not be obtained for this repository, so the vendored
``data/hallway2.POMDP`` is generated by :func:`build_hallway2` and its
movement noise (``HALLWAY2_NOISE``) is a documented reconstruction, not the
canonical table. Pass ``--model`` with the canonical file to use it instead;
the rest of the package does not care where the model came from.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .core import PomdpModel

TIGER_LEFT, TIGER_RIGHT = 0, 1
LISTEN, OPEN_LEFT, OPEN_RIGHT = 0, 1, 2
HEAR_LEFT, HEAR_RIGHT = 0, 1


def build_tiger(discount: float = 0.95, listen_accuracy: float = 0.85) -> PomdpModel:
    T = np.empty((3, 2, 2))
    T[LISTEN] = np.eye(2)
    T[OPEN_LEFT] = T[OPEN_RIGHT] = 0.5
    O = np.empty((3, 2, 2))
    miss = round(1.0 - listen_accuracy, 12)
    O[LISTEN] = [[listen_accuracy, miss], [miss, listen_accuracy]]
    O[OPEN_LEFT] = O[OPEN_RIGHT] = 0.5
    R = np.empty((3, 2, 2))
    R[LISTEN] = -1.0
    R[OPEN_LEFT, TIGER_LEFT] = -100.0
    R[OPEN_LEFT, TIGER_RIGHT] = 10.0
    R[OPEN_RIGHT, TIGER_LEFT] = 10.0
    R[OPEN_RIGHT, TIGER_RIGHT] = -100.0
    return PomdpModel(
        T, O, R, discount,
        state_labels=["tiger-left", "tiger-right"],
        action_labels=["listen", "open-left", "open-right"],
        observation_labels=["hear-left", "hear-right"],
        name="tiger",
    )


# ---------------------------------------------------------------------------
# Hallway2
# ---------------------------------------------------------------------------

# Open cells per grid row (5 rows x 7 columns), in the state-numbering order.
HALLWAY2_LAYOUT = (
    (1, 2, 3, 4, 5),
    (0, 1, 3, 5, 6),
    (1, 3, 5),
    (0, 1, 3, 5, 6),
    (1, 2, 3, 4, 5),
)
HALLWAY2_GOAL_CELL = 17
NORTH, EAST, SOUTH, WEST = range(4)
_STEP = {NORTH: (-1, 0), EAST: (0, 1), SOUTH: (1, 0), WEST: (0, -1)}

HALLWAY2_ACTIONS = ("forward", "turn-left", "turn-right", "turn-around", "stay")
FORWARD, TURN_LEFT, TURN_RIGHT, TURN_AROUND, STAY = range(5)
GOAL_OBSERVATION = 16

SENSE_IF_WALL = 0.9
SENSE_IF_OPEN = 0.05

# Movement noise of the reconstruction: outcome -> probability.
HALLWAY2_NOISE = {
    "forward": {"move": 0.8, "none": 0.1, "veer-left": 0.05, "veer-right": 0.05},
    "turn": {"intended": 0.8, "none": 0.1, "overshoot": 0.1},
    "turn-around": {"intended": 0.8, "left": 0.1, "right": 0.1},
}


@dataclass(frozen=True)
class WallConfig:
    """Walls adjacent to the agent, relative to its heading."""

    front: bool
    right: bool
    back: bool
    left: bool

    def as_tuple(self) -> tuple[bool, bool, bool, bool]:
        return (self.front, self.right, self.back, self.left)


def observation_index(sensed: tuple[bool, bool, bool, bool]) -> int:
    """Wall-sensor pattern (front, right, back, left) -> observation 0..15; bit i is sensor i."""
    return sum(int(bit) << i for i, bit in enumerate(sensed))


def sensor_observation_distribution(cfg: WallConfig) -> np.ndarray:
    """Distribution over the 16 wall-sensor observations for a wall configuration.

    Sensors fire independently: 0.9 when a wall is present, 0.05 when it is not.
    """
    probs = np.empty(16)
    for sensed in itertools.product((False, True), repeat=4):
        p = 1.0
        for wall, hit in zip(cfg.as_tuple(), sensed):
            fire = SENSE_IF_WALL if wall else SENSE_IF_OPEN
            p *= fire if hit else 1.0 - fire
        probs[observation_index(sensed)] = p
    return probs


def _cells() -> list[tuple[int, int]]:
    return [(r, c) for r, cols in enumerate(HALLWAY2_LAYOUT) for c in cols]


def hallway2_state(cell: int, heading: int) -> int:
    return 4 * cell + heading


def hallway2_goal_states() -> frozenset:
    """0-based indices of the four headings of the goal cell (1-based states 69-72)."""
    return frozenset(hallway2_state(HALLWAY2_GOAL_CELL, h) for h in range(4))


def hallway2_wall_config(state: int) -> WallConfig:
    cells = _cells()
    open_cells = set(cells)
    r, c = cells[state // 4]
    heading = state % 4
    walls = []
    for rel in range(4):
        dr, dc = _STEP[(heading + rel) % 4]
        walls.append((r + dr, c + dc) not in open_cells)
    return WallConfig(*walls)


def build_hallway2(discount: float = 0.95) -> PomdpModel:
    cells = _cells()
    index = {rc: i for i, rc in enumerate(cells)}
    S = 4 * len(cells)
    goals = hallway2_goal_states()
    non_goal = [s for s in range(S) if s not in goals]
    restart = np.zeros(S)
    restart[non_goal] = 1.0 / len(non_goal)

    T = np.zeros((5, S, S))
    fwd, turn, around = HALLWAY2_NOISE["forward"], HALLWAY2_NOISE["turn"], HALLWAY2_NOISE["turn-around"]
    for s in range(S):
        if s in goals:
            T[:, s, :] = restart
            continue
        cell, h = divmod(s, 4)
        r, c = cells[cell]
        dr, dc = _STEP[h]
        ahead = index.get((r + dr, c + dc), cell)
        left, right, back = (h + 3) % 4, (h + 1) % 4, (h + 2) % 4

        T[FORWARD, s, hallway2_state(ahead, h)] += fwd["move"]
        T[FORWARD, s, s] += fwd["none"]
        T[FORWARD, s, hallway2_state(ahead, left)] += fwd["veer-left"]
        T[FORWARD, s, hallway2_state(ahead, right)] += fwd["veer-right"]

        for action, target in ((TURN_LEFT, left), (TURN_RIGHT, right)):
            T[action, s, hallway2_state(cell, target)] += turn["intended"]
            T[action, s, s] += turn["none"]
            T[action, s, hallway2_state(cell, back)] += turn["overshoot"]

        T[TURN_AROUND, s, hallway2_state(cell, back)] += around["intended"]
        T[TURN_AROUND, s, hallway2_state(cell, left)] += around["left"]
        T[TURN_AROUND, s, hallway2_state(cell, right)] += around["right"]

        T[STAY, s, s] = 1.0

    O = np.zeros((5, S, 17))
    for s in range(S):
        if s in goals:
            O[:, s, GOAL_OBSERVATION] = 1.0
        else:
            O[:, s, :16] = sensor_observation_distribution(hallway2_wall_config(s))

    R = np.zeros((5, S, S))
    for g in goals:
        R[:, non_goal, g] = 1.0

    return PomdpModel(
        T, O, R, discount,
        terminal_states=goals,
        action_labels=list(HALLWAY2_ACTIONS),
        name="hallway2",
    )


HALLWAY2_FILE_HEADER = """\
Hallway2: 23 cells x 4 headings = 92 states, 5 actions, 17 observations.
State 4*cell + h, h = 0 up, 1 right, 2 down, 3 left; cells numbered row by row.
Observations 0-15: wall-sensor bits (front=1, right=2, back=4, left=8);
a sensor fires with p=0.9 next to a wall and p=0.05 otherwise. Observation 16
is the goal observation, emitted with certainty in the goal cell (states 68-71).
Reward +1 for entering a goal state; goal states restart uniformly over the
88 non-goal states under every action.

RECONSTRUCTION: movement noise is not the canonical table. forward: 0.8 move,
0.1 no move, 0.05 move and veer left, 0.05 move and veer right (blocked moves
stay in the cell). turn-left/right: 0.8 intended, 0.1 no turn, 0.1 overshoot
to turn-around. turn-around: 0.8 intended, 0.1 left, 0.1 right. stay: 1.0.
Generated by perseusfilter.benchmarks.build_hallway2."""


def data_path(name: str) -> Path:
    return Path(str(resources.files("perseusfilter") / "data" / name))


def load_hallway2() -> PomdpModel:
    """The vendored Hallway2 file with its goal states attached."""
    from .parser import load_model

    return load_model(data_path("hallway2.POMDP"), hallway2_goal_states())


def load_tiger() -> PomdpModel:
    from .parser import load_model

    return load_model(data_path("tiger.POMDP"))
