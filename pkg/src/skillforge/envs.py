"""Native environments behind one tiny interface.

Both environments are deterministic pure transition functions; episode and
epoch loops live in the runner. The continuous box is the main training
environment; the gridworld exists for exact, enumerable tests and cheap runs.

Box2DNavigation:
    - agent starts at the center of the unit box, observes (x, y) in [0,1]^2
    - actions in [-0.05, 0.05]^2, clamped there if the policy exceeds them
    - moves outside the box are projected back (componentwise clip)
    - episodes last 100 steps

Gridworld (N x N, default 9 x 9):
    0 = UP (row + 1), 1 = DOWN, 2 = LEFT (col - 1), 3 = RIGHT, 4 = STAY
    Observation is the normalized cell (col/(N-1), row/(N-1)); walls block.
    Policies emit continuous 2-D actions; `continuous_to_direction` maps
    them onto the grid moves so the same GMM policy drives both envs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UP, DOWN, LEFT, RIGHT, STAY = 0, 1, 2, 3, 4


@dataclass
class EnvState:
    observation: np.ndarray
    step_index: int


@dataclass(frozen=True)
class ActionSpec:
    kind: str  # "continuous_box" | "discrete"
    low: tuple[float, ...] | None = None
    high: tuple[float, ...] | None = None
    n: int | None = None

    def __post_init__(self):
        if self.kind == "continuous_box":
            if self.low is None or self.high is None:
                raise ValueError("continuous_box needs bounds")
            if not all(lo < hi for lo, hi in zip(self.low, self.high)):
                raise ValueError("bounds must satisfy low < high per dimension")
        elif self.kind == "discrete":
            if not self.n or self.n < 1:
                raise ValueError("discrete needs a positive cardinality")
        else:
            raise ValueError(f"unknown action kind {self.kind!r}")


@dataclass
class Transition:
    state: EnvState
    action: np.ndarray
    next_state: EnvState
    goal: int
    reward: float

    def __post_init__(self):
        if not np.isfinite(self.reward):
            raise ValueError("reward must be finite")


class Box2DNavigation:
    """Unit box with small bounded displacements, 100-step episodes."""

    name = "box2d"
    obs_dim = 2
    action_dim = 2
    horizon = 100
    action_scale = 0.05
    action_spec = ActionSpec("continuous_box", (-0.05, -0.05), (0.05, 0.05))

    def reset(self) -> EnvState:
        return EnvState(np.array([0.5, 0.5]), 0)

    def step(self, state: EnvState, action: np.ndarray) -> EnvState:
        a = np.clip(action, -self.action_scale, self.action_scale)
        obs = np.clip(state.observation + a, 0.0, 1.0)
        return EnvState(obs, state.step_index + 1)


def continuous_to_direction(action: np.ndarray, deadzone: float = 0.025) -> int:
    """Map a continuous 2-D action onto a grid move: dominant axis wins,
    small actions mean STAY. Component 0 is x (columns), 1 is y (rows)."""
    ax, ay = float(action[0]), float(action[1])
    if max(abs(ax), abs(ay)) < deadzone:
        return STAY
    if abs(ax) >= abs(ay):
        return RIGHT if ax > 0 else LEFT
    return UP if ay > 0 else DOWN


class Gridworld:
    """Discrete N x N grid, start at the center, walls block movement."""

    name = "gridworld"
    obs_dim = 2
    action_dim = 2  # policy-facing; discretized by step()
    num_directions = 5
    action_spec = ActionSpec("discrete", n=5)
    action_scale = 0.05

    def __init__(self, size: int = 9, horizon: int = 50):
        if size < 2 or size % 2 == 0:
            raise ValueError("grid size must be odd and >= 3 so a center cell exists")
        self.size = size
        self.horizon = horizon

    def _cell(self, observation: np.ndarray) -> tuple[int, int]:
        scale = self.size - 1
        return int(round(observation[0] * scale)), int(round(observation[1] * scale))

    def _observe(self, col: int, row: int) -> np.ndarray:
        scale = self.size - 1
        return np.array([col / scale, row / scale])

    def reset(self) -> EnvState:
        c = self.size // 2
        return EnvState(self._observe(c, c), 0)

    def grid_step(self, state: EnvState, direction: int) -> EnvState:
        if direction not in (UP, DOWN, LEFT, RIGHT, STAY):
            raise ValueError(f"invalid direction index {direction}")
        col, row = self._cell(state.observation)
        if direction == UP:
            row = min(row + 1, self.size - 1)
        elif direction == DOWN:
            row = max(row - 1, 0)
        elif direction == LEFT:
            col = max(col - 1, 0)
        elif direction == RIGHT:
            col = min(col + 1, self.size - 1)
        return EnvState(self._observe(col, row), state.step_index + 1)

    def step(self, state: EnvState, action: np.ndarray) -> EnvState:
        a = np.clip(action, -self.action_scale, self.action_scale)
        return self.grid_step(state, continuous_to_direction(a))


ENV_NAMES = ("box2d", "gridworld")


def make_env(name: str):
    if name == "box2d":
        return Box2DNavigation()
    if name == "gridworld":
        return Gridworld()
    raise ValueError(f"unknown environment {name!r}; expected one of {ENV_NAMES}")
