"""Goal-selection strategies for the skill-discovery loop.

Three selectors share one interface:

  uniform   - fixed p(g) = 1/|G| (the DIAYN-style baseline)
  vic       - categorical p(g) reinforced by epoch returns; known to
              concentrate its mass onto a handful of goals
  dp        - diversity progress: a learning-progress bandit. The mean
              windowed drop in discriminator prediction error, taken over
              *all* goals and normalized, is credited to the pursued goal;
              p(g) is the softmax of the per-goal credit vector.

The dp selector starts with one forced pass over every goal (sampled
without replacement); p(g) stays uniform until that pass completes, and is
softmax-normalized from then on.

Time within an epoch is 1-based: the i-th error vector appended to an
ErrorBuffer carries time i. With smoothing eta and offset tau, the windowed
means compare steps (t+1-eta .. t+1) against (t+1-tau-eta .. t+1-tau),
which requires tau + eta + 1 <= steps recorded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numkit import softmax

VIC_LR = 0.1
VIC_BASELINE_DECAY = 0.9


class ErrorBuffer:
    """Ring of per-step, per-goal prediction-error vectors for one epoch."""

    def __init__(self, capacity: int, num_goals: int):
        if capacity < 1 or num_goals < 1:
            raise ValueError("capacity and num_goals must be positive")
        self.capacity = capacity
        self.num_goals = num_goals
        self.matrix = np.zeros((capacity, num_goals))
        self.write_cursor = 0  # total rows appended since reset

    def reset(self) -> None:
        self.write_cursor = 0

    def append(self, errors: np.ndarray) -> None:
        e = np.asarray(errors, dtype=np.float64)
        if e.shape != (self.num_goals,):
            raise ValueError(f"expected {self.num_goals} errors, got shape {e.shape}")
        if np.any(e < 0.0) or np.any(e > 1.0):
            raise ValueError("error entries must lie in [0, 1]")
        self.matrix[self.write_cursor % self.capacity] = e
        self.write_cursor += 1

    def rows_at(self, times: np.ndarray) -> np.ndarray:
        """Rows for 1-based step times; only the last `capacity` steps survive."""
        times = np.asarray(times)
        oldest = max(1, self.write_cursor - self.capacity + 1)
        if np.any(times < oldest) or np.any(times > self.write_cursor):
            raise ValueError(
                f"requested steps outside buffered range [{oldest}, {self.write_cursor}]"
            )
        return self.matrix[(times - 1) % self.capacity]


def window_mean_errors(buf: ErrorBuffer, eta: int, tau: int,
                       t_plus_1: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Mean error vectors over the recent window and the tau-offset window.

    Returns (mean at t+1, mean at t+1-tau), each averaging eta+1 rows.
    """
    if eta < 0 or tau < 1:
        raise ValueError("need eta >= 0 and tau >= 1")
    t = buf.write_cursor if t_plus_1 is None else t_plus_1
    if t - tau - eta < 1:
        raise ValueError(
            f"window needs tau + eta + 1 = {tau + eta + 1} steps of history, have {t}"
        )
    offsets = np.arange(eta + 1)
    recent = buf.rows_at(t - offsets).mean(axis=0)
    earlier = buf.rows_at(t - tau - offsets).mean(axis=0)
    return recent, earlier


def lp_per_goal(means_now: np.ndarray, means_then: np.ndarray) -> np.ndarray:
    """Learning progress per goal: earlier mean error minus recent mean error."""
    means_now = np.asarray(means_now, dtype=np.float64)
    means_then = np.asarray(means_then, dtype=np.float64)
    if means_now.shape != means_then.shape:
        raise ValueError("mismatched lengths")
    return means_then - means_now


def diversity_progress(lp: np.ndarray) -> float:
    """Normalize the per-goal progress by its max magnitude, then average.

    The normalization keeps the credit scale-free, so the softmax temperature
    controls greediness consistently across training stages. Result in [-1, 1].
    """
    lp = np.asarray(lp, dtype=np.float64)
    peak = np.abs(lp).max()
    if peak == 0.0:
        return 0.0
    return float((lp / peak).mean())


@dataclass
class UniformState:
    num_goals: int


@dataclass
class VICState:
    logits: np.ndarray
    lr: float = VIC_LR
    baseline: float = 0.0
    baseline_decay: float = VIC_BASELINE_DECAY

    @property
    def num_goals(self) -> int:
        return self.logits.size


@dataclass
class DPState:
    dp: np.ndarray
    p_goal: np.ndarray
    eta: int
    tau: int
    temperature: float
    init_remaining: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.eta < 0 or self.tau < 1:
            raise ValueError("need eta >= 0 and tau >= 1")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if abs(self.p_goal.sum() - 1.0) > 1e-12:
            raise ValueError("p_goal must sum to 1")

    @property
    def num_goals(self) -> int:
        return self.dp.size


def make_selector(strategy: str, num_goals: int, *, eta: int = 250, tau: int = 250,
                  temperature: float = 0.1):
    if num_goals < 1:
        raise ValueError("need at least one goal")
    if strategy == "uniform":
        return UniformState(num_goals)
    if strategy == "vic":
        return VICState(np.zeros(num_goals))
    if strategy == "dp":
        return DPState(np.zeros(num_goals), np.full(num_goals, 1.0 / num_goals),
                       eta, tau, temperature, list(range(num_goals)))
    raise ValueError(f"unknown strategy {strategy!r}")


def goal_probabilities(state) -> np.ndarray:
    """The maintained categorical p(g), as used in the intrinsic reward."""
    if isinstance(state, UniformState):
        return np.full(state.num_goals, 1.0 / state.num_goals)
    if isinstance(state, VICState):
        return softmax(state.logits)
    if isinstance(state, DPState):
        return state.p_goal.copy()
    raise TypeError(f"unknown selector state {type(state).__name__}")


def selection_probabilities(state) -> np.ndarray:
    """The distribution the next goal is actually drawn from.

    Differs from goal_probabilities only during the dp init pass, where
    sampling is uniform over the not-yet-visited goals.
    """
    if isinstance(state, DPState) and state.init_remaining:
        p = np.zeros(state.num_goals)
        p[state.init_remaining] = 1.0 / len(state.init_remaining)
        return p
    return goal_probabilities(state)


def select_goal(state, rng: np.random.Generator) -> int:
    """Draw the next goal to pursue. Mutates dp state during its init pass."""
    if isinstance(state, DPState) and state.init_remaining:
        pick = int(rng.integers(len(state.init_remaining)))
        return state.init_remaining.pop(pick)
    return int(rng.choice(state.num_goals, p=goal_probabilities(state)))


def dp_epoch_update(state: DPState, buf: ErrorBuffer, pursued: int) -> None:
    """Credit the epoch's mean normalized learning progress to the pursued goal.

    p_goal is re-normalized via softmax(dp / temperature) once the init pass
    is over; during the pass it stays at its uniform initialization.
    """
    if not 0 <= pursued < state.num_goals:
        raise ValueError(f"pursued goal {pursued} out of range")
    if buf.write_cursor < buf.capacity:
        raise ValueError("error buffer does not hold a full epoch")
    recent, earlier = window_mean_errors(buf, state.eta, state.tau)
    state.dp[pursued] = diversity_progress(lp_per_goal(recent, earlier))
    if not state.init_remaining:
        state.p_goal = softmax(state.dp, state.temperature)


def vic_update(state: VICState, goal: int, epoch_return: float) -> None:
    """REINFORCE on the goal logits against an EMA baseline."""
    if not 0 <= goal < state.num_goals:
        raise ValueError(f"goal {goal} out of range")
    advantage = epoch_return - state.baseline
    state.logits[goal] += state.lr * advantage
    state.baseline = state.baseline_decay * state.baseline + (1.0 - state.baseline_decay) * epoch_return


def epoch_update(state, buf: ErrorBuffer, pursued: int, epoch_return: float) -> None:
    """Strategy-dispatched end-of-epoch update."""
    if isinstance(state, DPState):
        dp_epoch_update(state, buf, pursued)
    elif isinstance(state, VICState):
        vic_update(state, pursued, epoch_return)
    elif not isinstance(state, UniformState):
        raise TypeError(f"unknown selector state {type(state).__name__}")
