"""Goal discriminator: an MLP classifier over goal indices, trained on
visited states. Its per-goal prediction errors drive the diversity-progress
curriculum and its log-probability feeds the intrinsic reward.

Error convention for the pursued goal g* at a state s:
    e_g = 1 - q(g|s) if g == g*, else q(g|s)
computed with the discriminator as it was *before* the update at that step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numkit import (
    AdamState,
    MLPSpec,
    ParamVector,
    init_mlp_params,
    log_softmax,
    mlp_backward,
    mlp_forward,
    mlp_forward_cached,
    optimizer_step,
    softmax,
)

REPLAY_CAPACITY = 10_000
MINIBATCH_SIZE = 64
DEFAULT_LR = 3e-4


class ReplayBuffer:
    """Ring buffer of (observation, goal) pairs, oldest overwritten first."""

    def __init__(self, capacity: int, obs_dim: int):
        self.capacity = capacity
        self.observations = np.zeros((capacity, obs_dim))
        self.goals = np.zeros(capacity, dtype=np.int64)
        self.cursor = 0
        self.size = 0

    def __len__(self):
        return self.size

    def add(self, observation: np.ndarray, goal: int) -> None:
        self.observations[self.cursor] = observation
        self.goals[self.cursor] = goal
        self.cursor = (self.cursor + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng: np.random.Generator, batch_size: int):
        if self.size == 0:
            raise ValueError("cannot sample from an empty replay buffer")
        idx = rng.integers(0, self.size, size=batch_size)
        return self.observations[idx], self.goals[idx]


@dataclass
class DiscriminatorModel:
    spec: MLPSpec
    params: ParamVector
    opt_state: AdamState

    @property
    def num_goals(self) -> int:
        return self.spec.output_dim


def make_discriminator(obs_dim: int, num_goals: int, hidden_dims=(32,),
                       rng: np.random.Generator | None = None,
                       lr: float = DEFAULT_LR) -> DiscriminatorModel:
    spec = MLPSpec(obs_dim, tuple(hidden_dims), num_goals)
    if rng is None:
        params = ParamVector.zeros(spec.layout())
    else:
        params = init_mlp_params(spec, rng)
    return DiscriminatorModel(spec, params, AdamState(lr=lr))


def predict(model: DiscriminatorModel, observation: np.ndarray) -> np.ndarray:
    """q(. | s): probability vector over goals (row-wise for a batch)."""
    logits = mlp_forward(model.spec, model.params, observation)
    return softmax(logits)


def errors_from_probs(probs: np.ndarray, pursued: int) -> np.ndarray:
    """Per-goal prediction error vector given q(.|s) and the pursued goal."""
    e = probs.copy()
    e[pursued] = 1.0 - probs[pursued]
    return e


def prediction_errors(model: DiscriminatorModel, observation: np.ndarray, pursued: int) -> np.ndarray:
    if not 0 <= pursued < model.num_goals:
        raise ValueError(f"pursued goal {pursued} out of range for {model.num_goals} goals")
    return errors_from_probs(predict(model, observation), pursued)


def update(model: DiscriminatorModel, observations: np.ndarray, goals: np.ndarray) -> float:
    """One optimizer step on the mean cross-entropy; returns the pre-step loss."""
    observations = np.atleast_2d(np.asarray(observations, dtype=np.float64))
    goals = np.asarray(goals, dtype=np.int64).reshape(-1)
    n = goals.size
    if n == 0:
        raise ValueError("empty batch")
    if observations.shape[0] != n:
        raise ValueError("observation/goal count mismatch")
    logits, cache = mlp_forward_cached(model.spec, model.params, observations)
    logp = log_softmax(logits)
    loss = float(-logp[np.arange(n), goals].mean())
    grad_logits = np.exp(logp)
    grad_logits[np.arange(n), goals] -= 1.0
    grad_logits /= n
    grads = mlp_backward(model.spec, model.params, cache, grad_logits)
    model.params = optimizer_step(model.params, grads, model.opt_state)
    return loss
