"""Goal-conditioned stochastic policy with a Gaussian-mixture head, plus the
discriminability intrinsic reward and a REINFORCE-with-baseline trainer.

One MLP maps (observation ++ one-hot goal) to K * (1 + 2 * action_dim)
outputs: per-component log-weight, mean vector, and log-std vector. Actions
are sampled by picking a component from the softmaxed log-weights and then
drawing from its diagonal Gaussian. Log-stds are clamped to keep variances
away from collapse and explosion.

The trainer is plain REINFORCE with a per-batch mean-return baseline and a
per-step entropy bonus alpha * (-log pi) folded into the reward, standing in
for a full maximum-entropy actor-critic at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .envs import Transition
from .numkit import (
    AdamState,
    MLPSpec,
    ParamVector,
    init_mlp_params,
    mlp_backward,
    mlp_forward_cached,
    optimizer_step,
    softmax,
)

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
Q_PROB_FLOOR = 1e-6
DEFAULT_LR = 3e-4
LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class GMMPolicyModel:
    spec: MLPSpec
    params: ParamVector
    opt_state: AdamState
    num_goals: int
    action_dim: int
    num_components: int
    log_std_min: float = LOG_STD_MIN
    log_std_max: float = LOG_STD_MAX

    def __post_init__(self):
        if self.num_components < 1:
            raise ValueError("need at least one mixture component")
        expected = self.num_components * (1 + 2 * self.action_dim)
        if self.spec.output_dim != expected:
            raise ValueError(
                f"head must emit {expected} values for K={self.num_components}, "
                f"action_dim={self.action_dim}; spec emits {self.spec.output_dim}"
            )


def make_policy(obs_dim: int, num_goals: int, action_dim: int, num_components: int = 4,
                hidden_dims=(32,), rng: np.random.Generator | None = None,
                lr: float = DEFAULT_LR) -> GMMPolicyModel:
    out_dim = num_components * (1 + 2 * action_dim)
    spec = MLPSpec(obs_dim + num_goals, tuple(hidden_dims), out_dim)
    if rng is None:
        params = ParamVector.zeros(spec.layout())
    else:
        params = init_mlp_params(spec, rng)
    return GMMPolicyModel(spec, params, AdamState(lr=lr), num_goals, action_dim, num_components)


def policy_input(model: GMMPolicyModel, observation: np.ndarray, goal: int) -> np.ndarray:
    if not 0 <= goal < model.num_goals:
        raise ValueError(f"goal {goal} out of range for {model.num_goals} goals")
    x = np.zeros(model.spec.input_dim)
    x[: observation.shape[-1]] = observation
    x[observation.shape[-1] + goal] = 1.0
    return x


def _split_head(model: GMMPolicyModel, raw: np.ndarray):
    """Split network output into (log_weights, means, log_stds, clip_mask).

    raw has shape (..., K*(1+2A)). log_stds are clamped; clip_mask marks the
    entries where the clamp was active (their gradient is zeroed).
    """
    k, a = model.num_components, model.action_dim
    log_w = raw[..., :k]
    mu = raw[..., k : k + k * a].reshape(*raw.shape[:-1], k, a)
    log_std_raw = raw[..., k + k * a :].reshape(*raw.shape[:-1], k, a)
    log_std = np.clip(log_std_raw, model.log_std_min, model.log_std_max)
    clipped = (log_std_raw <= model.log_std_min) | (log_std_raw >= model.log_std_max)
    return log_w, mu, log_std, clipped


def gmm_head(model: GMMPolicyModel, observation: np.ndarray, goal: int):
    """(mixture weights, means (K,A), stds (K,A)) at one state-goal pair."""
    x = policy_input(model, observation, goal)
    raw, _ = mlp_forward_cached(model.spec, model.params, x)
    log_w, mu, log_std, _ = _split_head(model, raw[0])
    return softmax(log_w), mu, np.exp(log_std)


def _component_log_densities(actions, mu, log_std):
    # actions (..., A) against components (..., K, A) -> (..., K)
    z = (actions[..., None, :] - mu) / np.exp(log_std)
    return -0.5 * (z * z).sum(axis=-1) - log_std.sum(axis=-1) - 0.5 * actions.shape[-1] * LOG_2PI


def policy_density(model: GMMPolicyModel, observation: np.ndarray, goal: int,
                   action: np.ndarray) -> float | np.ndarray:
    """Mixture density at one action, or at a batch of actions (rows)."""
    action = np.asarray(action, dtype=np.float64)
    if action.shape[-1] != model.action_dim:
        raise ValueError(f"action dim {action.shape[-1]} != {model.action_dim}")
    w, mu, sigma = gmm_head(model, observation, goal)
    single = action.ndim == 1
    acts = action[None, :] if single else action
    comp = np.exp(_component_log_densities(acts, mu[None], np.log(sigma)[None]))
    dens = (comp * w).sum(axis=-1)
    return float(dens[0]) if single else dens


def sample_action(model: GMMPolicyModel, observation: np.ndarray, goal: int,
                  rng: np.random.Generator) -> np.ndarray:
    w, mu, sigma = gmm_head(model, observation, goal)
    k = int(rng.choice(model.num_components, p=w))
    return mu[k] + sigma[k] * rng.standard_normal(model.action_dim)


def intrinsic_reward(q_prob: float, p_prob: float) -> float:
    """log q(g|s') - log p(g), with q floored to keep the reward bounded."""
    if not 0.0 < p_prob <= 1.0 + 1e-12:
        raise ValueError(f"p(g) must lie in (0, 1], got {p_prob}")
    if not 0.0 <= q_prob <= 1.0 + 1e-12:
        raise ValueError(f"q(g|s) must lie in [0, 1], got {q_prob}")
    return float(np.log(max(q_prob, Q_PROB_FLOOR)) - np.log(p_prob))


def log_probs_and_head_grads(model: GMMPolicyModel, inputs: np.ndarray, actions: np.ndarray):
    """log pi(a|s,g) for each row plus d(log pi)/d(raw head output).

    Returns (log_probs (T,), head_grads (T, out_dim), cache) where cache is
    the forward cache usable with mlp_backward.
    """
    raw, cache = mlp_forward_cached(model.spec, model.params, inputs)
    log_w_raw, mu, log_std, clipped = _split_head(model, raw)
    k, a = model.num_components, model.action_dim

    log_w = log_w_raw - log_w_raw.max(axis=-1, keepdims=True)
    log_w = log_w - np.log(np.exp(log_w).sum(axis=-1, keepdims=True))  # log softmax
    w = np.exp(log_w)

    sigma = np.exp(log_std)
    z = (actions[:, None, :] - mu) / sigma  # (T, K, A)
    comp_logp = -0.5 * (z * z).sum(axis=-1) - log_std.sum(axis=-1) - 0.5 * a * LOG_2PI
    ell = log_w + comp_logp
    m = ell.max(axis=-1, keepdims=True)
    log_pi = (m + np.log(np.exp(ell - m).sum(axis=-1, keepdims=True)))[:, 0]
    resp = np.exp(ell - log_pi[:, None])  # responsibilities (T, K)

    d_log_w = resp - w
    d_mu = resp[:, :, None] * z / sigma
    d_log_std = resp[:, :, None] * (z * z - 1.0)
    d_log_std[clipped] = 0.0

    head = np.concatenate(
        [d_log_w, d_mu.reshape(-1, k * a), d_log_std.reshape(-1, k * a)], axis=1
    )
    return log_pi, head, cache


class PolicyDiagnostics(NamedTuple):
    mean_return: float
    mean_entropy: float


def policy_update_arrays(model: GMMPolicyModel, episodes, alpha: float, gamma: float) -> PolicyDiagnostics:
    """One REINFORCE step from episode arrays [(obs (T,d), actions (T,A), rewards (T,), goal)].

    Maximizes the discounted sum of (reward + alpha * -log pi) per step, with
    the pooled mean return as the baseline.
    """
    if not episodes:
        raise ValueError("empty trajectory batch")
    prepared = []
    for obs, actions, rewards, goal in episodes:
        obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
        actions = np.atleast_2d(np.asarray(actions, dtype=np.float64))
        rewards = np.asarray(rewards, dtype=np.float64).reshape(-1)
        if not 0 <= goal < model.num_goals:
            raise ValueError(f"goal {goal} out of range")
        inputs = np.zeros((obs.shape[0], model.spec.input_dim))
        inputs[:, : obs.shape[1]] = obs
        inputs[:, obs.shape[1] + goal] = 1.0
        log_pi, head, cache = log_probs_and_head_grads(model, inputs, actions)
        augmented = rewards - alpha * log_pi
        returns = np.empty_like(augmented)
        acc = 0.0
        for t in range(len(augmented) - 1, -1, -1):
            acc = augmented[t] + gamma * acc
            returns[t] = acc
        raw_return = 0.0
        for t in range(len(rewards) - 1, -1, -1):
            raw_return = rewards[t] + gamma * raw_return
        prepared.append((log_pi, head, cache, returns, raw_return))

    all_returns = np.concatenate([p[3] for p in prepared])
    baseline = all_returns.mean()
    total_steps = all_returns.size

    grads = ParamVector.zeros(model.spec.layout())
    for log_pi, head, cache, returns, _ in prepared:
        weights = (returns - baseline) / total_steps
        out_grad = -weights[:, None] * head  # descend the negated objective
        grads.values += mlp_backward(model.spec, model.params, cache, out_grad).values
    model.params = optimizer_step(model.params, grads, model.opt_state)

    mean_return = float(np.mean([p[4] for p in prepared]))
    mean_entropy = float(np.mean([-p[0].mean() for p in prepared]))
    return PolicyDiagnostics(mean_return, mean_entropy)


def policy_update(model: GMMPolicyModel, trajectories: Sequence[Sequence[Transition]],
                  alpha: float, gamma: float) -> PolicyDiagnostics:
    """One REINFORCE step from lists of transitions (one list per episode)."""
    if not trajectories:
        raise ValueError("empty trajectory batch")
    episodes = []
    for traj in trajectories:
        if not traj:
            raise ValueError("empty trajectory")
        obs = np.stack([tr.state.observation for tr in traj])
        actions = np.stack([np.asarray(tr.action, dtype=np.float64) for tr in traj])
        rewards = np.array([tr.reward for tr in traj])
        episodes.append((obs, actions, rewards, traj[0].goal))
    return policy_update_arrays(model, episodes, alpha, gamma)
