"""Exact t-SNE for visualizing trajectory features, small-n only.

Gaussian bandwidths are calibrated per row by binary search so every
conditional distribution has entropy log(perplexity); the 2-D embedding is
optimized by gradient descent on KL(P || Q) with the classic recipe: early
exaggeration, a momentum switch, and per-coordinate gain adaptation.
Deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EARLY_EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250
MOMENTUM_SWITCH_ITER = 250
INITIAL_MOMENTUM = 0.5
FINAL_MOMENTUM = 0.8
MIN_GAIN = 0.01
INIT_STD = 1e-4
BANDWIDTH_SEARCH_STEPS = 50
ENTROPY_TOL = 1e-5
P_FLOOR = 1e-12


@dataclass(frozen=True)
class TSNEConfig:
    perplexity: float = 30.0
    learning_rate: float = 10.0
    max_iters: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.perplexity <= 0 or self.learning_rate <= 0 or self.max_iters < 1:
            raise ValueError("perplexity and learning rate must be positive, max_iters >= 1")


@dataclass
class TSNEResult:
    embedding: np.ndarray  # (n, 2)
    row_entropies: np.ndarray  # (n,) calibrated conditional entropies (nats)
    kl_initial: float
    kl_final: float


def pairwise_sq_distances(x: np.ndarray) -> np.ndarray:
    sq = (x * x).sum(axis=1)
    d = sq[:, None] - 2.0 * (x @ x.T) + sq[None, :]
    np.fill_diagonal(d, 0.0)
    return np.maximum(d, 0.0)


def _row_entropy_and_probs(d_row: np.ndarray, beta: float):
    # entropy (nats) and conditional probabilities for one row at precision beta
    p = np.exp(-d_row * beta)
    total = p.sum()
    if total <= 0.0:
        return 0.0, np.zeros_like(p)
    h = np.log(total) + beta * (d_row * p).sum() / total
    return h, p / total


def conditional_probabilities(distances: np.ndarray, perplexity: float,
                              tol: float = ENTROPY_TOL,
                              max_steps: int = BANDWIDTH_SEARCH_STEPS):
    """Per-row Gaussian affinities with entropy log(perplexity), and the
    entropies actually reached. Returns (P_conditional (n,n), entropies (n,))."""
    n = distances.shape[0]
    target = np.log(perplexity)
    p_cond = np.zeros((n, n))
    entropies = np.zeros(n)
    idx = np.arange(n)
    for i in range(n):
        others = idx != i
        d_row = distances[i, others]
        beta, beta_min, beta_max = 1.0, -np.inf, np.inf
        h, p = _row_entropy_and_probs(d_row, beta)
        for _ in range(max_steps):
            if abs(h - target) <= tol:
                break
            if h > target:  # too spread out: sharpen
                beta_min = beta
                beta = beta * 2.0 if np.isinf(beta_max) else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if np.isinf(beta_min) else (beta + beta_min) / 2.0
            h, p = _row_entropy_and_probs(d_row, beta)
        p_cond[i, others] = p
        entropies[i] = h
    return p_cond, entropies


def joint_probabilities(p_cond: np.ndarray) -> np.ndarray:
    n = p_cond.shape[0]
    p = (p_cond + p_cond.T) / (2.0 * n)
    return np.maximum(p, P_FLOOR)


def low_dim_affinities(y: np.ndarray):
    """Student-t kernel numerators and the normalized Q matrix."""
    num = 1.0 / (1.0 + pairwise_sq_distances(y))
    np.fill_diagonal(num, 0.0)
    q = num / num.sum()
    return np.maximum(q, P_FLOOR), num


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    mask = ~np.eye(p.shape[0], dtype=bool)
    return float((p[mask] * np.log(p[mask] / q[mask])).sum())


def tsne_gradient(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Analytic gradient of KL(P || Q) with respect to the embedding."""
    q, num = low_dim_affinities(y)
    pq = (p - q) * num
    return 4.0 * (pq.sum(axis=1)[:, None] * y - pq @ y)


def tsne_embed_full(features, cfg: TSNEConfig, strict: bool = True) -> TSNEResult:
    """Calibrate affinities and optimize the embedding.

    strict=False drops the feasibility preconditions (n >= 5 and
    perplexity < (n - 1) / 3) for degenerate diagnostic inputs.
    """
    x = np.atleast_2d(np.asarray(getattr(features, "features", features), dtype=np.float64))
    n = x.shape[0]
    if n < 3:
        raise ValueError("need at least 3 rows to embed")
    if strict and n < 5:
        raise ValueError("need at least 5 rows to embed")
    if strict and not cfg.perplexity < (n - 1) / 3.0:
        raise ValueError(
            f"perplexity {cfg.perplexity} infeasible for {n} rows "
            f"(needs perplexity < (n - 1) / 3)"
        )

    p_cond, entropies = conditional_probabilities(pairwise_sq_distances(x), cfg.perplexity)
    p = joint_probabilities(p_cond)

    rng = np.random.default_rng(cfg.seed)
    y = rng.normal(0.0, INIT_STD, size=(n, 2))
    kl_initial = kl_divergence(p, low_dim_affinities(y)[0])

    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    exaggerated = p * EARLY_EXAGGERATION
    for it in range(cfg.max_iters):
        target_p = exaggerated if it < EXAGGERATION_ITERS else p
        grad = tsne_gradient(target_p, y)
        momentum = INITIAL_MOMENTUM if it < MOMENTUM_SWITCH_ITER else FINAL_MOMENTUM
        same_sign = np.sign(grad) == np.sign(velocity)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        gains = np.maximum(gains, MIN_GAIN)
        velocity = momentum * velocity - cfg.learning_rate * gains * grad
        y = y + velocity
        y = y - y.mean(axis=0)

    kl_final = kl_divergence(p, low_dim_affinities(y)[0])
    return TSNEResult(y, entropies, kl_initial, kl_final)


def tsne_embed(features, cfg: TSNEConfig, strict: bool = True) -> np.ndarray:
    """2-D embedding of the feature rows; deterministic for a fixed seed."""
    return tsne_embed_full(features, cfg, strict).embedding
