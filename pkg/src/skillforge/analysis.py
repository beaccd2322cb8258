"""Evaluation metrics for learned skill sets.

effective_num_skills: exp of the entropy of the goal-selection distribution,
i.e. how many goals the selector is effectively sampling among.

bmi_lower_bound: variational lower bound on the mutual information between
the goal and the observed trajectory feature, H(p) + mean log q.

discriminability_score: held-out classification accuracy of a discriminator
on labeled final-state observations, a quantitative stand-in for eyeballing
cluster separation in an embedding plot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discriminator import DiscriminatorModel, predict
from .numkit import entropy


@dataclass
class FeatureMatrix:
    """One feature row per trajectory, with the goal that produced it."""

    features: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,) goal indices

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=np.float64))
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if self.features.shape[0] != self.labels.size:
            raise ValueError("row/label count mismatch")

    def __len__(self):
        return self.labels.size


def effective_num_skills(p: np.ndarray) -> float:
    """exp(H(p)): 1 for a one-hot distribution, |G| for a uniform one."""
    return float(np.exp(entropy(p)))


def bmi_lower_bound(p: np.ndarray, samples) -> float:
    """H(p) + mean of log q(g | f(T)) over (goal, q-probability) samples."""
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    qs = np.array([q for _, q in samples], dtype=np.float64)
    if np.any(qs <= 0.0) or np.any(qs > 1.0 + 1e-12):
        raise ValueError("q values must lie in (0, 1]")
    return float(entropy(p) + np.log(qs).mean())


def trajectory_feature(observations: np.ndarray) -> np.ndarray:
    """Componentwise mean observation over one trajectory."""
    obs = np.atleast_2d(np.asarray(observations, dtype=np.float64))
    if obs.shape[0] == 0:
        raise ValueError("empty trajectory")
    return obs.mean(axis=0)


def discriminability_score(model: DiscriminatorModel, heldout: FeatureMatrix) -> float:
    """Fraction of held-out rows whose argmax-probability goal is the true one.

    Ties resolve to the lowest goal index (np.argmax convention).
    """
    if len(heldout) == 0:
        raise ValueError("empty held-out set")
    probs = predict(model, heldout.features)
    return float((np.argmax(probs, axis=1) == heldout.labels).mean())
