"""skillforge: a desk-scale lab for discriminability-motivated skill discovery.

Trains goal-conditioned skills with an intrinsic discriminability reward and
compares goal-selection curricula: uniform sampling, a reinforced categorical
distribution, and diversity-progress (a learning-progress bandit over goals).
"""

__version__ = "0.1.0"
