"""Learned update rules for sampling-based (MPPI-style) path-tracking control.

A small MLP policy proposes updates to a Gaussian control-sequence
distribution from rollout statistics. It is trained with REINFORCE on one
task (``rl``) or meta-trained across a distribution of path-following tasks
with first-order MAML (``meta``).
"""

__version__ = "0.1.0"
