"""Small shared builders for fast tests."""

import numpy as np

from metaopt.meta import MetaConfig
from metaopt.policy import PolicyConfig, PolicyParams, grad_log_prob, n_params, sample_update
from metaopt.rl import EpisodeStep, EpisodeTrace, TrainConfig
from metaopt.world import WorldConfig, make_task

SMALL_WORLD = WorldConfig(horizon=5)
SMALL_POLICY = PolicyConfig(hidden=(8, 8))
SMALL_TRAIN = TrainConfig(H=2, K=2, n_rollouts=2, iterations=2)
SMALL_META = MetaConfig(H=2, K=2, n_rollouts=2, task_batch=2, meta_iterations=2,
                        variance_reduction=True)


def small_task(kind="circle", params=(0.0, 0.0, 1.5, 0.0), noise=(0.01, 0.01, 0.01)):
    return make_task(kind, params, noise, SMALL_WORLD)


def bandit_policy(w, b, log_std, scale=1.0):
    """One input, two outputs (a mean step and a log-std step for a 1 x 1
    controller). Output 0 has mean ``scale * (w * phi + b)``; output 1 is
    zero-weighted. Its parameters sit at flat indices 0 (w) and 2 (b)."""
    return PolicyParams((1, 2), [w, 0.0, b, 0.0, log_std, log_std], scale)


def bandit_traces(theta, phi, reward_fn, rng, n):
    """One-step episodes: draw an action, score it with ``reward_fn``."""
    traces = []
    for _ in range(n):
        upd, lp = sample_update(theta, phi, rng, (1, 1))
        a = upd.as_action()
        r = reward_fn(a)
        step = EpisodeStep(None, phi, upd, lp, grad_log_prob(theta, phi, a), r, -r)
        traces.append(EpisodeTrace((step,), r, None))
    return traces


def fixed_trace(grads, rewards):
    """Trace from given gradient vectors (over a (1, 1) policy) and rewards."""
    steps = tuple(EpisodeStep(None, None, None, 0.0, g, float(r), -float(r))
                  for g, r in zip(grads, rewards))
    return EpisodeTrace(steps, float(sum(rewards)), None)


def zero_policy(dims):
    return PolicyParams(dims, np.zeros(n_params(dims)))
