"""Single-task REINFORCE training of the learned optimizer.

An episode starts from the initial controller and applies ``H + 1`` policy
updates. Before each update the current controller is rolled out; the
negative mean rollout cost is that step's reward.
"""

from dataclasses import dataclass
import math

import numpy as np

from .controller import apply_update, init_controller
from .errors import ConfigurationError, NumericDomainError
from .policy import (ACTION_LOG_STD_MAX, ACTION_LOG_STD_MIN, PolicyConfig,
                     PolicyGradient, action_dim, encode_features, feature_dim,
                     grad_log_prob, init_policy, sample_update)
from .world import CONTROL_DIM, rollout

GRAD_CLIP = 10.0


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 3e-3
    gamma: float = 1.0           # discount over optimizer steps
    H: int = 15
    K: int = 8                   # episodes per gradient estimate
    n_rollouts: int = 8
    variance_reduction: bool = False
    iterations: int = 300

    def validate(self):
        if not self.alpha > 0:
            raise ConfigurationError("train.alpha must be positive")
        if not 0 < self.gamma <= 1:
            raise ConfigurationError("train.gamma must lie in (0, 1]")
        if self.H < 0 or self.K < 1 or self.n_rollouts < 1 or self.iterations < 0:
            raise ConfigurationError("train.H >= 0, train.K >= 1, n_rollouts >= 1, iterations >= 0")
        return self


@dataclass(frozen=True, eq=False)
class EpisodeStep:
    controller: object       # ControllerParams rolled out at this step
    features: np.ndarray
    update: object           # ControllerUpdate applied after the rollout
    log_prob: float
    grad: object             # PolicyGradient of log_prob, None in evaluation episodes
    reward: float
    mean_cost: float


@dataclass(frozen=True, eq=False)
class EpisodeTrace:
    steps: tuple
    return_total: float
    final_controller: object

    @property
    def rewards(self):
        return np.array([s.reward for s in self.steps])

    @property
    def last_controller(self):
        """Controller of the last rolled-out step (the episode's result)."""
        return self.steps[-1].controller


def episode_return(trace, gamma):
    return float(sum(gamma ** h * s.reward for h, s in enumerate(trace.steps)))


def run_episode(task, theta, cfg, stream, m0=None, deterministic=False, with_grad=True):
    """Roll out, score and update the controller ``H + 1`` times.

    ``stream`` is a :class:`~metaopt.streams.Stream`; rollouts and action
    noise at step ``k`` draw from disjoint children of it.
    """
    m = m0 if m0 is not None else init_controller(task.horizon, CONTROL_DIM)
    steps = []
    for k in range(cfg.H + 1):
        batch = rollout(task, m, cfg.n_rollouts, stream.child("rollout", k).generator())
        mean_cost = batch.mean_cost()
        phi = encode_features(m, batch, k, cfg.H)
        delta, lp = sample_update(theta, phi, stream.child("action", k).generator(),
                                  m.shape, deterministic=deterministic)
        grad = grad_log_prob(theta, phi, delta.as_action()) if with_grad else None
        steps.append(EpisodeStep(m, phi, delta, lp, grad, -mean_cost, mean_cost))
        m = apply_update(m, delta)
    steps = tuple(steps)
    total = float(sum(cfg.gamma ** h * s.reward for h, s in enumerate(steps)))
    return EpisodeTrace(steps, total, m)


def collect_episodes(task, theta, cfg, stream, n=None):
    """``n`` (default ``cfg.K``) independent training episodes."""
    n = cfg.K if n is None else n
    return [run_episode(task, theta, cfg, stream.child("episode", e)) for e in range(n)]


def policy_gradient(traces, cfg):
    """Score-function estimate of the return gradient, averaged over traces.

    Default: every step's score is weighted by the episode's summed reward.
    With ``cfg.variance_reduction`` each step is weighted by its discounted
    reward-to-go minus the across-trace mean reward-to-go at that step.
    """
    if not traces:
        raise ConfigurationError("policy_gradient needs at least one trace")
    dims = traces[0].steps[0].grad.dims
    total = np.zeros(traces[0].steps[0].grad.data.size)
    if not cfg.variance_reduction:
        for tr in traces:
            score = np.zeros_like(total)
            for s in tr.steps:
                score = score + s.grad.data
            total = total + score * float(sum(s.reward for s in tr.steps))
    else:
        lengths = {len(tr.steps) for tr in traces}
        if len(lengths) != 1:
            raise ConfigurationError("variance reduction needs equal-length traces")
        rtg = np.array([_reward_to_go(tr.rewards, cfg.gamma) for tr in traces])
        adv = rtg - rtg.mean(axis=0)
        for tr, a in zip(traces, adv):
            for s, w in zip(tr.steps, a):
                total = total + s.grad.data * w
    return PolicyGradient(dims, total / len(traces))


def _reward_to_go(rewards, gamma):
    out = np.empty(len(rewards))
    acc = 0.0
    for h in range(len(rewards) - 1, -1, -1):
        acc = rewards[h] + gamma * acc
        out[h] = acc
    return out


def clip_gradient(g, max_norm=GRAD_CLIP):
    """Rescale ``g`` to global L2 norm ``max_norm`` if longer; ``None`` disables."""
    if max_norm is None:
        return g
    norm = g.norm()
    if norm > max_norm:
        return g * (max_norm / norm)
    return g


def sgd_ascent(theta, g, alpha, max_norm=GRAD_CLIP):
    """theta + alpha * clip(g); the action log-std is re-clamped afterwards."""
    if not np.all(np.isfinite(g.data)):
        raise NumericDomainError("non-finite gradient; step rejected")
    if g.dims != theta.dims:
        raise ConfigurationError("gradient and parameter shapes differ")
    if alpha < 0:
        raise ConfigurationError("step size must be nonnegative")
    if alpha == 0:
        return theta
    g = clip_gradient(g, max_norm)
    data = theta.data + alpha * g.data
    n = theta.act_dim
    data[-n:] = np.clip(data[-n:], ACTION_LOG_STD_MIN, ACTION_LOG_STD_MAX)
    return theta.replace(data)


def new_policy(task, stream, policy_cfg=PolicyConfig()):
    return init_policy(feature_dim(task.horizon, CONTROL_DIM),
                       action_dim(task.horizon, CONTROL_DIM),
                       stream.child("init").generator(), policy_cfg)


def train_rl(task, cfg, stream, policy_cfg=PolicyConfig(), theta=None, progress=None):
    """Plain policy-gradient training on one task.

    Returns the final parameters and per-iteration rows
    ``(iteration, mean_return, return_std)``.
    """
    cfg.validate()
    if theta is None:
        theta = new_policy(task, stream, policy_cfg)
    curve = []
    for it in range(cfg.iterations):
        traces = collect_episodes(task, theta, cfg, stream.child("iter", it))
        returns = np.array([tr.return_total for tr in traces])
        curve.append((it, float(returns.mean()), float(returns.std())))
        theta = sgd_ascent(theta, policy_gradient(traces, cfg), cfg.alpha)
        if progress is not None:
            progress(it, curve[-1])
    return theta, curve


def mean_return(traces):
    return float(np.mean([tr.return_total for tr in traces])) if traces else math.nan
