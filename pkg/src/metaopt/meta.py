"""First-order meta-training of the learned optimizer over a task distribution.

Each task adapts the shared parameters with a few policy-gradient steps, then
fresh episodes under the adapted parameters supply that task's gradient. The
sum of these post-adaptation gradients drives the outer update; the
dependence of the adapted parameters on the shared ones is ignored.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .policy import PolicyConfig, PolicyGradient
from .rl import (TrainConfig, collect_episodes, mean_return, new_policy,
                 policy_gradient, sgd_ascent)
from .world import sample_task


@dataclass(frozen=True)
class MetaConfig(TrainConfig):
    beta: float = 3e-3          # inner (adaptation) step size
    eta_meta: float = 1e-3      # outer step size
    inner_steps: int = 1
    task_batch: int = 4
    meta_iterations: int = 200

    def validate(self):
        super().validate()
        if self.beta < 0 or not self.eta_meta > 0:
            raise ConfigurationError("meta.beta must be >= 0 and meta.eta positive")
        if self.inner_steps < 1 or self.task_batch < 1 or self.meta_iterations < 0:
            raise ConfigurationError("meta.inner_steps >= 1, meta.task_batch >= 1 required")
        return self


@dataclass(frozen=True, eq=False)
class AdaptationResult:
    theta_task: object
    pre_return: float
    post_return: float
    inner_traces: list
    post_traces: list


def adapt(theta, task, cfg, stream, evaluate_post=True, collect=collect_episodes):
    """Specialize ``theta`` to ``task`` with ``cfg.inner_steps`` steps
    ``theta + beta * g`` (unclipped; the action log-std stays clamped).

    Inner step ``s`` uses episodes from ``stream.child("inner", s)``. When
    ``evaluate_post`` is set, ``cfg.K`` fresh episodes under the adapted
    parameters are drawn from ``stream.child("post")``. ``collect(task,
    theta, cfg, stream)`` produces the episodes.
    """
    theta_s = theta
    inner = []
    for s in range(1, cfg.inner_steps + 1):
        traces = collect(task, theta_s, cfg, stream.child("inner", s))
        inner.append(traces)
        if cfg.beta != 0:
            # the inner step is plain ascent; only the outer update is clipped
            theta_s = sgd_ascent(theta_s, policy_gradient(traces, cfg), cfg.beta, max_norm=None)
    post = collect(task, theta_s, cfg, stream.child("post")) if evaluate_post else []
    return AdaptationResult(theta_s, mean_return(inner[0]), mean_return(post), inner, post)


def meta_gradient(theta, tasks, cfg, stream):
    """Sum over tasks of the policy gradient at each task's adapted parameters.

    Streams are keyed by task content, and the sum runs in key order, so the
    result does not depend on the order of ``tasks``.
    Returns ``(gradient, diagnostics)`` with one ``(key, pre, post)`` row per task.
    """
    if not tasks:
        raise ConfigurationError("meta_gradient needs at least one task")
    results = []
    for task in tasks:
        key = task.fingerprint()
        res = adapt(theta, task, cfg, stream.child("task", key))
        results.append((key, res))
    results.sort(key=lambda kr: kr[0])
    total = PolicyGradient.zeros(theta.dims)
    diagnostics = []
    for key, res in results:
        total = total + policy_gradient(res.post_traces, cfg)
        diagnostics.append((key, res.pre_return, res.post_return))
    return total, diagnostics


def sample_task_batch(dist, n, stream):
    return [sample_task(dist, stream.child(j).generator()) for j in range(n)]


def meta_train(dist, cfg, stream, policy_cfg=PolicyConfig(), theta=None, progress=None):
    """Outer loop; returns final parameters and rows
    ``(meta_iteration, mean_pre_return, mean_post_return)``."""
    cfg.validate()
    dist.validate()
    if theta is None:
        probe = sample_task(dist, stream.child("probe").generator())
        theta = new_policy(probe, stream, policy_cfg)
    curve = []
    for it in range(cfg.meta_iterations):
        tasks = sample_task_batch(dist, cfg.task_batch, stream.child("tasks", it))
        g, diag = meta_gradient(theta, tasks, cfg, stream.child("meta", it))
        pre = float(np.mean([d[1] for d in diag]))
        post = float(np.mean([d[2] for d in diag]))
        curve.append((it, pre, post))
        theta = sgd_ascent(theta, g, cfg.eta_meta)
        if progress is not None:
            progress(it, curve[-1])
    return theta, curve
