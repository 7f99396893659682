"""The learned optimizer: an MLP that proposes controller updates.

Parameters live in one flat float64 buffer laid out layer by layer (weights
row-major, then biases), followed by the global action log-std. ``layers``
and ``action_log_std`` are read-only views into that buffer, so arithmetic
on parameters and gradients is plain vector arithmetic.
"""

import math
from dataclasses import dataclass

import numpy as np

from .controller import ControllerUpdate
from .errors import ConfigurationError, NumericDomainError

ACTION_LOG_STD_MIN = -10.0
ACTION_LOG_STD_MAX = 1.0
LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
COST_VAR_FLOOR = 1e-8


@dataclass(frozen=True)
class PolicyConfig:
    hidden: tuple = (64, 64)
    output_scale: float = 0.1
    init_log_std: float = math.log(0.05)


def n_params(dims):
    return sum(dims[i + 1] * dims[i] + dims[i + 1] for i in range(len(dims) - 1)) + dims[-1]


class _ParamVector:
    def __init__(self, dims, data):
        dims = tuple(int(d) for d in dims)
        if len(dims) < 2 or min(dims) < 1:
            raise ConfigurationError(f"invalid layer dimensions {dims}")
        data = np.array(data, dtype=np.float64).ravel()
        if data.size != n_params(dims):
            raise ConfigurationError(
                f"{data.size} values do not fit layer dimensions {dims} ({n_params(dims)} needed)")
        data.setflags(write=False)
        self.dims = dims
        self.data = data

    @property
    def act_dim(self):
        return self.dims[-1]

    @property
    def layers(self):
        out, i = [], 0
        for fan_in, fan_out in zip(self.dims[:-1], self.dims[1:]):
            w = self.data[i:i + fan_out * fan_in].reshape(fan_out, fan_in)
            i += fan_out * fan_in
            b = self.data[i:i + fan_out]
            i += fan_out
            out.append((w, b))
        return out

    @property
    def action_log_std(self):
        return self.data[-self.dims[-1]:]

    def __eq__(self, other):
        return (type(self) is type(other) and self.dims == other.dims
                and np.array_equal(self.data, other.data))

    __hash__ = None

    def __repr__(self):
        return f"{type(self).__name__}(dims={self.dims})"


class PolicyParams(_ParamVector):
    """MLP weights and biases plus a state-independent action log-std."""

    def __init__(self, dims, data, output_scale=0.1):
        super().__init__(dims, data)
        if not np.all(np.isfinite(self.data)):
            raise NumericDomainError("policy parameters must be finite")
        self.output_scale = float(output_scale)

    def __eq__(self, other):
        return super().__eq__(other) and self.output_scale == other.output_scale

    def replace(self, data):
        return PolicyParams(self.dims, data, self.output_scale)


class PolicyGradient(_ParamVector):
    """Gradient laid out exactly like :class:`PolicyParams`."""

    def __add__(self, other):
        if self.dims != other.dims:
            raise ConfigurationError("gradient shapes differ")
        return PolicyGradient(self.dims, self.data + other.data)

    def __mul__(self, c):
        return PolicyGradient(self.dims, self.data * c)

    __rmul__ = __mul__

    def norm(self):
        return float(np.linalg.norm(self.data))

    @classmethod
    def zeros(cls, dims):
        return cls(dims, np.zeros(n_params(dims)))


def feature_dim(T, m_dim):
    return 2 * (T + 1) * m_dim + (T + 1) + 1


def action_dim(T, m_dim):
    return 2 * (T + 1) * m_dim


def init_policy(feat_dim, act_dim, rng, config=PolicyConfig()):
    """Glorot-uniform weights, zero biases, action log-std at ``config.init_log_std``."""
    dims = (feat_dim, *config.hidden, act_dim)
    chunks = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        lim = math.sqrt(6.0 / (fan_in + fan_out))
        chunks.append(rng.uniform(-lim, lim, size=fan_out * fan_in))
        chunks.append(np.zeros(fan_out))
    chunks.append(np.full(act_dim, config.init_log_std))
    return PolicyParams(dims, np.concatenate(chunks), config.output_scale)


def encode_features(m, batch, k, H):
    """Fixed-length summary of (controller, rollout data, progress).

    Per-step costs are averaged over rollouts and standardized across the
    horizon so that the same network sees comparable inputs on every task.
    """
    if batch.costs.shape[1] != m.shape[0]:
        raise ConfigurationError("rollout batch horizon does not match controller")
    c = batch.costs.mean(axis=0)
    if np.ptp(c) == 0:
        z = np.zeros_like(c)
    else:
        z = (c - c.mean()) / math.sqrt(max(float(c.var()), COST_VAR_FLOOR))
    progress = k / H if H > 0 else 0.0
    return np.concatenate([m.mean.ravel(), m.log_std.ravel(), z, [progress]])


def _forward(theta, phi):
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape != (theta.dims[0],):
        raise ConfigurationError(
            f"feature vector has shape {phi.shape}, policy expects ({theta.dims[0]},)")
    acts = [phi]
    layers = theta.layers
    h = phi
    for w, b in layers[:-1]:
        h = np.tanh(w @ h + b)
        acts.append(h)
    w, b = layers[-1]
    return (w @ h + b) * theta.output_scale, acts


def policy_mean(theta, phi):
    return _forward(theta, phi)[0]


def _gauss_logpdf(a, mu, log_std):
    z = (a - mu) * np.exp(-log_std)
    return float(np.sum(-0.5 * z * z - log_std - LOG_SQRT_2PI))


def log_prob(theta, phi, a):
    mu = policy_mean(theta, phi)
    a = np.asarray(a, dtype=np.float64)
    if a.shape != mu.shape:
        raise ConfigurationError("action dimension mismatch")
    return _gauss_logpdf(a, mu, theta.action_log_std)


def sample_update(theta, phi, rng, shape, deterministic=False):
    """Draw an update for a controller of ``shape``; returns (update, log_prob).

    With ``deterministic`` the policy mean is used as the action.
    """
    mu = policy_mean(theta, phi)
    log_std = theta.action_log_std
    a = mu if deterministic else mu + np.exp(log_std) * rng.standard_normal(mu.shape)
    return ControllerUpdate.from_action(a, shape), _gauss_logpdf(a, mu, log_std)


def grad_log_prob(theta, phi, a):
    """Exact gradient of :func:`log_prob` with respect to every parameter."""
    mu, acts = _forward(theta, phi)
    a = np.asarray(a, dtype=np.float64)
    if a.shape != mu.shape:
        raise ConfigurationError("action dimension mismatch")
    log_std = theta.action_log_std
    inv_var = np.exp(-2.0 * log_std)
    diff = a - mu
    g_log_std = diff * diff * inv_var - 1.0
    delta = diff * inv_var * theta.output_scale  # d logp / d (pre-scale output)

    layers = theta.layers
    grads = []
    for i in range(len(layers) - 1, -1, -1):
        w, _ = layers[i]
        h_in = acts[i]
        grads.append(delta)                    # bias
        grads.append(np.outer(delta, h_in))    # weight
        if i > 0:
            delta = (w.T @ delta) * (1.0 - h_in * h_in)
    chunks = [g.ravel() for g in reversed(grads)]
    chunks.append(g_log_std)
    return PolicyGradient(theta.dims, np.concatenate(chunks))
