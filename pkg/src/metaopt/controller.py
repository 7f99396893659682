"""Gaussian MPPI controller: parameters, sampling, additive updates.

The controller holds a per-step mean and log standard deviation for every
control channel over the horizon. Updates are additive in (mean, log_std)
space, which keeps every update a valid controller once log_std is clamped.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericDomainError

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
INIT_STD = 0.5


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ControllerParams:
    mean: np.ndarray     # (T+1, m_dim)
    log_std: np.ndarray  # (T+1, m_dim)

    def __post_init__(self):
        mean = _frozen(self.mean)
        log_std = _frozen(self.log_std)
        if mean.ndim != 2 or mean.shape != log_std.shape:
            raise ConfigurationError(
                f"mean {mean.shape} and log_std {log_std.shape} must be equal 2-D shapes")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(log_std))):
            raise NumericDomainError("controller parameters must be finite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "log_std", log_std)

    @property
    def shape(self):
        return self.mean.shape

    @property
    def horizon(self):
        return self.mean.shape[0] - 1

    @property
    def std(self):
        return np.exp(self.log_std)

    def __eq__(self, other):
        return (isinstance(other, ControllerParams)
                and np.array_equal(self.mean, other.mean)
                and np.array_equal(self.log_std, other.log_std))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ControllerUpdate:
    d_mean: np.ndarray
    d_log_std: np.ndarray

    def __post_init__(self):
        d_mean = _frozen(self.d_mean)
        d_log_std = _frozen(self.d_log_std)
        if d_mean.shape != d_log_std.shape:
            raise ConfigurationError("d_mean and d_log_std shapes differ")
        object.__setattr__(self, "d_mean", d_mean)
        object.__setattr__(self, "d_log_std", d_log_std)

    @classmethod
    def from_action(cls, a, shape):
        """Split a flat action vector into (d_mean, d_log_std) of ``shape``."""
        a = np.asarray(a, dtype=np.float64)
        n = int(np.prod(shape))
        if a.shape != (2 * n,):
            raise ConfigurationError(f"action of length {a.size} cannot fill 2 x {shape}")
        return cls(a[:n].reshape(shape), a[n:].reshape(shape))

    def as_action(self):
        return np.concatenate([self.d_mean.ravel(), self.d_log_std.ravel()])

    @classmethod
    def zeros(cls, shape):
        return cls(np.zeros(shape), np.zeros(shape))


def init_controller(T, m_dim):
    """Zero mean, sigma = 0.5 on every step and channel."""
    if T < 1 or m_dim < 1:
        raise ConfigurationError("need T >= 1 and m_dim >= 1")
    shape = (T + 1, m_dim)
    return ControllerParams(np.zeros(shape), np.full(shape, np.log(INIT_STD)))


def sample_controls(m, rng):
    """One control sequence drawn element-wise from N(mean, exp(log_std)^2)."""
    return m.mean + m.std * rng.standard_normal(m.shape)


def apply_update(m, delta):
    if delta.d_mean.shape != m.shape:
        raise ConfigurationError(
            f"update shape {delta.d_mean.shape} does not match controller {m.shape}")
    log_std = np.clip(m.log_std + delta.d_log_std, LOG_STD_MIN, LOG_STD_MAX)
    return ControllerParams(m.mean + delta.d_mean, log_std)


def mppi_weights(total_costs, temperature):
    """Normalized exponentiated-cost weights, shifted by the minimum cost."""
    if temperature <= 0:
        raise ConfigurationError("temperature must be positive")
    s = np.asarray(total_costs, dtype=np.float64)
    if s.size == 0:
        raise ConfigurationError("empty rollout batch")
    w = np.exp(-(s - s.min()) / temperature)
    return w / w.sum()


def baseline_mppi_update(m, batch, temperature=1.0):
    """Classic MPPI: replace the mean by the cost-weighted average of the
    sampled control sequences. log_std is left as is."""
    if batch.controls.shape[0] == 0:
        raise ConfigurationError("empty rollout batch")
    if batch.controls.shape[1:] != m.shape:
        raise ConfigurationError("batch was not produced under this controller")
    w = mppi_weights(batch.costs.sum(axis=1), temperature)
    mean = np.tensordot(w, batch.controls, axes=1)
    return ControllerParams(mean, m.log_std)
