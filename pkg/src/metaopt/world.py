"""Path-following tasks for a noisy kinematic unicycle.

State is ``(x, y, heading)``, control is ``(speed, turn_rate)``. A task fixes
a reference path, process noise, cost weights and the start state; the task
distribution samples all of these. :func:`rollout` executes a Gaussian
controller ``N`` times and records controls, states and stage costs.
"""

import hashlib
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .controller import sample_controls
from .errors import ConfigurationError, NumericDomainError

PATH_KINDS = ("circle", "sine", "lemniscate")
STATE_DIM = 3
CONTROL_DIM = 2
N_PATH_PARAMS = {"circle": 4, "sine": 3, "lemniscate": 2}


@dataclass(frozen=True)
class WorldConfig:
    dt: float = 0.1
    horizon: int = 30
    control_low: tuple = (-0.5, -4.0)
    control_high: tuple = (3.0, 4.0)
    omega_ref: float = 1.0   # rad/s along circle and lemniscate references
    arc_speed: float = 1.0   # m/s along the x-axis for sine references
    w_pos: float = 1.0
    w_ctrl: float = 0.01

    def validate(self):
        if not self.dt > 0:
            raise ConfigurationError("world.dt must be positive")
        if self.horizon < 1:
            raise ConfigurationError("world.T must be >= 1")
        lo, hi = np.asarray(self.control_low, float), np.asarray(self.control_high, float)
        if lo.shape != (CONTROL_DIM,) or hi.shape != (CONTROL_DIM,):
            raise ConfigurationError(f"control bounds must have {CONTROL_DIM} entries")
        if not np.all(lo < hi):
            raise ConfigurationError("control lower bounds must be below upper bounds")
        if self.w_pos < 0 or self.w_ctrl < 0:
            raise ConfigurationError("cost weights must be nonnegative")
        return self


@dataclass(frozen=True)
class TaskSpec:
    path_kind: str
    path_params: tuple
    noise_std: tuple
    w_pos: float
    w_ctrl: float
    x0: tuple
    control_low: tuple
    control_high: tuple
    dt: float = 0.1
    horizon: int = 30
    omega_ref: float = 1.0
    arc_speed: float = 1.0

    def __post_init__(self):
        for name in ("path_params", "noise_std", "x0", "control_low", "control_high"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.path_kind not in PATH_KINDS:
            raise ConfigurationError(f"unknown path kind {self.path_kind!r}")
        if len(self.path_params) != N_PATH_PARAMS[self.path_kind]:
            raise ConfigurationError(
                f"{self.path_kind} takes {N_PATH_PARAMS[self.path_kind]} path parameters")
        size = {"circle": 2, "sine": 0, "lemniscate": 0}[self.path_kind]
        if self.path_kind != "sine" and not self.path_params[size] > 0:
            raise ConfigurationError("path radius/scale must be positive")
        if self.path_kind == "sine" and not self.path_params[0] >= 0:
            raise ConfigurationError("sine amplitude must be nonnegative")
        if len(self.noise_std) != STATE_DIM or min(self.noise_std) < 0:
            raise ConfigurationError("noise_std needs 3 nonnegative entries")
        if len(self.x0) != STATE_DIM:
            raise ConfigurationError("x0 needs 3 entries")
        if self.w_pos < 0 or self.w_ctrl < 0:
            raise ConfigurationError("cost weights must be nonnegative")
        if not all(lo < hi for lo, hi in zip(self.control_low, self.control_high)):
            raise ConfigurationError("control lower bounds must be below upper bounds")

    @property
    def low(self):
        return np.array(self.control_low)

    @property
    def high(self):
        return np.array(self.control_high)

    def fingerprint(self):
        """Stable content hash, used to key random streams by task identity."""
        text = repr(tuple((f.name, getattr(self, f.name)) for f in fields(self)))
        return hashlib.blake2b(text.encode(), digest_size=8).hexdigest()


def _reference(kind, params, t, dt, omega_ref, arc_speed):
    t = np.asarray(t, dtype=np.float64)
    if kind == "circle":
        cx, cy, r, phase = params
        ang = omega_ref * t * dt + phase
        return np.stack([cx + r * np.cos(ang), cy + r * np.sin(ang)], axis=-1)
    if kind == "sine":
        amp, freq, phase = params
        s = arc_speed * t * dt
        return np.stack([s, amp * np.sin(freq * s + phase)], axis=-1)
    scale, phase = params
    ang = omega_ref * t * dt + phase
    den = 1.0 + np.sin(ang) ** 2
    return np.stack([scale * np.cos(ang) / den,
                     scale * np.sin(ang) * np.cos(ang) / den], axis=-1)


def reference_point(task, t):
    """Target planar position at step ``t`` (scalar or array of steps)."""
    return _reference(task.path_kind, task.path_params, t, task.dt,
                      task.omega_ref, task.arc_speed)


def make_task(path_kind, path_params, noise_std=(0.0, 0.0, 0.0), world=None, x0=None):
    """Build a task whose start state sits on the reference, heading along it."""
    world = world or WorldConfig()
    params = tuple(float(p) for p in path_params)
    if x0 is None:
        ref = lambda s: _reference(path_kind, params, s, world.dt,  # noqa: E731
                                   world.omega_ref, world.arc_speed)
        eps = 1e-6
        p0 = ref(0.0)
        d = ref(eps) - ref(-eps)
        x0 = (p0[0], p0[1], math.atan2(d[1], d[0]))
    return TaskSpec(path_kind, params, tuple(noise_std), world.w_pos, world.w_ctrl, x0,
                    tuple(world.control_low), tuple(world.control_high), world.dt,
                    world.horizon, world.omega_ref, world.arc_speed)


@dataclass(frozen=True)
class TaskDistConfig:
    """Uniform ranges (low, high) for every sampled task quantity."""

    world: WorldConfig = field(default_factory=WorldConfig)
    weights: tuple = (1 / 3, 1 / 3, 1 / 3)   # circle, sine, lemniscate
    circle_cx: tuple = (-0.5, 0.5)
    circle_cy: tuple = (-0.5, 0.5)
    circle_radius: tuple = (1.0, 2.0)
    circle_phase: tuple = (0.0, 2 * math.pi)
    sine_amplitude: tuple = (0.5, 1.5)
    sine_frequency: tuple = (0.5, 1.5)
    sine_phase: tuple = (-math.pi / 4, math.pi / 4)
    lemniscate_scale: tuple = (1.0, 2.0)
    lemniscate_phase: tuple = (0.0, 2 * math.pi)
    noise_std: tuple = (0.0, 0.02)

    RANGES = ("circle_cx", "circle_cy", "circle_radius", "circle_phase",
              "sine_amplitude", "sine_frequency", "sine_phase",
              "lemniscate_scale", "lemniscate_phase", "noise_std")
    POSITIVE = ("circle_radius", "sine_amplitude", "lemniscate_scale")

    def validate(self):
        self.world.validate()
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (len(PATH_KINDS),) or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ConfigurationError("path mixture weights must be 3 nonnegative numbers")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ConfigurationError(f"path mixture weights sum to {w.sum()!r}, not 1")
        for name in self.RANGES:
            rng = getattr(self, name)
            if len(rng) != 2 or not all(np.isfinite(rng)) or rng[0] > rng[1]:
                raise ConfigurationError(f"range {name} must be (low, high) with low <= high")
        for name in self.POSITIVE:
            if not getattr(self, name)[0] > 0:
                raise ConfigurationError(f"range {name} must be strictly positive")
        if self.noise_std[0] < 0:
            raise ConfigurationError("noise_std range must be nonnegative")
        return self


def sample_task(dist, rng):
    """Draw one task from ``dist``."""
    dist.validate()
    kind = PATH_KINDS[rng.choice(len(PATH_KINDS), p=np.asarray(dist.weights, float))]
    u = lambda r: float(rng.uniform(r[0], r[1]))  # noqa: E731
    if kind == "circle":
        params = (u(dist.circle_cx), u(dist.circle_cy), u(dist.circle_radius),
                  u(dist.circle_phase))
    elif kind == "sine":
        params = (u(dist.sine_amplitude), u(dist.sine_frequency), u(dist.sine_phase))
    else:
        params = (u(dist.lemniscate_scale), u(dist.lemniscate_phase))
    noise = tuple(u(dist.noise_std) for _ in range(STATE_DIM))
    return make_task(kind, params, noise, dist.world)


def wrap_angle(a):
    """Map angles into (-pi, pi]; values already inside are returned untouched."""
    a = np.asarray(a, dtype=np.float64)
    out = np.pi - np.mod(np.pi - a, 2 * np.pi)
    return np.where((a > -np.pi) & (a <= np.pi), a, out)


def _euler(x, u, dt):
    # x: (..., 3), u: (..., 2), both already validated
    heading = x[..., 2]
    v, w = u[..., 0], u[..., 1]
    nxt = np.stack([x[..., 0] + dt * v * np.cos(heading),
                    x[..., 1] + dt * v * np.sin(heading),
                    heading + dt * w], axis=-1)
    return nxt


def step_dynamics(task, x, u, rng):
    """One forward-Euler unicycle step with additive Gaussian process noise."""
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
        raise NumericDomainError("state and control must be finite")
    u = np.clip(u, task.low, task.high)
    nxt = _euler(x, u, task.dt) + rng.normal(0.0, task.noise_std, size=x.shape)
    nxt[..., 2] = wrap_angle(nxt[..., 2])
    return nxt


def stage_cost(task, x, u, t):
    """Squared distance to the reference at step ``t`` plus control effort."""
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    d = x[..., :2] - reference_point(task, t)
    return task.w_pos * np.sum(d * d, axis=-1) + task.w_ctrl * np.sum(u * u, axis=-1)


@dataclass(frozen=True, eq=False)
class RolloutBatch:
    controls: np.ndarray  # (N, T+1, m_dim), executed (clamped) controls
    costs: np.ndarray     # (N, T+1); costs[:, t] scores controls[:, t] and states[:, t+1]
    states: np.ndarray    # (N, T+2, n), states[:, 0] = x0

    def __post_init__(self):
        n, tp1, _ = self.controls.shape
        if self.costs.shape != (n, tp1) or self.states.shape[:2] != (n, tp1 + 1):
            raise ConfigurationError("inconsistent rollout batch shapes")
        for a in (self.controls, self.costs, self.states):
            a.setflags(write=False)

    @property
    def n_rollouts(self):
        return self.controls.shape[0]

    def mean_cost(self):
        return float(self.costs.mean())


def simulate(task, controls, rng):
    """Run already-sampled control sequences ``(N, T+1, m_dim)`` from ``task.x0``."""
    controls = np.clip(np.asarray(controls, dtype=np.float64), task.low, task.high)
    n, tp1, _ = controls.shape
    noise = rng.normal(0.0, task.noise_std, size=(n, tp1, STATE_DIM))
    states = np.empty((n, tp1 + 1, STATE_DIM))
    states[:, 0] = task.x0
    # same arithmetic as _euler, unrolled per coordinate for speed
    dv = task.dt * controls[:, :, 0]
    dw = task.dt * controls[:, :, 1]
    px, py, psi = states[:, 0, 0], states[:, 0, 1], states[:, 0, 2]
    for t in range(tp1):
        px, py, psi = (px + dv[:, t] * np.cos(psi) + noise[:, t, 0],
                       py + dv[:, t] * np.sin(psi) + noise[:, t, 1],
                       psi + dw[:, t] + noise[:, t, 2])
        if np.abs(psi).max() >= np.pi:
            psi = wrap_angle(psi)
        states[:, t + 1, 0] = px
        states[:, t + 1, 1] = py
        states[:, t + 1, 2] = psi
    if not np.all(np.isfinite(states)):
        raise NumericDomainError("rollout diverged to non-finite states")
    steps = np.arange(1, tp1 + 1)
    costs = stage_cost(task, states[:, 1:], controls, steps)
    return RolloutBatch(controls, costs, states)


def rollout(task, m, n_rollouts, rng):
    """Execute controller ``m`` ``n_rollouts`` times; one batch of data."""
    if n_rollouts < 1:
        raise ConfigurationError("n_rollouts must be >= 1")
    if m.horizon != task.horizon:
        raise ConfigurationError(
            f"controller horizon {m.horizon} does not match task horizon {task.horizon}")
    controls = np.stack([sample_controls(m, rng) for _ in range(n_rollouts)])
    return simulate(task, controls, rng)
