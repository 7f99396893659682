"""Run configuration: a flat ``key = value`` text format.

Lines look like ``meta.beta = 0.003``; ``#`` starts a comment; list values
are comma separated. Every key has a default (see ``DEFAULTS``), so an empty
file is a valid configuration.
"""

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigurationError, InputError
from .meta import MetaConfig
from .policy import PolicyConfig
from .rl import TrainConfig
from .world import PATH_KINDS, TaskDistConfig, WorldConfig, make_task

METHODS = ("meta", "rl", "mppi-baseline", "random-update")


def _floats(n=None):
    def parse(text):
        vals = tuple(float(v) for v in text.split(",") if v.strip())
        if n is not None and len(vals) != n:
            raise ValueError(f"expected {n} comma-separated numbers")
        return vals
    return parse


def _bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError("expected true/false")


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return v


def _strs(text):
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _kind(text):
    text = text.strip()
    if text not in PATH_KINDS:
        raise ValueError(f"path kind must be one of {', '.join(PATH_KINDS)}")
    return text


# key -> (parser, default)
DEFAULTS = {
    "seed": (_seed, 0),
    "out": (str, "runs/default"),
    "method": (str, "meta"),
    "world.dt": (float, 0.1),
    "world.T": (int, 30),
    "world.control_low": (_floats(2), (-0.5, -4.0)),
    "world.control_high": (_floats(2), (3.0, 4.0)),
    "world.omega_ref": (float, 1.0),
    "world.arc_speed": (float, 1.0),
    "world.w_pos": (float, 1.0),
    "world.w_ctrl": (float, 0.01),
    "task.weights": (_floats(3), (1 / 3, 1 / 3, 1 / 3)),
    "task.circle_cx": (_floats(2), (-0.5, 0.5)),
    "task.circle_cy": (_floats(2), (-0.5, 0.5)),
    "task.circle_radius": (_floats(2), (1.0, 2.0)),
    "task.circle_phase": (_floats(2), (0.0, 2 * math.pi)),
    "task.sine_amplitude": (_floats(2), (0.5, 1.5)),
    "task.sine_frequency": (_floats(2), (0.5, 1.5)),
    "task.sine_phase": (_floats(2), (-math.pi / 4, math.pi / 4)),
    "task.lemniscate_scale": (_floats(2), (1.0, 2.0)),
    "task.lemniscate_phase": (_floats(2), (0.0, 2 * math.pi)),
    "task.noise_std": (_floats(2), (0.0, 0.02)),
    "rl_task.kind": (_kind, "circle"),
    "rl_task.params": (_floats(), (0.0, 0.0, 1.5, 0.0)),
    "rl_task.noise_std": (_floats(3), (0.01, 0.01, 0.01)),
    "policy.hidden": (lambda t: tuple(int(v) for v in t.split(",") if v.strip()), (64, 64)),
    "policy.output_scale": (float, 0.1),
    "policy.init_log_std": (float, math.log(0.05)),
    "train.alpha": (float, 3e-3),
    "train.gamma": (float, 1.0),
    "train.H": (int, 15),
    "train.K": (int, 8),
    "train.n_rollouts": (int, 8),
    "train.variance_reduction": (_bool, True),
    "train.iterations": (int, 300),
    "meta.beta": (float, 3e-3),
    "meta.eta": (float, 1e-3),
    "meta.inner_steps": (int, 1),
    "meta.task_batch": (int, 4),
    "meta.K": (int, 8),
    "meta.iterations": (int, 200),
    "mppi.temperature": (float, 1.0),
    "eval.adapt_steps": (int, 1),
    "eval.n_tasks": (int, 20),
    "eval.stochastic": (_bool, False),
    "eval.methods": (_strs, ("meta", "meta:0", "rl", "mppi-baseline", "random-update")),
    "eval.meta_checkpoint": (str, "meta.ckpt"),
    "eval.rl_checkpoint": (str, "rl.ckpt"),
}


def parse_method(label):
    """``"meta:0"`` -> ``("meta", 0)``; a bare name has no adaptation override."""
    name, _, steps = label.partition(":")
    if name not in METHODS:
        raise ConfigurationError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")
    if steps:
        try:
            n = int(steps)
        except ValueError:
            raise ConfigurationError(f"bad adaptation count in method {label!r}") from None
        if n < 0:
            raise ConfigurationError(f"bad adaptation count in method {label!r}")
        return name, n
    return name, None


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    out: str = "runs/default"
    method: str = "meta"
    world: WorldConfig = field(default_factory=WorldConfig)
    dist: TaskDistConfig = field(default_factory=TaskDistConfig)
    rl_task: object = None
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    train: TrainConfig = field(default_factory=lambda: TrainConfig(variance_reduction=True))
    meta: MetaConfig = field(default_factory=lambda: MetaConfig(variance_reduction=True))
    temperature: float = 1.0
    adapt_steps: int = 1
    n_eval_tasks: int = 20
    stochastic_eval: bool = False
    methods: tuple = ("meta", "meta:0", "rl", "mppi-baseline", "random-update")
    meta_checkpoint: str = "meta.ckpt"
    rl_checkpoint: str = "rl.ckpt"

    def __post_init__(self):
        if self.rl_task is None:
            object.__setattr__(self, "rl_task",
                               make_task("circle", (0.0, 0.0, 1.5, 0.0), (0.01,) * 3, self.world))

    def validate(self):
        self.dist.validate()
        self.train.validate()
        self.meta.validate()
        if not self.temperature > 0:
            raise ConfigurationError("mppi.temperature must be positive")
        if self.adapt_steps < 0 or self.n_eval_tasks < 1:
            raise ConfigurationError("eval.adapt_steps >= 0 and eval.n_tasks >= 1 required")
        parse_method(self.method)
        for m in self.methods:
            parse_method(m)
        return self

    @property
    def out_dir(self):
        return Path(self.out)

    def checkpoint_path(self, name):
        path = Path(self.meta_checkpoint if name == "meta" else self.rl_checkpoint)
        return path if path.is_absolute() else self.out_dir / path


def parse_text(text, source="<config>"):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value'")
        values[key] = (value.strip(), f"{source}:{lineno}")
    return values


def build(values):
    """Turn ``{key: (text, where)}`` into a validated :class:`RunConfig`."""
    v = {k: d for k, (_, d) in DEFAULTS.items()}
    for key, (text, where) in values.items():
        if key not in DEFAULTS:
            raise ConfigurationError(f"{where}: unknown key {key!r}")
        try:
            v[key] = DEFAULTS[key][0](text)
        except ValueError as exc:
            raise ConfigurationError(f"{where}: bad value for {key}: {exc}") from None

    world = WorldConfig(dt=v["world.dt"], horizon=v["world.T"],
                        control_low=v["world.control_low"], control_high=v["world.control_high"],
                        omega_ref=v["world.omega_ref"], arc_speed=v["world.arc_speed"],
                        w_pos=v["world.w_pos"], w_ctrl=v["world.w_ctrl"]).validate()
    dist = TaskDistConfig(world=world, **{name: v["task." + name] for name in
                                          ("weights", *TaskDistConfig.RANGES)})
    rl_task = make_task(v["rl_task.kind"], v["rl_task.params"], v["rl_task.noise_std"], world)
    train = TrainConfig(alpha=v["train.alpha"], gamma=v["train.gamma"], H=v["train.H"],
                        K=v["train.K"], n_rollouts=v["train.n_rollouts"],
                        variance_reduction=v["train.variance_reduction"],
                        iterations=v["train.iterations"])
    meta = MetaConfig(**{**train.__dict__, "K": v["meta.K"]}, beta=v["meta.beta"],
                      eta_meta=v["meta.eta"], inner_steps=v["meta.inner_steps"],
                      task_batch=v["meta.task_batch"], meta_iterations=v["meta.iterations"])
    policy = PolicyConfig(hidden=v["policy.hidden"], output_scale=v["policy.output_scale"],
                          init_log_std=v["policy.init_log_std"])
    cfg = RunConfig(seed=v["seed"], out=v["out"], method=v["method"], world=world, dist=dist,
                    rl_task=rl_task, policy=policy, train=train, meta=meta,
                    temperature=v["mppi.temperature"], adapt_steps=v["eval.adapt_steps"],
                    n_eval_tasks=v["eval.n_tasks"], stochastic_eval=v["eval.stochastic"],
                    methods=v["eval.methods"], meta_checkpoint=v["eval.meta_checkpoint"],
                    rl_checkpoint=v["eval.rl_checkpoint"])
    return cfg.validate()


def load_config(path=None, overrides=None):
    """Read ``path`` (optional) and apply ``overrides`` (``{key: text}``) on top."""
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc.strerror}") from None
        values.update(parse_text(text, str(path)))
    for key, text in (overrides or {}).items():
        values[key] = (str(text), "override")
    return build(values)


def default_config_text():
    """The full key list with defaults, in config-file syntax."""
    lines = []
    section = None
    for key, (_, default) in DEFAULTS.items():
        head = key.split(".")[0] if "." in key else ""
        if head != section:
            if lines:
                lines.append("")
            section = head
        if isinstance(default, tuple):
            text = ", ".join(repr(x) if isinstance(x, float) else str(x) for x in default)
        elif isinstance(default, bool):
            text = "true" if default else "false"
        else:
            text = repr(default) if isinstance(default, float) else str(default)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def with_seed(cfg, seed):
    return replace(cfg, seed=_seed(str(seed)))
