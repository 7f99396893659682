import math

import pytest

from metaopt.config import DEFAULTS, default_config_text, load_config, parse_method
from metaopt.errors import ConfigurationError, InputError


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# nothing\n\n")
    cfg = load_config(path)
    assert cfg.seed == 0
    assert cfg.world.horizon == 30 and cfg.world.dt == 0.1
    assert cfg.train.H == 15 and cfg.train.K == 8 and cfg.train.alpha == 3e-3
    assert cfg.meta.beta == 3e-3 and cfg.meta.eta_meta == 1e-3
    assert cfg.meta.task_batch == 4 and cfg.meta.meta_iterations == 200
    assert cfg.policy.hidden == (64, 64)
    assert cfg.dist.circle_radius == (1.0, 2.0)
    assert cfg.rl_task.path_kind == "circle"


def test_values_and_comments(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("seed = 42  # run seed\nmeta.beta = 0.01\n"
                    "task.weights = 1, 0, 0\ntrain.variance_reduction = off\n"
                    "policy.hidden = 16, 8\n")
    cfg = load_config(path)
    assert cfg.seed == 42
    assert cfg.meta.beta == 0.01
    assert cfg.dist.weights == (1.0, 0.0, 0.0)
    assert cfg.train.variance_reduction is False and cfg.meta.variance_reduction is False
    assert cfg.policy.hidden == (16, 8)


def test_overrides_win(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("seed = 1\n")
    assert load_config(path, {"seed": "9"}).seed == 9


def test_meta_inherits_episode_structure():
    cfg = load_config(None, {"train.H": "4", "train.n_rollouts": "3", "meta.K": "5"})
    assert cfg.meta.H == 4 and cfg.meta.n_rollouts == 3 and cfg.meta.K == 5
    assert cfg.train.K == 8


@pytest.mark.parametrize("text", [
    "bogus.key = 1\n", "seed 3\n", "seed = -1\n", "seed = 18446744073709551616\n",
    "train.H = many\n", "task.weights = 0.5, 0.5, 0.5\n", "mppi.temperature = 0\n",
    "method = sgd\n", "eval.methods = meta, nope\n", "rl_task.kind = square\n",
])
def test_rejects(tmp_path, text):
    path = tmp_path / "c.cfg"
    path.write_text(text)
    with pytest.raises(ConfigurationError):
        load_config(path)


def test_error_names_line(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("seed = 1\n\ntrain.H = x\n")
    with pytest.raises(ConfigurationError, match=r"c.cfg:3"):
        load_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_config(tmp_path / "missing.cfg")


def test_default_text_parses_to_defaults(tmp_path):
    path = tmp_path / "d.cfg"
    path.write_text(default_config_text())
    assert all(key in default_config_text() for key in DEFAULTS)
    a, b = load_config(path), load_config(None)
    assert a.dist == b.dist and a.train == b.train and a.meta == b.meta
    assert a.policy.init_log_std == pytest.approx(math.log(0.05), abs=0)


def test_parse_method():
    assert parse_method("meta") == ("meta", None)
    assert parse_method("meta:0") == ("meta", 0)
    assert parse_method("mppi-baseline") == ("mppi-baseline", None)
    with pytest.raises(ConfigurationError):
        parse_method("meta:-1")
