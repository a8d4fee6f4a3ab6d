"""Tests for experiment configuration parsing."""
from pathlib import Path

import pytest

from lac_risk.core import ConfigError, LossKind, RiskVariant
from lac_risk.experiments import (
    ExperimentConfig,
    apply_settings,
    load_config,
    parse_config_text,
    resolve_method,
)
from lac_risk.evaluation import PredictionRule

CONFIG_TEXT = """
# five Gaussian classes, three known
scenario.source = synthetic
scenario.known_classes = 1,2,3
scenario.n_labeled = 200      # trailing comments are fine
synthetic.radius = 4
loss = gce:q=0.5
risk = nrpr:t=2,lambda=0.4
train.epochs = 50
train.batch_size = full
mpe.bandwidth = median:1.5
methods = nrpr, relu, softmax-t
repeat = 3
"""


def test_defaults():
    """Defaults mirror the regular-scale protocol."""
    config = load_config()

    assert (config.n_labeled, config.m_unlabeled, config.n_test) == (500, 1000, 1000)
    assert config.epochs == 1500
    assert config.loss == "gce:q=0.7"
    assert config.methods == ("nrpr",)
    assert config.repeat == 1


def test_parse_config_text():
    """Comments and blank lines are skipped; keys are normalized."""
    settings = parse_config_text("A.B = 1\n\n# note\nc=  x y \n")
    assert settings == {"a.b": "1", "c": "x y"}


def test_parse_config_text_rejects_line_without_equals():
    """A line without '=' is reported with its number."""
    with pytest.raises(ConfigError) as info:
        parse_config_text("repeat = 2\nnonsense\n")
    assert info.value.key == "line 2"


def test_load_config_file(tmp_path):
    """Every key in the file lands on its field."""
    path = tmp_path / "exp.cfg"
    path.write_text(CONFIG_TEXT, encoding="utf-8")

    config = load_config(path)

    assert config.n_labeled == 200
    assert config.synthetic_radius == 4.0
    assert config.loss_spec().q == 0.5
    assert config.penalty_settings().t == 2.0
    assert config.penalty_settings().lam == 0.4
    assert config.batch_size is None
    assert config.bandwidth is None
    assert config.bandwidth_scale == 1.5
    assert config.methods == ("nrpr", "relu", "softmax-t")
    assert config.repeat == 3


def test_overrides_win_over_file(tmp_path):
    """Command-line overrides replace file values."""
    path = tmp_path / "exp.cfg"
    path.write_text(CONFIG_TEXT, encoding="utf-8")

    config = load_config(path, {"repeat": "7", "out": "elsewhere"})

    assert config.repeat == 7
    assert config.out == Path("elsewhere")


def test_missing_config_file():
    """A missing file is a FileNotFoundError."""
    with pytest.raises(FileNotFoundError):
        load_config(Path("/nonexistent/exp.cfg"))


@pytest.mark.parametrize(
    "key,value",
    [
        ("scenario.n_labeled", "many"),
        ("methods", "nrpr,bogus"),
        ("loss", "hinge"),
        ("risk", "nrpr:t=-1"),
        ("mpe.bandwidth", "-2"),
        ("mpe.grid_step", "0"),
        ("mpe.grid_step", "1.5"),
        ("repeat", "0"),
        ("scenario.prior_shift_alpha", "1.0"),
        ("train.model", "cnn"),
        ("synthetic.std", "0"),
        ("unknown.key", "1"),
    ],
)
def test_invalid_values_name_the_key(key, value):
    """Errors carry the dotted key that caused them."""
    with pytest.raises(ConfigError) as info:
        load_config(overrides={key: value})
    assert info.value.key in (key, "synthetic")


def test_synthetic_means_and_bandwidth_number():
    """Explicit means use ';' between points; a number fixes the bandwidth."""
    config = apply_settings(
        ExperimentConfig(),
        {"synthetic.means": "0,0; 5,0; 0,5", "mpe.bandwidth": "2.5", "scenario.known_classes": "1"},
    )

    assert config.synthetic_spec().means == ((0.0, 0.0), (5.0, 0.0), (0.0, 5.0))
    assert config.kernel_config().bandwidth == 2.5


def test_kernel_grid_from_step():
    """The lambda grid covers [0, 1) in grid_step increments."""
    grid = load_config(overrides={"mpe.grid_step": "0.25"}).kernel_config().lambda_grid
    assert grid == (0.0, 0.25, 0.5, 0.75)


@pytest.mark.parametrize("step, expected", [
    ("0.3", (0.0, 0.3, 0.6, 0.9)),
    ("0.4", (0.0, 0.4, 0.8)),
    ("0.5", (0.0, 0.5)),
])
def test_kernel_grid_keeps_last_point_below_one(step, expected):
    """Steps that do not divide 1 still reach the largest multiple below 1."""
    grid = load_config(overrides={"mpe.grid_step": step}).kernel_config().lambda_grid
    assert grid == expected


def test_scenario_and_train_configs():
    """Derived configs carry the experiment values."""
    config = load_config(overrides={"train.learning_rate": "0.05", "train.model": "mlp", "seed": "4"})

    scenario = config.scenario_config(9)
    assert scenario.seed == 9
    assert scenario.synthetic_spec.class_count == 5

    train = config.train_config(config.penalty_settings(), config.loss_spec(), seed=2)
    assert train.learning_rate == 0.05
    assert train.model == "mlp"
    assert train.seed == 2


def test_describe_is_json_friendly():
    """Paths and tuples become strings and lists."""
    described = ExperimentConfig().describe()
    assert described["out"] == "results"
    assert described["known_classes"] == [1, 2, 3]


def test_resolve_method():
    """Method names map to objective, loss and prediction rule."""
    config = load_config(overrides={"risk": "nrpr:t=3,lambda=0.6"})

    nrpr = resolve_method("nrpr", config)
    assert nrpr.variant is RiskVariant.URE_PENALTY
    assert (nrpr.lam, nrpr.t) == (0.6, 3.0)

    assert resolve_method("ure", config).lam == 0.0
    assert resolve_method("eulac", config).loss.kind is LossKind.OVR
    assert resolve_method("shift", config).variant is RiskVariant.PRIOR_SHIFT
    assert resolve_method("softmax-t", config).rule is PredictionRule.SOFTMAX_THRESHOLD
    assert resolve_method("ovr-threshold", config).variant is RiskVariant.SUPERVISED
    with pytest.raises(ValueError):
        resolve_method("evm", config)
