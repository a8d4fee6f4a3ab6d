"""Tests for score models, backpropagation, Adam and checkpoints."""
import json

import numpy as np
import pytest

from lac_risk.core import DataFormatError, LossKind, LossSpec, RiskConfig, RiskVariant, TrainConfig
from lac_risk.models import (
    AdamState,
    LinearModel,
    MlpModel,
    TrainingBatch,
    adam_step,
    backward,
    build_model,
    forward,
    load_checkpoint,
    model_from_dict,
    objective_and_gradients,
    save_checkpoint,
)

GCE = LossSpec(LossKind.GCE, q=0.7)
OVR = LossSpec(LossKind.OVR)


def _random_model(kind, d, outputs, rng, hidden=6):
    if kind == "linear":
        return LinearModel({"W": rng.normal(size=(outputs, d)), "b": rng.normal(size=outputs)})
    return MlpModel({
        "W1": rng.normal(size=(hidden, d)),
        "b1": rng.normal(size=hidden),
        "W2": rng.normal(size=(outputs, hidden)),
        "b2": rng.normal(size=outputs),
    })


def _numeric_param_grads(model, value_fn, eps=1e-6):
    grads = {}
    for name, param in model.params.items():
        grad = np.zeros_like(param)
        for idx in np.ndindex(param.shape):
            original = param[idx]
            param[idx] = original + eps
            up = value_fn()
            param[idx] = original - eps
            down = value_fn()
            param[idx] = original
            grad[idx] = (up - down) / (2 * eps)
        grads[name] = grad
    return grads


def test_zero_parameters_give_zero_scores():
    """A zero model scores every input 0."""
    model = LinearModel({"W": np.zeros((3, 2)), "b": np.zeros(3)})
    np.testing.assert_array_equal(forward(model, np.ones((4, 2))), np.zeros((4, 3)))


def test_linear_forward_hand_example():
    """W = [[2], [-1]], b = [0, 1], x = [3] scores [6, -2]."""
    model = LinearModel({"W": np.array([[2.0], [-1.0]]), "b": np.array([0.0, 1.0])})
    np.testing.assert_array_equal(forward(model, np.array([[3.0]])), [[6.0, -2.0]])


@pytest.mark.parametrize("kind, bias", [("linear", "b"), ("mlp", "b2")])
@pytest.mark.parametrize("shift", [-7.5, 0.25, 40.0])
def test_output_bias_shift_moves_every_score(kind, bias, shift):
    """Adding c to each output bias adds c to each score."""
    rng = np.random.default_rng(8)
    model = _random_model(kind, 3, 4, rng)
    X = rng.normal(size=(25, 3))
    shifted = type(model)({**model.params, bias: model.params[bias] + shift})

    np.testing.assert_allclose(forward(shifted, X), forward(model, X) + shift, rtol=0, atol=1e-10)


def test_mlp_forward_hand_example():
    """Identity hidden layer with the rectifier cutting the negative unit."""
    model = MlpModel({
        "W1": np.eye(2),
        "b1": np.zeros(2),
        "W2": np.array([[1.0, 1.0], [1.0, -1.0]]),
        "b2": np.array([0.0, 0.5]),
    })
    np.testing.assert_array_equal(forward(model, np.array([[1.0, -2.0]])), [[1.0, 1.5]])


def test_backward_zero_score_gradient():
    """Zero upstream gradient gives zero parameter gradients."""
    rng = np.random.default_rng(0)
    model = _random_model("mlp", 3, 4, rng)
    grads = backward(model, rng.normal(size=(5, 3)), np.zeros((5, 4)))
    for value in grads.values():
        assert not value.any()


def test_linear_backward_outer_product():
    """For one example grad(W) = g x^T and grad(b) = g."""
    model = LinearModel({"W": np.zeros((2, 3)), "b": np.zeros(2)})
    x = np.array([[1.0, 2.0, -1.0]])
    g = np.array([[0.5, -2.0]])

    grads = backward(model, x, g)

    np.testing.assert_array_equal(grads["W"], np.outer(g[0], x[0]))
    np.testing.assert_array_equal(grads["b"], g[0])


def test_forward_rejects_wrong_width():
    """Feature width must match the model."""
    model = LinearModel({"W": np.zeros((2, 3)), "b": np.zeros(2)})
    with pytest.raises(ValueError):
        forward(model, np.zeros((1, 4)))


def test_model_rejects_non_finite_parameters():
    """Parameters must be finite."""
    with pytest.raises(ValueError):
        LinearModel({"W": np.array([[np.inf]]), "b": np.zeros(1)})


def test_mlp_backward_matches_finite_differences():
    """Backpropagated gradients of sum(G * scores) agree with central differences."""
    rng = np.random.default_rng(1)
    model = _random_model("mlp", 3, 4, rng)
    X = rng.normal(size=(6, 3))
    G = rng.normal(size=(6, 4))

    analytic = backward(model, X, G)
    numeric = _numeric_param_grads(model, lambda: float(np.sum(G * forward(model, X))))

    for name in analytic:
        np.testing.assert_allclose(analytic[name], numeric[name], rtol=1e-5, atol=1e-7)


def _gradient_instance(kind, loss, variant, seed):
    rng = np.random.default_rng(seed)
    k, d, n = 3, 2, 10
    model = _random_model(kind, d, k + 1, rng)
    X_l = rng.normal(size=(n, d))
    X_u = rng.normal(size=(n, d)) + 1.0
    y = np.tile([1, 2, 3], 4)[:n]
    risk = RiskConfig(theta_hat=1.0, lam=1.5, t=2.0, variant=variant)

    batch = TrainingBatch(X_l, y, X_u)
    result, _ = objective_and_gradients(model, batch, risk, loss)
    if result.pac > 0:
        # with theta = 1 and n = m swapping the inputs negates pac
        batch = TrainingBatch(X_u, y, X_l)
    return model, batch, risk


@pytest.mark.parametrize("kind", ["linear", "mlp"])
@pytest.mark.parametrize("loss", [GCE, OVR], ids=str)
@pytest.mark.parametrize("variant", [RiskVariant.URE, RiskVariant.URE_PENALTY])
def test_objective_gradients_match_finite_differences(kind, loss, variant):
    """Full objective gradients through loss, model and penalty, with pac < 0."""
    model, batch, risk = _gradient_instance(kind, loss, variant, seed=7)

    result, analytic = objective_and_gradients(model, batch, risk, loss)
    assert result.pac < 0
    numeric = _numeric_param_grads(model, lambda: objective_and_gradients(model, batch, risk, loss)[0].value)

    for name in analytic:
        np.testing.assert_allclose(analytic[name], numeric[name], rtol=1e-5, atol=1e-8)


def test_penalty_changes_gradient_when_pac_negative():
    """With pac < 0 the penalized gradient differs from the plain one."""
    model, batch, risk = _gradient_instance("linear", GCE, RiskVariant.URE_PENALTY, seed=7)
    _, penalized = objective_and_gradients(model, batch, risk, GCE)
    _, plain = objective_and_gradients(model, batch, RiskConfig(theta_hat=1.0, variant=RiskVariant.URE), GCE)

    assert not np.allclose(penalized["W"], plain["W"])


def test_supervised_gradient_matches_finite_differences():
    """The labeled-only baseline objective is differentiated correctly."""
    rng = np.random.default_rng(4)
    model = _random_model("linear", 2, 3, rng)
    batch = TrainingBatch(rng.normal(size=(8, 2)), np.tile([1, 2, 3], 3)[:8], np.zeros((0, 2)))
    risk = RiskConfig(theta_hat=1.0, variant=RiskVariant.SUPERVISED)
    ce = LossSpec(LossKind.CE)

    _, analytic = objective_and_gradients(model, batch, risk, ce)
    numeric = _numeric_param_grads(model, lambda: objective_and_gradients(model, batch, risk, ce)[0].value)

    for name in analytic:
        np.testing.assert_allclose(analytic[name], numeric[name], rtol=1e-5, atol=1e-8)


def test_non_finite_scores_raise_floating_point_error():
    """Overflowing scores are reported before any loss is computed."""
    model = LinearModel({"W": np.full((2, 1), 1e308), "b": np.zeros(2)})
    batch = TrainingBatch(np.array([[10.0]]), np.array([1]), np.array([[10.0]]))
    with pytest.raises(FloatingPointError):
        objective_and_gradients(model, batch, RiskConfig(theta_hat=0.5), GCE)


def test_adam_first_step():
    """After bias correction the first step moves by lr / (1 + eps)."""
    params = {"p": np.array([0.0])}
    new, state = adam_step(params, {"p": np.array([1.0])}, AdamState.zeros_like(params), 1e-3)

    assert new["p"][0] == pytest.approx(-1e-3 / (1 + 1e-8), rel=1e-12)
    assert state.step == 1


def test_adam_zero_gradient_without_decay():
    """g = 0 and wd = 0 leave parameters unchanged."""
    params = {"W": np.array([[1.0, -2.0]]), "b": np.array([0.5])}
    zeros = {name: np.zeros_like(value) for name, value in params.items()}

    new, _ = adam_step(params, zeros, AdamState.zeros_like(params), 0.1)

    for name in params:
        np.testing.assert_array_equal(new[name], params[name])


def test_adam_decoupled_decay():
    """wd = 0.1 and lr = 0.01 with g = 0 scale parameters by 0.999."""
    params = {"p": np.array([2.0, -4.0])}
    new, _ = adam_step(params, {"p": np.zeros(2)}, AdamState.zeros_like(params), 0.01, 0.1)
    np.testing.assert_allclose(new["p"], [2.0 * 0.999, -4.0 * 0.999], rtol=1e-15)


def test_adam_does_not_mutate_inputs():
    """Updates return new arrays."""
    params = {"p": np.array([1.0])}
    state = AdamState.zeros_like(params)
    adam_step(params, {"p": np.array([3.0])}, state, 0.1)

    assert params["p"][0] == 1.0
    assert state.step == 0
    assert state.first_moment["p"][0] == 0.0


def test_adam_shape_mismatch():
    """A gradient must match its parameter's shape."""
    params = {"p": np.zeros(2)}
    with pytest.raises(ValueError):
        adam_step(params, {"p": np.zeros(3)}, AdamState.zeros_like(params), 0.1)


def test_build_model_shapes():
    """build_model respects the kind, width and output count."""
    rng = np.random.default_rng(0)
    linear = build_model("linear", 4, 3, 8, rng)
    mlp = build_model("mlp", 4, 3, 8, rng)

    assert linear.params["W"].shape == (3, 4)
    assert mlp.hidden == 8
    assert mlp.n_outputs == 3
    with pytest.raises(ValueError):
        build_model("cnn", 4, 3, 8, rng)


def test_model_dict_round_trip():
    """to_dict and model_from_dict preserve parameters exactly."""
    model = _random_model("mlp", 2, 3, np.random.default_rng(5))
    restored = model_from_dict(json.loads(json.dumps(model.to_dict())))

    assert isinstance(restored, MlpModel)
    for name in model.params:
        np.testing.assert_array_equal(restored.params[name], model.params[name])


def test_checkpoint_save_and_load(tmp_path):
    """Checkpoints carry parameters, shapes and the training config."""
    model = _random_model("linear", 2, 4, np.random.default_rng(6))
    config = TrainConfig(risk=RiskConfig(theta_hat=0.6, lam=0.5, t=2.0), loss=GCE, epochs=10)

    path = save_checkpoint(tmp_path / "ckpt" / "model.json", model, config, k=3)
    restored, payload = load_checkpoint(path)

    np.testing.assert_array_equal(restored.params["W"], model.params["W"])
    assert payload["k"] == 3
    assert payload["n_outputs"] == 4
    assert payload["train_config"]["loss"] == "gce:q=0.7"
    assert payload["train_config"]["risk"] == {"variant": "nrpr", "theta_hat": 0.6, "lambda": 0.5, "t": 2.0}


def test_checkpoint_version_mismatch(tmp_path):
    """Unknown checkpoint versions are rejected."""
    path = tmp_path / "old.json"
    path.write_text(json.dumps({"version": 99}), encoding="utf-8")
    with pytest.raises(DataFormatError):
        load_checkpoint(path)
