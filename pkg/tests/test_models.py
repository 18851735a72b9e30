from __future__ import annotations

import numpy as np
import pytest

from dynamic_horizon.compute import ops
from dynamic_horizon.compute.tensor import Graph
from dynamic_horizon.config import ModelConfig
from dynamic_horizon.exceptions import ModelError
from dynamic_horizon.loss.dynamic import kl_onehot
from dynamic_horizon.models import build_model
from dynamic_horizon.models.attention import add_attention_params, attend
from dynamic_horizon.models.heads import add_head_params, head_logits
from dynamic_horizon.models.lstm import add_lstm_params, lstm_step


def _seq2seq(attention: bool = True, q: int = 2, hidden: int = 6, length: int = 4, horizon: int = 3):
    return build_model(
        ModelConfig(kind="seq2seq", series_count=q, hidden=hidden, input_length=length, max_horizon=horizon, attention=attention)
    )


def test_lstm_step_with_zero_weights_halves_cell_state(rng):
    graph = Graph()
    add_lstm_params(graph.params, "cell", 3, 4, rng)
    for _, value in graph.params.items():
        value[...] = 0.0
    c0 = rng.normal(size=(2, 4))
    h, c = lstm_step(graph, graph.constant(rng.normal(size=(2, 3))), graph.constant(np.zeros((2, 4))), graph.constant(c0), "cell")
    np.testing.assert_allclose(c.value, 0.5 * c0)
    np.testing.assert_allclose(h.value, 0.5 * np.tanh(0.5 * c0))


def test_attention_over_single_state_returns_that_state(rng):
    graph = Graph()
    add_attention_params(graph.params, 4, rng)
    states = rng.normal(size=(3, 1, 4))
    result = attend(graph, graph.constant(rng.normal(size=(3, 4))), graph.constant(states))
    np.testing.assert_allclose(result.context.value, states[:, 0, :])
    np.testing.assert_allclose(result.weights.value, np.ones((3, 1)))


def test_attention_with_zero_scores_averages_states(rng):
    graph = Graph()
    add_attention_params(graph.params, 4, rng)
    graph.params.value("att.v")[...] = 0.0
    states = rng.normal(size=(2, 5, 4))
    result = attend(graph, graph.constant(rng.normal(size=(2, 4))), graph.constant(states))
    np.testing.assert_allclose(result.context.value, states.mean(axis=1))


def test_zero_head_gives_uniform_distribution(rng):
    graph = Graph()
    add_head_params(graph.params, "head", 4, 3, 5, rng)
    for _, value in graph.params.items():
        value[...] = 0.0
    probs = ops.softmax_last(head_logits(graph, graph.constant(rng.normal(size=(2, 4))), "head", 3))
    assert probs.shape == (2, 3, 5)
    np.testing.assert_allclose(probs.value, 0.2)


@pytest.mark.parametrize("attention", [True, False])
def test_seq2seq_emits_valid_distributions_per_step(rng, attention):
    model = _seq2seq(attention)
    params = model.init_params(rng)
    steps = model.distributions(
        Graph(params, record=False), rng.normal(size=(5, 4, 2)), rng.integers(0, 5, size=(5, 2)), 3
    )
    assert len(steps) == 3
    for step in steps:
        assert step.shape == (5, 2, 5)
        assert np.all(step.value >= 0)
        np.testing.assert_allclose(step.value.sum(axis=-1), 1.0, atol=1e-12)


def test_single_series_and_single_input_step_are_supported(rng):
    model = _seq2seq(q=1, length=1)
    params = model.init_params(rng)
    steps = model.distributions(Graph(params, record=False), rng.normal(size=(2, 1, 1)), np.zeros((2, 1), dtype=int))
    assert len(steps) == 3
    assert steps[0].shape == (2, 1, 5)


def test_wrong_input_length_is_a_model_error(rng):
    model = _seq2seq()
    params = model.init_params(rng)
    with pytest.raises(ModelError):
        model.distributions(Graph(params), rng.normal(size=(2, 7, 2)), np.zeros((2, 2), dtype=int))


def test_horizon_beyond_maximum_is_a_model_error(rng):
    model = _seq2seq()
    params = model.init_params(rng)
    with pytest.raises(ModelError):
        model.distributions(Graph(params), rng.normal(size=(2, 4, 2)), np.zeros((2, 2), dtype=int), 4)


def test_teacher_forced_step_ignores_future_ground_truth(rng):
    model = _seq2seq()
    params = model.init_params(rng)
    graph = Graph(params)
    labels = rng.integers(0, 5, size=(3, 3, 2))
    first = rng.integers(0, 5, size=(3, 2))
    feed = [first, labels[:, 0, :], labels[:, 1, :]]
    decoder_inputs = [graph.input(ops.one_hot(f, 5).reshape(3, -1), requires_grad=True) for f in feed]

    steps = model.distributions(graph, rng.normal(size=(3, 4, 2)), first, 3, decoder_inputs=decoder_inputs)
    graph.backward(ops.reduce_sum(ops.log(steps[1])))

    assert decoder_inputs[0].grad is not None and np.any(decoder_inputs[0].grad != 0)
    assert decoder_inputs[1].grad is not None and np.any(decoder_inputs[1].grad != 0)
    assert decoder_inputs[2].grad is None or not np.any(decoder_inputs[2].grad)


def test_series_loss_reaches_only_its_own_head(rng):
    model = _seq2seq()
    params = model.init_params(rng)
    graph = Graph(params)
    targets = rng.integers(0, 5, size=(3, 3, 2))
    steps = model.distributions(graph, rng.normal(size=(3, 4, 2)), targets[:, 0, :], 3, targets=targets)
    only_first = np.array([1.0, 0.0])
    loss = ops.reduce_sum(ops.stack([kl_onehot(p, targets[:, t, :]) * only_first for t, p in enumerate(steps)]))
    graph.backward(loss)

    assert not np.any(params.grad("head.1.W"))
    assert not np.any(params.grad("head.1.b"))
    assert np.any(params.grad("head.0.W"))


def test_ffn_and_lstm_baselines_predict_one_step(rng):
    for kind in ("ffn", "lstm"):
        model = build_model(ModelConfig(kind=kind, series_count=2, hidden=5, input_length=4))
        params = model.init_params(rng)
        steps = model.distributions(Graph(params, record=False), rng.normal(size=(3, 4, 2)), np.zeros((3, 2), dtype=int))
        assert len(steps) == 1
        assert steps[0].shape == (3, 2, 5)
        with pytest.raises(ModelError):
            model.distributions(Graph(params), rng.normal(size=(3, 4, 2)), np.zeros((3, 2), dtype=int), 3)


def test_architecture_defaults_follow_model_kind():
    assert build_model(ModelConfig(kind="ffn"), series_count=3).input_length == 10
    seq = build_model(ModelConfig(), series_count=3)
    assert seq.input_length == 20
    assert seq.config.layers == 1


def test_encoder_final_state_depends_on_step_order(rng):
    model = _seq2seq(attention=False)
    params = model.init_params(rng)
    inputs = rng.normal(size=(3, 4, 2))
    swapped = inputs[:, [2, 1, 0, 3], :]

    h, c = model.encode(Graph(params, record=False), inputs).final[-1]
    h_swapped, c_swapped = model.encode(Graph(params, record=False), swapped).final[-1]
    assert np.max(np.abs(h.value - h_swapped.value)) > 1e-6
    assert np.max(np.abs(c.value - c_swapped.value)) > 1e-6
