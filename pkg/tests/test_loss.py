from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from dynamic_horizon.compute import ops
from dynamic_horizon.compute.gradcheck import analytic_gradients
from dynamic_horizon.compute.tensor import Graph
from dynamic_horizon.config import DynamicLossConfig, ModelConfig
from dynamic_horizon.exceptions import LossError
from dynamic_horizon.loss import (
    confidence,
    confidence_value,
    continuation_test,
    dynamic_loss,
    dynamic_rollout,
    kl_onehot,
    mask_weight,
    penalty,
    static_loss,
    static_rollout,
)
from dynamic_horizon.loss.dynamic import truncated_backward
from dynamic_horizon.loss.masking import penalty_tensor
from dynamic_horizon.models import build_model

UNIFORM = np.full(5, 0.2)


def _delta(j: int) -> np.ndarray:
    return np.eye(5)[j]


def _loss_config(**overrides) -> DynamicLossConfig:
    base = {"tau": 0.5, "lam": 0.1, "confidence": "maximum", "mask": "indicator", "horizon": 3}
    base.update(overrides)
    return DynamicLossConfig(**base)


def _transport_cost(p: np.ndarray, q: np.ndarray) -> float:
    n = p.size
    cost = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).reshape(-1)
    rows = np.kron(np.eye(n), np.ones(n))
    cols = np.kron(np.ones(n), np.eye(n))
    result = linprog(cost, A_eq=np.vstack([rows, cols]), b_eq=np.concatenate([p, q]), bounds=(0, None), method="highs-ds")
    assert result.status == 0
    return float(result.fun)


def test_kl_against_one_hot_examples():
    graph = Graph()
    probs = graph.constant(np.stack([UNIFORM, _delta(0)])[None])
    values = kl_onehot(probs, np.array([[3, 0]])).value
    assert values[0, 0] == pytest.approx(math.log(5), abs=1e-12)
    assert values[0, 1] == 0.0


def test_kl_of_zero_probability_uses_floor():
    graph = Graph()
    probs = graph.constant(_delta(0)[None, None])
    assert kl_onehot(probs, np.array([[2]])).value[0, 0] == pytest.approx(-math.log(1e-12))


def test_kl_rejects_out_of_range_label():
    graph = Graph()
    with pytest.raises(LossError):
        kl_onehot(graph.constant(UNIFORM[None, None]), np.array([[5]]))


@pytest.mark.parametrize(
    ("kind", "probs", "previous", "expected"),
    [
        ("maximum", [0.7, 0.2, 0.1, 0.0, 0.0], None, 0.7),
        ("confidence_distance", [0.7, 0.2, 0.1, 0.0, 0.0], None, 0.5),
        ("confidence_distance", [0.4, 0.4, 0.2, 0.0, 0.0], None, 0.0),
        ("maximum", UNIFORM, None, 0.2),
        ("total_variation", [0.5, 0.3, 0.2, 0.0, 0.0], [0.3, 0.3, 0.4, 0.0, 0.0], -0.2),
        ("emd", _delta(0), _delta(4), -4.0),
        ("emd", UNIFORM, _delta(2), -1.2),
        ("emd", UNIFORM, UNIFORM, 0.0),
    ],
)
def test_confidence_examples(kind, probs, previous, expected):
    prev = None if previous is None else np.asarray(previous, dtype=float)
    assert confidence_value(kind, np.asarray(probs, dtype=float), prev) == pytest.approx(expected, abs=1e-12)
    graph = Graph()
    tensor = confidence(kind, graph.constant(probs), None if prev is None else graph.constant(prev))
    assert tensor.item() == pytest.approx(expected, abs=1e-12)


def test_confidence_rejects_unknown_kind_and_missing_previous():
    with pytest.raises(LossError):
        confidence_value("entropy", UNIFORM)
    with pytest.raises(LossError):
        confidence_value("emd", UNIFORM)


def test_emd_matches_optimal_transport(rng):
    for _ in range(1000):
        p, q = rng.dirichlet(np.ones(5)), rng.dirichlet(np.ones(5))
        assert -confidence_value("emd", p, q) == pytest.approx(_transport_cost(p, q), abs=1e-10)


distributions = st.lists(st.floats(0.0, 1.0), min_size=5, max_size=5).filter(lambda v: sum(v) > 1e-3).map(
    lambda v: np.asarray(v) / np.sum(v)
)


@given(p=distributions, q=distributions)
@settings(max_examples=200, deadline=None)
def test_volatility_confidences_are_bounded_and_symmetric(p, q):
    tv = confidence_value("total_variation", p, q)
    emd = confidence_value("emd", p, q)
    assert -1.0 - 1e-12 <= tv <= 0.0
    assert -4.0 - 1e-12 <= emd <= 0.0
    assert tv == pytest.approx(confidence_value("total_variation", q, p), abs=1e-12)
    assert emd == pytest.approx(confidence_value("emd", q, p), abs=1e-12)


def _emd(p: np.ndarray, q: np.ndarray) -> float:
    return -float(confidence_value("emd", p, q))


@pytest.mark.parametrize("i", range(5))
@pytest.mark.parametrize("j", range(5))
def test_emd_between_point_masses_is_their_distance(i, j):
    assert _emd(_delta(i), _delta(j)) == pytest.approx(abs(i - j), abs=1e-12)


@given(p=distributions, q=distributions)
@settings(max_examples=200, deadline=None)
def test_emd_is_zero_only_for_equal_distributions(p, q):
    assert _emd(p, p) == 0.0
    # |p_i - q_i| is a difference of two CDF gaps, so it bounds the distance.
    assert _emd(p, q) >= 0.5 * np.max(np.abs(p - q)) - 1e-12


@given(p=distributions, q=distributions, r=distributions)
@settings(max_examples=200, deadline=None)
def test_emd_triangle_inequality(p, q, r):
    assert _emd(p, r) <= _emd(p, q) + _emd(q, r) + 1e-12


@given(p=distributions)
@settings(max_examples=200, deadline=None)
def test_confidence_kinds_stay_in_range(p):
    assert 0.2 - 1e-12 <= confidence_value("maximum", p) <= 1.0 + 1e-12
    assert 0.0 <= confidence_value("confidence_distance", p) <= 1.0 + 1e-12


def test_continuation_tie_continues_for_every_kind():
    assert continuation_test(0.5, _loss_config(tau=0.5))
    assert not continuation_test(0.4999, _loss_config(tau=0.5))
    assert continuation_test(-0.05, _loss_config(confidence="emd", tau=0.12))
    assert not continuation_test(-0.2, _loss_config(confidence="total_variation", tau=0.12))


def test_sigmoid_weight_scales_by_remaining_confidence():
    config = _loss_config(mask="sigmoid", tau=0.5, k=10.0)
    assert mask_weight(1.0, config) == pytest.approx(1.0 / (1.0 + math.exp(-10.0)))
    assert mask_weight(0.5, config) == pytest.approx(0.5)
    volatility = _loss_config(mask="sigmoid", confidence="emd", tau=0.1, k=10.0)
    assert mask_weight(0.0, volatility) == pytest.approx(1.0 / (1.0 + math.exp(-1.0)))
    assert mask_weight(0.7, _loss_config(tau=0.5)) == 1.0


@given(
    g=st.floats(0.0, 1.0 - 1e-4),
    gap=st.floats(1e-4, 1.0),
    k=st.floats(1.0, 20.0),
    kind=st.sampled_from(["maximum", "emd"]),
)
@settings(max_examples=200, deadline=None)
def test_sigmoid_weight_is_strictly_increasing(g, gap, k, kind):
    if kind == "emd":
        config = _loss_config(mask="sigmoid", confidence="emd", tau=0.1, k=k)
        low = -4.0 + 4.0 * g
        high = min(low + 4.0 * gap, 0.0)
    else:
        config = _loss_config(mask="sigmoid", tau=0.3, k=k)
        low, high = g, min(g + gap, 1.0)
    assert mask_weight(low, config) < mask_weight(high, config)


@pytest.mark.parametrize("kind, tau", [("maximum", 0.3), ("confidence_distance", 0.6), ("total_variation", 0.2)])
def test_sigmoid_weight_approaches_indicator_as_k_grows(kind, tau):
    lower = -1.0 if kind == "total_variation" else 0.0
    g = np.linspace(lower, lower + 1.0, 401)
    indicator = _loss_config(confidence=kind, tau=tau)
    g = g[np.abs(g - indicator.threshold) >= 0.05]
    hard = mask_weight(g, indicator)
    errors = [
        np.max(np.abs(mask_weight(g, _loss_config(confidence=kind, tau=tau, mask="sigmoid", k=k)) - hard))
        for k in (10.0, 100.0, 1000.0, 1e4)
    ]
    assert errors == sorted(errors, reverse=True)
    assert errors[-1] < 1e-12


def test_penalty_examples_and_zero_at_threshold():
    config = _loss_config(tau=0.3, lam=0.1)
    assert penalty(0.2, config) == pytest.approx(0.01)
    assert penalty(0.3, config) == 0.0
    assert penalty(0.9, config) == 0.0
    assert penalty(-0.2, _loss_config(confidence="emd", tau=0.12, lam=1.0)) == pytest.approx(0.08)


def test_penalty_gradient_is_minus_lambda_below_and_zero_at_threshold():
    config = _loss_config(tau=0.3, lam=0.25)
    graph = Graph()
    g = graph.input(np.array([0.1, 0.3, 0.6]), requires_grad=True)
    graph.backward(ops.reduce_sum(penalty_tensor(g, config)))
    np.testing.assert_allclose(g.grad, [-0.25, 0.0, 0.0])


def _pinned_steps(graph: Graph, rows: list[list[float]]):
    return [graph.input(np.asarray(row, dtype=float)[None, None, :], requires_grad=True) for row in rows]


def test_indicator_loss_truncates_after_first_violation():
    graph = Graph()
    steps = _pinned_steps(
        graph,
        [
            [0.9, 0.025, 0.025, 0.025, 0.025],
            [0.6, 0.1, 0.1, 0.1, 0.1],
            [0.4, 0.15, 0.15, 0.15, 0.15],
        ],
    )
    labels = np.array([[[0], [1], [2]]])
    loss, trace = dynamic_loss(steps, labels, _loss_config(tau=0.5, lam=0.1))

    expected = -math.log(0.9) - math.log(0.1) + 0.1 * 0.1
    assert loss.item() == pytest.approx(expected, abs=1e-12)
    assert trace.stop_index[0, 0] == 2

    graph.backward(loss)
    assert steps[2].grad[0, 0, 2] == 0.0
    assert steps[2].grad[0, 0, 0] == pytest.approx(-0.1)
    assert steps[1].grad[0, 0, 1] == pytest.approx(-10.0)


def test_zero_lambda_with_first_step_violation_is_empty_sum():
    graph = Graph()
    steps = _pinned_steps(graph, [UNIFORM, UNIFORM, UNIFORM])
    loss, trace = dynamic_loss(steps, np.zeros((1, 3, 1), dtype=int), _loss_config(tau=0.5, lam=0.0))
    assert loss.item() == 0.0
    assert trace.stop_index[0, 0] == 0


def test_loss_rejects_step_count_and_invalid_distributions():
    graph = Graph()
    with pytest.raises(LossError):
        dynamic_loss(_pinned_steps(graph, [UNIFORM, UNIFORM]), np.zeros((1, 3, 1), dtype=int), _loss_config())
    with pytest.raises(LossError):
        dynamic_loss(
            _pinned_steps(graph, [UNIFORM, UNIFORM, [0.5] * 5]), np.zeros((1, 3, 1), dtype=int), _loss_config()
        )


def test_volatility_loss_requires_first_labels():
    graph = Graph()
    with pytest.raises(LossError):
        dynamic_loss(_pinned_steps(graph, [UNIFORM] * 3), np.zeros((1, 3, 1), dtype=int), _loss_config(confidence="emd", tau=0.1))


def _problem(rng, attention=True, batch=4):
    model = build_model(
        ModelConfig(kind="seq2seq", series_count=2, hidden=5, input_length=4, max_horizon=3, attention=attention)
    )
    params = model.init_params(rng)
    inputs = rng.normal(size=(batch, 4, 2))
    targets = rng.integers(0, 5, size=(batch, 3, 2))
    first = rng.integers(0, 5, size=(batch, 2))
    return model, params, inputs, targets, first


def test_maximum_with_zero_threshold_reduces_to_static_loss(rng):
    model, params, inputs, targets, first = _problem(rng)
    config = _loss_config(tau=0.0, lam=0.3)

    def dynamic(graph):
        steps = model.distributions(graph, inputs, first, 3, targets=targets)
        return dynamic_loss(steps, targets, config, first)[0]

    def static(graph):
        return static_loss(model.distributions(graph, inputs, first, 3, targets=targets), targets)

    assert dynamic(Graph(params, record=False)).item() == pytest.approx(static(Graph(params, record=False)).item(), abs=1e-12)
    dyn_grads = analytic_gradients(dynamic, params)
    static_grads = analytic_gradients(static, params)
    for name in params.names():
        np.testing.assert_allclose(dyn_grads[name], static_grads[name], atol=1e-10)

    rollout = dynamic_rollout(model, params, inputs, first, config)
    assert np.all(rollout.lengths == 3)


def test_threshold_above_every_confidence_emits_nothing(rng):
    model, params, inputs, _, first = _problem(rng)
    rollout = dynamic_rollout(model, params, inputs, first, _loss_config(tau=1.0))
    assert not np.any(rollout.lengths)
    assert np.all(rollout.labels == -1)
    assert rollout.emitted() == []


@pytest.mark.parametrize("kind", ["maximum", "confidence_distance", "total_variation", "emd"])
def test_rollout_matches_step_by_step_decoding(rng, kind):
    model, params, inputs, _, first = _problem(rng, batch=6)
    forced = static_rollout(model, params, inputs, first, 3)
    previous = np.concatenate([np.eye(5)[first][:, :, None, :], forced.probabilities[:, :, :-1, :]], axis=2)
    g = confidence_value(kind, forced.probabilities, previous)
    tau = float(np.median(np.abs(g)))
    config = _loss_config(confidence=kind, tau=tau)
    rollout = dynamic_rollout(model, params, inputs, first, config)

    graph = Graph(params, record=False)
    encoded = model.encode(graph, inputs)
    state = encoded.final
    prev_input = model.one_hot_inputs(graph, first)
    prev_dist = np.eye(5)[first]
    alive = np.ones((6, 2), dtype=bool)
    lengths = np.zeros((6, 2), dtype=int)
    for _ in range(3):
        context = model.attend(graph, state[-1][0], encoded).context
        step = model.decode_step(graph, prev_input, state, context)
        probs = step.probs.value
        for b in range(6):
            for q in range(2):
                if not alive[b, q]:
                    continue
                p = probs[b, q]
                if kind == "maximum":
                    score = max(p)
                elif kind == "confidence_distance":
                    top = sorted(p, reverse=True)
                    score = top[0] - top[1]
                elif kind == "total_variation":
                    score = -max(abs(a - c) for a, c in zip(p, prev_dist[b, q]))
                else:
                    score = -sum(abs(x) for x in np.cumsum(p - prev_dist[b, q])[:-1])
                if score >= config.threshold:
                    lengths[b, q] += 1
                else:
                    alive[b, q] = False
        state = step.state
        prev_dist = probs
        prev_input = model.one_hot_inputs(graph, np.argmax(probs, axis=-1))

    np.testing.assert_array_equal(rollout.lengths, lengths)


@pytest.mark.parametrize("kind", ["maximum", "confidence_distance", "total_variation", "emd"])
def test_teacher_forced_stop_index_matches_forced_rollout(rng, kind):
    model, params, inputs, targets, first = _problem(rng, batch=8)
    config = _loss_config(confidence=kind, tau=0.2 if kind in ("maximum", "confidence_distance") else 0.3)
    steps = model.distributions(Graph(params, record=False), inputs, first, 3, targets=targets)
    _, trace = dynamic_loss(steps, targets, config, first)
    rollout = dynamic_rollout(model, params, inputs, first, config, forced_labels=targets)
    np.testing.assert_array_equal(trace.stop_index, rollout.lengths)


def test_truncated_backward_replaces_stale_gradients(rng):
    model, params, inputs, targets, first = _problem(rng)
    config = _loss_config(mask="sigmoid", tau=0.3)
    for _, grad in params.grads():
        grad += 1.0
    graph = Graph(params)
    loss, _ = dynamic_loss(model.distributions(graph, inputs, first, 3, targets=targets), targets, config)
    truncated_backward(loss)
    observed = {name: grad.copy() for name, grad in params.grads()}

    def rebuild(g):
        return dynamic_loss(model.distributions(g, inputs, first, 3, targets=targets), targets, config)[0]

    expected = analytic_gradients(rebuild, params)
    for name in params.names():
        np.testing.assert_allclose(observed[name], expected[name], atol=1e-12)
