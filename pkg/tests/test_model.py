import numpy as np
import pytest

from ngrc import (
    DelayWindow,
    FeatureSpec,
    Mode,
    TimeSeries,
    WarmupError,
    forecast,
    from_document,
    infer,
    load_model,
    one_step_prediction,
    save_model,
    to_document,
    total_features,
    train_forecaster,
    train_inferrer,
)


def naive_rollout(model, warmup, n_steps):
    """Reference closed-loop rollout with explicit python lists."""
    spec = model.spec
    depth = spec.warmup_index + 1
    history = [row.copy() for row in warmup.values[-depth:]]
    out = []
    for _ in range(n_steps):
        taps = np.array([history[len(history) - 1 - j * spec.s] for j in range(spec.k)])
        delta = model.readout.weights @ total_features(DelayWindow(taps), spec)
        state = history[-1] + delta
        out.append(state)
        history.append(state)
    return np.array(out)


def test_forecast_matches_naive_rollout_bit_exact(lorenz_task):
    warmup = lorenz_task.train.segment(
        lorenz_task.train.n_samples - 3 * lorenz_task.spec.warmup_index - 3,
        lorenz_task.train.n_samples)
    predicted = forecast(lorenz_task.model, warmup, 100)
    assert np.array_equal(predicted.values, naive_rollout(lorenz_task.model, warmup, 100))
    assert predicted.dt == warmup.dt
    assert predicted.t0 == pytest.approx(warmup.t0 + warmup.n_samples * warmup.dt)


def test_recovers_linear_map_exactly():
    # x_{i+1} = A x_i is inside the pure-linear model class, so ridge at
    # alpha=0 must recover W = A - I and the closed loop must track exactly.
    A = np.array([[0.9, 0.1], [-0.2, 0.8]])
    states = [np.array([1.0, 0.5])]
    for _ in range(60):
        states.append(A @ states[-1])
    series = TimeSeries(dt=1.0, values=np.array(states))
    spec = FeatureSpec(d=2, k=1, s=1, degrees=(), include_constant=False)
    model = train_forecaster(series, spec, alpha=0.0)
    assert np.abs(model.readout.weights - (A - np.eye(2))).max() < 1e-10

    warmup = series.segment(0, 1)
    predicted = forecast(model, warmup, 20)
    assert np.abs(predicted.values - series.values[1:21]).max() < 1e-9


def test_constant_series_trains_to_zero_readout():
    series = TimeSeries(dt=0.1, values=np.tile([1.5, -2.0, 0.25], (40, 1)))
    spec = FeatureSpec(d=3, k=2, s=1, degrees=(2,), include_constant=True)
    model = train_forecaster(series, spec, alpha=1e-6)
    # all one-step differences vanish, so the minimizer is the zero matrix
    assert np.abs(model.readout.weights).max() < 1e-12
    assert model.metadata["train_nrmse"] == 0.0


def test_train_forecaster_metadata_counts(lorenz_task):
    model = lorenz_task.model
    assert model.metadata["train_samples"] == (
        lorenz_task.train.n_samples - lorenz_task.spec.warmup_index - 1)
    assert 0.0 < model.metadata["train_nrmse"] < 1e-3
    assert model.mode is Mode.FORECAST_DELTA


def test_forecast_validates_warmup_and_mode(lorenz_task):
    model = lorenz_task.model
    short = lorenz_task.train.segment(0, model.spec.warmup_index)
    with pytest.raises(WarmupError):
        forecast(model, short, 5)
    wrong_width = TimeSeries(dt=0.025, values=np.zeros((10, 2)))
    with pytest.raises(ValueError):
        forecast(model, wrong_width, 5)
    with pytest.raises(ValueError):
        forecast(model, lorenz_task.train, 0)


def test_train_forecaster_rejects_mismatched_series():
    series = TimeSeries(dt=0.1, values=np.random.default_rng(0).normal(size=(30, 2)))
    with pytest.raises(ValueError):
        train_forecaster(series, FeatureSpec(d=3, k=2, s=1, degrees=(2,)), alpha=1e-6)
    tiny = TimeSeries(dt=0.1, values=np.ones((3, 2)))
    with pytest.raises(ValueError):
        train_forecaster(tiny, FeatureSpec(d=2, k=4, s=5, degrees=(2,)), alpha=1e-6)


def test_one_step_prediction_equals_first_forecast_step(lorenz_task):
    model = lorenz_task.model
    depth = model.spec.warmup_index + 1
    warmup = lorenz_task.train.segment(100, 100 + depth)
    first = forecast(model, warmup, 1).values[0]
    taps = warmup.values[::-1][:: model.spec.s][: model.spec.k]
    assert np.array_equal(one_step_prediction(model, DelayWindow(taps)), first)


def test_serialization_roundtrip_preserves_forecasts(lorenz_task, tmp_path):
    model = lorenz_task.model
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    assert np.array_equal(loaded.readout.weights, model.readout.weights)
    assert loaded.spec == model.spec
    assert loaded.mode is model.mode
    assert loaded.metadata == model.metadata
    assert to_document(loaded) == to_document(model)

    depth = model.spec.warmup_index + 1
    warmup = lorenz_task.train.segment(0, depth + 4)
    assert np.array_equal(forecast(loaded, warmup, 50).values,
                          forecast(model, warmup, 50).values)


def test_from_document_rejects_unknown_format(lorenz_task):
    doc = to_document(lorenz_task.model)
    doc["format_version"] = 99
    with pytest.raises(ValueError, match="format version"):
        from_document(doc)


def test_inferrer_alignment_and_accuracy(accurate_lorenz):
    spec = FeatureSpec(d=2, k=4, s=5, degrees=(2,), include_constant=True)
    model = train_inferrer(accurate_lorenz, observed=(0, 1), target=2, spec=spec,
                           alpha=2.5e-6)
    assert model.mode is Mode.INFERENCE_DIRECT
    assert model.output_dim == 1
    assert model.metadata["target_index"] == 2

    estimated = infer(model, accurate_lorenz)
    offset = spec.warmup_index
    assert estimated.n_samples == accurate_lorenz.n_samples - offset
    assert estimated.t0 == pytest.approx(accurate_lorenz.t0 + offset * accurate_lorenz.dt)
    truth = accurate_lorenz.values[offset:, 2]
    scale = accurate_lorenz.values[:, 2].std()
    nrmse = np.sqrt(np.mean(((estimated.values[:, 0] - truth) / scale) ** 2))
    assert nrmse < 5e-2


def test_train_inferrer_rejects_bad_component_choices(accurate_lorenz):
    spec = FeatureSpec(d=2, k=4, s=5, degrees=(2,), include_constant=True)
    with pytest.raises(ValueError, match="must not be among"):
        train_inferrer(accurate_lorenz, observed=(0, 2), target=2, spec=spec, alpha=1e-6)
    with pytest.raises(ValueError):
        train_inferrer(accurate_lorenz, observed=(0,), target=2, spec=spec, alpha=1e-6)
    with pytest.raises(ValueError, match="out of range"):
        train_inferrer(accurate_lorenz, observed=(0, 1), target=7, spec=spec, alpha=1e-6)


def test_infer_requires_inference_model(lorenz_task, accurate_lorenz):
    with pytest.raises(ValueError):
        infer(lorenz_task.model, accurate_lorenz)
    spec = FeatureSpec(d=2, k=2, s=1, degrees=(2,), include_constant=True)
    inferrer = train_inferrer(accurate_lorenz, observed=(0, 1), target=2, spec=spec,
                              alpha=1e-6)
    with pytest.raises(ValueError):
        forecast(inferrer, accurate_lorenz, 5)
