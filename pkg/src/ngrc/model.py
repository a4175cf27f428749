"""Training and running NG-RC models.

Two workflows are supported. A forecaster learns the one-step difference
X_{i+1} - X_i from the feature vector built at step i and runs closed-loop:
each prediction is appended to the delay window and fed back. An inferrer
learns a hidden component directly from features of the observed components
and runs open-loop.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .features import (
    DelayWindow,
    FeatureSpec,
    WarmupError,
    feature_block,
    feature_length,
    total_features,
)
from .regression import ReadoutMatrix, TrainingBlock, readout_apply, ridge_fit
from .timeseries import TimeSeries

SERIAL_FORMAT_VERSION = 1


class Mode(enum.Enum):
    FORECAST_DELTA = "forecast-delta"
    INFERENCE_DIRECT = "inference-direct"


@dataclass(frozen=True)
class NgrcModel:
    """A trained feature spec + readout pair with its operating mode.

    ``input_indices`` are the component columns (of the training series)
    that feed the features: all of them for forecasting, the observed
    subset for inference. Models are immutable after training.
    """

    spec: FeatureSpec
    readout: ReadoutMatrix
    mode: Mode
    input_indices: tuple[int, ...]
    output_dim: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "input_indices", tuple(int(i) for i in self.input_indices))
        if len(self.input_indices) != self.spec.d:
            raise ValueError(
                f"{len(self.input_indices)} input indices for spec with d = {self.spec.d}"
            )
        if self.mode is Mode.FORECAST_DELTA and self.output_dim != self.spec.d:
            raise ValueError(
                "closed-loop forecasting requires output_dim == d "
                f"(got {self.output_dim} != {self.spec.d})"
            )
        expected = feature_length(self.spec)
        if self.readout.feature_dim != expected:
            raise ValueError(
                f"readout expects {self.readout.feature_dim} features, spec defines {expected}"
            )
        if self.readout.output_dim != self.output_dim:
            raise ValueError(
                f"readout has {self.readout.output_dim} outputs, expected {self.output_dim}"
            )


def _training_indices(spec: FeatureSpec, n_samples: int, need_target: bool) -> np.ndarray:
    first = spec.warmup_index
    last = n_samples - 1 - int(need_target)
    if last < first:
        raise ValueError(
            f"series too short: {n_samples} samples, need at least "
            f"{first + 1 + int(need_target)} for this spec"
        )
    return np.arange(first, last + 1)


def train_forecaster(series: TimeSeries, spec: FeatureSpec, alpha: float) -> NgrcModel:
    """Fit a closed-loop forecaster on one trajectory.

    Feature columns are built at every index past warm-up that still has a
    successor; the matching target is the one-step difference
    X_{i+1} - X_i. Training NRMSE (per-component std scaling over the
    training series) is recorded in the model metadata.
    """
    if series.n_components != spec.d:
        raise ValueError(
            f"series has {series.n_components} components but spec.d = {spec.d}"
        )
    idx = _training_indices(spec, series.n_samples, need_target=True)
    feats = feature_block(series, spec, idx)
    targets = (series.values[idx + 1] - series.values[idx]).T
    readout = ridge_fit(TrainingBlock(feats, targets), alpha)

    predicted = series.values[idx] + (readout.weights @ feats).T
    scale = series.values.std(axis=0)
    scale[scale == 0] = 1.0
    err = (predicted - series.values[idx + 1]) / scale
    train_nrmse = float(np.sqrt(np.mean(err**2)))

    return NgrcModel(
        spec=spec,
        readout=readout,
        mode=Mode.FORECAST_DELTA,
        input_indices=tuple(range(spec.d)),
        output_dim=spec.d,
        metadata={"train_nrmse": train_nrmse, "train_samples": int(len(idx))},
    )


def forecast(model: NgrcModel, warmup: TimeSeries, n_steps: int) -> TimeSeries:
    """Run the trained forecaster autonomously for n_steps.

    The warm-up series seeds the delay window; afterwards every prediction
    is fed back, so the model is a self-contained dynamical system. The
    returned series holds only the predicted samples and starts one dt
    after the last warm-up sample.
    """
    if model.mode is not Mode.FORECAST_DELTA:
        raise ValueError(f"forecast requires a {Mode.FORECAST_DELTA.value} model, got {model.mode.value}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    spec = model.spec
    depth = spec.warmup_index + 1
    if warmup.n_samples < depth:
        raise WarmupError(
            f"warm-up needs at least (k-1)*s + 1 = {depth} samples, got {warmup.n_samples}"
        )
    if warmup.n_components != spec.d:
        raise ValueError(
            f"warm-up has {warmup.n_components} components but spec.d = {spec.d}"
        )
    # Rolling history, newest last; length (k-1)*s + 1 covers every tap.
    history = warmup.values[-depth:].copy()
    tap_rows = depth - 1 - spec.s * np.arange(spec.k)
    weights = model.readout.weights
    out = np.empty((n_steps, spec.d))
    # A model that escapes its attractor overflows to inf/nan; downstream
    # metrics treat non-finite samples as failed predictions, so the rollout
    # itself must not raise.
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(n_steps):
            window = DelayWindow(history[tap_rows])
            delta = weights @ total_features(window, spec)
            state = history[-1] + delta
            out[step] = state
            history = np.roll(history, -1, axis=0)
            history[-1] = state
    return TimeSeries(dt=warmup.dt, values=out, t0=warmup.t0 + warmup.n_samples * warmup.dt)


def train_inferrer(series: TimeSeries, observed, target: int, spec: FeatureSpec,
                   alpha: float) -> NgrcModel:
    """Fit an open-loop inferrer for one hidden component.

    Features are built from the observed component columns only; the target
    is the hidden component at the same index (no difference form, the
    constant feature absorbs any offset).
    """
    observed = tuple(int(i) for i in observed)
    target = int(target)
    if target in observed:
        raise ValueError(f"target component {target} must not be among the observed {observed}")
    if len(observed) != spec.d:
        raise ValueError(f"{len(observed)} observed components for spec with d = {spec.d}")
    if max((*observed, target)) >= series.n_components:
        raise ValueError(
            f"component index out of range for series with {series.n_components} components"
        )
    obs_series = series.select(observed)
    idx = _training_indices(spec, series.n_samples, need_target=False)
    feats = feature_block(obs_series, spec, idx)
    targets = series.values[idx, target][None, :]
    readout = ridge_fit(TrainingBlock(feats, targets), alpha)

    predicted = readout.weights @ feats
    scale = float(series.values[:, target].std()) or 1.0
    train_nrmse = float(np.sqrt(np.mean(((predicted - targets) / scale) ** 2)))

    return NgrcModel(
        spec=spec,
        readout=readout,
        mode=Mode.INFERENCE_DIRECT,
        input_indices=observed,
        output_dim=1,
        metadata={"train_nrmse": train_nrmse, "target_index": target,
                  "train_samples": int(len(idx))},
    )


def infer(model: NgrcModel, series: TimeSeries) -> TimeSeries:
    """Estimate the hidden component at every index past warm-up.

    ``series`` must use the same component layout as the training series
    (the model selects its observed columns by index). Open loop: nothing
    is fed back.
    """
    if model.mode is not Mode.INFERENCE_DIRECT:
        raise ValueError(f"infer requires a {Mode.INFERENCE_DIRECT.value} model, got {model.mode.value}")
    if max(model.input_indices) >= series.n_components:
        raise ValueError(
            f"model reads component {max(model.input_indices)} but series has "
            f"{series.n_components}"
        )
    obs_series = series.select(model.input_indices)
    idx = _training_indices(model.spec, series.n_samples, need_target=False)
    feats = feature_block(obs_series, model.spec, idx)
    values = (model.readout.weights @ feats).T
    return TimeSeries(dt=series.dt, values=values, t0=series.t0 + idx[0] * series.dt)


def one_step_prediction(model: NgrcModel, window: DelayWindow,
                        current: np.ndarray | None = None) -> np.ndarray:
    """One application of the learned map on an explicit delay window.

    For delta-mode models the result is current + W*features (``current``
    defaults to the newest window row); for direct mode it is W*features.
    """
    out = readout_apply(model.readout, total_features(window, model.spec))
    if model.mode is Mode.FORECAST_DELTA:
        base = window.samples[0] if current is None else np.asarray(current, dtype=float)
        return base + out
    return out


def to_document(model: NgrcModel) -> dict:
    """Flat, versioned dict capturing the model exactly."""
    return {
        "format_version": SERIAL_FORMAT_VERSION,
        "mode": model.mode.value,
        "d": model.spec.d,
        "k": model.spec.k,
        "s": model.spec.s,
        "degrees": list(model.spec.degrees),
        "include_constant": model.spec.include_constant,
        "constant_value": model.spec.constant_value,
        "input_indices": list(model.input_indices),
        "output_dim": model.output_dim,
        "alpha": model.readout.alpha,
        "weights": [[float(w) for w in row] for row in model.readout.weights],
        "metadata": model.metadata,
    }


def from_document(doc: dict) -> NgrcModel:
    version = doc.get("format_version")
    if version != SERIAL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r}")
    spec = FeatureSpec(
        d=doc["d"],
        k=doc["k"],
        s=doc["s"],
        degrees=tuple(doc["degrees"]),
        include_constant=doc["include_constant"],
        constant_value=doc["constant_value"],
    )
    readout = ReadoutMatrix(weights=np.array(doc["weights"], dtype=float), alpha=doc["alpha"])
    return NgrcModel(
        spec=spec,
        readout=readout,
        mode=Mode(doc["mode"]),
        input_indices=tuple(doc["input_indices"]),
        output_dim=doc["output_dim"],
        metadata=dict(doc.get("metadata", {})),
    )


def save_model(model: NgrcModel, path) -> None:
    """Write the model as human-readable JSON; floats round-trip bit-exactly."""
    with open(path, "w") as fh:
        json.dump(to_document(model), fh, indent=2)
        fh.write("\n")


def load_model(path) -> NgrcModel:
    with open(path) as fh:
        return from_document(json.load(fh))
