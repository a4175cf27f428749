"""Reproducible experiment runner.

Experiments are described by flat JSON config files (one document per
experiment, keys mirroring the library's parameter names). Each run writes
a structured summary, plot-ready CSVs, and the exact resolved config next
to them, so any result can be reproduced bit-for-bit from its output
directory.

Subcommands: ``run <config>``, ``validate <config>``, ``report <dir>``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import baseline, verify
from .features import FeatureSpec, feature_names
from .model import (
    NgrcModel,
    forecast,
    infer,
    save_model,
    train_forecaster,
    train_inferrer,
)
from .regression import SingularSystemError
from .systems import (
    IntegrationConfig,
    IntegrationError,
    SystemDef,
    get_system,
    integrate,
    integrate_noisy,
    on_attractor_state,
)
from .timeseries import TimeSeries
from .verify import ReturnMap, ScalingVector


class ConfigError(ValueError):
    """Invalid experiment config; carries one message per offending field."""

    def __init__(self, messages):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class NumericalFailure(RuntimeError):
    """A numerical stage of an experiment failed."""


TASKS = (
    "forecast-lorenz",
    "forecast-doublescroll",
    "infer-lorenz",
    "sweep-trainsize",
    "noise-lorenz",
    "complexity",
    "baseline-rc",
)

# Training-data integration accuracy is a load-bearing benchmark parameter:
# the sampling error of a default-tolerance adaptive run acts as jitter that
# the published regularization level is tuned to. Forecast-type tasks
# therefore generate data at these tolerances; tightening them destabilizes
# the closed loop at the same alpha.
_INTEGRATION_KEYS = {
    "dt": 0.025,
    "transient_time": 25.0,
    "rtol": 1e-3,
    "atol": 1e-6,
}

_FEATURE_KEYS = {
    "k": 2,
    "s": 1,
    "degrees": [2],
    "include_constant": True,
    "constant_value": 1.0,
}

_FORECAST_KEYS = {
    **_INTEGRATION_KEYS,
    **_FEATURE_KEYS,
    "train_points": 400,
    "alpha": 2.5e-6,
    "test_horizon": 10.0,
    "nrmse_horizon": 1.0,
    "threshold": 0.5,
    "uss_segments": 10,
    "return_map_window": 1000.0,
}

# Per-task default (and therefore allowed) keys. `task`, `seed` and
# `out_dir` are accepted everywhere.
TASK_DEFAULTS: dict[str, dict] = {
    "forecast-lorenz": dict(_FORECAST_KEYS),
    "forecast-doublescroll": {
        **_FORECAST_KEYS,
        "dt": 0.25,
        "transient_time": 100.0,
        "degrees": [3],
        "include_constant": False,
        "return_map_window": 0.0,
    },
    "infer-lorenz": {
        **_INTEGRATION_KEYS,
        **_FEATURE_KEYS,
        # open-loop inference has no feedback instability, so accurate data
        # strictly helps; coarse data leaks interpolation noise into the
        # observed components and inflates the testing error
        "rtol": 1e-8,
        "atol": 1e-10,
        "dt": 0.05,
        "k": 4,
        "s": 5,
        "train_points": 400,
        "test_points": 400,
        "alpha": 2.5e-6,
        "observed": [0, 1],
        "target": 2,
    },
    "sweep-trainsize": {
        **_INTEGRATION_KEYS,
        **_FEATURE_KEYS,
        "alpha": 2.5e-6,
        "sizes": [100, 150, 200, 250, 300, 400, 500, 600, 800, 1000],
        "segments": 20,
        # short enough that poorly trained small-size models give large but
        # finite errors (fluctuations, not overflow), so segment means stay
        # meaningful across the whole size range
        "nrmse_horizon": 0.125,
    },
    "noise-lorenz": {
        **_INTEGRATION_KEYS,
        **_FEATURE_KEYS,
        # reference/truth runs here must be far more accurate than the
        # forecast error being measured; the training noise comes from the
        # explicit stochastic forcing, not from integration jitter
        "rtol": 1e-8,
        "atol": 1e-10,
        "train_points": 400,
        "alpha": 1.4e-2,
        "noise_rms": 1.0,
        "substeps": 20,
        "repeats": 10,
        # the published error figure corresponds to roughly a quarter of a
        # Lyapunov time; beyond that chaos amplifies the initial offset
        "rmse_horizon": 0.25,
    },
    "complexity": {},
    "baseline-rc": {
        **_INTEGRATION_KEYS,
        "rtol": 1e-8,
        "atol": 1e-10,
        "train_points": 400,
        "warmup_points": 100,
        "alpha": 1e-6,
        "n_nodes": 100,
        "gamma": 1.0,
        "spectral_radius": 0.9,
        "sigma_r": 0.05,
        "input_scale": 0.1,
        "bias": 0.0,
        "activation": "linear",
    },
}

_TASK_SYSTEM = {
    "forecast-lorenz": "lorenz63",
    "forecast-doublescroll": "double_scroll",
    "infer-lorenz": "lorenz63",
    "sweep-trainsize": "lorenz63",
    "noise-lorenz": "lorenz63",
    "baseline-rc": "lorenz63",
}

_COMPONENT_NAMES = {"lorenz63": ["x", "y", "z"], "double_scroll": ["V1", "V2", "I"]}


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment description."""

    task: str
    seed: int
    out_dir: str
    settings: dict

    def __getitem__(self, key):
        return self.settings[key]

    def feature_spec(self, d: int) -> FeatureSpec:
        return FeatureSpec(
            d=d,
            k=self["k"],
            s=self["s"],
            degrees=tuple(self["degrees"]),
            include_constant=self["include_constant"],
            constant_value=self["constant_value"],
        )

    def to_document(self) -> dict:
        """Flat key/value map that reproduces this run when fed back in."""
        doc = {"task": self.task, "seed": self.seed}
        doc.update({key: self.settings[key] for key in sorted(self.settings)})
        return doc


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    summary: dict
    files: tuple[str, ...]


def _check_value(key, value, default, errors):
    """Validate one config entry against its default's type and invariants."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            errors.append(f"{key}: expected true/false, got {value!r}")
            return None
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{key}: expected an integer, got {value!r}")
            return None
    elif isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{key}: expected a number, got {value!r}")
            return None
        value = float(value)
    elif isinstance(default, str):
        if not isinstance(value, str):
            errors.append(f"{key}: expected a string, got {value!r}")
            return None
    elif isinstance(default, list):
        if not isinstance(value, list):
            errors.append(f"{key}: expected a list, got {value!r}")
            return None

    if key in ("alpha", "bias", "constant_value", "noise_rms"):
        pass
    if key == "alpha" and value < 0:
        errors.append(f"{key}: must be nonnegative, got {value}")
        return None
    if key in ("k", "s") and value < 1:
        errors.append(f"{key}: must be >= 1, got {value}")
        return None
    if key in ("dt", "rtol", "atol", "spectral_radius", "input_scale") and value <= 0:
        errors.append(f"{key}: must be positive, got {value}")
        return None
    if key in ("train_points", "test_points", "n_nodes", "substeps", "repeats",
               "segments") and value < 1:
        errors.append(f"{key}: must be >= 1, got {value}")
        return None
    if key in ("transient_time", "test_horizon", "nrmse_horizon", "rmse_horizon",
               "threshold", "return_map_window", "noise_rms") and value < 0:
        errors.append(f"{key}: must be nonnegative, got {value}")
        return None
    if key in ("uss_segments", "warmup_points", "target") and value < 0:
        errors.append(f"{key}: must be nonnegative, got {value}")
        return None
    if key == "gamma" and not 0.0 <= value <= 1.0:
        errors.append(f"{key}: must be in [0, 1], got {value}")
        return None
    if key == "sigma_r" and not 0.0 < value <= 1.0:
        errors.append(f"{key}: must be in (0, 1], got {value}")
        return None
    if key == "activation" and value not in ("tanh", "linear"):
        errors.append(f"{key}: must be 'tanh' or 'linear', got {value!r}")
        return None
    if key == "degrees":
        if not all(isinstance(p, int) and not isinstance(p, bool) and p >= 2 for p in value):
            errors.append(f"{key}: every degree must be an integer >= 2, got {value}")
            return None
    if key == "sizes":
        if not value or not all(isinstance(v, int) and v >= 10 for v in value):
            errors.append(f"{key}: expected a non-empty list of integers >= 10, got {value}")
            return None
    if key == "observed":
        if not value or not all(isinstance(v, int) and v >= 0 for v in value):
            errors.append(f"{key}: expected a non-empty list of component indices, got {value}")
            return None
    return value


def resolve_config(raw: dict, source: str = "<config>") -> ExperimentConfig:
    """Fill defaults and check every field; reject unknown keys."""
    errors = []
    if not isinstance(raw, dict):
        raise ConfigError([f"{source}: config must be a flat JSON object"])
    task = raw.get("task")
    if task is None:
        raise ConfigError(["task: missing (one of " + ", ".join(TASKS) + ")"])
    if task not in TASKS:
        raise ConfigError([f"task: unknown task {task!r} (one of " + ", ".join(TASKS) + ")"])

    defaults = TASK_DEFAULTS[task]
    settings = dict(defaults)
    seed = 0
    out_dir = f"runs/{task}"
    for key, value in raw.items():
        if key == "task":
            continue
        if key == "seed":
            if isinstance(value, bool) or not isinstance(value, int):
                errors.append(f"seed: expected an integer, got {value!r}")
            else:
                seed = value
            continue
        if key == "out_dir":
            if not isinstance(value, str):
                errors.append(f"out_dir: expected a string, got {value!r}")
            else:
                out_dir = value
            continue
        if key not in defaults:
            errors.append(f"{key}: unknown key for task {task}")
            continue
        checked = _check_value(key, value, defaults[key], errors)
        if checked is not None:
            settings[key] = checked

    if task == "infer-lorenz" and not errors:
        if settings["target"] in settings["observed"]:
            errors.append("target: must not be among the observed components")
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(task=task, seed=seed, out_dir=out_dir, settings=settings)


def validate_config(path) -> ExperimentConfig:
    """Load and fully validate a config file without running anything."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError([f"config: cannot read {path}: {exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config: {path} is not valid JSON: {exc}"]) from exc
    return resolve_config(raw, source=str(path))


# ---------------------------------------------------------------------------
# Experiment stages


def _integration_config(config: ExperimentConfig, x0, n_samples: int,
                        t0: float = 0.0, **extra) -> IntegrationConfig:
    dt = config["dt"]
    return IntegrationConfig(
        dt=dt,
        t_span=(t0, t0 + (n_samples - 1) * dt),
        initial_state=x0,
        rtol=config["rtol"],
        atol=config["atol"],
        **extra,
    )


def _ranked_readout(model: NgrcModel, components: list[str]) -> list[dict]:
    """All readout entries sorted by |weight| descending, with labels."""
    obs_names = [components[i] for i in model.input_indices]
    labels = feature_names(model.spec, obs_names)
    entries = []
    for row in range(model.readout.output_dim):
        for col, label in enumerate(labels):
            entries.append(
                {
                    "output": row,
                    "feature": label,
                    "weight": float(model.readout.weights[row, col]),
                }
            )
    entries.sort(key=lambda e: abs(e["weight"]), reverse=True)
    return entries


def _horizon_steps(config: ExperimentConfig, system: SystemDef, key: str) -> int:
    return max(1, int(round(config[key] * system.lyapunov_time / config["dt"])))


def _run_forecast(config: ExperimentConfig, out: Path) -> tuple[dict, list[str]]:
    system = get_system(_TASK_SYSTEM[config.task])
    spec = config.feature_spec(system.dim)
    train_points = config["train_points"]
    n_test = _horizon_steps(config, system, "test_horizon")
    n_nrmse = min(_horizon_steps(config, system, "nrmse_horizon"), n_test)
    n_return = int(round(config["return_map_window"] / config["dt"]))
    uss_segments = config["uss_segments"]

    with _stage("integrate ground truth"):
        x0 = on_attractor_state(system, config["transient_time"],
                                rtol=config["rtol"], atol=config["atol"])
        n_mother = max(train_points + max(n_test, n_return),
                       uss_segments * train_points + n_test) + 1
        mother = integrate(system, _integration_config(config, x0, n_mother))
    scaling = ScalingVector.from_series(mother)

    with _stage("train"):
        train = mother.segment(0, train_points)
        model = train_forecaster(train, spec, config["alpha"])

    with _stage("forecast"):
        predicted = forecast(model, train, max(n_test, n_return) or n_test)
    truth_test = mother.segment(train_points, train_points + n_test)
    pred_test = predicted.segment(0, n_test)

    with _stage("verify"):
        test_nrmse = verify.nrmse(pred_test.segment(0, n_nrmse),
                                  truth_test.segment(0, n_nrmse), scaling)
        vtime = verify.valid_time(pred_test, truth_test, scaling,
                                  config["threshold"], system.lyapunov_time)

        if system.name == "lorenz63":
            true_uss = verify.lorenz_uss()
        else:
            true_uss = verify.solve_double_scroll_uss()

        valid_times = [vtime]
        segment_distances: list[list[float]] = [[] for _ in true_uss]
        canonical = verify.uss_report(model, true_uss, scaling)
        for j, dist in enumerate(canonical.distances()):
            if dist is not None:
                segment_distances[j].append(dist)
        for seg in range(1, uss_segments):
            seg_train = mother.segment(seg * train_points, (seg + 1) * train_points)
            seg_model = train_forecaster(seg_train, spec, config["alpha"])
            seg_truth = mother.segment((seg + 1) * train_points,
                                       (seg + 1) * train_points + n_test)
            seg_pred = forecast(seg_model, seg_train, n_test)
            valid_times.append(verify.valid_time(seg_pred, seg_truth, scaling,
                                                 config["threshold"], system.lyapunov_time))
            for j, dist in enumerate(verify.uss_report(seg_model, true_uss,
                                                       scaling).distances()):
                if dist is not None:
                    segment_distances[j].append(dist)

        uss_doc = []
        for j, entry in enumerate(canonical.entries):
            dists = segment_distances[j]
            uss_doc.append({
                "true_state": [float(v) for v in entry.true_state],
                "estimated_state": None if entry.estimated_state is None
                else [float(v) for v in entry.estimated_state],
                "scaled_distance": entry.scaled_distance,
                "dispersion_mean": float(np.mean(dists)) if dists else None,
                "dispersion_std": float(np.std(dists)) if dists else None,
                "segments_converged": len(dists),
            })

    files = []
    components = _COMPONENT_NAMES[system.name]
    summary = {
        "task": config.task,
        "system": system.name,
        "feature_dim": model.readout.feature_dim,
        "readout_shape": [model.readout.output_dim, model.readout.feature_dim],
        "alpha": config["alpha"],
        "train_points": train_points,
        "train_nrmse": model.metadata["train_nrmse"],
        "test_nrmse": test_nrmse,
        "nrmse_horizon_lyapunov": config["nrmse_horizon"],
        "valid_time_lyapunov": vtime,
        "valid_time_median": float(np.median(valid_times)),
        "valid_times": valid_times,
        "threshold": config["threshold"],
        "uss": uss_doc,
        "scaling": [float(v) for v in scaling.values],
    }

    if n_return > 0:
        with _stage("return map"):
            z_index = 2 if system.name == "lorenz63" else 0
            truth_map = verify.extract_return_map(
                mother.segment(train_points, train_points + n_return),
                z_index, config["return_map_window"])
            pred_map = verify.extract_return_map(
                predicted.segment(0, n_return), z_index, config["return_map_window"])
            deviation = verify.return_map_deviation(pred_map, truth_map)
            m_range = float(truth_map.maxima.max() - truth_map.maxima.min())
            summary["return_map"] = {
                "component": components[z_index],
                "deviation": deviation,
                "truth_range": m_range,
                "relative_deviation": deviation / m_range,
                "n_truth_maxima": int(truth_map.maxima.size),
                "n_predicted_maxima": int(pred_map.maxima.size),
            }
            truth_map.to_csv(out / "return_map_truth.csv")
            pred_map.to_csv(out / "return_map_forecast.csv")
            files += ["return_map_truth.csv", "return_map_forecast.csv"]

    summary["readout_ranked"] = _ranked_readout(model, components)

    train.to_csv(out / "train.csv")
    truth_test.to_csv(out / "truth.csv")
    pred_test.to_csv(out / "forecast.csv")
    save_model(model, out / "model.json")
    files += ["train.csv", "truth.csv", "forecast.csv", "model.json"]
    return summary, files


def _run_infer(config: ExperimentConfig, out: Path) -> tuple[dict, list[str]]:
    system = get_system("lorenz63")
    observed = tuple(config["observed"])
    target = config["target"]
    spec = config.feature_spec(len(observed))
    train_points, test_points = config["train_points"], config["test_points"]

    with _stage("integrate ground truth"):
        x0 = on_attractor_state(system, config["transient_time"],
                                rtol=config["rtol"], atol=config["atol"])
        mother = integrate(system, _integration_config(config, x0,
                                                       train_points + test_points))
    scaling = ScalingVector.from_series(mother)
    target_scaling = ScalingVector(scaling.values[[target]])

    with _stage("train"):
        train = mother.segment(0, train_points)
        model = train_inferrer(train, observed, target, spec, config["alpha"])

    with _stage("infer"):
        test = mother.segment(train_points, train_points + test_points)
        inferred = infer(model, test)
        truth_target = test.select([target]).segment(
            spec.warmup_index, test.n_samples)
        test_nrmse = verify.nrmse(inferred, truth_target, target_scaling)

    components = _COMPONENT_NAMES[system.name]
    summary = {
        "task": config.task,
        "system": system.name,
        "observed": list(observed),
        "target": target,
        "feature_dim": model.readout.feature_dim,
        "readout_shape": [model.readout.output_dim, model.readout.feature_dim],
        "alpha": config["alpha"],
        "train_points": train_points,
        "test_points": test_points,
        "train_nrmse": model.metadata["train_nrmse"],
        "test_nrmse": test_nrmse,
        "test_to_train_ratio": test_nrmse / model.metadata["train_nrmse"],
        "readout_ranked": _ranked_readout(model, components),
    }

    train.to_csv(out / "train.csv")
    test.to_csv(out / "truth.csv")
    inferred.to_csv(out / "inferred.csv")
    save_model(model, out / "model.json")
    return summary, ["train.csv", "truth.csv", "inferred.csv", "model.json"]


def _run_sweep(config: ExperimentConfig, out: Path) -> tuple[dict, list[str]]:
    system = get_system("lorenz63")
    spec = config.feature_spec(system.dim)
    sizes = sorted(config["sizes"])
    segments = config["segments"]
    n_horizon = _horizon_steps(config, system, "nrmse_horizon")
    stride = max(sizes) + n_horizon

    with _stage("integrate ground truth"):
        x0 = on_attractor_state(system, config["transient_time"],
                                rtol=config["rtol"], atol=config["atol"])
        mother = integrate(system, _integration_config(config, x0,
                                                       segments * stride + 1))
    scaling = ScalingVector.from_series(mother)

    rows = []
    with _stage("sweep"):
        for size in sizes:
            cell_errors = []
            for seg in range(segments):
                start = seg * stride
                train = mother.segment(start, start + size)
                seg_model = train_forecaster(train, spec, config["alpha"])
                truth = mother.segment(start + size, start + size + n_horizon)
                pred = forecast(seg_model, train, n_horizon)
                cell_errors.append(verify.nrmse(pred, truth, scaling))
            cell = np.array(cell_errors)
            rows.append((size, cell.mean(), cell.std(), np.median(cell),
                         cell.min(), cell.max()))

    table = np.array(rows)
    np.savetxt(out / "sweep.csv", table, fmt="%.17g", delimiter=",",
               header="train_points,mean_nrmse,std_nrmse,median_nrmse,min_nrmse,max_nrmse")

    by_size = {int(r[0]): float(r[1]) for r in rows}
    summary = {
        "task": config.task,
        "system": system.name,
        "alpha": config["alpha"],
        "segments": segments,
        "nrmse_horizon_lyapunov": config["nrmse_horizon"],
        "sizes": [int(s) for s in sizes],
        "mean_nrmse": {str(k): v for k, v in by_size.items()},
        "std_nrmse": {str(int(r[0])): float(r[2]) for r in rows},
    }
    return summary, ["sweep.csv"]


def _run_noise(config: ExperimentConfig, out: Path) -> tuple[dict, list[str]]:
    system = get_system("lorenz63")
    spec = config.feature_spec(system.dim)
    train_points = config["train_points"]
    n_horizon = _horizon_steps(config, system, "rmse_horizon")

    with _stage("reference trajectory"):
        x0 = on_attractor_state(system, config["transient_time"],
                                rtol=config["rtol"], atol=config["atol"])
        reference = integrate(system, _integration_config(config, x0, 10001))
    scaling = ScalingVector.from_series(reference)

    scaled_rmses, raw_rmses, noisy_stds = [], [], []
    first_files: list[str] = []
    with _stage("noisy training and forecast"):
        for rep in range(config["repeats"]):
            rep_seed = config.seed ^ rep
            noisy = integrate_noisy(
                system,
                _integration_config(config, x0, train_points, seed=rep_seed,
                                    noise_rms=config["noise_rms"],
                                    substeps=config["substeps"]),
            )
            noisy_stds.append(noisy.values.std(axis=0))
            rep_model = train_forecaster(noisy, spec, config["alpha"])
            start = noisy.values[-1]
            truth = integrate(system, _integration_config(
                config, start, n_horizon + 1, t0=noisy.times[-1]))
            pred = forecast(rep_model, noisy, n_horizon)
            truth_after = truth.segment(1, n_horizon + 1)
            scaled_rmses.append(verify.nrmse(pred, truth_after, scaling))
            raw_rmses.append(float(np.sqrt(np.mean(
                (pred.values - truth_after.values) ** 2))))
            if rep == 0:
                noisy.to_csv(out / "train_noisy.csv")
                truth_after.to_csv(out / "truth_noise_free.csv")
                pred.to_csv(out / "forecast.csv")
                save_model(rep_model, out / "model.json")
                first_files = ["train_noisy.csv", "truth_noise_free.csv",
                               "forecast.csv", "model.json"]

    summary = {
        "task": config.task,
        "system": system.name,
        "alpha": config["alpha"],
        "noise_rms": config["noise_rms"],
        "train_points": train_points,
        "repeats": config["repeats"],
        "rmse_horizon_lyapunov": config["rmse_horizon"],
        "scaled_rmse_median": float(np.median(scaled_rmses)),
        "scaled_rmse_values": [float(v) for v in scaled_rmses],
        "raw_rmse_median": float(np.median(raw_rmses)),
        "raw_rmse_values": [float(v) for v in raw_rmses],
        "noisy_component_std_mean": [float(v) for v in np.mean(noisy_stds, axis=0)],
        "noise_free_component_std": [float(v) for v in scaling.values],
    }
    return summary, first_files


# Published speedup figures for the reference reservoir implementations the
# cost model is compared against.
COMPLEXITY_CASES = [
    {
        "system": "lorenz63",
        "ngrc": baseline.CostParams(m_warmup=2, m_train=400, n_total=28, n_nonlinear=21),
        "references": [
            {"name": "low-connectivity RC", "m_warmup": 1000, "m_train": 1000,
             "n_total": 100, "n_nodes": 100, "sigma_r": [0.01, 0.05],
             "quoted_speedup": "33-163"},
            {"name": "intermediate RC", "m_warmup": 0, "m_train": 5000,
             "n_total": 300, "n_nodes": 300, "sigma_r": [0.02],
             "quoted_speedup": "1.5e3"},
            {"name": "high-accuracy RC", "m_warmup": 100000, "m_train": 60000,
             "n_total": 4000, "n_nodes": 2000, "sigma_r": [0.02],
             "quoted_speedup": "3.2e6"},
        ],
    },
    {
        "system": "double_scroll",
        "ngrc": baseline.CostParams(m_warmup=2, m_train=400, n_total=62, n_nonlinear=56),
        "references": [
            {"name": "low-connectivity RC", "m_warmup": 1000, "m_train": 1000,
             "n_total": 100, "n_nodes": 100, "sigma_r": [0.01, 0.05],
             "quoted_speedup": "8-41"},
        ],
    },
]


def _run_complexity(config: ExperimentConfig, out: Path) -> tuple[dict, list[str]]:
    tables = []
    for case in COMPLEXITY_CASES:
        ng = case["ngrc"]
        rows = []
        for ref in case["references"]:
            computed = []
            for sigma in ref["sigma_r"]:
                rc = baseline.CostParams(
                    m_warmup=ref["m_warmup"], m_train=ref["m_train"],
                    n_total=ref["n_total"], n_nodes=ref["n_nodes"], sigma_r=sigma,
                )
                computed.append(float(baseline.estimate_cost(ng, rc)))
            rows.append({
                "reference": ref["name"],
                "m_warmup": ref["m_warmup"],
                "m_train": ref["m_train"],
                "n_total": ref["n_total"],
                "n_nodes": ref["n_nodes"],
                "sigma_r": ref["sigma_r"],
                "computed_speedup": computed,
                "quoted_speedup": ref["quoted_speedup"],
            })
        tables.append({
            "system": case["system"],
            "ngrc": {"m_warmup": ng.m_warmup, "m_train": ng.m_train,
                     "n_total": ng.n_total, "n_nonlinear": ng.n_nonlinear},
            "rows": rows,
        })
    summary = {"task": config.task, "tables": tables}
    return summary, []


def _run_baseline(config: ExperimentConfig, out: Path) -> tuple[dict, list[str]]:
    system = get_system("lorenz63")
    train_points, warmup_points = config["train_points"], config["warmup_points"]

    with _stage("integrate ground truth"):
        x0 = on_attractor_state(system, config["transient_time"],
                                rtol=config["rtol"], atol=config["atol"])
        series = integrate(system, _integration_config(
            config, x0, warmup_points + train_points + 1))
    scaling = ScalingVector.from_series(series)

    with _stage("reservoir run"):
        params = baseline.ReservoirParams(
            n_nodes=config["n_nodes"], gamma=config["gamma"],
            spectral_radius=config["spectral_radius"], sigma_r=config["sigma_r"],
            input_scale=config["input_scale"], bias=config["bias"],
            activation=config["activation"], seed=config.seed,
        )
        reservoir = baseline.build_reservoir(params, system.dim)
        states = baseline.reservoir_run(reservoir, series)

    with _stage("train readout"):
        from .regression import TrainingBlock, ridge_fit

        feats = baseline.quadratic_readout_features(states)
        cols = np.arange(warmup_points, warmup_points + train_points)
        block = TrainingBlock(feats[:, cols], series.values[cols + 1].T)
        readout = ridge_fit(block, config["alpha"])
        predicted = (readout.weights @ feats[:, cols]).T
        err = (predicted - series.values[cols + 1]) / scaling.values
        train_nrmse = float(np.sqrt(np.mean(err**2)))

    summary = {
        "task": config.task,
        "system": system.name,
        "n_nodes": config["n_nodes"],
        "feature_dim": int(feats.shape[0]),
        "activation": config["activation"],
        "gamma": config["gamma"],
        "alpha": config["alpha"],
        "train_points": train_points,
        "warmup_points": warmup_points,
        "train_nrmse": train_nrmse,
        "finite": bool(np.isfinite(train_nrmse)),
    }
    return summary, []


_RUNNERS = {
    "forecast-lorenz": _run_forecast,
    "forecast-doublescroll": _run_forecast,
    "infer-lorenz": _run_infer,
    "sweep-trainsize": _run_sweep,
    "noise-lorenz": _run_noise,
    "complexity": _run_complexity,
    "baseline-rc": _run_baseline,
}


class _stage:
    """Names the failing stage when a numerical error escapes an experiment."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, (ConfigError, NumericalFailure)):
            raise NumericalFailure(f"stage '{self.name}': {exc}") from exc
        return False


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Execute one experiment and write its outputs.

    Writes summary.json, resolved-config.json and the task's CSVs into the
    config's output directory. Raises ConfigError / NumericalFailure on the
    corresponding failures.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary, files = _RUNNERS[config.task](config, out)

    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    with open(out / "resolved-config.json", "w") as fh:
        json.dump(config.to_document(), fh, indent=2)
        fh.write("\n")
    files = tuple(files) + ("summary.json", "resolved-config.json")
    return ExperimentReport(config=config, summary=summary, files=files)


def _print_report(summary: dict, stream=None) -> None:
    stream = sys.stdout if stream is None else stream
    skip = {"readout_ranked", "valid_times", "scaled_rmse_values", "raw_rmse_values",
            "scaling", "uss", "tables", "mean_nrmse", "std_nrmse"}
    print(f"task: {summary.get('task')}", file=stream)
    for key, value in summary.items():
        if key in skip or key == "task":
            continue
        print(f"  {key}: {value}", file=stream)
    if "uss" in summary:
        for entry in summary["uss"]:
            true_state = np.array(entry["true_state"])
            print(f"  uss {np.round(true_state, 3).tolist()} -> scaled distance "
                  f"{entry['scaled_distance']} (dispersion {entry['dispersion_std']})",
                  file=stream)
    if "tables" in summary:
        for table in summary["tables"]:
            ng = table["ngrc"]
            print(f"  {table['system']}: features n_total={ng['n_total']} "
                  f"n_nonlinear={ng['n_nonlinear']}", file=stream)
            for row in table["rows"]:
                computed = ", ".join(f"{v:.3g}" for v in row["computed_speedup"])
                print(f"    vs {row['reference']}: computed speedup [{computed}] "
                      f"(published {row['quoted_speedup']})", file=stream)
    if "mean_nrmse" in summary:
        for size, value in summary["mean_nrmse"].items():
            print(f"  train_points {size}: mean NRMSE {value:.3e}", file=stream)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ngrc",
        description="Train, forecast and verify polynomial delay-feature models "
        "of chaotic systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config", help="path to a JSON experiment config")
    p_run.add_argument("--out", help="output directory (overrides config)")
    p_run.add_argument("--seed", type=int, help="base seed (overrides config)")
    p_run.add_argument("--quiet", action="store_true", help="suppress the summary printout")

    p_val = sub.add_parser("validate", help="check a config file without running")
    p_val.add_argument("config")
    p_val.add_argument("--quiet", action="store_true")

    p_rep = sub.add_parser("report", help="print the summary of a finished run")
    p_rep.add_argument("dir")
    p_rep.add_argument("--quiet", action="store_true")

    args = parser.parse_args(argv)

    if args.command == "validate":
        try:
            config = validate_config(args.config)
        except ConfigError as exc:
            for message in exc.messages:
                print(f"config error: {message}", file=sys.stderr)
            return 2
        if not args.quiet:
            print(json.dumps(config.to_document(), indent=2))
        return 0

    if args.command == "report":
        summary_path = Path(args.dir) / "summary.json"
        if not summary_path.exists():
            print(f"error: no summary.json under {args.dir}", file=sys.stderr)
            return 2
        with open(summary_path) as fh:
            _print_report(json.load(fh))
        return 0

    # run
    try:
        config = validate_config(args.config)
        if args.out is not None or args.seed is not None:
            config = ExperimentConfig(
                task=config.task,
                seed=config.seed if args.seed is None else args.seed,
                out_dir=config.out_dir if args.out is None else args.out,
                settings=config.settings,
            )
    except ConfigError as exc:
        for message in exc.messages:
            print(f"config error: {message}", file=sys.stderr)
        return 2
    try:
        report = run_experiment(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, IntegrationError, SingularSystemError,
            np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    if not args.quiet:
        _print_report(report.summary)
        print(f"outputs written to {config.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
