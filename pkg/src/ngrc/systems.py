"""Ground-truth chaotic systems and their integrators.

Deterministic trajectories come from an adaptive explicit Runge-Kutta 3(2)
pair (Bogacki-Shampine) sampled onto the uniform dt grid. Noise-driven
trajectories use a fixed-substep second-order scheme with a piecewise
constant Gaussian forcing, scaled so the integrated forcing has the
requested RMS per unit time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .timeseries import TimeSeries


class IntegrationError(RuntimeError):
    """Raised when the adaptive integrator fails to reach the end time."""


@dataclass(frozen=True)
class SystemDef:
    """A named autonomous ODE vector field."""

    name: str
    dim: int
    params: dict
    lyapunov_time: float
    rhs: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IntegrationConfig:
    """How to integrate: grid, span, start point, tolerances, noise."""

    dt: float
    t_span: tuple[float, float]
    initial_state: np.ndarray
    rtol: float = 1e-8
    atol: float = 1e-10
    seed: int | None = None
    noise_rms: float = 0.0
    substeps: int = 20

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("integration tolerances must be positive")
        if self.t_span[1] <= self.t_span[0]:
            raise ValueError(f"empty time span {self.t_span}")
        if self.noise_rms < 0:
            raise ValueError(f"noise_rms must be nonnegative, got {self.noise_rms}")
        if self.substeps < 1:
            raise ValueError(f"substeps must be >= 1, got {self.substeps}")
        object.__setattr__(self, "initial_state", np.asarray(self.initial_state, dtype=float))

    def grid(self) -> np.ndarray:
        """The sample times t0 + m*dt covering the span (exact arithmetic)."""
        t0, t1 = self.t_span
        n = int(round((t1 - t0) / self.dt)) + 1
        return t0 + self.dt * np.arange(n)


LORENZ_PARAMS = {"sigma": 10.0, "rho": 28.0, "beta": 8.0 / 3.0}

DOUBLE_SCROLL_PARAMS = {"r1": 1.2, "r2": 3.44, "r4": 0.193, "alpha": 11.6, "ir": 2.25e-5}

# Pre-transient starting points for on-attractor initial conditions.
_SEED_STATE = {"lorenz63": (1.0, 1.0, 1.0), "double_scroll": (0.1, 0.1, 0.1)}


def lorenz63_rhs(state) -> np.ndarray:
    """Vector field of the three-variable Lorenz convection model."""
    x, y, z = state
    return np.array([10.0 * (y - x), x * (28.0 - z) - y, x * y - 8.0 / 3.0 * z])


def double_scroll_rhs(state) -> np.ndarray:
    """Vector field of the dimensionless double-scroll chaotic circuit."""
    v1, v2, i = state
    p = DOUBLE_SCROLL_PARAMS
    dv = v1 - v2
    sinh_term = 2.0 * p["ir"] * np.sinh(p["alpha"] * dv)
    return np.array(
        [v1 / p["r1"] - dv / p["r2"] - sinh_term, dv / p["r2"] + sinh_term - i, v2 - p["r4"] * i]
    )


def lorenz63() -> SystemDef:
    return SystemDef(
        name="lorenz63",
        dim=3,
        params=dict(LORENZ_PARAMS),
        lyapunov_time=1.1,
        rhs=lorenz63_rhs,
    )


def double_scroll() -> SystemDef:
    return SystemDef(
        name="double_scroll",
        dim=3,
        params=dict(DOUBLE_SCROLL_PARAMS),
        lyapunov_time=7.81,
        rhs=double_scroll_rhs,
    )


def get_system(name: str) -> SystemDef:
    factories = {"lorenz63": lorenz63, "double_scroll": double_scroll}
    if name not in factories:
        raise ValueError(f"unknown system {name!r}; expected one of {sorted(factories)}")
    return factories[name]()


def integrate(system: SystemDef, config: IntegrationConfig) -> TimeSeries:
    """Deterministic trajectory sampled on the uniform dt grid.

    Adaptive 3(2) stepping controls the local error at (rtol, atol); the
    dense solution is evaluated exactly at the grid times.
    """
    grid = config.grid()
    rhs = system.rhs
    sol = solve_ivp(
        lambda t, y: rhs(y),
        (grid[0], grid[-1]),
        config.initial_state,
        method="RK23",
        t_eval=grid,
        rtol=config.rtol,
        atol=config.atol,
    )
    if not sol.success:
        raise IntegrationError(f"integration of {system.name} failed: {sol.message}")
    return TimeSeries(dt=config.dt, values=sol.y.T.copy(), t0=float(grid[0]))


def integrate_noisy(system: SystemDef, config: IntegrationConfig) -> TimeSeries:
    """Trajectory of the vector field driven by Gaussian forcing.

    Each dt interval is split into ``substeps`` equal substeps of length h.
    At every substep an independent forcing vector is drawn with
    per-component standard deviation noise_rms/sqrt(h), held constant over
    the substep, and the forced field is advanced with one explicit
    second-order (Heun) step. The integrated forcing then has RMS
    ``noise_rms`` per unit time, and noise_rms = 0 degenerates to a
    deterministic fixed-step run.
    """
    if config.seed is None:
        raise ValueError("integrate_noisy requires a seed for reproducibility")
    rng = np.random.default_rng(config.seed)
    grid = config.grid()
    h = config.dt / config.substeps
    sigma = config.noise_rms / np.sqrt(h)
    rhs = system.rhs
    state = config.initial_state.copy()
    values = np.empty((len(grid), system.dim))
    values[0] = state
    for m in range(1, len(grid)):
        for _ in range(config.substeps):
            xi = rng.normal(0.0, sigma, size=system.dim)
            k1 = rhs(state) + xi
            k2 = rhs(state + h * k1) + xi
            state = state + 0.5 * h * (k1 + k2)
        values[m] = state
    return TimeSeries(dt=config.dt, values=values, t0=float(grid[0]))


def on_attractor_state(system: SystemDef, transient: float = 20.0, dt: float = 0.01,
                       rtol: float = 1e-8, atol: float = 1e-10) -> np.ndarray:
    """A point on the attractor, reached by discarding a fixed transient.

    Starts from a canonical off-attractor point per system so the result is
    deterministic.
    """
    start = np.array(_SEED_STATE[system.name])
    config = IntegrationConfig(dt=dt, t_span=(0.0, transient), initial_state=start,
                               rtol=rtol, atol=atol)
    return integrate(system, config).values[-1].copy()
