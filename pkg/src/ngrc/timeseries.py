"""Uniformly sampled multivariate time series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TimeSeries:
    """A trajectory sampled on a uniform time grid.

    ``values`` has one row per sample and one column per component. Sample m
    sits at time ``t0 + m * dt``; times are always reconstructed by
    multiplication so the grid stays exact for long runs.
    """

    dt: float
    values: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D (samples x components), got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"series needs at least one sample and component, got {values.shape}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_components(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_samples)

    @property
    def duration(self) -> float:
        """Time spanned between the first and last sample."""
        return self.dt * (self.n_samples - 1)

    def segment(self, start: int, stop: int) -> "TimeSeries":
        """Samples ``start:stop`` as a new series with the matching ``t0``."""
        if not (0 <= start < stop <= self.n_samples):
            raise ValueError(f"segment [{start}:{stop}] out of range for {self.n_samples} samples")
        return TimeSeries(self.dt, self.values[start:stop], self.t0 + start * self.dt)

    def select(self, indices) -> "TimeSeries":
        """A series containing only the given component columns."""
        return TimeSeries(self.dt, self.values[:, list(indices)], self.t0)

    def to_csv(self, path) -> None:
        """Write delimited text: time in the first column, components after.

        Values are printed with 17 significant digits so a reload recovers
        them bit-exactly.
        """
        data = np.column_stack([self.times, self.values])
        header = f"dt={self.dt!r} t0={self.t0!r}\ncolumns: t " + " ".join(
            f"c{j}" for j in range(self.n_components)
        )
        np.savetxt(path, data, fmt="%.17g", delimiter=",", header=header)

    @classmethod
    def from_csv(cls, path) -> "TimeSeries":
        """Read a series written by :meth:`to_csv`.

        ``dt`` and ``t0`` are taken from the header when present, otherwise
        inferred from the time column.
        """
        dt = t0 = None
        with open(path) as fh:
            first = fh.readline()
        if first.startswith("# dt="):
            for token in first[2:].split():
                key, _, raw = token.partition("=")
                if key == "dt":
                    dt = float(raw)
                elif key == "t0":
                    t0 = float(raw)
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        times, values = data[:, 0], data[:, 1:]
        if dt is None:
            if len(times) < 2:
                raise ValueError("cannot infer dt from a single-sample file without a header")
            dt = float(times[1] - times[0])
        if t0 is None:
            t0 = float(times[0])
        return cls(dt=dt, values=values, t0=t0)
