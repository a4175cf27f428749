"""Polynomial delay-embedding feature vectors.

The feature vector concatenates an optional constant, a linear block of
time-delayed observations, and the unique polynomial monomials of that
linear block. The canonical ordering is fixed once and for all:

    [constant?, delays most-recent-first, degree blocks in ascending degree]

with each degree block enumerated by the non-decreasing exponent tuples of
:func:`monomial_exponent_table`. Every trained readout matrix is laid out
against this ordering.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .timeseries import TimeSeries


class WarmupError(ValueError):
    """Raised when an index precedes the first fully populated delay window."""


@dataclass(frozen=True)
class FeatureSpec:
    """Declarative description of the feature vector.

    Attributes:
        d: number of input components per sample.
        k: number of time-delay taps.
        s: tap spacing in samples; (s - 1) samples are skipped between taps.
        degrees: polynomial degrees (each >= 2) included in the nonlinear
            block, stored sorted ascending.
        include_constant: whether the constant feature is present.
        constant_value: value of the constant feature when present.
    """

    d: int
    k: int
    s: int = 1
    degrees: tuple[int, ...] = ()
    include_constant: bool = True
    constant_value: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")
        degrees = tuple(sorted(int(p) for p in self.degrees))
        if any(p < 2 for p in degrees):
            raise ValueError(f"nonlinear degrees must all be >= 2, got {degrees}")
        if len(set(degrees)) != len(degrees):
            raise ValueError(f"duplicate degrees in {degrees}")
        object.__setattr__(self, "degrees", degrees)

    @property
    def n_linear(self) -> int:
        return self.d * self.k

    @property
    def warmup_index(self) -> int:
        """First sample index with a fully populated delay window."""
        return (self.k - 1) * self.s

    @property
    def warmup_samples(self) -> int:
        """Number of samples needed before the first feature vector exists."""
        return self.warmup_index + 1

    def exponent_tables(self) -> dict[int, np.ndarray]:
        """Exponent-index table for each nonlinear degree (cached)."""
        return {p: _exponent_array(self.n_linear, p) for p in self.degrees}


@lru_cache(maxsize=128)
def _exponent_array(n_vars: int, p: int) -> np.ndarray:
    return np.array(monomial_exponent_table(n_vars, p), dtype=np.intp)


@dataclass(frozen=True)
class DelayWindow:
    """The k delayed observations feeding one feature vector, newest first.

    Row 0 is the current sample X_i, row 1 is X_{i-s}, and so on.
    """

    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2:
            raise ValueError(f"window must be 2-D (k x d), got shape {samples.shape}")
        object.__setattr__(self, "samples", samples)

    @property
    def k(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]


def feature_length(spec: FeatureSpec) -> int:
    """Total feature-vector length, computed without building any features.

    The linear block has d*k entries and each degree-p block has
    C(d*k + p - 1, p) unique monomials (combinations with repetition).
    """
    n = spec.n_linear
    total = int(spec.include_constant) + n
    for p in spec.degrees:
        total += comb(n + p - 1, p)
    return total


def monomial_exponent_table(n_vars: int, p: int) -> list[tuple[int, ...]]:
    """All non-decreasing index tuples of length p over {0..n_vars-1}.

    The tuples come out in lexicographic order; for p=2 this walks the
    upper-triangular entries of the outer product row-major. The product of
    the indexed linear-block entries of tuple t is monomial t.
    """
    if n_vars < 1:
        raise ValueError(f"n_vars must be >= 1, got {n_vars}")
    if p < 2:
        raise ValueError(f"degree must be >= 2, got {p}")
    return list(itertools.combinations_with_replacement(range(n_vars), p))


def delay_window(series: TimeSeries, spec: FeatureSpec, i: int) -> DelayWindow:
    """The delay window ending at sample i of `series`."""
    if i < spec.warmup_index:
        raise WarmupError(
            f"index {i} precedes warm-up: need i >= (k-1)*s = {spec.warmup_index}"
        )
    if i >= series.n_samples:
        raise IndexError(f"index {i} out of range for {series.n_samples} samples")
    taps = i - spec.s * np.arange(spec.k)
    return DelayWindow(series.values[taps])


def linear_features(series: TimeSeries, spec: FeatureSpec, i: int) -> np.ndarray:
    """The linear block [X_i; X_{i-s}; ...; X_{i-(k-1)s}] at sample i."""
    if series.n_components != spec.d:
        raise ValueError(
            f"series has {series.n_components} components but spec.d = {spec.d}"
        )
    return delay_window(series, spec, i).samples.ravel()


def total_features(window: DelayWindow, spec: FeatureSpec) -> np.ndarray:
    """The full feature vector for one delay window, in canonical order."""
    if window.k != spec.k or window.d != spec.d:
        raise ValueError(
            f"window shape {window.samples.shape} does not match spec (k={spec.k}, d={spec.d})"
        )
    lin = window.samples.ravel()
    parts = []
    if spec.include_constant:
        parts.append([spec.constant_value])
    parts.append(lin)
    tables = spec.exponent_tables()
    for p in spec.degrees:
        parts.append(np.prod(lin[tables[p]], axis=1))
    return np.concatenate(parts)


def feature_block(series: TimeSeries, spec: FeatureSpec, indices) -> np.ndarray:
    """Feature vectors at several sample indices, stacked as columns.

    Equivalent to calling :func:`total_features` at each index but built
    with vectorized slicing; columns follow the order of `indices`.
    """
    if series.n_components != spec.d:
        raise ValueError(
            f"series has {series.n_components} components but spec.d = {spec.d}"
        )
    indices = np.asarray(indices, dtype=np.intp)
    if indices.size and indices.min() < spec.warmup_index:
        raise WarmupError(
            f"index {indices.min()} precedes warm-up: need i >= {spec.warmup_index}"
        )
    if indices.size and indices.max() >= series.n_samples:
        raise IndexError(f"index {indices.max()} out of range for {series.n_samples} samples")
    # Linear block: row (j*d + c) holds component c delayed by j*s samples.
    taps = indices[None, :] - spec.s * np.arange(spec.k)[:, None]  # (k, n)
    lin = series.values[taps]                                      # (k, n, d)
    lin = np.transpose(lin, (0, 2, 1)).reshape(spec.n_linear, -1)  # (k*d, n)
    parts = []
    if spec.include_constant:
        parts.append(np.full((1, lin.shape[1]), spec.constant_value))
    parts.append(lin)
    tables = spec.exponent_tables()
    for p in spec.degrees:
        parts.append(np.prod(lin[tables[p], :], axis=1))
    return np.vstack(parts)


def feature_names(spec: FeatureSpec, components: list[str] | None = None) -> list[str]:
    """Human-readable labels for each feature, in canonical order.

    Delays are written as e.g. ``x[t-2]`` (lag in samples) and monomials as
    products of linear-block labels.
    """
    if components is None:
        components = [f"x{c}" for c in range(spec.d)]
    if len(components) != spec.d:
        raise ValueError(f"need {spec.d} component names, got {len(components)}")
    lin_names = []
    for j in range(spec.k):
        lag = j * spec.s
        suffix = "[t]" if lag == 0 else f"[t-{lag}]"
        lin_names.extend(name + suffix for name in components)
    names = []
    if spec.include_constant:
        names.append("const")
    names.extend(lin_names)
    for p in spec.degrees:
        for tup in monomial_exponent_table(spec.n_linear, p):
            names.append("*".join(lin_names[a] for a in tup))
    return names
