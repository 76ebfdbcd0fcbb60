"""Benchmark target functions and noisy data synthesis.

Ten test functions cover smooth, sharply peaked, discontinuous, transient,
and oscillatory shapes.  Functions with a natural domain other than [0, 1]
are evaluated through an affine map so the predictor grid always lives on
the unit interval.  Data realizations add unit-variance white Gaussian
noise to the target scaled to a requested signal-to-noise ratio, defined
as the discrete L2 norm of the signal over the noise standard deviation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bspline import _basis_batch

GRID_POINTS = 256

# Seed namespace for noise streams; keeps them disjoint from the
# small-integer streams that drive the swarm runs.
_NOISE_STREAM = 909090

# Distinct break points of the transient bump used by f7-f9: a single cubic
# B-spline supported on [0.3, 0.55].
_BUMP_BREAKS = np.array([0.3, 0.4, 0.45, 0.5, 0.55])
_BUMP_KNOTS = np.concatenate([[0.3] * 3, _BUMP_BREAKS, [0.55] * 3])


def _bump(x: np.ndarray) -> np.ndarray:
    vals = _basis_batch(_BUMP_KNOTS[None, :], np.asarray(x, dtype=float), 4)
    return vals[0, 3, :]


def _f1(x):
    return 90.0 / (1.0 + np.exp(-100.0 * (x - 0.4)))


def _f2(x):
    return np.where(
        x < 0.6,
        1.0 / (0.01 + (x - 0.3) ** 2),
        1.0 / (0.015 + (x - 0.65) ** 2),
    )


def _f3(x):
    return 100.0 * np.exp(-np.abs(10.0 * x - 5.0)) + (10.0 * x - 5.0) ** 5 / 500.0


def _f4(x):
    return np.sin(x) + 2.0 * np.exp(-30.0 * x**2)


def _f5(x):
    return np.sin(2.0 * x) + 2.0 * np.exp(-16.0 * x**2) + 2.0


def _f6(x):
    first = 4.0 * x**2 * (3.0 - 4.0 * x)
    second = 4.0 / 3.0 * x * (4.0 * x**2 - 10.0 * x + 7.0) - 1.5
    third = 16.0 / 3.0 * x * (x - 1.0) ** 2
    return np.where(x < 0.5, first, np.where(x < 0.75, second, third))


def _f7(x):
    return _bump(x)


def _f8(x):
    return _bump(x) + _bump(x - 0.125)


def _f9(x):
    return _bump(x - 0.25) + _bump(x - 0.125)


def _f10(x):
    return np.exp(-((x - 0.5) ** 2) / 0.125) * np.sin(10.24 * np.pi * (x - 0.5))


_FUNCTIONS = {
    "f1": (_f1, (0.0, 1.0)),
    "f2": (_f2, (0.0, 1.0)),
    "f3": (_f3, (0.0, 1.0)),
    "f4": (_f4, (-2.0, 2.0)),
    "f5": (_f5, (-2.0, 2.0)),
    "f6": (_f6, (0.0, 1.0)),
    "f7": (_f7, (0.0, 1.0)),
    "f8": (_f8, (0.0, 1.0)),
    "f9": (_f9, (0.0, 1.0)),
    "f10": (_f10, (0.0, 1.0)),
}

BENCHMARK_NAMES = tuple(_FUNCTIONS)


@dataclass(frozen=True)
class DataRealization:
    benchmark: str
    snr: float
    seed: int
    grid: np.ndarray
    truth: np.ndarray
    y: np.ndarray


def evaluate_benchmark(name: str, grid) -> np.ndarray:
    """Evaluate a benchmark function on unit-interval grid points."""
    if name not in _FUNCTIONS:
        raise KeyError(f"unknown benchmark {name!r}; expected one of {BENCHMARK_NAMES}")
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0.0) or np.any(grid > 1.0):
        raise ValueError("grid points must lie in [0, 1]")
    func, (lo, hi) = _FUNCTIONS[name]
    return func(lo + (hi - lo) * grid)


def normalize_snr(samples, snr: float) -> np.ndarray:
    """Scale samples so their discrete L2 norm equals ``snr`` (noise std 1)."""
    if snr <= 0:
        raise ValueError("snr must be positive")
    samples = np.asarray(samples, dtype=float)
    norm = float(np.linalg.norm(samples))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero signal")
    return samples * (snr / norm)


def default_grid(num_points: int = GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0, num_points)


def generate_realization(name: str, snr: float, seed: int) -> DataRealization:
    """Benchmark truth at the target SNR plus one unit-variance Gaussian
    noise draw from a stream keyed by ``seed``."""
    grid = default_grid()
    truth = normalize_snr(evaluate_benchmark(name, grid), snr)
    rng = np.random.default_rng((_NOISE_STREAM, seed))
    y = truth + rng.standard_normal(grid.size)
    return DataRealization(
        benchmark=name, snr=snr, seed=seed, grid=grid, truth=truth, y=y
    )
