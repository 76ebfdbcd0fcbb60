"""Local-best particle swarm optimization over a box search space.

Particles live on a ring: each one is attracted toward its own best
position and the best position found in its two-neighbor ring
neighborhood.  Inertia decays linearly across iterations, steps are
clamped componentwise, and particles that leave the box keep flying: they
receive infinite fitness and are pulled back by the cognitive and social
forces.

The objective is vectorized: it receives an ``(m, d)`` array of positions
and returns ``m`` fitness values.  Non-finite objective values are treated
as infinite.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

Objective = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SwarmConfig:
    bounds: tuple[tuple[float, float], ...]
    num_iterations: int
    num_particles: int = 40
    c1: float = 2.0
    c2: float = 2.0
    w_max: float = 0.9
    w_min: float = 0.4
    v_max_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.num_particles < 2:
            raise ValueError("need at least two particles")
        if self.num_iterations < 1:
            raise ValueError("need at least one iteration")
        if self.w_max < self.w_min:
            raise ValueError("w_max must be at least w_min")
        if not self.bounds:
            raise ValueError("bounds must be nonempty")
        for a, b in self.bounds:
            if not b > a:
                raise ValueError(f"invalid bound ({a}, {b})")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def lower(self) -> np.ndarray:
        return np.array([a for a, _ in self.bounds])

    def upper(self) -> np.ndarray:
        return np.array([b for _, b in self.bounds])

    def v_max(self) -> np.ndarray:
        return self.v_max_fraction * (self.upper() - self.lower())


@dataclass
class SwarmState:
    positions: np.ndarray
    velocities: np.ndarray
    pbest: np.ndarray
    pbest_fitness: np.ndarray
    gbest: np.ndarray
    gbest_fitness: float
    rng: np.random.Generator = field(repr=False)


def ring_neighbors(i: int, num_particles: int) -> tuple[int, int]:
    """Two ring neighbors of particle ``i`` (1-based indices)."""
    if not 1 <= i <= num_particles:
        raise IndexError(f"particle index {i} out of range 1..{num_particles}")
    if i == 1:
        return (num_particles, 2)
    if i == num_particles:
        return (num_particles - 1, 1)
    return (i - 1, i + 1)


def inertia_weight(k: int, config: SwarmConfig) -> float:
    """Linear decay from w_max at the first iteration to w_min at the last."""
    if config.num_iterations == 1:
        return config.w_max
    frac = (k - 1) / (config.num_iterations - 1)
    return config.w_max - (config.w_max - config.w_min) * frac


def init_swarm(config: SwarmConfig) -> SwarmState:
    """Draw initial positions uniformly in the box and velocities uniformly
    in the offset box that keeps one full step inside."""
    rng = np.random.default_rng(config.seed)
    lo, hi = config.lower(), config.upper()
    span = hi - lo
    shape = (config.num_particles, config.dim)
    x = lo + span * rng.random(shape)
    v = (lo - x) + span * rng.random(shape)
    return SwarmState(
        positions=x,
        velocities=v,
        pbest=x.copy(),
        pbest_fitness=np.full(config.num_particles, np.inf),
        gbest=x[0].copy(),
        gbest_fitness=np.inf,
        rng=rng,
    )


def _evaluate(objective: Objective, state: SwarmState, config: SwarmConfig) -> np.ndarray:
    """Fitness of every particle; out-of-box particles are not evaluated."""
    x = state.positions
    lo, hi = config.lower(), config.upper()
    inside = np.all((x >= lo) & (x <= hi), axis=1)
    f = np.full(config.num_particles, np.inf)
    if inside.any():
        vals = np.asarray(objective(x[inside]), dtype=float)
        vals = np.where(np.isfinite(vals), vals, np.inf)
        f[inside] = vals
    return f


def _local_best(pbest: np.ndarray, pbest_f: np.ndarray) -> np.ndarray:
    """Best personal best within each particle's ring neighborhood (self
    included).  Ties resolve to the left neighbor, then self, then right."""
    left_f = np.roll(pbest_f, 1)
    right_f = np.roll(pbest_f, -1)
    stacked = np.stack([left_f, pbest_f, right_f], axis=1)
    choice = np.argmin(stacked, axis=1)
    n = pbest_f.size
    idx = (np.arange(n) + choice - 1) % n
    return pbest[idx]


def step_swarm(
    state: SwarmState, objective: Objective, config: SwarmConfig, k: int
) -> SwarmState:
    """One full iteration: evaluate, update bests, then move.

    Local bests are computed only after every particle of the iteration has
    been evaluated; the velocity and position updates come last.  Velocities
    evolve unclamped, but the applied step is clamped componentwise.
    """
    f = _evaluate(objective, state, config)
    improved = f < state.pbest_fitness
    pbest = np.where(improved[:, None], state.positions, state.pbest)
    pbest_f = np.where(improved, f, state.pbest_fitness)

    best_i = int(np.argmin(pbest_f))
    gbest, gbest_f = state.gbest, state.gbest_fitness
    if pbest_f[best_i] < gbest_f:
        gbest = pbest[best_i].copy()
        gbest_f = float(pbest_f[best_i])

    lbest = _local_best(pbest, pbest_f)

    shape = state.positions.shape
    r1 = state.rng.random(shape)
    r2 = state.rng.random(shape)
    w = inertia_weight(k, config)
    v = (
        w * state.velocities
        + config.c1 * r1 * (pbest - state.positions)
        + config.c2 * r2 * (lbest - state.positions)
    )
    vmax = config.v_max()
    step = np.clip(v, -vmax, vmax)
    return SwarmState(
        positions=state.positions + step,
        velocities=v,
        pbest=pbest,
        pbest_fitness=pbest_f,
        gbest=gbest,
        gbest_fitness=gbest_f,
        rng=state.rng,
    )


def run_pso(objective: Objective, config: SwarmConfig) -> tuple[np.ndarray, float]:
    """Run the swarm to the iteration budget.

    Returns the best location found and its fitness.  Fully deterministic
    for a given seed.
    """
    state = init_swarm(config)
    for k in range(1, config.num_iterations + 1):
        state = step_swarm(state, objective, config, k)
    return state.gbest.copy(), state.gbest_fitness


__all__ = [
    "SwarmConfig",
    "SwarmState",
    "ring_neighbors",
    "inertia_weight",
    "init_swarm",
    "step_swarm",
    "run_pso",
]
