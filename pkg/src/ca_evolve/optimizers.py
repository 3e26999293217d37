"""Search algorithms over fixed-length bit vectors: binary PSO, its global-local
variant, a genetic algorithm, and a continuous PSO used as a scaffold sanity
check.

All optimizers maximize. The objective is called once per epoch with the whole
population as a (pop, length) array and must return one finite fitness per
row; if it defines ``begin_epoch(epoch)`` that hook runs first (the CA task
objectives resample their IC batch there). Every optimizer takes an explicit
numpy Generator and is bit-for-bit reproducible from the seed.

The binary particle state keeps two velocity tracks per bit: v1 pushes the bit
toward 1 and v0 toward 0. The velocity selected by the current bit value maps
through a sigmoid to the per-bit flip probability. Cognitive and social pulls
add +/- c*r to the tracks depending on whether the attractor bit is 1 or 0.
The global-local variant splits the social pull evenly between the swarm-wide
best and a ring-neighborhood best, then mutates each particle with a small,
right-tailed flip-count distribution.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_MUTATION_PMF = (0.5, 0.25, 0.15, 0.07, 0.03)


class EvaluationError(RuntimeError):
    """Objective returned a non-finite value for some population member."""

    def __init__(self, index: int, position: np.ndarray, value: float):
        super().__init__(f"non-finite fitness {value!r} for member {index}")
        self.index = index
        self.position = np.array(position)
        self.value = value


@dataclass
class PSOConfig:
    epochs: int = 200
    swarm_size: int = 100
    c1: float = 2.0
    c2: float = 2.0
    w1: float = 0.4
    w2: float = 0.9
    vmax: float = 6.0
    neighborhood_delta: int = 5
    mutation_pmf: Tuple[float, ...] = DEFAULT_MUTATION_PMF
    ring: bool = True          # circular neighborhood distance; False clips at the ends
    redraw_z: bool = False     # redraw the chaotic state each epoch instead of iterating


@dataclass
class GAConfig:
    epochs: int = 200
    population_size: int = 100
    elite_fraction: float = 0.2
    mutation_bits: int = 2


@dataclass
class OptimizerResult:
    best_position: np.ndarray
    best_fitness: float
    trajectory: np.ndarray  # best-so-far fitness after each completed epoch
    evaluations: int
    complete: bool = True


# --- shared pieces ----------------------------------------------------------

def chaotic_inertia(t: int, max_iter: int, z: float,
                    w1: float = 0.4, w2: float = 0.9) -> Tuple[float, float]:
    """One inertia-weight update: iterate the logistic map, then blend.

    Returns (w, z') with z' = 4z(1-z) and
    w = (w1 - w2) * (max_iter - t) / max_iter + w2 * z'.
    Early in a run the linear term makes w negative; that is intentional and
    surfaced in debug logs rather than clamped.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be positive, got {max_iter}")
    if not 0 <= t <= max_iter:
        raise ValueError(f"epoch {t} outside [0, {max_iter}]")
    if not 0.0 < z < 1.0:
        raise ValueError(f"chaotic state must lie in (0, 1), got {z}")
    z_next = 4.0 * z * (1.0 - z)
    w = (w1 - w2) * (max_iter - t) / max_iter + w2 * z_next
    return w, z_next


def _draw_chaotic_seed(rng: np.random.Generator) -> float:
    # avoid the logistic map's absorbing points and their one-step preimages
    z = float(rng.random())
    while z in (0.0, 0.25, 0.5, 0.75, 1.0):
        z = float(rng.random())
    return z


def attraction(bits: np.ndarray, r: np.ndarray, c: float) -> np.ndarray:
    """Per-bit pull toward an attractor: +c*r where its bit is 1, -c*r where 0.

    Returns the toward-1 term; the toward-0 term is its negation.
    """
    return np.where(bits == 1, c * r, -c * r)


def bpso_velocity_update(v1, v0, positions_pbest, gbest, w, c1, c2, r1, r2, vmax):
    """Two-attractor velocity update, clamped to [-vmax, vmax]."""
    d1 = attraction(positions_pbest, r1, c1)
    d2 = attraction(gbest[None, :], r2, c2)
    new_v1 = np.clip(w * v1 + d1 + d2, -vmax, vmax)
    new_v0 = np.clip(w * v0 - d1 - d2, -vmax, vmax)
    return new_v1, new_v0


def bgl_velocity_update(v1, v0, positions_pbest, gbest, plocal, w, c1, c2, r1, r2, r3, vmax):
    """Three-attractor update; the two social pulls are averaged."""
    d1 = attraction(positions_pbest, r1, c1)
    d2 = attraction(gbest[None, :], r2, c2)
    d3 = attraction(plocal, r3, c2)
    social = (d2 + d3) / 2.0
    new_v1 = np.clip(w * v1 + d1 + social, -vmax, vmax)
    new_v0 = np.clip(w * v0 - d1 - social, -vmax, vmax)
    return new_v1, new_v0


def flip_probability(positions, v1, v0):
    """Per-bit change probability: sigmoid of the velocity toward the other state."""
    v_change = np.where(positions == 0, v1, v0)
    return 1.0 / (1.0 + np.exp(-v_change))


def bpso_position_update(positions, v1, v0, r):
    """Flip each bit whose uniform draw lands under its change probability."""
    return positions ^ (r < flip_probability(positions, v1, v0)).astype(np.uint8)


def ring_neighborhood(i: int, delta: int, size: int) -> np.ndarray:
    """Indices within circular distance delta of particle i, i included."""
    if not 0 <= i < size:
        raise ValueError(f"index {i} outside swarm of size {size}")
    if delta < 0 or 2 * delta + 1 > size:
        raise ValueError(f"neighborhood tolerance {delta} too large for swarm of {size}")
    return np.sort((i + np.arange(-delta, delta + 1)) % size)


def _neighbor_matrix(size: int, delta: int, ring: bool) -> np.ndarray:
    if delta < 0 or 2 * delta + 1 > size:
        raise ValueError(f"neighborhood tolerance {delta} too large for swarm of {size}")
    offsets = np.arange(-delta, delta + 1)
    idx = np.arange(size)[:, None] + offsets[None, :]
    return idx % size if ring else np.clip(idx, 0, size - 1)


def _validate_pmf(pmf, length: int) -> np.ndarray:
    pmf = np.asarray(pmf, dtype=float)
    if pmf.ndim != 1 or pmf.size == 0 or np.any(pmf < 0):
        raise ValueError("mutation pmf must be a nonnegative 1-d distribution")
    if abs(pmf.sum() - 1.0) > 1e-9:
        raise ValueError(f"mutation pmf must sum to 1, got {pmf.sum()}")
    if pmf.size - 1 > length:
        raise ValueError(f"pmf allows up to {pmf.size - 1} flips on {length} bits")
    return pmf


def mutate_positions(positions: np.ndarray, pmf, rng: np.random.Generator) -> np.ndarray:
    """Flip k distinct uniformly chosen bits per particle, k drawn from pmf."""
    pmf = _validate_pmf(pmf, positions.shape[1])
    out = positions.copy()
    counts = rng.choice(pmf.size, size=positions.shape[0], p=pmf)
    for i, k in enumerate(counts):
        if k:
            out[i, rng.choice(positions.shape[1], size=k, replace=False)] ^= 1
    return out


def _evaluate(objective: Callable, positions: np.ndarray) -> np.ndarray:
    values = np.asarray(objective(positions), dtype=float)
    if values.shape != (positions.shape[0],):
        raise ValueError(
            f"objective must return one fitness per member, got shape {values.shape}"
        )
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.argmax(bad))
        raise EvaluationError(i, positions[i], values[i])
    return values


def _begin_epoch(objective, epoch: int) -> None:
    hook = getattr(objective, "begin_epoch", None)
    if hook is not None:
        hook(epoch)


# --- binary PSO and the global-local variant --------------------------------

def binary_pso(objective, length: int, cfg: PSOConfig,
               rng: np.random.Generator, deadline: Optional[float] = None) -> OptimizerResult:
    return _run_binary_swarm(objective, length, cfg, rng, deadline, use_local=False)


def bgl_pso(objective, length: int, cfg: PSOConfig,
            rng: np.random.Generator, deadline: Optional[float] = None) -> OptimizerResult:
    return _run_binary_swarm(objective, length, cfg, rng, deadline, use_local=True)


def _run_binary_swarm(objective, length, cfg, rng, deadline, use_local):
    if length < 1:
        raise ValueError(f"bit-vector length must be positive, got {length}")
    if cfg.swarm_size < 2:
        raise ValueError(f"swarm size must be at least 2, got {cfg.swarm_size}")
    size = cfg.swarm_size

    positions = rng.integers(0, 2, size=(size, length), dtype=np.uint8)
    v1 = rng.random((size, length))
    v0 = rng.random((size, length))
    pbest_pos = positions.copy()
    pbest_fit = np.full(size, -np.inf)
    gbest_pos = positions[0].copy()
    gbest_fit = -np.inf

    if use_local:
        neigh = _neighbor_matrix(size, cfg.neighborhood_delta, cfg.ring)
        pmf = _validate_pmf(cfg.mutation_pmf, length)
        plocal_pos = positions.copy()
        plocal_fit = np.full(size, -np.inf)

    z = _draw_chaotic_seed(rng)
    trajectory = []
    evaluations = 0
    complete = True

    for epoch in range(cfg.epochs):
        if deadline is not None and epoch > 0 and time.monotonic() > deadline:
            complete = False
            break
        _begin_epoch(objective, epoch)
        fitness = _evaluate(objective, positions)
        evaluations += size

        improved = fitness > pbest_fit
        pbest_fit[improved] = fitness[improved]
        pbest_pos[improved] = positions[improved]
        top = int(np.argmax(fitness))
        if fitness[top] > gbest_fit:
            gbest_fit = float(fitness[top])
            gbest_pos = positions[top].copy()
        trajectory.append(gbest_fit)

        if use_local:
            neigh_fit = fitness[neigh]
            arg = np.argmax(neigh_fit, axis=1)
            best_idx = neigh[np.arange(size), arg]
            cur_max = fitness[best_idx]
            better = cur_max > plocal_fit
            plocal_fit[better] = cur_max[better]
            plocal_pos[better] = positions[best_idx[better]]

        if epoch == cfg.epochs - 1:
            break  # final state transition would never be evaluated

        if cfg.redraw_z:
            z = _draw_chaotic_seed(rng)
        w, z = chaotic_inertia(epoch, cfg.epochs, z, cfg.w1, cfg.w2)
        logger.debug("epoch %d w=%.4f gbest=%.6f", epoch, w, gbest_fit)

        r1 = rng.random((size, length))
        r2 = rng.random((size, length))
        if use_local:
            r3 = rng.random((size, length))
            v1, v0 = bgl_velocity_update(
                v1, v0, pbest_pos, gbest_pos, plocal_pos,
                w, cfg.c1, cfg.c2, r1, r2, r3, cfg.vmax,
            )
        else:
            v1, v0 = bpso_velocity_update(
                v1, v0, pbest_pos, gbest_pos, w, cfg.c1, cfg.c2, r1, r2, cfg.vmax,
            )
        positions = bpso_position_update(positions, v1, v0, rng.random((size, length)))
        if use_local:
            positions = mutate_positions(positions, pmf, rng)

    return OptimizerResult(
        best_position=gbest_pos,
        best_fitness=gbest_fit,
        trajectory=np.asarray(trajectory),
        evaluations=evaluations,
        complete=complete,
    )


# --- continuous PSO (scaffold sanity check) ----------------------------------

def continuous_pso(objective, dim: int, cfg: PSOConfig, rng: np.random.Generator,
                   bounds: Tuple[float, float] = (-5.12, 5.12),
                   init_positions: Optional[np.ndarray] = None) -> OptimizerResult:
    """Real-vector PSO with the same chaotic inertia schedule.

    Kept as a scaffold check of the swarm machinery; the CA tasks use the
    binary optimizers. Velocity is clamped to half the box width per axis.
    """
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    if cfg.swarm_size < 2:
        raise ValueError(f"swarm size must be at least 2, got {cfg.swarm_size}")
    lo, hi = bounds
    size = cfg.swarm_size

    if init_positions is not None:
        positions = np.array(init_positions, dtype=float)
        if positions.shape != (size, dim):
            raise ValueError(f"init_positions must have shape {(size, dim)}")
    else:
        positions = rng.uniform(lo, hi, size=(size, dim))
    velocity = np.zeros((size, dim))
    vmax = (hi - lo) / 2.0
    pbest_pos = positions.copy()
    pbest_fit = np.full(size, -np.inf)
    gbest_pos = positions[0].copy()
    gbest_fit = -np.inf

    z = _draw_chaotic_seed(rng)
    trajectory = []
    evaluations = 0

    for epoch in range(cfg.epochs):
        _begin_epoch(objective, epoch)
        fitness = _evaluate(objective, positions)
        evaluations += size

        improved = fitness > pbest_fit
        pbest_fit[improved] = fitness[improved]
        pbest_pos[improved] = positions[improved]
        top = int(np.argmax(fitness))
        if fitness[top] > gbest_fit:
            gbest_fit = float(fitness[top])
            gbest_pos = positions[top].copy()
        trajectory.append(gbest_fit)

        if epoch == cfg.epochs - 1:
            break
        w, z = chaotic_inertia(epoch, cfg.epochs, z, cfg.w1, cfg.w2)
        phi1 = rng.random((size, dim))
        phi2 = rng.random((size, dim))
        velocity = (
            w * velocity
            + cfg.c1 * phi1 * (pbest_pos - positions)
            + cfg.c2 * phi2 * (gbest_pos[None, :] - positions)
        )
        velocity = np.clip(velocity, -vmax, vmax)
        positions = positions + velocity

    return OptimizerResult(
        best_position=gbest_pos,
        best_fitness=gbest_fit,
        trajectory=np.asarray(trajectory),
        evaluations=evaluations,
    )


# --- genetic algorithm --------------------------------------------------------

@dataclass
class GAPopulation:
    """Chromosome matrix with the fitness cache from its last evaluation."""

    chromosomes: np.ndarray  # (P, L) uint8
    fitness: Optional[np.ndarray] = None
    generation: int = 0


def _elite_count(pop_size: int, elite_fraction: float) -> int:
    if pop_size < 5:
        raise ValueError(f"population size must be at least 5, got {pop_size}")
    count = pop_size * elite_fraction
    if abs(count - round(count)) > 1e-9 or round(count) < 1:
        raise ValueError(
            f"elite fraction {elite_fraction} does not give a whole, positive "
            f"elite count for population {pop_size}"
        )
    return int(round(count))


def ga_step(pop: GAPopulation, rng: np.random.Generator,
            elite_fraction: float = 0.2, mutation_bits: int = 2) -> GAPopulation:
    """One generation: keep the elite unchanged, refill from elite crossover.

    Parents are drawn uniformly with replacement from the elite; each pair
    yields one child (head of the first parent, tail of the second, cut
    uniform in 1..L-1) which is then mutated at ``mutation_bits`` uniformly
    chosen positions. Mutation positions may coincide, so a double hit on one
    bit cancels out; on average children differ from their crossover result in
    just under ``mutation_bits`` places. Fitness ties sort by lower index so a
    generation step is fully determined by the rng.
    """
    if pop.fitness is None:
        raise ValueError("population must be evaluated before stepping")
    chroms = pop.chromosomes
    p, length = chroms.shape
    if length < 2:
        raise ValueError("crossover needs chromosomes of at least 2 bits")
    n_elite = _elite_count(p, elite_fraction)

    order = np.lexsort((np.arange(p), -np.asarray(pop.fitness, dtype=float)))
    elite = chroms[order[:n_elite]].copy()

    n_children = p - n_elite
    parents = rng.integers(0, n_elite, size=(n_children, 2))
    cuts = rng.integers(1, length, size=n_children)
    head = np.arange(length)[None, :] < cuts[:, None]
    children = np.where(head, elite[parents[:, 0]], elite[parents[:, 1]])

    flips = rng.integers(0, length, size=(n_children, mutation_bits))
    rows = np.arange(n_children)
    for j in range(mutation_bits):
        children[rows, flips[:, j]] ^= 1

    return GAPopulation(
        chromosomes=np.concatenate([elite, children]),
        fitness=None,
        generation=pop.generation + 1,
    )


def ga(objective, length: int, cfg: GAConfig,
       rng: np.random.Generator, deadline: Optional[float] = None) -> OptimizerResult:
    if length < 2:
        raise ValueError(f"chromosome length must be at least 2, got {length}")
    _elite_count(cfg.population_size, cfg.elite_fraction)

    pop = GAPopulation(
        chromosomes=rng.integers(0, 2, size=(cfg.population_size, length), dtype=np.uint8)
    )
    best_pos = pop.chromosomes[0].copy()
    best_fit = -np.inf
    trajectory = []
    evaluations = 0
    complete = True

    for epoch in range(cfg.epochs):
        if deadline is not None and epoch > 0 and time.monotonic() > deadline:
            complete = False
            break
        _begin_epoch(objective, epoch)
        pop.fitness = _evaluate(objective, pop.chromosomes)
        evaluations += cfg.population_size

        top = int(np.argmax(pop.fitness))
        if pop.fitness[top] > best_fit:
            best_fit = float(pop.fitness[top])
            best_pos = pop.chromosomes[top].copy()
        trajectory.append(best_fit)

        if epoch < cfg.epochs - 1:
            pop = ga_step(pop, rng, cfg.elite_fraction, cfg.mutation_bits)

    return OptimizerResult(
        best_position=best_pos,
        best_fitness=best_fit,
        trajectory=np.asarray(trajectory),
        evaluations=evaluations,
        complete=complete,
    )
