"""Task objectives: density-classification scoring and compression-based chaos scoring.

Density: a rule classifies an initial configuration correctly when, after T
steps, the lattice is exactly all-1s for initial density above 1/2 and exactly
all-0s below it. The score over a batch is the fraction classified correctly.

Chaos: a rule is scored by how incompressible its spacetime output is. Each
history gets the average of a per-row compression-ratio term (summed over the
T+1 rows and divided by T) and a whole-history compression ratio, both halved.
Cells are serialized as ASCII '0'/'1' bytes and compressed with raw DEFLATE at
maximum effort; the exact encoder is pinned and recorded because scores are
encoder-dependent.

Initial configurations come from the flat sampler: the number of 1s is uniform
on {0..N}, so density itself is uniform instead of concentrating at 1/2 the
way per-cell coin flips would.
"""
from __future__ import annotations

import json
import zlib
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import ca

#: Identifier of the pinned compression backend, embedded in result files.
COMPRESSOR_ID = f"deflate-raw/zlib-{zlib.ZLIB_RUNTIME_VERSION}/level-9"

_ASCII_ZERO = np.uint8(ord("0"))


# --- compression ------------------------------------------------------------

def deflate_size(data: bytes) -> int:
    """Compressed byte count under raw DEFLATE (no container), max effort."""
    enc = zlib.compressobj(9, zlib.DEFLATED, -15)
    return len(enc.compress(data)) + len(enc.flush())


def nc(data: bytes) -> float:
    """Compression ratio compressed/original; the incompressibility proxy."""
    if len(data) == 0:
        raise ValueError("cannot score empty data")
    return deflate_size(data) / len(data)


def serialize_rows(rows: np.ndarray) -> bytes:
    """Cells as ASCII '0'/'1', rows concatenated in time order, no separators."""
    arr = np.ascontiguousarray(rows, dtype=np.uint8)
    return (arr + _ASCII_ZERO).tobytes()


def _nc_pt_rows(rows: np.ndarray) -> float:
    if rows.shape[0] < 2:
        raise ValueError("history must have at least two rows")
    t_final = rows.shape[0] - 1
    ascii_rows = np.ascontiguousarray(rows, dtype=np.uint8) + _ASCII_ZERO
    n = rows.shape[1]
    piecewise = sum(deflate_size(ascii_rows[i].tobytes()) / n for i in range(rows.shape[0]))
    piecewise /= t_final
    total = deflate_size(ascii_rows.tobytes()) / ascii_rows.size
    return (piecewise + total) / 2.0


def nc_pt(history: Union[ca.SpacetimeHistory, np.ndarray]) -> float:
    """Chaos score of one spacetime history (higher = less compressible)."""
    rows = history.rows if isinstance(history, ca.SpacetimeHistory) else np.asarray(history)
    return _nc_pt_rows(rows)


# --- initial-configuration sampling ----------------------------------------

def sample_flat_batch(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """(size, n) batch of flat-uniform configurations.

    Per row, the count of 1s is uniform on {0..n} and their positions are a
    uniform subset of that size.
    """
    if n < 1:
        raise ValueError(f"lattice width must be positive, got {n}")
    if size < 1:
        raise ValueError(f"batch size must be positive, got {size}")
    counts = rng.integers(0, n + 1, size=size)
    u = rng.random((size, n))
    ranks = np.empty((size, n), dtype=np.int64)
    np.put_along_axis(ranks, np.argsort(u, axis=1), np.arange(n)[None, :], axis=1)
    return (ranks < counts[:, None]).astype(np.uint8)


def sample_flat_ic(n: int, rng: np.random.Generator) -> np.ndarray:
    """One flat-uniform configuration."""
    return sample_flat_batch(n, 1, rng)[0]


@dataclass(frozen=True)
class ICBatch:
    """A sampled batch of initial configurations with cached densities."""

    ics: np.ndarray  # (B, N) uint8
    seed: Optional[int] = None
    densities: np.ndarray = None  # filled in __post_init__

    def __post_init__(self):
        ics = np.ascontiguousarray(self.ics, dtype=np.uint8)
        if ics.ndim != 2 or ics.shape[0] < 1:
            raise ValueError("ICBatch needs a nonempty (batch, width) array")
        ics.setflags(write=False)
        dens = ics.mean(axis=1)
        dens.setflags(write=False)
        object.__setattr__(self, "ics", ics)
        object.__setattr__(self, "densities", dens)

    @property
    def size(self) -> int:
        return self.ics.shape[0]

    @property
    def width(self) -> int:
        return self.ics.shape[1]

    @classmethod
    def sample(cls, n: int, size: int, seed: int) -> "ICBatch":
        rng = np.random.default_rng(seed)
        return cls(sample_flat_batch(n, size, rng), seed=seed)

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "n": self.width,
                "ics": [pack_cells_hex(row) for row in self.ics],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "ICBatch":
        doc = json.loads(text)
        n = doc["n"]
        ics = np.stack([unpack_cells_hex(h, n) for h in doc["ics"]])
        return cls(ics, seed=doc.get("seed"))


def pack_cells_hex(cells: np.ndarray) -> str:
    """Hex of the cells packed 8 per byte, first cell = most significant bit."""
    return np.packbits(np.ascontiguousarray(cells, dtype=np.uint8)).tobytes().hex()


def unpack_cells_hex(text: str, n: int) -> np.ndarray:
    raw = bytes.fromhex(text)
    if len(raw) != (n + 7) // 8:
        raise ValueError(f"hex IC of {len(raw)} bytes does not match width {n}")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=n)
    return bits.astype(np.uint8)


# --- density task -----------------------------------------------------------

@dataclass(frozen=True)
class FitnessValue:
    """A task fitness: fraction correct for density, mean chaos score for chaos."""

    value: float
    task: str

    def __post_init__(self):
        if self.task not in ("density", "chaos"):
            raise ValueError(f"unknown task tag: {self.task}")
        if self.task == "density" and not 0.0 <= self.value <= 1.0:
            raise ValueError(f"density fitness must lie in [0, 1], got {self.value}")
        if self.task == "chaos" and self.value < 0.0:
            raise ValueError(f"chaos fitness must be nonnegative, got {self.value}")

    def __float__(self) -> float:
        return self.value


def _density_targets(ics: np.ndarray) -> np.ndarray:
    """Per-row target lattice: all-1s when density > 1/2, all-0s otherwise."""
    majority = (2 * ics.sum(axis=1) > ics.shape[1]).astype(np.uint8)
    return np.repeat(majority[:, None], ics.shape[1], axis=1)


def classify_batch(rule: ca.RuleTable, ics: np.ndarray, steps: int) -> np.ndarray:
    """Boolean per-row correctness of density classification after ``steps``."""
    ics = np.ascontiguousarray(ics, dtype=np.uint8)
    if ics.shape[1] % 2 == 0:
        raise ValueError("density classification needs an odd lattice width")
    finals = ca.evolve_final_rows(ics, rule, steps)
    return np.all(finals == _density_targets(ics), axis=1)


def classify_density(rule: ca.RuleTable, ic, steps: int) -> bool:
    """True when the rule settles this configuration onto its majority state."""
    return bool(classify_batch(rule, ca.as_config(ic)[None, :], steps)[0])


def f100(rule: ca.RuleTable, batch, steps: int) -> FitnessValue:
    """Fraction of a batch classified correctly within ``steps`` updates."""
    ics = batch.ics if isinstance(batch, ICBatch) else np.asarray(batch)
    if ics.ndim != 2 or ics.shape[0] == 0:
        raise ValueError("need a nonempty batch of configurations")
    correct = classify_batch(rule, ics, steps)
    return FitnessValue(float(correct.mean()), "density")


# --- chaos task --------------------------------------------------------------

def chaos_fitness(rule: ca.RuleTable, batch, steps: int) -> FitnessValue:
    """Mean chaos score of the rule's histories over a batch of ICs."""
    ics = batch.ics if isinstance(batch, ICBatch) else np.asarray(batch)
    if ics.ndim != 2 or ics.shape[0] == 0:
        raise ValueError("need a nonempty batch of configurations")
    histories = ca.evolve_history_many(
        rule.bits[None, :], np.ascontiguousarray(ics, dtype=np.uint8)[None], steps, rule.radius
    )[0]
    return FitnessValue(float(np.mean([_nc_pt_rows(h) for h in histories])), "chaos")


# --- optimizer-facing objectives ---------------------------------------------
#
# The optimizers evaluate a whole population per epoch with one call taking a
# (population, table_bits) array and returning one fitness per row. When the
# objective has a begin_epoch method the optimizers call it first; these two
# use it to resample their IC batch so every epoch scores against fresh
# configurations.

class DensityObjective:
    """Population-batched density fitness with per-epoch IC resampling."""

    task = "density"

    def __init__(self, radius: int, width: int, steps: int, batch_size: int,
                 rng: np.random.Generator, resample: bool = True):
        if width % 2 == 0:
            raise ValueError("density classification needs an odd lattice width")
        self.radius = radius
        self.width = width
        self.steps = steps
        self.batch_size = batch_size
        self.rng = rng
        self.resample = resample
        self.ics: Optional[np.ndarray] = None

    def begin_epoch(self, epoch: int) -> None:
        if self.resample or self.ics is None:
            self.ics = sample_flat_batch(self.width, self.batch_size, self.rng)

    def __call__(self, tables: np.ndarray) -> np.ndarray:
        if self.ics is None:
            self.begin_epoch(0)
        tables = np.ascontiguousarray(tables, dtype=np.uint8)
        pop = tables.shape[0]
        states = np.broadcast_to(self.ics, (pop, *self.ics.shape)).copy()
        finals = ca.evolve_final_many(tables, states, self.steps, self.radius)
        correct = np.all(finals == _density_targets(self.ics)[None], axis=2)
        return correct.mean(axis=1)


class ChaosObjective:
    """Population-batched chaos fitness with per-epoch IC resampling."""

    task = "chaos"

    def __init__(self, radius: int, width: int, steps: int, batch_size: int,
                 rng: np.random.Generator, resample: bool = True, chunk: int = 32):
        self.radius = radius
        self.width = width
        self.steps = steps
        self.batch_size = batch_size
        self.rng = rng
        self.resample = resample
        self.chunk = chunk  # rules per kernel call, caps history memory
        self.ics: Optional[np.ndarray] = None

    def begin_epoch(self, epoch: int) -> None:
        if self.resample or self.ics is None:
            self.ics = sample_flat_batch(self.width, self.batch_size, self.rng)

    def __call__(self, tables: np.ndarray) -> np.ndarray:
        if self.ics is None:
            self.begin_epoch(0)
        tables = np.ascontiguousarray(tables, dtype=np.uint8)
        scores = np.empty(tables.shape[0])
        for lo in range(0, tables.shape[0], self.chunk):
            part = tables[lo : lo + self.chunk]
            states = np.broadcast_to(self.ics, (part.shape[0], *self.ics.shape)).copy()
            histories = ca.evolve_history_many(part, states, self.steps, self.radius)
            for s in range(part.shape[0]):
                scores[lo + s] = np.mean([_nc_pt_rows(h) for h in histories[s]])
        return scores


def make_objective(task: str, radius: int, width: int, steps: int, batch_size: int,
                   rng: np.random.Generator):
    if task == "density":
        return DensityObjective(radius, width, steps, batch_size, rng)
    if task == "chaos":
        return ChaosObjective(radius, width, steps, batch_size, rng)
    raise ValueError(f"unknown task: {task}")
