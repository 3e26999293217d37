"""1-d binary cellular automata: rule tables, lattice stepping, spacetime histories.

A rule is a truth table over radius-r neighborhoods (2r+1 cells); the lattice
is a ring of N cells (periodic boundary). Table entry p is the output for the
neighborhood whose cells, read left to right, spell p in binary with the
leftmost cell as the most significant bit, so the table bits read as an
integer give the Wolfram rule number.

The public ``step``/``evolve`` functions are plain vectorized numpy. The
``evolve_final_many``/``evolve_history_many`` kernels evolve a whole
population of rules against a whole batch of initial configurations in one
numba-compiled pass; they are what the search objectives call in their inner
loop. A deliberately naive cell-by-cell implementation lives in the test tree
as the correctness oracle for both paths.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numba
import numpy as np

MAX_RADIUS = 7  # 2^15-entry table; covers the r in {1, 3} used here with headroom

_RULE_STRING_RE = re.compile(r"^r([0-9]+):([0-9a-fA-F]+)$")


def table_size(radius: int) -> int:
    """Number of entries in a radius-r rule table, 2^(2r+1)."""
    return 1 << (2 * radius + 1)


@dataclass(frozen=True, eq=False)
class RuleTable:
    """Truth table of a 1-d binary CA rule.

    ``bits[p]`` is the output cell for neighborhood pattern p (leftmost
    neighbor = most significant bit of p). Instances are immutable; the bit
    array is marked read-only so tables can be shared freely across threads.
    """

    radius: int
    bits: np.ndarray

    def __post_init__(self):
        if not 1 <= self.radius <= MAX_RADIUS:
            raise ValueError(f"radius must be in [1, {MAX_RADIUS}], got {self.radius}")
        bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or bits.size != table_size(self.radius):
            raise ValueError(
                f"radius-{self.radius} table needs {table_size(self.radius)} bits, "
                f"got shape {np.shape(self.bits)}"
            )
        if bits.max(initial=0) > 1:
            raise ValueError("rule table entries must be 0 or 1")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def size(self) -> int:
        return self.bits.size

    @property
    def number(self) -> int:
        """Wolfram rule number, sum of bits[p] * 2^p."""
        packed = np.packbits(self.bits, bitorder="little").tobytes()
        return int.from_bytes(packed, "little")

    @classmethod
    def from_number(cls, number: int, radius: int) -> "RuleTable":
        """Decode a Wolfram rule number into its table."""
        size = table_size(radius)
        if number < 0 or number >= (1 << size):
            raise ValueError(f"rule number out of range for radius {radius}: {number}")
        raw = np.frombuffer(number.to_bytes((size + 7) // 8, "little"), dtype=np.uint8)
        bits = np.unpackbits(raw, count=size, bitorder="little")
        return cls(radius, bits)

    def to_string(self) -> str:
        """Serialize as ``r<radius>:<hex>`` with a fixed digit count (rule 250 is ``r1:fa``)."""
        digits = self.size // 4
        return f"r{self.radius}:{self.number:0{digits}x}"

    @classmethod
    def from_string(cls, text: str) -> "RuleTable":
        m = _RULE_STRING_RE.match(text.strip())
        if m is None:
            raise ValueError(f"malformed rule string: {text!r} (expected 'r<radius>:<hex>')")
        radius = int(m.group(1))
        if not 1 <= radius <= MAX_RADIUS:
            raise ValueError(f"radius must be in [1, {MAX_RADIUS}], got {radius}")
        digits = table_size(radius) // 4
        if len(m.group(2)) != digits:
            raise ValueError(
                f"radius-{radius} rule string needs exactly {digits} hex digits, "
                f"got {len(m.group(2))}"
            )
        return cls.from_number(int(m.group(2), 16), radius)

    @property
    def fixes_all_zeros(self) -> bool:
        """True when the all-zero lattice is a fixed point (bits[0] == 0)."""
        return self.bits[0] == 0

    @property
    def fixes_all_ones(self) -> bool:
        """True when the all-one lattice is a fixed point (top pattern maps to 1)."""
        return self.bits[-1] == 1

    def __eq__(self, other):
        if not isinstance(other, RuleTable):
            return NotImplemented
        return self.radius == other.radius and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.radius, self.bits.tobytes()))

    def __repr__(self):
        return f"RuleTable({self.to_string()!r})"


def identity_rule(radius: int) -> RuleTable:
    """Rule whose output is always the center cell of the neighborhood."""
    patterns = np.arange(table_size(radius))
    return RuleTable(radius, ((patterns >> radius) & 1).astype(np.uint8))


# --- configurations -------------------------------------------------------

def as_config(cells) -> np.ndarray:
    """Normalize a cell sequence to a 1-d uint8 0/1 array."""
    arr = np.ascontiguousarray(cells, dtype=np.uint8)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("configuration must be a nonempty 1-d cell vector")
    if arr.max(initial=0) > 1:
        raise ValueError("cells must be 0 or 1")
    return arr


def all_zeros(n: int) -> np.ndarray:
    return np.zeros(_checked_width(n), dtype=np.uint8)


def all_ones(n: int) -> np.ndarray:
    return np.ones(_checked_width(n), dtype=np.uint8)


def single_one(n: int, at: Optional[int] = None) -> np.ndarray:
    """Lattice with a single 1.

    Placed at the center cell by default (renders as a symmetric wedge); pass
    ``at=0`` for the leftmost-cell variant.
    """
    cells = all_zeros(n)
    pos = n // 2 if at is None else at
    if not 0 <= pos < n:
        raise ValueError(f"position {pos} outside lattice of width {n}")
    cells[pos] = 1
    return cells


def density(cells) -> float:
    """Fraction of 1 cells."""
    arr = as_config(cells)
    return float(arr.sum()) / arr.size


def uniform_state(cells) -> Optional[int]:
    """1 if all cells are 1, 0 if all are 0, None otherwise."""
    arr = as_config(cells)
    lo = int(arr.min())
    if lo == int(arr.max()):
        return lo
    return None


def _checked_width(n: int) -> int:
    if n < 1:
        raise ValueError(f"lattice width must be positive, got {n}")
    return int(n)


# --- stepping -------------------------------------------------------------

@lru_cache(maxsize=64)
def _window_index(n: int, radius: int) -> np.ndarray:
    """(n, 2r+1) wrapped cell indices of each neighborhood."""
    offsets = np.arange(-radius, radius + 1)
    idx = (np.arange(n)[:, None] + offsets[None, :]) % n
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=MAX_RADIUS + 1)
def _pattern_weights(radius: int) -> np.ndarray:
    w = 1 << np.arange(2 * radius, -1, -1, dtype=np.int64)
    w.setflags(write=False)
    return w.astype(np.int32)


def step_rows(rows: np.ndarray, rule: RuleTable) -> np.ndarray:
    """Advance a (B, N) stack of configurations one synchronous update."""
    rows = np.ascontiguousarray(rows, dtype=np.uint8)
    if rows.ndim != 2:
        raise ValueError("rows must be a (batch, width) array")
    n = rows.shape[1]
    if n < 2 * rule.radius + 1:
        raise ValueError(
            f"lattice of width {n} narrower than radius-{rule.radius} neighborhood"
        )
    neigh = rows[:, _window_index(n, rule.radius)]
    patterns = neigh.astype(np.int32) @ _pattern_weights(rule.radius)
    return rule.bits[patterns]


def step(cells, rule: RuleTable) -> np.ndarray:
    """Advance one configuration one synchronous update on the ring."""
    return step_rows(as_config(cells)[None, :], rule)[0]


@dataclass(frozen=True)
class SpacetimeHistory:
    """Full evolution record: rows[t] is the configuration after t steps."""

    rows: np.ndarray  # (T+1, N) uint8
    rule: RuleTable

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.uint8)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ValueError("history must be a (T+1, N) array with at least one row")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n_steps(self) -> int:
        return self.rows.shape[0] - 1

    @property
    def width(self) -> int:
        return self.rows.shape[1]


def evolve(ic, rule: RuleTable, steps: int) -> SpacetimeHistory:
    """Evolve an initial configuration for ``steps`` updates, keeping every row.

    Once the lattice stops changing (a fixed point, which includes any uniform
    row the rule leaves in place) the remaining rows are filled by copy; the
    output is identical to stepping all the way.
    """
    if steps < 0:
        raise ValueError(f"step count must be nonnegative, got {steps}")
    ic = as_config(ic)
    rows = np.empty((steps + 1, ic.size), dtype=np.uint8)
    rows[0] = ic
    for t in range(1, steps + 1):
        rows[t] = step_rows(rows[t - 1 : t], rule)[0]
        if np.array_equal(rows[t], rows[t - 1]):
            rows[t + 1 :] = rows[t]
            break
    return SpacetimeHistory(rows, rule)


# --- population-scale kernels ----------------------------------------------
#
# One compiled pass over (rule, configuration) pairs. Each lattice row evolves
# independently and halts as soon as it reaches a fixed point, which the
# search objectives rely on for throughput.

@numba.njit(cache=True)
def _final_kernel(tables, states, out, steps, radius):  # pragma: no cover - compiled
    n_rules, batch, n = states.shape
    width = 2 * radius + 1
    mask = (1 << width) - 1
    for s in range(n_rules):
        bits = tables[s]
        for b in range(batch):
            cur = states[s, b].copy()
            nxt = np.empty(n, np.uint8)
            for _ in range(steps):
                pattern = 0
                for k in range(-radius, radius + 1):
                    pattern = (pattern << 1) | cur[k % n]
                changed = False
                for i in range(n):
                    v = bits[pattern]
                    nxt[i] = v
                    if v != cur[i]:
                        changed = True
                    pattern = ((pattern << 1) | cur[(i + radius + 1) % n]) & mask
                cur, nxt = nxt, cur
                if not changed:
                    break
            out[s, b] = cur


@numba.njit(cache=True)
def _history_kernel(tables, states, out, steps, radius):  # pragma: no cover - compiled
    n_rules, batch, n = states.shape
    width = 2 * radius + 1
    mask = (1 << width) - 1
    for s in range(n_rules):
        bits = tables[s]
        for b in range(batch):
            out[s, b, 0] = states[s, b]
            for t in range(1, steps + 1):
                prev = out[s, b, t - 1]
                row = out[s, b, t]
                pattern = 0
                for k in range(-radius, radius + 1):
                    pattern = (pattern << 1) | prev[k % n]
                changed = False
                for i in range(n):
                    v = bits[pattern]
                    row[i] = v
                    if v != prev[i]:
                        changed = True
                    pattern = ((pattern << 1) | prev[(i + radius + 1) % n]) & mask
                if not changed:
                    for rest in range(t + 1, steps + 1):
                        out[s, b, rest] = row
                    break


def _normalize_many(tables, states, radius):
    tables = np.ascontiguousarray(tables, dtype=np.uint8)
    states = np.ascontiguousarray(states, dtype=np.uint8)
    if tables.ndim != 2 or states.ndim != 3 or tables.shape[0] != states.shape[0]:
        raise ValueError("expected tables (S, 2^(2r+1)) and states (S, B, N)")
    if tables.shape[1] != table_size(radius):
        raise ValueError(
            f"tables have {tables.shape[1]} entries, radius {radius} needs {table_size(radius)}"
        )
    if states.shape[2] < 2 * radius + 1:
        raise ValueError("lattice narrower than neighborhood")
    return tables, states


def evolve_final_many(tables, states, steps: int, radius: int) -> np.ndarray:
    """Final configurations after evolving states[s, b] under tables[s].

    ``tables`` is (S, 2^(2r+1)); ``states`` is (S, B, N). Returns (S, B, N).
    """
    if steps < 0:
        raise ValueError(f"step count must be nonnegative, got {steps}")
    tables, states = _normalize_many(tables, states, radius)
    out = np.empty_like(states)
    _final_kernel(tables, states, out, steps, radius)
    return out


def evolve_history_many(tables, states, steps: int, radius: int) -> np.ndarray:
    """Full histories: returns (S, B, T+1, N) with [s, b, 0] == states[s, b]."""
    if steps < 0:
        raise ValueError(f"step count must be nonnegative, got {steps}")
    tables, states = _normalize_many(tables, states, radius)
    n_rules, batch, n = states.shape
    out = np.empty((n_rules, batch, steps + 1, n), dtype=np.uint8)
    _history_kernel(tables, states, out, steps, radius)
    return out


def evolve_final_rows(rows, rule: RuleTable, steps: int) -> np.ndarray:
    """Final configurations of a (B, N) batch under a single rule."""
    rows = np.ascontiguousarray(rows, dtype=np.uint8)
    if rows.ndim != 2:
        raise ValueError("rows must be a (batch, width) array")
    return evolve_final_many(rule.bits[None, :], rows[None, :, :], steps, rule.radius)[0]


def rules_to_tables(rules: Sequence[RuleTable]) -> np.ndarray:
    """Stack rule tables of a common radius into an (S, 2^(2r+1)) array."""
    if not rules:
        raise ValueError("need at least one rule")
    radius = rules[0].radius
    if any(r.radius != radius for r in rules):
        raise ValueError("rules must share one radius")
    return np.stack([r.bits for r in rules])
