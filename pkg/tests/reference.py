"""Deliberately naive CA implementations used as test oracles.

Everything here is plain Python over lists, cell by cell, with no shortcuts,
so the production engine can be checked against an independent path.
"""
from __future__ import annotations


def naive_decode(number: int, radius: int):
    size = 1 << (2 * radius + 1)
    return [(number >> p) & 1 for p in range(size)]


def naive_step(cells, table_bits, radius: int):
    n = len(cells)
    out = []
    for i in range(n):
        pattern = 0
        for k in range(-radius, radius + 1):
            pattern = (pattern << 1) | cells[(i + k) % n]
        out.append(table_bits[pattern])
    return out


def naive_evolve(cells, table_bits, radius: int, steps: int):
    rows = [list(cells)]
    for _ in range(steps):
        rows.append(naive_step(rows[-1], table_bits, radius))
    return rows


def naive_classify(cells, table_bits, radius: int, steps: int) -> bool:
    rows = naive_evolve(cells, table_bits, radius, steps)
    final = rows[-1]
    target = 1 if sum(cells) * 2 > len(cells) else 0
    return all(c == target for c in final)
