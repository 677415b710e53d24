"""Decomposition of an orbit into a V0-free prefix and Z-cycles (returns to the disk |z| < nu)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INF = math.inf


@dataclass(frozen=True)
class Block:
    start: int
    end: float  # index or inf
    kind: str  # "prefix" or "zcycle"


@dataclass(frozen=True)
class ZCycleDecomposition:
    nu: float
    blocks: tuple
    expansions: tuple  # |Df^(N'-N)(z_N)| for each finite zcycle, in order
    truncated: bool  # the last block was cut at the horizon and declared infinite

    def finite_cycles(self):
        return [b for b in self.blocks if b.kind == "zcycle" and b.end != INF]


def zcycle_decompose(orbit, nu: float = 0.1, horizon: int | None = None) -> ZCycleDecomposition:
    """Blocks of the orbit z_0..z_H (H = horizon, default the whole array).

    Indices n with |z_n| < nu open a new zcycle; the stretch before the first
    such index is the prefix. The last block runs to infinity: beyond the
    horizon the orbit is not examined, which is flagged as ``truncated`` unless
    the orbit is known to avoid V0 from there on (the caller decides).
    """
    if nu <= 0:
        raise ValueError("nu must be positive")
    z = np.asarray(orbit, dtype=complex)
    if horizon is not None:
        if horizon < 1:
            raise ValueError("horizon must be at least 1")
        z = z[: horizon + 1]
    entries = np.nonzero(np.abs(z) < nu)[0]
    blocks = []
    expansions = []
    if len(entries) == 0:
        return ZCycleDecomposition(nu, (Block(0, INF, "prefix"),), (), True)
    if entries[0] > 0:
        blocks.append(Block(0, int(entries[0]), "prefix"))
    logs = np.log(np.abs(2.0 * z))
    for a, b in zip(entries[:-1], entries[1:]):
        blocks.append(Block(int(a), int(b), "zcycle"))
        expansions.append(float(np.exp(np.sum(logs[a:b]))))
    blocks.append(Block(int(entries[-1]), INF, "zcycle"))
    return ZCycleDecomposition(nu, tuple(blocks), tuple(expansions), True)


def reciprocal_sum(orbit: np.ndarray, start: int, stop: int, tail_factor: complex | None = None) -> float:
    """sum_{i=1}^{stop-start} 1/|Df^i(z_start)|, plus a geometric tail continuing with 1/|tail_factor|."""
    z = np.asarray(orbit[start:stop], dtype=complex)
    if len(z) == 0:
        return 0.0
    terms = 1.0 / np.cumprod(np.abs(2.0 * z))
    total = float(terms.sum())
    if tail_factor is not None:
        q = 1.0 / abs(tail_factor)
        total += float(terms[-1]) * q / (1.0 - q)
    return total
