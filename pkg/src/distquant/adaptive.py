"""Rate adaptation: reduce a trained codebook to a smaller bit budget.

Reduction clusters the existing codewords, weighted by their calibration
cluster sizes, into the new budget. Because the downstream objective
depends on codewords only through their projections, the grouping is
computed exactly by 1-D weighted K-Means on the projected values.

Everything here is deterministic, so a sensor and the fusion center can
re-derive identical reduced codebooks from the stored full-rate codebook
without exchanging any codebook bits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .clustering import kmeans1d_weighted
from .core import DistributedQuantizer, SensorCodebook

logger = logging.getLogger(__name__)

MAX_BITS = 30


@dataclass(frozen=True)
class RateSchedule:
    """Time-indexed per-sensor bit budgets: ((step, (bits, ...)), ...)."""

    events: tuple

    def __post_init__(self):
        events = tuple((int(t), tuple(int(b) for b in bits)) for t, bits in self.events)
        if not events:
            raise ValueError("schedule must contain at least one event")
        if events[0][0] != 0:
            raise ValueError("first schedule event must be at step 0")
        steps = [t for t, _ in events]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError("event steps must be strictly increasing")
        m = len(events[0][1])
        for t, bits in events:
            if len(bits) != m:
                raise ValueError(f"event at step {t} has {len(bits)} bit entries, expected {m}")
            if any(b < 1 for b in bits):
                raise ValueError(f"event at step {t} has bits < 1")
        object.__setattr__(self, "events", events)

    @property
    def m(self) -> int:
        return len(self.events[0][1])


def reduce_codebook(cb: SensorCodebook, new_bits: int, beta_slice) -> SensorCodebook:
    """Shrink a codebook to at most 2^new_bits codewords.

    If the budget already covers the codebook, the input is returned
    unchanged. Otherwise existing codewords are grouped by exact 1-D
    weighted K-Means on their projected values; each merged codeword,
    weight and projection is the weight-weighted aggregate of its group.
    """
    new_bits = int(new_bits)
    if new_bits < 1:
        raise ValueError(f"new_bits must be >= 1, got {new_bits}")
    if new_bits > MAX_BITS:
        raise ValueError(f"new_bits {new_bits} exceeds the supported maximum {MAX_BITS}")
    k_new = 2 ** new_bits
    if k_new >= cb.k_eff:
        return cb

    res = kmeans1d_weighted(cb.projected, cb.weights.astype(float), k_new)
    k = res.k
    w = np.zeros(k, dtype=np.int64)
    np.add.at(w, res.assignment, cb.weights)
    codewords = np.zeros((k, cb.dim))
    np.add.at(codewords, res.assignment, cb.codewords * cb.weights[:, None])
    codewords /= w[:, None]
    h = np.zeros(k)
    np.add.at(h, res.assignment, cb.projected * cb.weights)
    h /= w

    bs = np.asarray(beta_slice, dtype=float).ravel()
    tol = 1e-9 * np.maximum(1.0, np.abs(h))
    if np.any(np.abs(codewords @ bs - h) > tol):
        raise AssertionError("merged projections diverge from merged codewords")
    return SensorCodebook(sensor_id=cb.sensor_id, bits=new_bits,
                          codewords=codewords, projected=h, weights=w)


def adapt(q: DistributedQuantizer, full_rate: DistributedQuantizer,
          bits) -> DistributedQuantizer:
    """Re-derive every sensor codebook for a new bit budget.

    Reduction always starts from the stored full-rate codebooks, never
    from intermediate reductions, so merge error does not compound
    across a schedule. Budgets above a sensor's trained maximum are
    clamped to it with a warning.
    """
    bits = [int(b) for b in bits]
    if len(bits) != full_rate.m:
        raise ValueError(f"expected {full_rate.m} bit budgets, got {len(bits)}")
    if any(b < 1 for b in bits):
        raise ValueError("bit budgets must be >= 1")
    if q.partition != full_rate.partition or q.model.dim != full_rate.model.dim:
        raise ValueError("current and full-rate quantizers are inconsistent")

    clamped = [min(b, cb.bits) for b, cb in zip(bits, full_rate.codebooks)]
    for i, (b, c) in enumerate(zip(bits, clamped)):
        if c != b:
            logger.warning("sensor %d: requested %d bits above trained maximum, clamped to %d",
                           i, b, c)
    if clamped == [cb.bits for cb in full_rate.codebooks]:
        return full_rate
    cbs = tuple(
        reduce_codebook(cb, b, full_rate.model.beta_slice(full_rate.partition, i))
        for i, (cb, b) in enumerate(zip(full_rate.codebooks, clamped)))
    return DistributedQuantizer(model=full_rate.model, partition=full_rate.partition,
                                codebooks=cbs)
