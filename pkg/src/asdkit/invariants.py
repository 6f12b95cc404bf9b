"""Invariants monotone under reducibility, and the search prescreen built on them.

capacity is the log of the largest block count any single read can produce;
sigma is the log of the state count after merging indistinguishable states;
the perfectness index is the least number of reads whose meet pins down the
state exactly (infinite when no number of reads suffices).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import config
from .devices import Device
from .errors import LimitExceeded
from .minimization import minimize_cached
from .partitions import Join, Meet, Var, eval_poly, poly_depth

INFINITE = math.inf


def capacity(dev: Device) -> float:
    """log2 of the largest number of blocks over the family."""
    return math.log2(max(p.num_blocks for p in dev.partitions))


def state_complexity(dev: Device) -> float:
    """log2 of the number of states that survive minimization."""
    return math.log2(dev.meet_of_all().num_blocks)


def perfectness_index(dev: Device) -> int | float:
    """Least k such that some k reads together separate every state pair.

    Level k of the closure holds exactly the meets of k-or-fewer partitions,
    since a meet of k partitions is a level-(k-1) meet refined by one more.
    Devices that are not state-minimal never reach the identity.
    """
    if any(p.is_identity for p in dev.partitions):
        return 1
    if not dev.meet_of_all().is_identity:
        return INFINITE
    seen = set(dev.partitions)
    frontier = list(dev.partitions)
    k = 1
    while frontier:
        k += 1
        fresh = []
        for m in frontier:
            for p in dev.partitions:
                mp = m.meet(p)
                if mp not in seen:
                    if mp.is_identity:
                        return k
                    seen.add(mp)
                    fresh.append(mp)
        frontier = fresh
    return INFINITE  # unreachable for state-minimal input


def prescreen(src: Device, dst: Device) -> str | None:
    """Cheap necessary conditions for src <= dst; returns a fail reason or None.

    Block counts are compared as integers, never as float logs.  The
    perfectness screen only separates devices of equal minimized state count,
    so it runs on the minimized pair, where the index is always finite.
    """
    if max(p.num_blocks for p in src.partitions) > max(p.num_blocks for p in dst.partitions):
        return "capacity"
    if src.meet_of_all().num_blocks > dst.meet_of_all().num_blocks:
        return "sigma"
    cap = config.PERFECTNESS_SCREEN_MAX_PARTITIONS
    if src.num_partitions <= cap and dst.num_partitions <= cap:
        sm = minimize_cached(src).device
        dm = minimize_cached(dst).device
        if sm.num_states == dm.num_states and perfectness_index(sm) < perfectness_index(dm):
            return "perfectness"
    return None


@dataclass(frozen=True)
class BoundReport:
    sigma: float
    index: int | float
    capacity: float
    holds: bool


def sigma_capacity_bound(dev: Device) -> BoundReport:
    """Check sigma <= index * capacity, exactly, via integer block counts."""
    idx = perfectness_index(dev)
    merged = dev.meet_of_all().num_blocks
    biggest = max(p.num_blocks for p in dev.partitions)
    holds = True if idx == INFINITE else merged <= biggest ** idx
    return BoundReport(math.log2(merged), idx, math.log2(biggest), holds)


def invariant_report(dev: Device) -> dict:
    """JSON-ready summary with integral logs emitted as ints."""

    def num(v: float):
        return int(v) if float(v).is_integer() else v

    idx = perfectness_index(dev)
    return {
        "capacity": num(capacity(dev)),
        "sigma": num(state_complexity(dev)),
        "perfectness_index": "inf" if idx == INFINITE else idx,
    }


# ----------------------------------------------------------------------
# pairwise polynomial signature


def _pair_counts(dev: Device) -> tuple[np.ndarray, np.ndarray]:
    """Block counts of meet and join for every ordered pair of reads.

    One-hot block matrices make the meet a single matrix product: entry
    (b, c) of the product counts states shared by block b and block c, so
    positive entries are the meet blocks and connected components of the
    induced block-overlap graph are the join blocks.
    """
    parts = dev.partitions
    q = len(parts)
    n = dev.num_states
    r = max(p.num_blocks for p in parts)
    lab = np.array([p.labels for p in parts], dtype=np.int64)
    nb = np.array([p.num_blocks for p in parts], dtype=np.int64)
    one = np.zeros((q, r, n), dtype=np.float32)
    one[np.arange(q)[:, None], lab, np.arange(n)[None, :]] = 1.0
    flat = one.reshape(q * r, n)
    meets = np.empty((q, q), dtype=np.int64)
    joins = np.empty((q, q), dtype=np.int64)
    weights = 1 << np.arange(r, dtype=np.int64)
    eye = np.eye(r, dtype=bool)
    closure_steps = max(1, math.ceil(math.log2(max(2, r))))
    chunk = max(1, (1 << 22) // max(1, q * r * r))
    for a0 in range(0, q, chunk):
        a1 = min(q, a0 + chunk)
        ca = a1 - a0
        g = one[a0:a1].reshape(ca * r, n) @ flat.T
        m = (g.reshape(ca, r, q, r) > 0).transpose(0, 2, 1, 3)  # (ca, q, r_a, r_b)
        meets[a0:a1] = m.sum(axis=(2, 3))
        mf = m.astype(np.float32)
        adj = (mf @ mf.swapaxes(2, 3)) > 0  # blocks of a sharing a block of b
        adj |= eye
        for _ in range(closure_steps):
            af = adj.astype(np.float32)
            adj = (af @ af) > 0
        packed = (adj.astype(np.int64) * weights).sum(axis=3)  # (ca, q, r)
        fake = np.arange(r)[None, :] >= nb[a0:a1, None]  # padding rows on the a axis
        packed = np.where(fake[:, None, :], np.int64(-1), packed)
        packed.sort(axis=2)
        uniq = (np.diff(packed, axis=2) != 0).sum(axis=2) + 1
        joins[a0:a1] = uniq - (nb[a0:a1, None] < r)
    return meets, joins


def _signature_polys(depth: int):
    """Structurally distinct 2-variable polynomials, shallow to deep."""
    levels: dict[int, list] = {1: [Var(1), Var(2)]}
    seen = set(levels[1])
    for d in range(2, depth + 1):
        pool = [p for dd in range(1, d) for p in levels[dd]]
        fresh = []
        for ia, a in enumerate(pool):
            for b in pool[ia + 1:]:
                if max(poly_depth(a), poly_depth(b)) != d - 1:
                    continue
                for ctor in (Meet, Join):
                    e = ctor(a, b)
                    if e not in seen:
                        seen.add(e)
                        fresh.append(e)
        levels[d] = fresh
    return [Var(1)] + [p for d in range(2, depth + 1) for p in levels[d]]


@functools.lru_cache(maxsize=16)
def poly_signature(dev: Device, depth: int = 2) -> tuple:
    """Multiset of per-pair block-count profiles; equal on equivalent minimal devices.

    At the default depth the profile of an ordered pair (pi, rho) is
    (|pi|, |pi meet rho|, |pi join rho|).  Deeper profiles append the block
    counts of every structurally new polynomial up to the requested depth.
    """
    if depth < 2 or depth > config.MAX_SIGNATURE_DEPTH:
        raise LimitExceeded(f"signature depth {depth} outside 2..{config.MAX_SIGNATURE_DEPTH}")
    parts = dev.partitions
    q = len(parts)
    if depth == 2:
        meets, joins = _pair_counts(dev)
        nb = [p.num_blocks for p in parts]
        return tuple(sorted(
            (nb[a], int(meets[a, b]), int(joins[a, b]))
            for a in range(q) for b in range(q)))
    polys = _signature_polys(depth)
    profiles = []
    for pa in parts:
        for pb in parts:
            args = (pa, pb)
            profiles.append(tuple(eval_poly(e, args).num_blocks for e in polys))
    return tuple(sorted(profiles))
