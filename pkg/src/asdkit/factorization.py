"""Direct-product structure of devices built from binary parts.

binary_product_reduce decides reducibility between two products of
non-perfect state-minimal binary devices by searching over index partitions,
so one product-sized question collapses to a handful of factor-sized ones.
extract_index_partition recovers the same grouping from an explicit witness
by watching which left coordinate moves as a right coordinate varies.
factor_binary finds the binary factors of a device when they exist, with an
optional uniqueness audit, and factor_perfect splits a perfect device into
prime perfect parts.
"""

from __future__ import annotations

import functools
import itertools
import math
import random
from collections import Counter

from . import config
from .devices import Device, classify, make_perfect, product_of
from .errors import (
    HypothesisViolation,
    LimitExceeded,
    NonUniqueTau,
    PreconditionMismatch,
)
from .minimization import is_state_minimal, minimize
from .partitions import GroundSet, Partition
from .reduction import decide_equivalence, find_reduction
from .witnesses import Reduction, verify_reduction

# An index partition groups the right-hand factors: entry i holds the
# 1-based positions of the Es that together simulate D_i.
IndexPartition = tuple[frozenset[int], ...]


def _check_factors(devs: list[Device], side: str) -> None:
    for k, d in enumerate(devs):
        cls = classify(d)
        if not cls.binary:
            raise HypothesisViolation(f"{side}[{k}] is not binary")
        if cls.perfect:
            raise HypothesisViolation(f"{side}[{k}] is perfect")
        if not is_state_minimal(d):
            raise HypothesisViolation(f"{side}[{k}] is not state-minimal")


def _rgs_strings(n: int, m: int):
    """Restricted growth strings of length n using exactly m values, in
    lexicographic order."""
    a = [0] * n

    def rec(i: int, mx: int):
        if i == n:
            if mx + 1 == m:
                yield tuple(a)
            return
        for v in range(min(mx + 1, m - 1) + 1):
            # remaining positions must still be able to introduce m values
            if max(mx, v) + 1 + (n - i - 1) >= m:
                a[i] = v
                yield from rec(i + 1, max(mx, v))

    if 1 <= m <= n:
        yield from rec(0, -1)


def binary_product_reduce(
    ds, es, *, budget: int = config.SEARCH_NODE_BUDGET
) -> IndexPartition | None:
    """Decide ×Ds <= ×Es by grouping the right factors, given that every
    listed device is binary, non-perfect and state-minimal and the state-count
    products agree.

    The reduction exists iff the right indices split into groups J_1..J_m
    with D_i <= ×_{j in J_i} E_j for each i.  Set partitions of the indices
    are enumerated as restricted growth strings in lexicographic order, each
    matched against the left factors in every order (identity matching
    first); a grouping survives only if the group state counts multiply to
    the matching left factor's count, which is the sigma-additivity prune in
    exact integer form.  Surviving groups are settled by the generic solver
    and every sub-witness is re-verified.  The first valid grouping is
    returned; None means no grouping works, hence no reduction at all.
    """
    ds, es = list(ds), list(es)
    if not ds or not es:
        raise HypothesisViolation("factor lists must be nonempty")
    _check_factors(ds, "Ds")
    _check_factors(es, "Es")
    sd = [d.num_states for d in ds]
    se = [e.num_states for e in es]
    if math.prod(sd) != math.prod(se):
        raise HypothesisViolation("state-count products differ")
    m, n = len(ds), len(es)
    if m > n:
        return None

    prods: dict[tuple[int, ...], Device] = {}
    settled: dict[tuple[int, tuple[int, ...]], bool] = {}

    def part_ok(i: int, grp: tuple[int, ...]) -> bool:
        key = (i, grp)
        if key not in settled:
            if grp not in prods:
                prods[grp] = product_of(es[j] for j in grp)
            red = find_reduction(ds[i], prods[grp], budget=budget, structural=False)
            if red is not None and not verify_reduction(ds[i], prods[grp], red):
                raise RuntimeError("solver returned an invalid sub-witness")
            settled[key] = red is not None
        return settled[key]

    for rgs in _rgs_strings(n, m):
        blocks = [tuple(j for j in range(n) if rgs[j] == v) for v in range(m)]
        for perm in itertools.permutations(range(m)):
            groups = [()] * m
            for b, grp in enumerate(blocks):
                groups[perm[b]] = grp
            if any(
                math.prod(se[j] for j in grp) != sd[i]
                for i, grp in enumerate(groups)
            ):
                continue
            if all(part_ok(i, grp) for i, grp in enumerate(groups)):
                return tuple(frozenset(j + 1 for j in grp) for grp in groups)
    return None


def _mixed_radix(sizes: list[int]) -> list[int]:
    # place weights for left-associated products: last factor varies fastest
    w = [1] * len(sizes)
    for k in range(len(sizes) - 2, -1, -1):
        w[k] = w[k + 1] * sizes[k + 1]
    return w


def extract_index_partition(red: Reduction, ds, es) -> IndexPartition:
    """Recover the index partition from a verified witness for ×Ds <= ×Es.

    For each right coordinate j, fix the remaining coordinates, vary E_j, and
    pull the witness states back through phi: exactly one left coordinate
    must move, and which one must not depend on the fixed context.  Either
    failure raises NonUniqueTau, as does a witness that is not a bijection
    or does not verify.
    """
    ds, es = list(ds), list(es)
    if not ds or not es:
        raise HypothesisViolation("factor lists must be nonempty")
    _check_factors(ds, "Ds")
    _check_factors(es, "Es")
    sd = [d.num_states for d in ds]
    se = [e.num_states for e in es]
    if math.prod(sd) != math.prod(se):
        raise HypothesisViolation("state-count products differ")
    prod_d = product_of(ds)
    prod_e = product_of(es)
    if not verify_reduction(prod_d, prod_e, red):
        raise NonUniqueTau("witness does not verify")
    nd = prod_d.num_states
    if len(set(red.phi)) != nd:
        raise NonUniqueTau("phi is not a bijection")
    inv = [0] * nd
    for x, t in enumerate(red.phi):
        inv[t] = x
    m, n = len(ds), len(es)
    wd = _mixed_radix(sd)
    we = _mixed_radix(se)

    def tau_at(j: int, ctx: list[int]) -> int:
        base = sum(ctx[k] * we[k] for k in range(n) if k != j)
        moved = set()
        seen = []
        for v in range(se[j]):
            x = inv[base + v * we[j]]
            coords = tuple((x // wd[i]) % sd[i] for i in range(m))
            seen.append(coords)
        for i in range(m):
            if len({c[i] for c in seen}) > 1:
                moved.add(i)
        if len(moved) != 1:
            raise NonUniqueTau(
                f"varying right coordinate {j + 1} moves {len(moved)} left coordinates"
            )
        return moved.pop()

    rng = random.Random(0x5EED)
    tau = []
    for j in range(n):
        ctx = [rng.randrange(se[k]) for k in range(n)]
        t0 = tau_at(j, [0] * n)
        if t0 != tau_at(j, ctx):
            raise NonUniqueTau(f"tau({j + 1}) depends on the fixed context")
        tau.append(t0)
    out = tuple(
        frozenset(j + 1 for j in range(n) if tau[j] == i) for i in range(m)
    )
    if any(not grp for grp in out):
        raise NonUniqueTau("some left factor is fed by no right coordinate")
    return out


# ----------------------------------------------------------------------
# binary factorization


def _device_key(dev: Device):
    return (dev.num_states, dev.num_partitions, tuple(p.labels for p in dev.partitions))


@functools.lru_cache(maxsize=None)
def _binary_candidates(s: int) -> tuple[Device, ...]:
    """State-minimal binary devices with s states, one per equivalence class.

    Distinct 2-block partitions are pairwise incomparable, so every subset of
    them is an antichain; subsets are deduplicated by the least relabeling
    over all state permutations.  Used by the audit cross-check, so s stays
    small and full enumeration is affordable.
    """
    ground = GroundSet(str(i) for i in range(s))
    # one partition per subset containing state 0 (its complement names the
    # same partition)
    two_blocks = []
    for mask in range(1, 2 ** (s - 1)):
        bits = [0] + [(mask >> (i - 1)) & 1 for i in range(1, s)]
        if min(bits) == max(bits):
            continue
        two_blocks.append(Partition.from_raw(ground, bits))
    out = []
    seen = set()
    perms = list(itertools.permutations(range(s)))
    for r in range(1, len(two_blocks) + 1):
        for subset in itertools.combinations(two_blocks, r):
            meet = functools.reduce(Partition.meet, subset)
            if not meet.is_identity:
                continue
            key = min(
                tuple(
                    sorted(
                        Partition.from_raw(ground, (p.labels[perm[i]] for i in range(s))).labels
                        for p in subset
                    )
                )
                for perm in perms
            )
            if key in seen:
                continue
            seen.add(key)
            out.append(Device(ground, subset))
    return tuple(out)


def _restrict_to_first_join_block(dm: Device) -> tuple[int, Device] | None:
    """Split off the perfect part: returns (number of C_2 factors, the device
    restricted to one block of the family join), or None when the join shape
    already rules out a binary product."""
    v = functools.reduce(Partition.join, dm.partitions)
    pb = v.num_blocks
    ell = pb.bit_length() - 1
    if 2**ell != pb:
        return None
    if len(set(v.block_sizes())) > 1:
        return None
    keep = [x for x in range(dm.num_states) if v.labels[x] == 0]
    ground = GroundSet(dm.states.elements[x] for x in keep)
    parts = {Partition.from_raw(ground, (p.labels[x] for x in keep)) for p in dm.partitions}
    return ell, Device(ground, parts)


def _extract_candidate_factors(dm: Device) -> list[Device] | None:
    """Propose binary factors for a state-minimal device.

    In a product of non-perfect binaries the join of two reads is a 2-block
    partition exactly when they agree in one coordinate, and that join is the
    lift of the shared factor read.  Collecting all such joins therefore
    recovers every lifted read; two lifts belong to the same factor iff no
    single read refines both.  Each group's meet is the kernel of the
    projection onto that factor, and quotienting by it rebuilds the factor.
    The proposal is only a candidate: the caller certifies equivalence.
    """
    stripped = _restrict_to_first_join_block(dm)
    if stripped is None:
        return None
    ell, core = stripped
    factors: list[Device] = []
    if core.num_states > 1:
        cls = classify(core)
        if cls.binary and not cls.perfect:
            factors = [core]
        else:
            reads = core.partitions
            lifts: dict[tuple[int, ...], Partition] = {}
            for a, b in itertools.combinations(range(len(reads)), 2):
                j = reads[a].join(reads[b])
                if j.num_blocks == 2:
                    lifts.setdefault(j.labels, j)
            if not lifts:
                return None
            lift_list = [lifts[k] for k in sorted(lifts)]
            refined = [
                [r.refines(theta) for theta in lift_list] for r in reads
            ]
            parent = list(range(len(lift_list)))

            def find(x: int) -> int:
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for a, b in itertools.combinations(range(len(lift_list)), 2):
                if not any(row[a] and row[b] for row in refined):
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
            groups: dict[int, list[Partition]] = {}
            for idx in range(len(lift_list)):
                groups.setdefault(find(idx), []).append(lift_list[idx])
            for root in sorted(groups):
                mu = functools.reduce(Partition.meet, groups[root])
                k = mu.num_blocks
                rep = [0] * k
                seen = set()
                for x, lab in enumerate(mu.labels):
                    if lab not in seen:
                        seen.add(lab)
                        rep[lab] = x
                fg = GroundSet(f"b{t}" for t in range(k))
                fparts = [
                    Partition.from_raw(fg, (theta.labels[rep[t]] for t in range(k)))
                    for theta in groups[root]
                ]
                factors.append(Device(fg, fparts))
            factors.sort(key=_device_key)
    if math.prod(f.num_states for f in factors) * 2**ell != dm.num_states:
        return None
    return [make_perfect(2) for _ in range(ell)] + factors


def _splittings(n: int, cap: int):
    """Non-decreasing tuples of integers >= 2 and <= cap whose product is n."""

    def rec(rem: int, lo: int):
        if rem == 1:
            yield ()
            return
        for f in range(lo, min(rem, cap) + 1):
            if rem % f == 0:
                for rest in rec(rem // f, f):
                    yield (f,) + rest

    yield from rec(n, 2)


def _same_factor_multiset(f1: list[Device], f2: list[Device], budget: int) -> bool:
    if len(f1) != len(f2):
        return False
    unused = list(f2)
    for a in f1:
        for k, b in enumerate(unused):
            if a.num_states == b.num_states and decide_equivalence(a, b, budget=budget):
                del unused[k]
                break
        else:
            return False
    return True


def _audit_uniqueness(dm: Device, primary: list[Device] | None, budget: int) -> None:
    """Cross-check uniqueness against the exhaustive candidate enumeration.

    Re-runs the search the direct way: every multiplicative splitting of the
    state count with parts up to the configured cap, every candidate combo
    per splitting, certified by the solver.  All factorizations found this
    way must match the primary one (and each other) up to factor order;
    splittings with a part above the cap are skipped, so the audit is only as
    wide as the enumeration it can afford.
    """
    found = [] if primary is None else [primary]
    for split in _splittings(dm.num_states, config.MAX_FACTOR_STATES):
        sized = sorted(Counter(split).items())
        pools = [
            itertools.combinations_with_replacement(_binary_candidates(s), cnt)
            for s, cnt in sized
        ]
        for chosen in itertools.product(*pools):
            combo = [f for grp in chosen for f in grp]
            if math.prod(f.num_partitions for f in combo) != dm.num_partitions:
                continue
            if decide_equivalence(dm, product_of(combo), budget=budget):
                found.append(combo)
    for f1, f2 in itertools.combinations(found, 2):
        if not _same_factor_multiset(f1, f2, budget):
            raise RuntimeError("uniqueness audit found inequivalent factorizations")


def factor_binary(
    dev: Device, *, audit: bool = False, budget: int = config.SEARCH_NODE_BUDGET
) -> list[Device] | None:
    """Factor a device into binary devices, or report that none exist.

    The minimized device is probed for product structure (perfect part from
    the family join, non-perfect factors from 2-block joins of read pairs)
    and the proposal is certified by decide_equivalence, so a returned list
    is always a genuine factorization and None is trustworthy whenever the
    probe is exhaustive, which it is for true binary products.  With audit
    set, an independent enumeration over small candidate factors re-finds
    every factorization and a uniqueness violation raises RuntimeError.
    A trivial one-state device factors as the empty product.
    """
    dm = minimize(dev).device
    n = dm.num_states
    if n > 64:
        raise LimitExceeded(f"minimized device has {n} states (cap 64)")
    if n == 1:
        return []
    cand = _extract_candidate_factors(dm)
    result = None
    if cand is not None and decide_equivalence(dm, product_of(cand), budget=budget):
        result = cand
    if audit:
        _audit_uniqueness(dm, result, budget)
    return result


def factor_perfect(m: int) -> list[tuple[int, int]]:
    """Prime factorization of a perfect device's state count.

    Returns (prime, multiplicity) pairs in increasing prime order; for
    m <= 64 the claim C_m == ×C_p^a is certified by decide_equivalence.
    """
    if m < 2:
        raise PreconditionMismatch("m must be at least 2")
    out = []
    rest = m
    d = 2
    while d * d <= rest:
        if rest % d == 0:
            a = 0
            while rest % d == 0:
                rest //= d
                a += 1
            out.append((d, a))
        d += 1
    if rest > 1:
        out.append((rest, 1))
    if m <= 64:
        parts = [make_perfect(p) for p, a in out for _ in range(a)]
        if decide_equivalence(make_perfect(m), product_of(parts)) is None:
            raise RuntimeError("perfect factorization failed certification")
    return out
