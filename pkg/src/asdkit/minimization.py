"""Device minimization with machine-checkable witnesses.

A device is minimal when no state can be merged (the meet of its partition
family is the identity) and no partition is redundant (the family is an
antichain under refinement).  Minimization merges states that no read ever
separates, then discards partitions strictly coarser than another; both
directions of the equivalence are returned as explicit witnesses.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

from .devices import Device
from .partitions import GroundSet, Partition
from .witnesses import Reduction, verify_reduction


@dataclass(frozen=True)
class MinimizationResult:
    device: Device
    to_min: Reduction    # original -> minimized
    from_min: Reduction  # minimized -> original


def is_state_minimal(dev: Device) -> bool:
    """No two states agree under every partition."""
    return dev.meet_of_all().is_identity


def is_partition_minimal(dev: Device) -> bool:
    """No partition strictly refines another in the family."""
    return not _redundant_indices(dev.partitions)


def _redundant_indices(parts: tuple[Partition, ...]) -> set[int]:
    """Indices of partitions strictly coarser than some other family member.

    A strict coarsening must have strictly fewer blocks (the family is
    deduplicated), so only pairs with differing block counts are compared.
    """
    order = sorted(range(len(parts)), key=lambda i: -parts[i].num_blocks)
    out: set[int] = set()
    for a, i in enumerate(order):
        for j in order[:a]:
            if parts[j].num_blocks > parts[i].num_blocks and parts[j].refines(parts[i]):
                out.add(i)
                break
    return out


def minimize(dev: Device) -> MinimizationResult:
    """Merge indistinguishable states, drop redundant reads, return witnesses."""
    meet = dev.meet_of_all()
    reps = [block[0] for block in meet.blocks]  # least state index per merged class
    ground = GroundSet(dev.states.elements[i] for i in reps)

    # each original partition restricted to the representatives
    reduced = [Partition.from_raw(ground, (p.labels[i] for i in reps)) for p in dev.partitions]

    drop = _redundant_indices(tuple(reduced))
    kept = [i for i in range(len(reduced)) if i not in drop]
    mindev = Device(ground, [reduced[i] for i in kept])

    to_alpha = []
    for r in reduced:
        choice = next(k for k, q in enumerate(mindev.partitions) if q.refines(r))
        to_alpha.append(choice)
    to_min = Reduction(tuple(meet.labels), tuple(to_alpha))

    from_alpha = []
    for q in mindev.partitions:
        choice = next(i for i, r in enumerate(reduced) if r == q)
        from_alpha.append(choice)
    from_min = Reduction(tuple(reps), tuple(from_alpha))

    assert verify_reduction(dev, mindev, to_min)
    assert verify_reduction(mindev, dev, from_min)
    return MinimizationResult(mindev, to_min, from_min)


@functools.lru_cache(maxsize=512)
def minimize_cached(dev: Device) -> MinimizationResult:
    return minimize(dev)
