"""Reduction records: verification, composition, serialization."""

import random

import pytest

from asdkit.devices import make_linear
from asdkit.errors import DomainMismatch
from asdkit.minimization import minimize
from asdkit.reduction import find_reduction
from asdkit.witnesses import (
    Reduction,
    compose,
    identity_reduction,
    reduction_from_dict,
    reduction_to_dict,
    verify_reduction,
)

from corpus import random_device, reducible_pair


def test_shape_checks():
    l2 = make_linear(2)
    with pytest.raises(DomainMismatch):
        verify_reduction(l2, l2, Reduction((0, 1), (0, 1, 2)))
    with pytest.raises(DomainMismatch):
        verify_reduction(l2, l2, Reduction((0, 1, 2, 9), (0, 1, 2)))


def test_compose_chains_reductions():
    rng = random.Random(211)
    done = 0
    while done < 20:
        d, e = reducible_pair(rng)
        r1 = find_reduction(d, e)
        if r1 is None:
            continue
        res = minimize(e)
        r2 = res.to_min
        chained = compose(r1, r2)
        assert verify_reduction(d, res.device, chained)
        done += 1


def test_serialization_round_trip():
    rng = random.Random(223)
    done = 0
    while done < 20:
        d, e = reducible_pair(rng)
        red = find_reduction(d, e)
        if red is None:
            continue
        blob = reduction_to_dict(d, e, red)
        assert set(blob) == {"phi", "alpha"}
        assert all(isinstance(k, str) for k in blob["phi"])
        back = reduction_from_dict(d, e, blob)
        assert back == red
        assert verify_reduction(d, e, back)
        done += 1


def test_identity_reduction():
    rng = random.Random(227)
    for _ in range(20):
        d = random_device(rng)
        assert verify_reduction(d, d, identity_reduction(d))
