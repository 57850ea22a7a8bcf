"""Shared helpers for building random test elements."""

import numpy as np

from wedgemech.geometry import Bivector, MomentumBivector, pair_count
from wedgemech.tulczyjew import PhaseElement2


def random_bivector(rng, dim):
    return Bivector(rng.normal(size=pair_count(dim)), dim)


def random_momentum(rng, dim):
    return MomentumBivector(rng.normal(size=pair_count(dim)), dim)


def random_phase_element2(rng, dim):
    k = pair_count(dim)
    a = rng.normal(size=(k, k))
    return PhaseElement2(
        x=rng.normal(size=dim),
        p=random_momentum(rng, dim),
        xdot=random_bivector(rng, dim),
        y=rng.normal(size=(dim, k)),
        pdot=a - a.T,  # float subtraction anticommutes exactly
    )
