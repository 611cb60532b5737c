"""Numerical tolerances shared across the package.

Tolerances live in a :class:`contextvars.ContextVar` so that a caller (the CLI,
a test) can tighten or loosen them for one computation without touching
global state seen by other threads::

    with tolerances(cancel=1e-7):
        H = compute_H(phi)
"""
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # relative size below which a leading polynomial coefficient is noise
    zero: float = 1e-13
    # |r1 - r2| < cancel * (1 + |r1|) => common root
    cancel: float = 1e-8
    # radius for grouping inaccurately computed multiple roots before matching centroids
    cluster_loose: float = 1e-4
    # roots of one polynomial closer than this (relative) are one multiple root
    cluster: float = 1e-6
    # realization pole clustering (relative)
    pole_cluster: float = 1e-7
    # strict stability margin
    stability: float = 1e-10
    # relative singular value threshold for rank decisions
    rank: float = 1e-8
    # evaluation refused within this relative distance of a pole
    pole_proximity: float = 1e-10
    # Sylvester spectral disjointness
    sylvester: float = 1e-8
    # factorization residual on the boundary grid
    residual: float = 1e-7
    # inner-ness deviation on the boundary grid
    inner: float = 1e-8


_current = ContextVar("specfact_tolerances", default=Tolerances())


def get_tolerances() -> Tolerances:
    return _current.get()


@contextmanager
def tolerances(**overrides):
    token = _current.set(replace(_current.get(), **overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)
