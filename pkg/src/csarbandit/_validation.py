"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import InvalidArm, InvalidParams, InvalidSubset


def check_random_state(seed) -> np.random.Generator:
    """Turn ``seed`` into a ``numpy.random.Generator``.

    Accepts None, an int, a ``SeedSequence`` or an existing Generator (returned
    unchanged so callers can thread one stream through several calls).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    raise InvalidParams(f"cannot build a random generator from {seed!r}")


def spawn_rng(seed: int, *key: int) -> np.random.Generator:
    """Child stream for ``key`` (e.g. a replication id) under master ``seed``.

    The stream depends only on (seed, key), never on how many other streams
    were created before it, so replications can run in any order or process.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidParams(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InvalidParams(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_eps(eps) -> float:
    eps = float(eps)
    if not np.isfinite(eps) or eps <= 0:
        raise InvalidParams(f"accuracy eps must be > 0, got {eps}")
    return eps


def check_delta(delta) -> float:
    delta = float(delta)
    if not 0 < delta < 1:
        raise InvalidParams(f"confidence delta must lie in (0, 1), got {delta}")
    return delta


def check_arms(arms, n: int) -> list[int]:
    arms = [int(a) for a in arms]
    for a in arms:
        if not 0 <= a < n:
            raise InvalidArm(f"arm {a} outside [0, {n})")
    if len(set(arms)) != len(arms):
        raise InvalidParams(f"arm list has duplicates: {arms}")
    return arms


def check_subset(subset, n: int, k: int) -> np.ndarray:
    idx = np.asarray(list(subset), dtype=np.intp)
    if idx.ndim != 1 or len(idx) != k or len(np.unique(idx)) != k:
        raise InvalidSubset(f"expected {k} distinct arms, got {list(subset)}")
    if idx.min() < 0 or idx.max() >= n:
        raise InvalidArm(f"subset {list(subset)} has an arm outside [0, {n})")
    return idx
