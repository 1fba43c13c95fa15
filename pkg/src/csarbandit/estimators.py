"""Per-arm mean estimation from full-bandit (sum-only) feedback.

Four designs share one block scheme: the arm list is sorted, cut into blocks,
and the last block is topped up with spare arms whose estimates are thrown
away. Within a block every arm is distinct, so the linear model is exact.

* :func:`est1` -- Hadamard rows decide which k-subsets to pull; recovery is
  ``H^T z / N``.
* :func:`est2` -- as est1, but the accepted arms ride along in every pulled
  subset and their (separately estimated) contribution is removed.
* :func:`est_loo` -- blocks of k + 1, pull each leave-one-out subset.
* :func:`est_random_matrix` -- a random balanced sign design solved by
  Gaussian elimination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_arms, check_delta, check_eps, check_positive_int, check_random_state
from .core import BanditInstance, RegretLedger, pull_mean
from .exceptions import AllAccepted, DegenerateDesign, InvalidParams, PaddingExhausted, Singular
from .hadamard import row_partitions, smallest_order, split_into_k_groups
from .linalg import mse, solve


@dataclass
class EstimationRequest:
    arms: list
    k: int
    eps: float
    delta: float
    accepted: list = field(default_factory=list)
    top: list = field(default_factory=list)
    pool: list = field(default_factory=list)  # spare arms for padding, in preference order


@dataclass
class EstimateReport:
    estimates: dict  # arm -> estimated mean
    counts: np.ndarray  # per-arm number of pulls it took part in
    total_pulls: int
    m: int
    blocks: int
    designs: list = field(default_factory=list)

    def vector(self, n: int) -> np.ndarray:
        out = np.full(n, np.nan)
        for arm, value in self.estimates.items():
            out[arm] = value
        return out


def sample_count(eps, delta, n_est, k=None, k_prime=None) -> int:
    """Pulls per subset so every estimate is eps-accurate w.p. 1 - delta.

    ``ceil(c * 2/eps^2 * ln(2 n_est / delta))`` with ``c = 1`` for EST1 and
    ``c = 2k/k'`` when ``k' < k`` arms are free (EST2 with pinned arms).
    """
    eps, delta = check_eps(eps), check_delta(delta)
    n_est = check_positive_int(n_est, "n_est")
    factor = 1.0
    if k_prime is not None and k_prime != k:
        k, k_prime = check_positive_int(k, "k"), check_positive_int(k_prime, "k_prime")
        if k_prime > k:
            raise InvalidParams(f"k_prime={k_prime} exceeds k={k}")
        factor = 2 * k / k_prime
    raw = factor * 2.0 / eps**2 * math.log(2 * n_est / delta)
    # ceil of a value that should be integral but carries rounding noise
    return max(1, math.ceil(round(raw, 9)))


@lru_cache(maxsize=None)
def _hadamard_design(k: int):
    order, h = smallest_order(k)
    rows = []
    for part in row_partitions(h):
        plus, minus = split_into_k_groups(part, k)
        rows.append((plus, minus))
    return order, h.entries.astype(float), rows


def _blocks(arms, size: int, pool) -> list[tuple[list[int], int]]:
    """Chunk sorted ``arms`` into blocks of ``size``; pad the last one.

    Returns (block, n_real) pairs; padded arms sit after the real ones.
    """
    arms = sorted(arms)
    out = []
    for start in range(0, len(arms), size):
        block = arms[start : start + size]
        real = len(block)
        if real < size:
            taken = set(block)
            spares = [a for a in arms[:start] if a not in taken]
            spares += [a for a in pool if a not in taken and a not in arms]
            spares = list(dict.fromkeys(spares))
            need = size - real
            if len(spares) < need:
                raise PaddingExhausted(
                    f"block of {real} arms needs {need} spare arms, only {len(spares)} available"
                )
            block = block + spares[:need]
        out.append((block, real))
    return out


class _Sampler:
    """Pulls groups of arms and keeps the pull accounting."""

    def __init__(self, instance, rng, ledger, m, pinned=()):
        self.instance = instance
        self.rng = rng
        self.ledger = ledger
        self.m = m
        self.pinned = list(pinned)
        self.counts = np.zeros(instance.n, dtype=np.int64)
        self.pulls = 0

    def side(self, block, groups) -> float:
        total = 0.0
        for cols in groups:
            subset = [block[c] for c in cols] + self.pinned
            total += pull_mean(self.instance, subset, self.m, self.rng, self.ledger)
            self.counts[subset] += self.m
            self.pulls += self.m
        return total


def _check_request(request: EstimationRequest, instance: BanditInstance):
    arms = check_arms(request.arms, instance.n)
    if not arms:
        raise InvalidParams("nothing to estimate: empty arm list")
    if request.k != instance.k:
        raise InvalidParams(f"request k={request.k} but instance k={instance.k}")
    return arms


def est1(request: EstimationRequest, instance: BanditInstance, rng=None, ledger=None, m=None):
    """Hadamard group estimator. ``accepted``/``top`` are ignored.

    ``m`` overrides the pulls-per-subset derived from (eps, delta).
    """
    arms = _check_request(request, instance)
    rng = check_random_state(rng)
    k = request.k
    if m is None:
        m = sample_count(request.eps, request.delta, len(arms))
    order, h, rows = _hadamard_design(k)
    sampler = _Sampler(instance, rng, ledger, m)
    estimates = {}
    blocks = _blocks(arms, order, request.pool)
    for block, real in blocks:
        z = np.empty(order)
        for i, (plus, minus) in enumerate(rows):
            lo = sampler.side(block, minus)
            hi = sampler.side(block, plus)
            z[i] = hi + lo if i == 0 else hi - lo
        theta = h.T @ z / order
        estimates.update(zip(block[:real], theta[:real].tolist()))
    return EstimateReport(estimates, sampler.counts, sampler.pulls, m, len(blocks))


def est2(request: EstimationRequest, instance: BanditInstance, rng=None, ledger=None, m=None):
    """Hadamard estimator with the accepted arms pinned into every subset.

    With no accepted arms this is exactly :func:`est1`.
    """
    if not request.accepted:
        return est1(request, instance, rng, ledger, m)
    arms = _check_request(request, instance)
    rng = check_random_state(rng)
    accepted = check_arms(request.accepted, instance.n)
    k = request.k
    k_free = k - len(accepted)
    if k_free <= 0:
        raise AllAccepted(f"{len(accepted)} accepted arms leave no room in a {k}-subset")
    if set(accepted) & set(arms):
        raise InvalidParams("accepted arms cannot also be estimated")
    top = check_arms(request.top, instance.n)
    if not set(accepted) <= set(top):
        raise InvalidParams("accepted arms must belong to the top set")

    top_pool = [a for a in sorted(arms) if a not in top] + [a for a in request.pool if a not in top]
    top_request = EstimationRequest(top, k, request.eps, request.delta, pool=top_pool)
    top_report = est1(top_request, instance, rng, ledger)
    pinned_sum = sum(top_report.estimates[a] for a in accepted)

    if m is None:
        m = sample_count(request.eps, request.delta, len(arms), k, k_free)
    order, h, rows = _hadamard_design(k_free)
    groups_per_side = order // 2 // k_free
    sampler = _Sampler(instance, rng, ledger, m, pinned=accepted)
    pool = [a for a in request.pool if a not in accepted]
    estimates = dict(top_report.estimates)
    blocks = _blocks(arms, order, pool)
    for block, real in blocks:
        z = np.empty(order)
        for i, (plus, minus) in enumerate(rows):
            lo = sampler.side(block, minus)
            hi = sampler.side(block, plus)
            z[i] = hi + lo - 2 * groups_per_side * pinned_sum if i == 0 else hi - lo
        theta = h.T @ z / order
        estimates.update(zip(block[:real], theta[:real].tolist()))
    return EstimateReport(
        estimates,
        sampler.counts + top_report.counts,
        sampler.pulls + top_report.total_pulls,
        m,
        len(blocks) + top_report.blocks,
    )


def est_loo(arms, k, m, instance: BanditInstance, rng=None, ledger=None, pool=()):
    """Leave-one-out baseline over blocks of k + 1 arms."""
    arms = check_arms(arms, instance.n)
    if not arms:
        raise InvalidParams("nothing to estimate: empty arm list")
    m = check_positive_int(m, "m")
    rng = check_random_state(rng)
    sampler = _Sampler(instance, rng, ledger, m)
    estimates = {}
    blocks = _blocks(arms, k + 1, list(pool))
    for block, real in blocks:
        mu = np.array([sampler.side(block, [[c for c in range(k + 1) if c != j]]) for j in range(k + 1)])
        total = mu.sum() / k
        estimates.update(zip(block[:real], (total - mu[:real]).tolist()))
    return EstimateReport(estimates, sampler.counts, sampler.pulls, m, len(blocks))


def random_design(k: int, rng=None, max_attempts: int = 256) -> np.ndarray:
    """Random invertible 2k x 2k sign design.

    Rows 2..2k each hold k entries +1 and k entries -1. Row 1 is all +1: its
    two halves are pulled separately and summed, as with a normalized
    Hadamard matrix (a design of balanced rows only is always singular,
    because every row is orthogonal to the all-ones vector).
    """
    rng = check_random_state(rng)
    base = np.array([1.0] * k + [-1.0] * k)
    for _ in range(max_attempts):
        rows = [np.ones(2 * k)] + [rng.permutation(base) for _ in range(2 * k - 1)]
        design = np.array(rows)
        try:
            solve(design, np.ones(2 * k))
        except Singular:
            continue
        return design
    raise DegenerateDesign(f"{max_attempts} random designs in a row were singular")


def est_random_matrix(
    arms, k, m, instance: BanditInstance, rng=None, ledger=None, pool=(), design=None, max_attempts=256
):
    """Random sign-design baseline; a fresh design per block unless ``design`` is given."""
    arms = check_arms(arms, instance.n)
    if not arms:
        raise InvalidParams("nothing to estimate: empty arm list")
    m = check_positive_int(m, "m")
    rng = check_random_state(rng)
    size = 2 * k
    if design is not None:
        design = np.asarray(design, dtype=float)
        if design.shape != (size, size):
            raise InvalidParams(f"design must be {size} x {size}")
    sampler = _Sampler(instance, rng, ledger, m)
    estimates = {}
    designs = []
    blocks = _blocks(arms, size, list(pool))
    for block, real in blocks:
        mat = random_design(k, rng, max_attempts) if design is None else design
        designs.append(mat)
        z = np.empty(size)
        for i, row in enumerate(mat):
            if i == 0:
                minus, plus = [tuple(range(k))], [tuple(range(k, size))]
            else:
                plus, minus = [tuple(np.flatnonzero(row > 0))], [tuple(np.flatnonzero(row < 0))]
            lo = sampler.side(block, minus)
            hi = sampler.side(block, plus)
            z[i] = hi + lo if i == 0 else hi - lo
        theta = solve(mat, z)
        estimates.update(zip(block[:real], theta[:real].tolist()))
    return EstimateReport(estimates, sampler.counts, sampler.pulls, m, len(blocks), designs)


class _ArmEstimator(BaseEstimator):
    """Shared fit/predict/score plumbing for the estimator classes."""

    def fit(self, instance: BanditInstance, arms=None, ledger=None):
        if not isinstance(instance, BanditInstance):
            raise InvalidParams(f"fit expects a BanditInstance, got {type(instance).__name__}")
        arms = list(range(instance.n)) if arms is None else list(arms)
        self.ledger_ = RegretLedger(instance) if ledger is None else ledger
        self.report_ = self._estimate(instance, arms, check_random_state(self.random_state))
        self.arms_ = np.array(sorted(arms))
        self.theta_ = self.report_.vector(instance.n)
        self.n_pulls_ = self.report_.total_pulls
        return self

    def predict(self, arms=None) -> np.ndarray:
        check_is_fitted(self, "theta_")
        return self.theta_[self.arms_ if arms is None else np.asarray(arms)]

    def score(self, instance: BanditInstance) -> float:
        """Negative mean squared error against the true means."""
        check_is_fitted(self, "theta_")
        return -mse(self.theta_[self.arms_], instance.means[self.arms_])


class HadamardEstimator(_ArmEstimator):
    """EST1 (or EST2 when ``accepted`` is non-empty) as an estimator object."""

    def __init__(self, eps=0.1, delta=0.1, m=None, accepted=(), top=(), pool=(), random_state=None):
        self.eps = eps
        self.delta = delta
        self.m = m
        self.accepted = accepted
        self.top = top
        self.pool = pool
        self.random_state = random_state

    def _estimate(self, instance, arms, rng):
        request = EstimationRequest(
            arms, instance.k, self.eps, self.delta, list(self.accepted), list(self.top), list(self.pool)
        )
        return est2(request, instance, rng, self.ledger_, self.m)


class LeaveOneOutEstimator(_ArmEstimator):
    def __init__(self, m=10, pool=(), random_state=None):
        self.m = m
        self.pool = pool
        self.random_state = random_state

    def _estimate(self, instance, arms, rng):
        return est_loo(arms, instance.k, self.m, instance, rng, self.ledger_, self.pool)


class RandomDesignEstimator(_ArmEstimator):
    def __init__(self, m=10, design=None, max_attempts=256, pool=(), random_state=None):
        self.m = m
        self.design = design
        self.max_attempts = max_attempts
        self.pool = pool
        self.random_state = random_state

    def _estimate(self, instance, arms, rng):
        return est_random_matrix(
            arms, instance.k, self.m, instance, rng, self.ledger_, self.pool, self.design, self.max_attempts
        )
