"""Numeric checks on subset-sampling distributions.

For a distribution p over k-subsets, ``Lambda_p = sum_S p(S) chi_S chi_S^T``
and ``rho(p) = max_S chi_S^T Lambda_p^{-1} chi_S``. Two facts are checked
numerically: (x^T A x)(x^T A^{-1} x) >= |x|^4 for positive-definite A, and
rho(p) >= n/k for every p with invertible Lambda_p.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_int, check_random_state
from .exceptions import InvalidParams, NotPositiveDefinite, Singular, TooLarge
from .linalg import inverse, solve, sym_eigenvalues

MAX_RHO_ARMS = 16


@dataclass(frozen=True)
class SubsetDistribution:
    n: int
    k: int
    support: tuple  # ((subset, probability), ...)

    def __post_init__(self):
        check_positive_int(self.n, "n")
        check_positive_int(self.k, "k")
        support = []
        for subset, prob in self.support:
            subset = tuple(sorted(int(a) for a in subset))
            if len(set(subset)) != self.k or subset[0] < 0 or subset[-1] >= self.n:
                raise InvalidParams(f"{subset} is not a {self.k}-subset of [0, {self.n})")
            if prob < 0:
                raise InvalidParams("probabilities must be nonnegative")
            support.append((subset, float(prob)))
        if abs(sum(p for _, p in support) - 1.0) > 1e-10:
            raise InvalidParams("probabilities must sum to 1")
        object.__setattr__(self, "support", tuple(support))

    @classmethod
    def uniform(cls, n: int, k: int) -> "SubsetDistribution":
        subsets = list(itertools.combinations(range(n), k))
        return cls(n, k, tuple((s, 1.0 / len(subsets)) for s in subsets))

    @classmethod
    def random(cls, n: int, k: int, rng=None, support_size=None) -> "SubsetDistribution":
        """Random weights on random subsets, redrawn until Lambda_p is invertible."""
        rng = check_random_state(rng)
        subsets = list(itertools.combinations(range(n), k))
        size = support_size or min(len(subsets), 2 * n)
        for _ in range(100):
            chosen = rng.choice(len(subsets), size=size, replace=False)
            w = rng.random(size) + 1e-3
            dist = cls(n, k, tuple((subsets[c], p) for c, p in zip(chosen, w / w.sum())))
            if sym_eigenvalues(lambda_matrix(dist))[0] > 1e-9:
                return dist
        raise InvalidParams(f"could not draw an invertible distribution for n={n}, k={k}")

    @classmethod
    def from_dict(cls, doc: dict) -> "SubsetDistribution":
        return cls(doc["n"], doc["k"], tuple((s, p) for s, p in doc["support"]))


def lambda_matrix(p: SubsetDistribution) -> np.ndarray:
    lam = np.zeros((p.n, p.n))
    for subset, prob in p.support:
        idx = np.array(subset)
        lam[np.ix_(idx, idx)] += prob
    return lam


def rho(p: SubsetDistribution) -> float:
    """Worst-case chi_S^T Lambda_p^{-1} chi_S over all k-subsets; inf if singular."""
    if p.n > MAX_RHO_ARMS:
        raise TooLarge(f"exhaustive rho is capped at n={MAX_RHO_ARMS}, got {p.n}")
    lam = lambda_matrix(p)
    eig = sym_eigenvalues(lam)
    if eig[0] <= 1e-12 * max(eig[-1], 1.0):
        return math.inf
    try:
        inv = inverse(lam)
    except Singular:
        return math.inf
    best = -math.inf
    for subset in itertools.combinations(range(p.n), p.k):
        idx = np.array(subset)
        best = max(best, float(inv[np.ix_(idx, idx)].sum()))
    return best


def bilinear_check(a, x) -> bool:
    """True iff (x^T A x)(x^T A^{-1} x) >= |x|^4 (relative slack 1e-8)."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        raise InvalidParams("x must be nonzero")
    if sym_eigenvalues(a)[0] <= 1e-10:
        raise NotPositiveDefinite("the inequality is only claimed for positive-definite A")
    lhs = float(x @ a @ x) * float(x @ solve(a, x))
    rhs = float(x @ x) ** 2
    return lhs >= rhs * (1 - 1e-8)


def random_pd(n: int, rng=None) -> np.ndarray:
    rng = check_random_state(rng)
    b = rng.normal(size=(n, n))
    return b @ b.T + 0.05 * np.eye(n)
