"""Problem instances, the full-bandit pull oracle, gaps and regret accounting.

Arms are indexed from 0. Pulling a k-subset returns only the *sum* of the k
independent arm rewards; individual arm rewards are never observed.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive_int, check_random_state, check_subset
from .exceptions import InvalidParams


class Noise(str, enum.Enum):
    GAUSSIAN = "gaussian"  # N(theta_i, 1)
    BERNOULLI = "bernoulli"  # Ber(theta_i), theta_i in [0, 1]
    ZERO = "zero"  # deterministic theta_i

    @property
    def subgaussian(self) -> float:
        return 0.0 if self is Noise.ZERO else 1.0


@dataclass(frozen=True, eq=False)
class BanditInstance:
    """Hidden environment: ``n`` arms with true means, subset size ``k``."""

    means: np.ndarray
    k: int
    noise: Noise = Noise.GAUSSIAN

    def __post_init__(self):
        means = np.array(self.means, dtype=float).ravel()
        if means.size == 0 or not np.all(np.isfinite(means)):
            raise InvalidParams("means must be a non-empty vector of finite reals")
        k = check_positive_int(self.k, "k")
        if 2 * k > means.size:
            raise InvalidParams(f"need k <= n/2, got n={means.size}, k={k}")
        try:
            noise = Noise(self.noise)
        except ValueError:
            raise InvalidParams(f"noise must be one of {[v.value for v in Noise]}, got {self.noise!r}") from None
        if noise is Noise.BERNOULLI and (means.min() < 0 or means.max() > 1):
            raise InvalidParams("Bernoulli means must lie in [0, 1]")
        means.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "noise", noise)

    @property
    def n(self) -> int:
        return self.means.size

    def ranking(self) -> np.ndarray:
        """Arms by true mean, best first; ties go to the lower index."""
        return np.lexsort((np.arange(self.n), -self.means))

    def optimal_subset(self) -> frozenset[int]:
        return frozenset(int(i) for i in self.ranking()[: self.k])

    @property
    def optimal_value(self) -> float:
        """mu*, the sum of the k largest true means."""
        return float(np.sort(self.means)[::-1][: self.k].sum())

    def subset_mean(self, subset) -> float:
        return float(self.means[check_subset(subset, self.n, self.k)].sum())

    def __eq__(self, other):
        if not isinstance(other, BanditInstance):
            return NotImplemented
        return (
            self.k == other.k
            and self.noise is other.noise
            and np.array_equal(self.means, other.means)
        )

    def __hash__(self):
        return hash((self.k, self.noise, self.means.tobytes()))

    def __repr__(self):
        return f"BanditInstance(n={self.n}, k={self.k}, noise={self.noise.value!r})"

    # JSON document: {"n": int, "k": int, "means": [...], "noise": str}
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "means": [float(x) for x in self.means],
            "noise": self.noise.value,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "BanditInstance":
        try:
            means = doc["means"]
            inst = cls(means, doc["k"], doc.get("noise", "gaussian"))
        except KeyError as exc:
            raise InvalidParams(f"instance document missing {exc}") from None
        if "n" in doc and int(doc["n"]) != inst.n:
            raise InvalidParams(f"n={doc['n']} but {inst.n} means given")
        return inst

    @classmethod
    def from_json(cls, text: str) -> "BanditInstance":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class GapProfile:
    gaps: np.ndarray
    min_gap: float


def gap_profile(instance: BanditInstance) -> GapProfile:
    order = instance.ranking()
    k = instance.k
    kth = instance.means[order[k - 1]]
    k1th = instance.means[order[k]]
    gaps = np.empty(instance.n)
    top = order[:k]
    rest = order[k:]
    gaps[top] = instance.means[top] - k1th
    gaps[rest] = kth - instance.means[rest]
    return GapProfile(gaps, float(gaps.min()))


class HorizonReached(Exception):
    """Control flow: the ledger's pull budget is spent."""


@dataclass
class RegretLedger:
    """Cumulative pseudo-regret of every subset pull made against ``instance``.

    A pull of S adds ``mu* - sum(theta[S])``. With ``horizon`` set, the ledger
    refuses to go past that many pulls: the batch that crosses the limit is
    truncated and :class:`HorizonReached` is raised.
    """

    instance: BanditInstance
    horizon: int | None = None
    regret: float = 0.0
    pulls: int = 0
    _t: list = field(default_factory=lambda: [0], repr=False)
    _r: list = field(default_factory=lambda: [0.0], repr=False)

    @property
    def optimal_value(self) -> float:
        return self.instance.optimal_value

    @property
    def remaining(self) -> float:
        return math.inf if self.horizon is None else self.horizon - self.pulls

    def record(self, subset, count: int = 1) -> "RegretLedger":
        inst = self.instance
        gap = inst.optimal_value - float(inst.means[check_subset(subset, inst.n, inst.k)].sum())
        # exact ties can leave -1e-16 behind; regret must not decrease
        gap = max(gap, 0.0)
        take = count if self.horizon is None else min(count, self.horizon - self.pulls)
        if take > 0:
            self.pulls += take
            self.regret += take * gap
            self._t.append(self.pulls)
            self._r.append(self.regret)
        if take < count:
            raise HorizonReached(self.pulls)
        return self

    def regret_at(self, t) -> np.ndarray | float:
        """Pseudo-regret after ``t`` pulls (exact: linear inside a batch)."""
        return np.interp(t, self._t, self._r)


def record_pull(ledger: RegretLedger, instance: BanditInstance, subset) -> RegretLedger:
    if ledger.instance is not instance and ledger.instance != instance:
        raise InvalidParams("ledger belongs to another instance")
    return ledger.record(subset)


def pull(instance: BanditInstance, subset, rng) -> float:
    """One full-bandit observation: the summed reward of ``subset``."""
    idx = check_subset(subset, instance.n, instance.k)
    theta = instance.means[idx]
    if instance.noise is Noise.GAUSSIAN:
        return float((theta + rng.standard_normal(idx.size)).sum())
    if instance.noise is Noise.BERNOULLI:
        return float((rng.random(idx.size) < theta).sum())
    return float(theta.sum())


def pull_mean(instance: BanditInstance, subset, m: int, rng, ledger=None) -> float:
    """Average reward of ``m`` pulls of ``subset``, drawn in one shot.

    Has exactly the distribution of ``mean(pull(...) for _ in range(m))``:
    a sum of k unit Gaussians averaged over m draws is N(mu_S, k/m), and a
    Bernoulli arm's successes over m draws are Binomial(m, theta_i).
    The ``m`` pulls are recorded in ``ledger`` when one is given.
    """
    idx = check_subset(subset, instance.n, instance.k)
    if ledger is not None:
        ledger.record(idx, m)
    theta = instance.means[idx]
    if instance.noise is Noise.GAUSSIAN:
        return float(theta.sum() + math.sqrt(idx.size / m) * rng.standard_normal())
    if instance.noise is Noise.BERNOULLI:
        return float(rng.binomial(m, theta).sum() / m)
    return float(theta.sum())


GENERATORS = (
    "uniform_gaussian",
    "uniform_bernoulli",
    "bernoulli_epsilon_k",
    "two_gap",
    "equal_gap",
    "planted_subset",
    "flat_null",
)


def make_instance(kind: str, n: int, k: int, rng=None, noise=None, **params) -> BanditInstance:
    """Build one of the standard problem families.

    ============================  ==================================================
    ``uniform_gaussian``          means iid U[0, 1], unit Gaussian noise
    ``uniform_bernoulli``         means iid U[0, 1], Bernoulli rewards
    ``bernoulli_epsilon_k``       ``eps``: first k arms 1/2 + eps/k, others 1/2
    ``two_gap``                   ``delta_plus``, ``delta_minus``: k-1 arms at
                                  +delta_plus, arm k at 0, the rest -delta_minus
    ``equal_gap``                 ``gap``: first k arms at gap, the rest 0
    ``planted_subset``            ``subset``, ``eps``: eps/k on subset, else 0
    ``flat_null``                 every mean 0
    ============================  ==================================================

    ``noise`` overrides the family's default noise.
    """
    n = check_positive_int(n, "n")
    k = check_positive_int(k, "k")
    if 2 * k > n:
        raise InvalidParams(f"need k <= n/2, got n={n}, k={k}")

    def need(name):
        if name not in params:
            raise InvalidParams(f"{kind} requires parameter {name!r}")
        return params[name]

    def positive(name):
        value = float(need(name))
        if not value > 0:
            raise InvalidParams(f"{name} must be > 0, got {value}")
        return value

    if kind in ("uniform_gaussian", "uniform_bernoulli"):
        means = check_random_state(rng).uniform(0.0, 1.0, size=n)
        default = Noise.GAUSSIAN if kind == "uniform_gaussian" else Noise.BERNOULLI
    elif kind == "bernoulli_epsilon_k":
        eps = positive("eps")
        if 0.5 + eps / k > 1:
            raise InvalidParams("eps/k must be at most 1/2")
        means = np.full(n, 0.5)
        means[:k] += eps / k
        default = Noise.BERNOULLI
    elif kind == "two_gap":
        dp, dm = positive("delta_plus"), positive("delta_minus")
        means = np.full(n, -dm)
        means[: k - 1] = dp
        means[k - 1] = 0.0
        default = Noise.GAUSSIAN
    elif kind == "equal_gap":
        means = np.zeros(n)
        means[:k] = positive("gap")
        default = Noise.GAUSSIAN
    elif kind == "planted_subset":
        eps = positive("eps")
        subset = sorted({int(i) for i in need("subset")})
        if len(subset) != k or subset[0] < 0 or subset[-1] >= n:
            raise InvalidParams(f"planted subset must be {k} arms in [0, {n})")
        means = np.zeros(n)
        means[subset] = eps / k
        default = Noise.GAUSSIAN
    elif kind == "flat_null":
        means = np.zeros(n)
        default = Noise.GAUSSIAN
    else:
        raise InvalidParams(f"unknown instance kind {kind!r}; choose from {GENERATORS}")
    return BanditInstance(means, k, default if noise is None else noise)
