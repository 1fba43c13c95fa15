"""Combinatorial Successive Accepts and Rejects (CSAR).

Each phase t estimates the surviving arms to accuracy 2^-t, then accepts arms
that beat the (k+1)-th order statistic by more than 2 eps_t and rejects arms
that trail the k-th by more than 2 eps_t. Three stopping rules:

``exact_pac``  run until only k arms remain (may not stop on zero gaps);
``eps_pac``    also stop once eps_t <= eps / (2k), returning the current top k;
``horizon``    eps_pac with eps and delta tuned to a horizon T, then exploit the
               returned subset until T pulls have been made.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_delta, check_eps, check_positive_int, check_random_state
from .core import BanditInstance, HorizonReached, RegretLedger
from .estimators import EstimationRequest, est1, est2
from .exceptions import InvalidParams, NonTermination, Unbounded
from .hadamard import smallest_order

MODES = ("exact_pac", "eps_pac", "horizon")
ESTIMATORS = {"est1": est1, "est2": est2}


@dataclass
class CsarConfig:
    mode: str = "exact_pac"
    delta: float = 0.1
    eps: float | None = None
    horizon: int | None = None
    c_prime: float = 1.0
    estimator: str = "est1"
    seed: int | None = 0
    max_phases: int = 60

    def validate(self, instance: BanditInstance | None = None) -> "CsarConfig":
        if self.mode not in MODES:
            raise InvalidParams(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.estimator not in ESTIMATORS:
            raise InvalidParams(f"estimator must be one of {sorted(ESTIMATORS)}")
        check_delta(self.delta)
        if instance is not None and smallest_order(instance.k)[0] > instance.n:
            order = smallest_order(instance.k)[0]
            raise InvalidParams(
                f"k={instance.k} uses {order}-arm Hadamard blocks but the instance has only n={instance.n} arms"
            )
        if self.mode == "eps_pac":
            check_eps(self.eps if self.eps is not None else -1)
        if self.mode == "horizon":
            check_positive_int(self.horizon, "horizon")
            if instance is not None and self.horizon <= instance.n:
                raise InvalidParams(f"horizon T={self.horizon} must exceed n={instance.n}")
            if not self.c_prime > 0:
                raise InvalidParams("c_prime must be > 0")
        return self


@dataclass
class PhaseRecord:
    phase: int
    eps_t: float
    delta_t: float
    n_surviving: int
    n_accepted: int
    pulls: int
    cum_regret: float


@dataclass
class CsarResult:
    subset: frozenset
    phases: int
    total_pulls: int
    regret: float
    success: bool
    termination_phase: dict  # arm -> phase it left the surviving set (None: never)
    records: list = field(default_factory=list)
    ledger: RegretLedger | None = None
    stopped_early: bool = False  # eps_pac rule fired
    truncated: bool = False  # horizon ran out during exploration
    estimate_pulls: int = 0  # pulls reported by the estimator calls


def phase_schedule(t: int, delta: float) -> tuple[float, float]:
    """(eps_t, delta_t) = (2^-t, (6/pi^2) delta / t^2); the delta_t sum to delta."""
    t = check_positive_int(t, "t")
    return 2.0**-t, 6.0 / math.pi**2 * delta / t**2


def per_arm_phase_bound(gap: float) -> int:
    """Latest phase by which an arm with this gap is accepted or rejected."""
    if not gap > 0:
        raise Unbounded(f"no phase bound for gap {gap}")
    return math.ceil(round(math.log2(4.0 / gap), 12))


def order_stats(estimates: dict, accepted, k: int):
    """k-th and (k+1)-th order statistics over surviving + accepted arms.

    Accepted arms rank above every estimate (ordered by index); the rest rank
    by estimate, descending, ties to the lower index.
    Returns ``(kth_value, k1th_value, ranking)``.
    """
    accepted = sorted(accepted)
    if len(estimates) + len(accepted) < k + 1:
        raise InvalidParams("need at least k + 1 arms to compute order statistics")
    if len(accepted) >= k:
        raise InvalidParams("k arms already accepted; nothing left to rank")
    surviving = sorted(estimates, key=lambda a: (-estimates[a], a))
    free = k - len(accepted)
    return estimates[surviving[free - 1]], estimates[surviving[free]], accepted + surviving


def _top_k(ranking, k):
    return frozenset(ranking[:k])


def run(config: CsarConfig, instance: BanditInstance, rng=None) -> CsarResult:
    config.validate(instance)
    rng = check_random_state(config.seed if rng is None else rng)
    k, n = instance.k, instance.n
    delta, eps = config.delta, config.eps
    horizon = None
    if config.mode == "horizon":
        horizon = config.horizon
        delta = 1.0 / (k * horizon)
        eps = math.sqrt(config.c_prime * n * math.log(n * k * horizon) / horizon)
    early_stop = config.mode in ("eps_pac", "horizon")
    ledger = RegretLedger(instance, horizon=horizon)

    surviving = list(range(n))
    accepted: list[int] = []
    rejected: list[int] = []
    top: list[int] = []
    theta_hat: dict[int, float] = {}
    term: dict[int, int | None] = {a: None for a in range(n)}
    ranking = list(range(n))
    records = []
    estimate_pulls = 0
    stopped_early = truncated = False
    t = 0

    try:
        while len(surviving) + len(accepted) > k:
            t += 1
            if t > config.max_phases:
                raise NonTermination(f"no decision after {config.max_phases} phases (zero gap?)")
            eps_t, delta_t = phase_schedule(t, delta)
            # EST2 needs a full block of distinct non-accepted arms for k - |A|
            # free slots; when the instance is too small for that, use EST1
            use_est2 = config.estimator == "est2" and (
                not accepted or smallest_order(k - len(accepted))[0] <= n - len(accepted)
            )
            if use_est2:
                request = EstimationRequest(
                    surviving, k, eps_t, delta_t, accepted=list(accepted), top=list(top),
                    pool=sorted(rejected),
                )
            else:
                request = EstimationRequest(
                    surviving, k, eps_t, delta_t, pool=sorted(rejected) + sorted(accepted)
                )
            report = (est2 if use_est2 else est1)(request, instance, rng, ledger)
            estimate_pulls += report.total_pulls
            theta_hat.update((a, report.estimates[a]) for a in surviving)

            current = {a: theta_hat[a] for a in surviving}
            kth, k1th, _ = order_stats(current, accepted, k)
            acc = [a for a in surviving if current[a] - k1th > 2 * eps_t]
            rej = [a for a in surviving if kth - current[a] > 2 * eps_t]
            accepted = sorted(accepted + acc)
            rejected = sorted(rejected + rej)
            surviving = [a for a in surviving if a not in acc and a not in rej]
            if len(accepted) == k:
                # the top k is settled; whatever survives cannot be in it
                rej = rej + surviving
                rejected = sorted(rejected + surviving)
                surviving = []
            for a in acc + rej:
                term[a] = t

            ranking = accepted + sorted(surviving, key=lambda a: (-theta_hat[a], a))
            top = ranking[: 2 * k]
            records.append(
                PhaseRecord(t, eps_t, delta_t, len(surviving), len(accepted), ledger.pulls, ledger.regret)
            )
            if early_stop and len(surviving) + len(accepted) > k and eps_t <= eps / (2 * k):
                stopped_early = True
                break
    except HorizonReached:
        truncated = True
        ranking = accepted + sorted(surviving, key=lambda a: (-theta_hat.get(a, -np.inf), a))

    if stopped_early or truncated:
        subset = _top_k(ranking, k)
    else:
        subset = frozenset(accepted + surviving)
        for a in surviving:
            term[a] = t
    if horizon is not None and not truncated and ledger.pulls < horizon:
        ledger.record(sorted(subset), horizon - ledger.pulls)

    value = float(instance.means[sorted(subset)].sum())
    return CsarResult(
        subset=subset,
        phases=t,
        total_pulls=ledger.pulls,
        regret=ledger.regret,
        success=abs(value - instance.optimal_value) <= 1e-12,
        termination_phase=term,
        records=records,
        ledger=ledger,
        stopped_early=stopped_early,
        truncated=truncated,
        estimate_pulls=estimate_pulls,
    )


class CSARSelector(BaseEstimator):
    """CSAR as an estimator object: ``fit(instance)`` then ``predict()``."""

    def __init__(
        self, mode="exact_pac", delta=0.1, eps=None, horizon=None, c_prime=1.0,
        estimator="est1", max_phases=60, random_state=None,
    ):
        self.mode = mode
        self.delta = delta
        self.eps = eps
        self.horizon = horizon
        self.c_prime = c_prime
        self.estimator = estimator
        self.max_phases = max_phases
        self.random_state = random_state

    def fit(self, instance: BanditInstance):
        if not isinstance(instance, BanditInstance):
            raise InvalidParams(f"fit expects a BanditInstance, got {type(instance).__name__}")
        config = CsarConfig(
            self.mode, self.delta, self.eps, self.horizon, self.c_prime, self.estimator,
            None, self.max_phases,
        )
        self.result_ = run(config, instance, check_random_state(self.random_state))
        self.subset_ = np.array(sorted(self.result_.subset))
        self.regret_ = self.result_.regret
        self.n_pulls_ = self.result_.total_pulls
        return self

    def predict(self, X=None) -> np.ndarray:
        check_is_fitted(self, "subset_")
        return self.subset_

    def score(self, instance: BanditInstance) -> float:
        """Minus the optimality gap of the selected subset."""
        check_is_fitted(self, "subset_")
        return -(instance.optimal_value - float(instance.means[self.subset_].sum()))
