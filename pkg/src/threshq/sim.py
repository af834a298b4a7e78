"""Monte Carlo validation: sojourn-time estimation and the two-system coupling.

Replications use counter-based (Philox) generators keyed by (seed,
replication, stream), so identical configs give bit-identical output and
the two coupled systems consume identical draws by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import EconomicParams, JoinStrategy, ServiceRatePolicy

_STREAM_SOJOURN = 0
_STREAM_ARRIVALS = 1
_STREAM_SERVICE = 2
_STREAM_COINS = 3


@dataclass(frozen=True)
class SimConfig:
    seed: int
    replications: int
    params: EconomicParams
    policy: ServiceRatePolicy
    strategy: JoinStrategy

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")


@dataclass(frozen=True)
class SojournEstimate:
    mean: float
    half_width_95: float
    samples: int


@dataclass
class CouplingOutcome:
    """Per-replication sojourn times of the labeled customers in both systems.

    ``t_a[r, j-1]`` and ``t_b[r, j-1]`` are the departure times of labeled
    customer j (1..n) in systems A and B for replication r. The pathwise
    ordering predicts t_a <= t_b everywhere.
    """

    n: int
    n0: int
    t_a: np.ndarray
    t_b: np.ndarray
    event_log: list[dict] = field(default_factory=list)

    @property
    def replications(self) -> int:
        return self.t_a.shape[0]

    @property
    def violation_count(self) -> int:
        """Number of (replication, customer) pairs with T_A(j) > T_B(j)."""
        return int(np.count_nonzero(self.t_a > self.t_b))

    @property
    def max_violation(self) -> float:
        """Largest positive excess T_A(j) - T_B(j) observed (0 if none)."""
        return float(max(np.max(self.t_a - self.t_b), 0.0))


def _generator(seed: int, replication: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF,
                                                     (replication << 2) | stream]))


def simulate_sojourn(config: SimConfig, n: int) -> SojournEstimate:
    """Estimate the sojourn of a tagged customer who joins upon finding n
    present (joining even at the balk state); all future arrivals follow the
    configured strategy. Returns mean and 95% normal-approximation half-width.

    The tagged customer's path is the (ahead, total) jump chain with arrival
    rate lambda * p_total and service rate mu_total, which is exactly the
    first-step system the analytic solver uses; all replications advance in
    lock-step as vectorized draws.
    """
    strat = config.strategy
    n0 = strat.balk_state
    if not (0 <= n <= n0):
        raise ValueError(f"arrival state {n} outside [0, {n0}]")
    reps = config.replications
    lam = config.params.arrival_rate
    rng = _generator(config.seed, 0, _STREAM_SOJOURN)
    pvec = np.array([strat.prob(m) for m in range(n0 + 2)])
    muvec = np.array([config.policy.rate_at(m) for m in range(1, n0 + 2)])
    ahead = np.full(reps, n, dtype=np.int64)
    total = np.full(reps, n + 1, dtype=np.int64)
    sojourn = np.zeros(reps)
    alive = np.ones(reps, dtype=bool)
    while True:
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            break
        m = total[idx]
        lp = lam * pvec[m]
        rate = lp + muvec[m - 1]
        sojourn[idx] += rng.exponential(1.0, idx.size) / rate
        arrive = rng.random(idx.size) < lp / rate
        total[idx] = np.where(arrive, m + 1, m - 1)
        cur = ahead[idx]
        ahead[idx] = np.where(arrive, cur, cur - 1)
        alive[idx[(~arrive) & (cur == 0)]] = False
    mean = float(np.mean(sojourn))
    sd = float(np.std(sojourn, ddof=1)) if reps > 1 else float("nan")
    half = 1.959963984540054 * sd / math.sqrt(reps) if reps > 1 else float("inf")
    return SojournEstimate(mean, half, reps)


class _Stream:
    """Scalar draws from a batched numpy generator."""

    __slots__ = ("_rng", "_kind", "_scale", "_buf", "_i")

    def __init__(self, rng: np.random.Generator, kind: str, scale: float = 1.0):
        self._rng = rng
        self._kind = kind
        self._scale = scale
        self._buf: list[float] = []
        self._i = 0

    def next(self) -> float:
        if self._i >= len(self._buf):
            if self._kind == "exp":
                self._buf = self._rng.exponential(self._scale, 256).tolist()
            else:
                self._buf = self._rng.random(256).tolist()
            self._i = 0
        v = self._buf[self._i]
        self._i += 1
        return v


def run_coupling(config: SimConfig, n: int, n0: int,
                 log_first_replication: bool = False) -> CouplingOutcome:
    """Couple system A (n initial customers, labels 1..n) with system B
    (n+1 initial, labels 0..n, label 0 just entered service) under the pure
    or mixed threshold strategy with balk state n0.

    Both systems share one arrival stream, one unit-mean exponential service
    requirement per customer, and one join-coin per future arrival; each
    requirement depletes at the state-dependent rate, so service durations
    follow the path. Simultaneous events are ordered departures-before-
    arrivals and A-before-B.
    """
    strat = config.strategy
    if strat.balk_state != n0:
        raise ValueError("strategy balk state does not match n0")
    if not (1 <= n <= n0 - 1):
        raise ValueError("need 1 <= n <= n0 - 1")
    lam = config.params.arrival_rate
    policy = config.policy
    probs = [strat.prob(k) for k in range(n0 + 1)]
    mu = [policy.rate_at(k) for k in range(1, n0 + 2)]  # mu[k-1] = rate with k present
    reps = config.replications
    t_a = np.empty((reps, n))
    t_b = np.empty((reps, n))
    log: list[dict] = []

    for rep in range(reps):
        arr = _Stream(_generator(config.seed, rep, _STREAM_ARRIVALS), "exp", 1.0 / lam)
        svc = _Stream(_generator(config.seed, rep, _STREAM_SERVICE), "exp")
        coin = _Stream(_generator(config.seed, rep, _STREAM_COINS), "u")
        record = log_first_replication and rep == 0

        s_init = [svc.next() for _ in range(n + 1)]  # S_0..S_n
        # FCFS queues of (label, remaining requirement); head is in service
        qa = [[j, s_init[j]] for j in range(1, n + 1)]
        qb = [[j, s_init[j]] for j in range(0, n + 1)]
        dep_a = [0.0] * (n + 1)
        dep_b = [0.0] * (n + 1)
        done_a = done_b = False
        t = 0.0
        next_arr = arr.next()
        next_label = n + 1
        inf = math.inf

        while not (done_a and done_b):
            na, nb = len(qa), len(qb)
            ta = t + qa[0][1] / mu[na - 1] if na else inf
            tb = t + qb[0][1] / mu[nb - 1] if nb else inf
            # priority at ties: departure from A, then B, then the arrival
            if ta <= tb and ta <= next_arr:
                ev, tnext = "dep_a", ta
            elif tb <= next_arr:
                ev, tnext = "dep_b", tb
            else:
                ev, tnext = "arr", next_arr
            dt = tnext - t
            if na:
                qa[0][1] -= mu[na - 1] * dt
            if nb:
                qb[0][1] -= mu[nb - 1] * dt
            t = tnext
            if ev == "dep_a":
                label = qa.pop(0)[0]
                if 1 <= label <= n:
                    dep_a[label] = t
                    if label == n:
                        done_a = True
                if record:
                    log.append({"t": t, "system": "A", "kind": "departure", "n_after": len(qa)})
            elif ev == "dep_b":
                label = qb.pop(0)[0]
                if 1 <= label <= n:
                    dep_b[label] = t
                    if label == n:
                        done_b = True
                if record:
                    log.append({"t": t, "system": "B", "kind": "departure", "n_after": len(qb)})
            else:
                u = coin.next()
                s = svc.next()
                join_a = (not done_a) and u < probs[len(qa)]
                join_b = (not done_b) and u < probs[len(qb)]
                if join_a:
                    qa.append([next_label, s])
                if join_b:
                    qb.append([next_label, s])
                if record:
                    log.append({"t": t, "system": "A", "kind": "join" if join_a else "balk",
                                "n_after": len(qa)})
                    log.append({"t": t, "system": "B", "kind": "join" if join_b else "balk",
                                "n_after": len(qb)})
                next_label += 1
                next_arr = t + arr.next()
        t_a[rep] = dep_a[1:]
        t_b[rep] = dep_b[1:]

    return CouplingOutcome(n, n0, t_a, t_b, log)
