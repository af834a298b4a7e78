"""Exact expected delays under a fixed symmetric joining strategy.

The generalized delay W(n, m) is the expected remaining sojourn of a tagged
customer with n customers ahead out of m total, when all future arrivals
follow the given strategy. The defining first-step system is triangular, so
it is solved by a backward sweep in m for each n ascending; no general
linear solver is needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import EconomicParams, JoinStrategy, ServiceRatePolicy


@dataclass(frozen=True)
class DelayTable:
    """Solved delays W(n, m) for 0 <= n < m <= n0 under one (policy, strategy) pair."""

    n0: int
    entries: np.ndarray  # shape (max(n0,1), n0+1); entries[n, m] = W(n, m), NaN elsewhere

    def __post_init__(self):
        self.entries.setflags(write=False)

    def w(self, n: int, m: int) -> float:
        """W(n, m); defined for 0 <= n < m <= n0."""
        if not (0 <= n < m <= self.n0):
            raise ValueError(f"W({n},{m}) is outside the table (n0={self.n0})")
        return float(self.entries[n, m])

    def to_csv(self) -> str:
        """CSV with header n,m,W; one row per entry, 17 significant digits."""
        lines = ["n,m,W"]
        for n in range(self.n0):
            for m in range(n + 1, self.n0 + 1):
                lines.append(f"{n},{m},{self.entries[n, m]:.17g}")
        return "\n".join(lines) + "\n"


def solve_delay_table(policy: ServiceRatePolicy, strategy: JoinStrategy,
                      params: EconomicParams) -> DelayTable:
    """Solve the first-step equations for all W(n, m), 0 <= n < m <= n0.

    Row n = 0 sweeps m backward from n0 (where W(0, n0) = 1/mu_{n0}); each
    later row n uses row n - 1. A balk state of 0 yields an empty table.
    """
    n0 = strategy.balk_state
    lam = params.arrival_rate
    W = np.full((max(n0, 1), n0 + 1), np.nan)
    if n0 == 0:
        return DelayTable(0, W)
    mu = [policy.rate_at(m) for m in range(1, n0 + 1)]  # mu[m-1] = mu_m
    p = [strategy.prob(m) for m in range(n0 + 1)]
    for n in range(n0):
        for m in range(n0, n, -1):
            lp = lam * p[m]
            denom = lp + mu[m - 1]
            val = 1.0 / denom
            if m < n0:
                val += (lp / denom) * W[n, m + 1]
            if n >= 1:
                val += (mu[m - 1] / denom) * W[n - 1, m - 1]
            W[n, m] = val
    return DelayTable(n0, W)


def arrival_delay(table: DelayTable, policy: ServiceRatePolicy, n: int) -> float:
    """Expected sojourn W(n) of a customer who joins upon finding n present.

    For n = n0 the joiner enters at the balk state: every later arrival balks
    until the next departure, so the residual service is exponential with
    rate mu_{n0+1}.
    """
    n0 = table.n0
    if not (0 <= n <= n0):
        raise ValueError(f"arrival state {n} outside [0, {n0}]")
    if n <= n0 - 1:
        return table.w(n, n + 1)
    tail = table.w(n0 - 1, n0) if n0 >= 1 else 0.0
    return 1.0 / policy.rate_at(n0 + 1) + tail


def arrival_delays(table: DelayTable, policy: ServiceRatePolicy) -> list[float]:
    """W(n) for every n = 0..n0."""
    return [arrival_delay(table, policy, n) for n in range(table.n0 + 1)]


def closed_form_below_T(policy: ServiceRatePolicy, n: int) -> float:
    """Delay (n+1)/mu_low for a joiner at state n when the balk state stays
    at or below the service threshold, so only the low rate is ever used."""
    if policy.threshold_form is None:
        raise ValueError("closed form requires a two-rate threshold policy")
    if n < 0:
        raise ValueError("state must be nonnegative")
    _, mu_low, _ = policy.threshold_form
    return (n + 1) / mu_low
