"""Domain types: service rate policies, joining strategies, economic parameters.

All types are immutable after construction and safe to share across workers.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

PROB_TOL = 1e-12


class InstanceError(ValueError):
    """Invalid instance document or parameter set."""


@dataclass(frozen=True)
class ServiceRatePolicy:
    """Nondecreasing service rate sequence with a constant tail.

    ``prefix`` holds the rates for states 1..K; every state beyond K is
    served at ``tail_rate``, which is also the supremum M of the sequence.
    ``threshold_form`` is set when the policy is a two-rate policy
    (T, mu_low, mu_high): rate mu_low for 1 <= n <= T, mu_high above.
    """

    prefix: tuple[float, ...]
    tail_rate: float
    threshold_form: tuple[int, float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(float(r) for r in self.prefix))
        object.__setattr__(self, "tail_rate", float(self.tail_rate))
        if self.tail_rate <= 0.0:
            raise InstanceError("tail rate must be positive")
        prev = 0.0
        for r in self.prefix:
            if r <= 0.0:
                raise InstanceError("service rates must be positive")
            if r < prev:
                raise InstanceError("service rates must be nondecreasing")
            prev = r
        if prev > self.tail_rate:
            raise InstanceError("prefix rates must not exceed the tail rate")
        if self.threshold_form is not None:
            T, mu_low, mu_high = self.threshold_form
            if not (isinstance(T, int) and T >= 1):
                raise InstanceError("service threshold T must be a positive integer")
            if not (0.0 < mu_low < mu_high):
                raise InstanceError("two-rate policy needs 0 < mu_low < mu_high")
            if self.prefix != (float(mu_low),) * T or self.tail_rate != float(mu_high):
                raise InstanceError("threshold_form inconsistent with rate sequence")
            object.__setattr__(self, "threshold_form", (T, float(mu_low), float(mu_high)))

    @classmethod
    def constant(cls, mu: float) -> "ServiceRatePolicy":
        return cls((), mu)

    @classmethod
    def two_rate(cls, T: int, mu_low: float, mu_high: float) -> "ServiceRatePolicy":
        """Serve at mu_low while at most T customers are present, else mu_high."""
        return cls((float(mu_low),) * int(T), float(mu_high), (int(T), float(mu_low), float(mu_high)))

    @property
    def max_rate(self) -> float:
        """The supremum M of the rate sequence."""
        return self.tail_rate

    def rate_at(self, n: int) -> float:
        """Service rate when n customers are present; defined for n >= 1."""
        if n < 1:
            raise ValueError("service rate is undefined with no customers present")
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        return self.tail_rate

    def is_constant_through(self, n: int) -> bool:
        """True when states 1..n all share the same rate."""
        return n <= 1 or all(self.rate_at(k) == self.rate_at(1) for k in range(2, n + 1))


@dataclass(frozen=True)
class EconomicParams:
    """Arrival rate and reward/cost economics; r_tilde = reward / wait_cost."""

    arrival_rate: float
    reward: float
    wait_cost: float
    r_tilde: float = field(init=False)

    def __post_init__(self):
        if self.arrival_rate <= 0.0:
            raise InstanceError("arrival rate must be positive")
        if self.wait_cost <= 0.0:
            raise InstanceError("waiting cost must be positive")
        if self.reward < 0.0:
            raise InstanceError("reward must be nonnegative")
        object.__setattr__(self, "r_tilde", self.reward / self.wait_cost)


def _snap_probability(p: float) -> float:
    if -PROB_TOL <= p <= PROB_TOL:
        return 0.0
    if 1.0 - PROB_TOL <= p <= 1.0 + PROB_TOL:
        return 1.0
    if 0.0 < p < 1.0:
        return p
    raise InstanceError(f"join probability {p!r} outside [0, 1]")


@dataclass(frozen=True)
class JoinStrategy:
    """Join-probability vector p_0..p_{n0} with p_{n0} = 0.

    The vector is canonical: it ends at the first zero (the balk state),
    and all later states implicitly prescribe balking.
    """

    probs: tuple[float, ...]

    def __post_init__(self):
        snapped = tuple(_snap_probability(float(p)) for p in self.probs)
        try:
            n0 = snapped.index(0.0)
        except ValueError:
            raise InstanceError("strategy must balk at some finite state") from None
        object.__setattr__(self, "probs", snapped[: n0 + 1])

    @property
    def balk_state(self) -> int:
        """First state where joining has probability zero."""
        return len(self.probs) - 1

    def prob(self, n: int) -> float:
        """Join probability at state n (zero beyond the balk state)."""
        if n < 0:
            raise ValueError("state must be nonnegative")
        return self.probs[n] if n < len(self.probs) else 0.0


@dataclass(frozen=True)
class ThresholdStrategy:
    """Threshold joining strategy encoded by a single real x >= 0.

    Integer x is the pure threshold strategy with balk state x; non-integer
    x randomizes at state floor(x) with probability x - floor(x).
    """

    x: float

    def __post_init__(self):
        if self.x < 0.0:
            raise InstanceError("threshold x must be nonnegative")
        object.__setattr__(self, "x", float(self.x))

    def join_strategy(self) -> JoinStrategy:
        return strategy_from_x(self.x)


def strategy_from_x(x: float) -> JoinStrategy:
    """Build the join strategy induced by threshold x.

    Integer x: join below x, balk at x. Non-integer x: balk state is
    floor(x) + 1, with join probability x - floor(x) at state floor(x).
    """
    x = float(x)
    if x < 0.0:
        raise InstanceError("threshold x must be nonnegative")
    k = math.floor(x)
    frac = x - k
    if frac == 0.0:
        return JoinStrategy((1.0,) * k + (0.0,))
    return JoinStrategy((1.0,) * k + (frac, 0.0))


def balk_upper_bound(params: EconomicParams, policy: ServiceRatePolicy) -> int:
    """Uniform upper bound floor(r_tilde * M) + 1 on the first state where
    joining has strictly negative net benefit, for any strategy."""
    return math.floor(params.r_tilde * policy.max_rate) + 1


_TOP_KEYS = {"lambda", "reward", "wait_cost", "policy"}
_PREFIX_KEYS = {"prefix", "tail"}
_TWO_RATE_KEYS = {"T", "mu_low", "mu_high"}


def parse_instance(doc: dict) -> tuple[EconomicParams, ServiceRatePolicy]:
    """Parse a problem-instance document; unknown keys are rejected."""
    if not isinstance(doc, dict):
        raise InstanceError("instance must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise InstanceError(f"unknown instance keys: {sorted(unknown)}")
    missing = _TOP_KEYS - set(doc)
    if missing:
        raise InstanceError(f"missing instance keys: {sorted(missing)}")
    try:
        params = EconomicParams(float(doc["lambda"]), float(doc["reward"]), float(doc["wait_cost"]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"bad economic parameters: {exc}") from None
    pol = doc["policy"]
    if not isinstance(pol, dict):
        raise InstanceError("policy must be a JSON object")
    keys = set(pol)
    if keys == _PREFIX_KEYS:
        prefix = pol["prefix"]
        if not isinstance(prefix, list):
            raise InstanceError("policy prefix must be a list")
        policy = ServiceRatePolicy(tuple(float(r) for r in prefix), float(pol["tail"]))
    elif keys == _TWO_RATE_KEYS:
        T = pol["T"]
        if not isinstance(T, int) or isinstance(T, bool):
            raise InstanceError("policy T must be an integer")
        policy = ServiceRatePolicy.two_rate(T, float(pol["mu_low"]), float(pol["mu_high"]))
    else:
        raise InstanceError(f"policy keys must be {sorted(_PREFIX_KEYS)} or {sorted(_TWO_RATE_KEYS)}, got {sorted(keys)}")
    return params, policy


def load_instance(path) -> tuple[EconomicParams, ServiceRatePolicy]:
    """Load and validate an instance JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InstanceError(f"cannot read instance file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InstanceError(f"instance file is not valid JSON: {exc}") from None
    return parse_instance(doc)
