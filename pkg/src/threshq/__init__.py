"""Threshold equilibria for observable queues with state-dependent service rates."""

from .model import (
    EconomicParams,
    InstanceError,
    JoinStrategy,
    ServiceRatePolicy,
    ThresholdStrategy,
    balk_upper_bound,
    load_instance,
    parse_instance,
    strategy_from_x,
)
from .delay import DelayTable, arrival_delay, arrival_delays, closed_form_below_T, solve_delay_table
from .equilibrium import (
    CandidateDiagnostic,
    EquilibriumReport,
    best_response,
    enumerate_pure_equilibria,
    find_mixed_equilibria,
    is_pure_equilibrium,
    marginal_delay,
    net_benefit,
    pure_candidate_range,
    pure_marginal_delay,
    sweep_mixed,
    sweep_pure,
    threshold_policy_below_T,
)
from .sim import CouplingOutcome, SimConfig, SojournEstimate, run_coupling, simulate_sojourn

__all__ = [
    "EconomicParams",
    "InstanceError",
    "JoinStrategy",
    "ServiceRatePolicy",
    "ThresholdStrategy",
    "balk_upper_bound",
    "load_instance",
    "parse_instance",
    "strategy_from_x",
    "DelayTable",
    "arrival_delay",
    "arrival_delays",
    "closed_form_below_T",
    "solve_delay_table",
    "CandidateDiagnostic",
    "EquilibriumReport",
    "best_response",
    "enumerate_pure_equilibria",
    "find_mixed_equilibria",
    "is_pure_equilibrium",
    "marginal_delay",
    "net_benefit",
    "pure_candidate_range",
    "pure_marginal_delay",
    "sweep_mixed",
    "sweep_pure",
    "threshold_policy_below_T",
    "CouplingOutcome",
    "SimConfig",
    "SojournEstimate",
    "run_coupling",
    "simulate_sojourn",
]
