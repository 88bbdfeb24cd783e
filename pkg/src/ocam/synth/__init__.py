"""Synthetic scenario generation and brute-force oracles."""
from .oracles import brute_force_tau, brute_force_td_stock, permutation_mwu_p
from .rng import SplitMix64
from .scenario import Scenario, generate_scenario, write_scenario

__all__ = [
    "Scenario",
    "SplitMix64",
    "brute_force_tau",
    "brute_force_td_stock",
    "generate_scenario",
    "permutation_mwu_p",
    "write_scenario",
]
