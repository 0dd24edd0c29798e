"""Optimal adaptive contracts for delegating work under costly two-tier inspection.

A principal delegates a task to an agent who privately picks an action. A
free coarse signal is always observed; a refined outcome can be bought by
inspecting. The package computes inspection policies and payments that make
a chosen action the agent's best response at least cost.
"""

from .combined import CombinedDistribution, combined_distribution, combined_payments
from .det_solvers import (BEST, SolveReport, brute_force_optimal, isop_dual_check,
                          prune_unpaid_inspections, solve_constant_actions, solve_isop)
from .errors import (EnumerationTooLarge, InfeasibleTarget, PreconditionViolated,
                     SearchGuardExceeded)
from .generators import (SWEBENCH_PROFILES, Graph, ModelProfile, gen_beta_binomial_setting,
                         gen_binomial_setting, gen_independent_set_instance, perturb_dirichlet)
from .instance_io import load_fixture, load_setting, save_setting
from .lp_core import LpProblem, LpSolution, LpStatus, NumericalFailure, solve_lp
from .minpay import (INFEASIBLE, Support, Variant, VariantConstraints,
                     check_variant_constraints, minpay_fixed_policy, minpay_total_cost)
from .model import (Contract, Setting, ValidationReport, best_response, check_isop,
                    check_mlrp, check_symmetric_isop, expected_inspection_cost,
                    expected_payment, expected_reward, first_best, principal_utility,
                    validate_setting)
from .randomized import (ComiSupremum, GridConfig, comi_scale_down, comi_supremum,
                         det_to_uni, search_randomized, to_always_inspect)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
