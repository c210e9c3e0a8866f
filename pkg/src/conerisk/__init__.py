"""Exact deciders for dynamic coherent risk measures on finite filtered
probability spaces: predictable time consistency, predictable
representability by numeraires, and predictable m-stability of the dual
cone, all in arbitrary-precision arithmetic."""

__version__ = "0.1.0"

from .consistency import (EquivalenceReport, TheoremViolationError, decompose,
                          epsilon, is_predictably_represented,
                          is_v_time_consistent, theorem_main_report,
                          validate_decomposition)
from .corpus import (Lcg, ScenarioSpec, build_avar4, build_haezendonck4,
                     build_scenario, build_txcost, random_scenario)
from .market import NumeraireVec, k_cone, portfolio_cone, sackv_check
from .risk import RepresentingSet, RiskMeasure, acceptance_cone, rho
from .space import FilteredSpace, Measure, RandomVec, StoppingTime
from .stability import (DualCone, crucial_claim_check, is_predictably_stable,
                        lifted_acceptance_dual, paste, predictable_preimage,
                        stable_hull, vstability_witness_search)

__all__ = [n for n in dir() if not n.startswith("_")]
