"""Fair allocation of products to re-sellers under two-sided cardinality bounds.

Instances pair an m x n utility matrix W (expertise times revenue) with
bundle-size bounds L1..L2 per re-seller and copy-count bounds R1..R2 per
product. The package provides Nash-welfare heuristics, baselines, an exact
branch-and-bound oracle, fairness checks (EF1/EQ1), a cut-based integer
programming export, seeded instance generators, and a CLI (``resalloc``).

A compiled extension accelerates the hot search kernels when available; a
pure-Python fallback with identical results is selected automatically
(inspect ``resalloc.BACKEND``).
"""

from ._backend import BACKEND
from .algorithms import (ALGORITHM_NAMES, AllocationResult, OracleResult,
                         exact_nash_oracle, greedy_nash, greedy_replacement,
                         greedy_revenue, lpt_allocate, round_robin,
                         run_algorithm, seal, uncons_greedy_nash)
from .datagen import (GenSpec, GridEntry, ParamGrid, build_param_grid,
                      generate_synthetic, paper_instance)
from .fairness import (Eq1SearchResult, FairnessVerdict, check_ef1, check_eq1,
                       eq1_exists)
from .metrics import (MetricsReport, approximation_ratio, gini, income_gap,
                      measure, nash_welfare, total_revenue,
                      violation_percentage)
from .milp import (MilpModel, ScaledInstance, build_nashmax_model,
                   log_cut_envelope, read_solution, scale_utilities,
                   solve_model_by_enumeration, write_lp_file, write_lp_text)
from .model import (Allocation, CardinalityBounds, FeasibilityReport, Instance,
                    InstanceError, Violation, allocation_from_matrix,
                    check_feasibility, copy_counts, is_feasible_allocation,
                    make_allocation, make_instance, utilities, utility,
                    validate_instance)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHM_NAMES", "Allocation", "AllocationResult", "BACKEND",
    "CardinalityBounds", "Eq1SearchResult", "FairnessVerdict",
    "FeasibilityReport", "GenSpec", "GridEntry", "Instance", "InstanceError",
    "MetricsReport", "MilpModel", "OracleResult", "ParamGrid",
    "ScaledInstance", "Violation", "allocation_from_matrix",
    "approximation_ratio", "build_nashmax_model", "build_param_grid",
    "check_ef1", "check_eq1", "check_feasibility", "copy_counts",
    "eq1_exists", "exact_nash_oracle", "generate_synthetic", "gini",
    "greedy_nash", "greedy_replacement", "greedy_revenue", "income_gap",
    "is_feasible_allocation", "log_cut_envelope", "lpt_allocate",
    "make_allocation", "make_instance", "measure", "nash_welfare",
    "paper_instance", "read_solution", "round_robin", "run_algorithm",
    "scale_utilities", "seal", "solve_model_by_enumeration", "total_revenue",
    "uncons_greedy_nash", "utilities", "utility", "validate_instance",
    "violation_percentage", "write_lp_file", "write_lp_text",
    "__version__",
]
