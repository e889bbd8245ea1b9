"""Optimal distributed output-feedback LQG control for two interconnected
systems over an acyclic (lower block-triangular) structure."""

from .baselines import (ComparisonReport, centralized_lqg,
                        common_info_controller, compare)
from .core import (BlockDims, CostModel, NoiseModel, PartitionedSystem,
                   ProblemInstance, Tolerances, Violation, load_problem,
                   make_instance, random_instance, save_problem, validate)
from .coupled import CoupledSolution, ScriptNoise, build_script_noise, solve_coupled
from .errors import (ConvergenceError, DefinitenessError, DimensionError,
                     DlqgError, InstabilityError, NoiseModelError, ParseError,
                     PipelineError, SolverError, ValidationFailure)
from .estimator import DistributedLQG
from .evaluation import (ClosedLoopModel, DecompositionReport, analytic_cost,
                         closed_loop, cost_decomposition, simulate)
from .oracle import OracleResult, finite_horizon_oracle
from .riccati import (ControlDareSolution, EstimationDareSolution,
                      solve_control_dare, solve_dlyap, solve_estimation_dare,
                      spectral_radius)
from .synthesis import (BlockStructure, ControllerRealization, GainSet,
                        assemble_realization, check_information_pattern,
                        load_controller, save_controller, synthesize)

__version__ = "0.1.0"
