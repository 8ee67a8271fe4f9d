"""Initial-jump method for singularly perturbed Volterra integro-differential equations.

Solves the perturbed Cauchy problem and the jump-corrected degenerate problem
along characteristics and measures how their difference shrinks with eps.
"""

from .analysis import (ConvergenceReport, DifferenceReport, SolverSettings, Study,
                       compute_t0, convergence_study, difference_report, fit_layer_decay,
                       reconstruct_partials)
from .characteristics import (Characteristic, CharacteristicFan, build_fan, first_integral,
                              trace_forward)
from .expr import Expression, evaluate, parse
from .jumps import JumpMode, JumpPair, compute_delta, compute_delta0, jump_consistency_defect
from .problem import ProblemSpec, ValidatedProblem, validate
from .solver import (Mesh, TrajectorySolution, build_mesh, solve_degenerate,
                     solve_oracle_constant, solve_perturbed)

__version__ = "0.1.0"
