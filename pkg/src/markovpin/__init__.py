"""Renewal pinning models with finite-state Markov disorder.

Annealed free energies and critical curves come from the Perron root of a
tilted matrix series; quenched free energies from transfer-matrix
recursions; Model B from its strip-wise homogeneous limit.
"""

from ._kernels import BACKEND
from .exceptions import BudgetExceededError, CapExceededError, ConvergenceError, ModelError, TailBoundError
from .homogeneous import (HomogeneousSolution, contact_fraction, exact_homog_partition, free_energy_curve,
                          homog_log_partitions, homogeneous_free_energy)
from .model import (DisorderChain, DisorderPath, RenewalKernel, build_chain, build_kernel,
                    build_moving_average_chain, sample_path, stationary_distribution, strip_decompose,
                    two_state_chain)
from .modelb import (ScaledChainFamily, constrained_experiment, finite_N_experiment, limit_free_energy,
                     phase_diagram, pinning_cost_bound, scaled_family, scaled_matrix, thresholds, two_state_family)
from .quenched import (annealed_logZ, log_partitions, mc_quenched_free_energy, pinned_logZ, quenched_logZ,
                       strip_constrained_logZ)
from .spectral import (AnnealedSolution, annealed_lambdas, build_A, build_M, critical_curve, log_lambda, perron,
                       renewal_mass, solve_free_energy, tilted_kernel)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BudgetExceededError", "CapExceededError", "ConvergenceError", "ModelError", "TailBoundError",
    "HomogeneousSolution", "contact_fraction", "exact_homog_partition", "free_energy_curve",
    "homog_log_partitions", "homogeneous_free_energy",
    "DisorderChain", "DisorderPath", "RenewalKernel", "build_chain", "build_kernel", "build_moving_average_chain",
    "sample_path", "stationary_distribution", "strip_decompose", "two_state_chain",
    "ScaledChainFamily", "constrained_experiment", "finite_N_experiment", "limit_free_energy", "phase_diagram",
    "pinning_cost_bound", "scaled_family", "scaled_matrix", "thresholds", "two_state_family",
    "annealed_logZ", "log_partitions", "mc_quenched_free_energy", "pinned_logZ", "quenched_logZ",
    "strip_constrained_logZ",
    "AnnealedSolution", "annealed_lambdas", "build_A", "build_M", "critical_curve", "log_lambda", "perron",
    "renewal_mass", "solve_free_energy", "tilted_kernel",
]
