"""Annealing-inspired variational optimization on 2-SAT Ising instances."""

import sys

from .algorithms import (
    AqaConfig,
    EhqoConfig,
    InitStrategy,
    Problem,
    VariationalCost,
    adaptive_depths,
    aqa_scan,
    exact_evolution_reference,
    overlap_trace,
    qaoa_state,
    run_aqa,
    run_ehqo,
    run_qaoa,
)
from .estimators import AQA, EHQO, QAOA
from .exceptions import (
    AnnealVQOError,
    CapacityError,
    DimensionError,
    GenerationError,
    InvalidInstanceError,
    NumericError,
    ParseError,
)
from .hamiltonian import (
    IsingModel,
    TwoSatInstance,
    assignment_from_index,
    classical_ground_state,
    diagonal_energies,
    parse_dimacs,
    read_dimacs,
    two_sat_to_ising,
    write_dimacs,
)
from .instances import (
    InstanceEnsemble,
    count_satisfying,
    generate_ensemble,
    generate_hard_instance,
    load_ensemble,
    save_ensemble,
)
from .optimize import Budget, OptimizationRun, Tolerances, minimize_bfgs, minimize_nelder_mead
from .schedule import AnnealingSchedule, VariationalParams, aqa_parameters
from .spectra import level_overlaps, locate_minimum_gap, lowest_eigenstates, minimum_gap, spectrum_trace
from .statevector import StateVector, basis_state, uniform_superposition

__version__ = "0.1.0"

__all__ = [
    name for name, obj in list(globals().items())
    if not name.startswith("_") and not isinstance(obj, type(sys))
]
