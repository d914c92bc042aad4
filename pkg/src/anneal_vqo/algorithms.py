"""AQA, QAOA and EHQO drivers.

Layer convention shared by all drivers: layer ``j`` first applies the
problem phase ``exp(-i gamma_j H_P)`` and then the mixer
``exp(-i beta_j H_I)``. With ``beta_j = tau*A(j/p)`` and
``gamma_j = tau*B(j/p)`` the variational circuit is exactly the first-order
product-formula annealing circuit.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _kernels
from ._validation import (
    DIAGNOSTIC_MAX,
    MAX_QUBITS,
    check_positive,
    check_positive_int,
    check_qubits,
)
from .hamiltonian import (
    IsingModel,
    TwoSatInstance,
    diagonal_energies,
    ground_state_indices,
    two_sat_to_ising,
)
from .optimize import Budget, Tolerances, get_optimizer
from .schedule import VariationalParams, aqa_parameters, get_schedule
from .spectra import level_overlaps
from .statevector import StateVector, uniform_superposition

REFERENCE_MAX_QUBITS = 12
REFERENCE_MAX_TAU = 0.005


class Problem:
    """Diagonal energy table plus the lookups every driver needs."""

    def __init__(self, energies, n=None, model=None):
        energies = np.ascontiguousarray(energies, dtype=np.float64)
        n = energies.size.bit_length() - 1 if n is None else n
        check_qubits(n, MAX_QUBITS)
        if energies.size != 1 << n:
            raise ValueError(f"energy table of length {energies.size} is not 2**n")
        self.n = n
        self.model = model
        self.energies = energies
        self.levels, self.index = _kernels.phase_table(energies)
        self.ground_states = ground_state_indices(energies)
        self.ground_energy = float(energies[self.ground_states[0]])

    @property
    def degenerate(self):
        return self.ground_states.size > 1

    def success_probability(self, state):
        return float(np.sum(np.abs(state.amplitudes[self.ground_states]) ** 2))

    def evolve(self, params):
        psi = np.full(1 << self.n, (1 << self.n) ** -0.5, dtype=np.complex128)
        _kernels.apply_layers(
            psi, self.n, self.index, self.levels, params.beta, params.gamma, 0
        )
        return StateVector._wrap(psi, self.n)


def as_problem(X):
    """Accept a Problem, IsingModel, TwoSatInstance or energy table."""
    if isinstance(X, Problem):
        return X
    if isinstance(X, TwoSatInstance):
        X = two_sat_to_ising(X)
    if isinstance(X, IsingModel):
        check_qubits(X.n, MAX_QUBITS)
        return Problem(diagonal_energies(X), X.n, model=X)
    return Problem(np.asarray(X, dtype=np.float64))


def layers_for(t_a, tau):
    """Layer count for total time ``t_a`` at step ``tau``, rounded to nearest."""
    return max(1, int(math.floor(t_a / tau + 0.5)))


# -- AQA --------------------------------------------------------------------


@dataclass(frozen=True)
class AqaConfig:
    tau: float
    p: int
    schedule: str = "linear"

    def __post_init__(self):
        check_positive(self.tau, "tau")
        check_positive_int(self.p, "p")
        get_schedule(self.schedule)

    @property
    def t_a(self):
        return self.tau * self.p

    @classmethod
    def from_total_time(cls, t_a, tau, schedule="linear"):
        return cls(tau, layers_for(t_a, tau), schedule)


@dataclass
class AqaResult:
    state: StateVector
    success_probability: float
    degenerate: bool
    t_a: float
    params: VariationalParams


def run_aqa(model, config):
    """First-order product-formula annealing from ``|+>^n``."""
    problem = as_problem(model)
    params = aqa_parameters(config.tau, config.p, config.schedule)
    state = problem.evolve(params)
    return AqaResult(
        state=state,
        success_probability=problem.success_probability(state),
        degenerate=problem.degenerate,
        t_a=config.tau * config.p,
        params=params,
    )


def exact_evolution_reference(model, t_a, reference_tau=REFERENCE_MAX_TAU, schedule="linear"):
    """Fine-step stand-in for the time-ordered annealing evolution.

    Uses steps no longer than ``reference_tau`` with the schedule sampled
    at step midpoints and a symmetric mixer/phase/mixer splitting, which is
    second order in the step.
    """
    problem = as_problem(model)
    check_qubits(problem.n, REFERENCE_MAX_QUBITS, "reference qubit count")
    if not 0 < reference_tau <= REFERENCE_MAX_TAU:
        raise ValueError(f"reference_tau must lie in (0, {REFERENCE_MAX_TAU}]")
    if t_a < 0:
        raise ValueError("t_a must be non-negative")
    state = uniform_superposition(problem.n)
    if t_a == 0:
        return state
    steps = int(math.ceil(t_a / reference_tau - 1e-9))
    dt = t_a / steps
    sched = get_schedule(schedule)
    s = (np.arange(1, steps + 1) - 0.5) / steps
    half_x = 0.5 * dt * sched.A(s)
    phase = dt * sched.B(s)
    psi = state.amplitudes
    n = problem.n
    for j in range(steps):
        _kernels.apply_rotation(psi, n, half_x[j])
        _kernels.apply_phase(psi, problem.index, problem.levels, phase[j])
        _kernels.apply_rotation(psi, n, half_x[j])
    return state


@dataclass
class ScanResult:
    taus: np.ndarray
    ps: np.ndarray
    success: np.ndarray
    errors: dict = field(default_factory=dict)


def aqa_scan(model, tau_grid, p_grid, schedule="linear"):
    """Success probability of AQA on every ``(tau, p)`` cell.

    A failing cell is stored as NaN with its message in ``errors``.
    """
    problem = as_problem(model)
    taus = np.asarray(list(tau_grid), dtype=float)
    ps = np.asarray(list(p_grid), dtype=int)
    if taus.size == 0 or ps.size == 0:
        raise ValueError("scan grids must be nonempty")
    success = np.full((taus.size, ps.size), np.nan)
    errors = {}
    for a, tau in enumerate(taus):
        for b, p in enumerate(ps):
            try:
                cfg = AqaConfig(float(tau), int(p), schedule)
                success[a, b] = run_aqa(problem, cfg).success_probability
            except Exception as exc:  # noqa: BLE001 - recorded per cell
                errors[(a, b)] = f"{type(exc).__name__}: {exc}"
    return ScanResult(taus, ps, success, errors)


@dataclass
class TraceRecord:
    layer: int
    s: float
    overlaps: tuple
    energy: float


@dataclass
class OverlapTrace:
    tau: float
    p: int
    levels: int
    records: list

    def level_sum(self):
        return np.array([sum(r.overlaps) for r in self.records])

    def column(self, m):
        return np.array([r.overlaps[m] for r in self.records])


def overlap_trace(model, config, k=3):
    """Weight of the AQA state in the lowest ``k`` levels of H(j/p) after each layer.

    ``energy`` is the expectation of ``(1-s) H_I + s H_P`` at that layer.
    """
    problem = as_problem(model)
    check_qubits(problem.n, DIAGNOSTIC_MAX, "diagnostic qubit count")
    params = aqa_parameters(config.tau, config.p, config.schedule)
    n = problem.n
    psi = uniform_superposition(n).amplitudes
    records = []
    for j in range(config.p):
        _kernels.apply_phase(psi, problem.index, problem.levels, params.gamma[j])
        _kernels.apply_rotation(psi, n, params.beta[j])
        s = (j + 1) / config.p
        state = StateVector._wrap(psi, n)
        _, weights = level_overlaps(problem.energies, s, state, k)
        weights = tuple(float(w) for w in weights) + (0.0,) * (k - len(weights))
        energy = float(_kernels.mixed_energy(psi, n, problem.energies, 1.0 - s, s))
        records.append(TraceRecord(j + 1, s, weights, energy))
    return OverlapTrace(config.tau, config.p, k, records)


# -- variational drivers -------------------------------------------------------


def qaoa_state(model, params):
    """Layered ansatz state; identical to the AQA state for AQA-derived angles."""
    return as_problem(model).evolve(params)


class VariationalCost:
    """``<psi(theta)| (weight_x H_I + weight_p H_P) |psi(theta)>`` over flat angle vectors."""

    def __init__(self, problem, weight_x=0.0, weight_p=1.0):
        self.problem = problem
        self.weight_x = float(weight_x)
        self.weight_p = float(weight_p)

    @classmethod
    def interpolated(cls, problem, s):
        return cls(problem, 1.0 - s, s)

    def _split(self, x):
        x = np.ascontiguousarray(x, dtype=np.float64)
        p = x.size // 2
        return np.ascontiguousarray(x[:p]), np.ascontiguousarray(x[p:])

    def __call__(self, x):
        beta, gamma = self._split(x)
        pr = self.problem
        return _kernels.layered_energy(
            pr.n, pr.index, pr.levels, pr.energies, beta, gamma, self.weight_x, self.weight_p
        )

    def central_probes(self, x, step):
        beta, gamma = self._split(x)
        pr = self.problem
        return _kernels.central_probes(
            pr.n, pr.index, pr.levels, pr.energies, beta, gamma, float(step),
            self.weight_x, self.weight_p,
        )


@dataclass(frozen=True)
class InitStrategy:
    """How the first variational step is seeded.

    kind: ``epsilon`` (all angles = epsilon), ``zero``, ``aqa`` (annealing
    angles for ``tau`` and ``p_seed`` layers, resampled onto the target
    depth) or ``random`` (uniform on [0, pi) from ``seed``).
    """

    kind: str = "epsilon"
    epsilon: float = 1e-2
    tau: float = 0.5
    p_seed: int = None
    schedule: str = "linear"
    seed: int = None

    def __post_init__(self):
        if self.kind not in ("epsilon", "zero", "aqa", "random"):
            raise ValueError(f"unknown init strategy {self.kind!r}")

    def params(self, p, rng=None):
        p = check_positive_int(p, "p")
        if self.kind == "epsilon":
            return VariationalParams.filled(p, self.epsilon)
        if self.kind == "zero":
            return VariationalParams.filled(p, 0.0)
        if self.kind == "aqa":
            seed_p = self.p_seed or p
            params = aqa_parameters(self.tau, seed_p, self.schedule)
            return params if seed_p == p else params.resample(p)
        if rng is None:
            rng = np.random.default_rng(self.seed)
        return VariationalParams(rng.uniform(0.0, np.pi, p), rng.uniform(0.0, np.pi, p))


def random_parameters(p, rng):
    return InitStrategy("random").params(p, rng)


@dataclass
class QaoaResult:
    run: object
    params: VariationalParams
    success_probability: float
    initial_success_probability: float
    degenerate: bool


def _with_params(run):
    run.initial_params = VariationalParams.from_vector(run.initial_params)
    run.best_params = VariationalParams.from_vector(run.best_params)
    return run


def run_qaoa(model, init, optimizer="bfgs", budget=8000, tolerances=None, record_trace=True):
    """Minimize ``<H_P>`` over all ``2p`` angles starting from ``init``."""
    problem = as_problem(model)
    if not isinstance(init, VariationalParams):
        raise TypeError("init must be VariationalParams")
    minimize = get_optimizer(optimizer)
    cost = VariationalCost(problem)
    run = _with_params(
        minimize(cost, init.to_vector(), _budget(budget), tolerances or Tolerances(), record_trace)
    )
    state = problem.evolve(run.best_params)
    return QaoaResult(
        run=run,
        params=run.best_params,
        success_probability=problem.success_probability(state),
        initial_success_probability=problem.success_probability(problem.evolve(init)),
        degenerate=problem.degenerate,
    )


def _budget(b):
    return b if isinstance(b, Budget) else Budget(int(b))


# -- EHQO -------------------------------------------------------------------


def adaptive_depths(start, stop, step):
    """Depth list ``start, start+step, ..., stop``."""
    depths = list(range(start, stop + 1, step))
    if not depths or depths[-1] != stop:
        raise ValueError(f"range {start}..{stop} step {step} does not end at {stop}")
    return depths


@dataclass
class EhqoConfig:
    n_steps: int = 10
    depths: object = 25
    optimizer: str = "bfgs"
    intermediate_budget: int = 10_000
    final_budget: int = 50_000
    init: InitStrategy = field(default_factory=InitStrategy)
    tolerances: Tolerances = field(default_factory=Tolerances)
    record_overlaps: bool = True
    record_trace: bool = True

    def __post_init__(self):
        self.n_steps = check_positive_int(self.n_steps, "n_steps")
        if isinstance(self.depths, (int, np.integer)):
            self.depths = [int(self.depths)] * self.n_steps
        self.depths = [check_positive_int(d, "depth") for d in self.depths]
        if len(self.depths) != self.n_steps:
            raise ValueError(f"{len(self.depths)} depths given for {self.n_steps} steps")
        check_positive_int(self.intermediate_budget, "intermediate_budget")
        check_positive_int(self.final_budget, "final_budget")
        get_optimizer(self.optimizer)

    @property
    def adaptive(self):
        return len(set(self.depths)) > 1


@dataclass
class EhqoStep:
    step: int
    s: float
    p: int
    run: object
    initial_cost: float
    final_cost: float
    initial_overlaps: tuple
    final_ground_overlap: float
    success_probability: float


@dataclass
class EhqoResult:
    steps: list
    params: VariationalParams
    success_probability: float
    degenerate: bool

    @property
    def evaluations(self):
        return sum(st.run.evaluations_used for st in self.steps)


def run_ehqo(model, config, rng=None):
    """Stagewise minimization of ``<H(s_j)>`` for ``s_j = j / n_steps``.

    Each step starts from the previous step's best angles, resampled when
    the depth changes. Overlaps of the starting state with the two lowest
    levels of ``H(s_j)`` are recorded when the problem is small enough.
    """
    problem = as_problem(model)
    minimize = get_optimizer(config.optimizer)
    with_overlaps = config.record_overlaps and problem.n <= DIAGNOSTIC_MAX
    theta = config.init.params(config.depths[0], rng)
    steps = []
    for j in range(1, config.n_steps + 1):
        s = j / config.n_steps
        p_j = config.depths[j - 1]
        if theta.p != p_j:
            theta = theta.resample(p_j)
        cost = VariationalCost.interpolated(problem, s)
        start_state = problem.evolve(theta)
        overlaps = None
        if with_overlaps:
            _, w = level_overlaps(problem.energies, s, start_state, 2)
            overlaps = tuple(float(v) for v in w)
        budget = config.final_budget if j == config.n_steps else config.intermediate_budget
        run = _with_params(
            minimize(cost, theta.to_vector(), Budget(budget), config.tolerances, config.record_trace)
        )
        theta = run.best_params
        final_state = problem.evolve(theta)
        ground_overlap = None
        if with_overlaps:
            _, w = level_overlaps(problem.energies, s, final_state, 1)
            ground_overlap = float(w[0])
        steps.append(
            EhqoStep(
                step=j,
                s=s,
                p=p_j,
                run=run,
                initial_cost=run.initial_cost,
                final_cost=run.best_cost,
                initial_overlaps=overlaps,
                final_ground_overlap=ground_overlap,
                success_probability=problem.success_probability(final_state),
            )
        )
    return EhqoResult(
        steps=steps,
        params=theta,
        success_probability=steps[-1].success_probability,
        degenerate=problem.degenerate,
    )


__all__ = [
    "AqaConfig",
    "AqaResult",
    "EhqoConfig",
    "EhqoResult",
    "EhqoStep",
    "InitStrategy",
    "OverlapTrace",
    "Problem",
    "QaoaResult",
    "ScanResult",
    "TraceRecord",
    "VariationalCost",
    "adaptive_depths",
    "aqa_scan",
    "as_problem",
    "exact_evolution_reference",
    "layers_for",
    "overlap_trace",
    "qaoa_state",
    "random_parameters",
    "run_aqa",
    "run_ehqo",
    "run_qaoa",
]
