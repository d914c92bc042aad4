"""Scikit-learn style wrappers around the AQA, QAOA and EHQO drivers.

``fit`` takes a single problem (TwoSatInstance, IsingModel or diagonal
energy table) and stores the fitted angles. Afterwards

* ``predict_proba(X)`` gives the basis-state distribution of the fitted
  circuit on ``X``,
* ``predict(X)`` the most likely assignment as a boolean array (``True``
  means the variable is true),
* ``score(X)`` the success probability on ``X``.

Hyperparameters follow the usual conventions, so ``get_params``,
``set_params`` and ``sklearn.base.clone`` work.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .algorithms import (
    AqaConfig,
    EhqoConfig,
    InitStrategy,
    as_problem,
    run_aqa,
    run_ehqo,
    run_qaoa,
)
from .hamiltonian import assignment_from_index
from .optimize import Tolerances


class _AnsatzMixin:
    """Prediction helpers shared by every estimator with a ``params_`` attribute."""

    def _state(self, X):
        check_is_fitted(self, "params_")
        problem = as_problem(X)
        if problem.n != self.n_qubits_:
            raise ValueError(f"fitted on {self.n_qubits_} qubits, got {problem.n}")
        return problem, problem.evolve(self.params_)

    def predict_proba(self, X):
        _, state = self._state(X)
        return state.probabilities()

    def predict(self, X):
        problem, state = self._state(X)
        z = int(np.argmax(state.probabilities()))
        return np.array(assignment_from_index(z, problem.n))

    def score(self, X, y=None):
        problem, state = self._state(X)
        return problem.success_probability(state)

    def fit_predict(self, X, y=None):
        return self.fit(X).predict(X)


class AQA(_AnsatzMixin, BaseEstimator):
    """Product-formula annealing with free step ``tau`` and layer count ``p``."""

    def __init__(self, tau=0.5, p=25, schedule="linear"):
        self.tau = tau
        self.p = p
        self.schedule = schedule

    def fit(self, X, y=None):
        problem = as_problem(X)
        result = run_aqa(problem, AqaConfig(self.tau, self.p, self.schedule))
        self.params_ = result.params
        self.n_qubits_ = problem.n
        self.success_probability_ = result.success_probability
        self.degenerate_ = result.degenerate
        self.t_a_ = result.t_a
        return self


class QAOA(_AnsatzMixin, BaseEstimator):
    """Layered variational ansatz minimizing the problem energy.

    init: ``"aqa"`` (annealing angles for ``tau``), ``"random"`` (uniform on
    [0, pi) from ``random_state``), ``"epsilon"`` or ``"zero"``.
    """

    def __init__(
        self,
        p=25,
        init="aqa",
        tau=0.5,
        schedule="linear",
        optimizer="bfgs",
        max_evaluations=8000,
        random_state=None,
    ):
        self.p = p
        self.init = init
        self.tau = tau
        self.schedule = schedule
        self.optimizer = optimizer
        self.max_evaluations = max_evaluations
        self.random_state = random_state

    def fit(self, X, y=None):
        problem = as_problem(X)
        strategy = InitStrategy(self.init, tau=self.tau, schedule=self.schedule)
        rng = np.random.default_rng(self.random_state)
        init = strategy.params(self.p, rng)
        result = run_qaoa(problem, init, self.optimizer, self.max_evaluations, Tolerances())
        self.params_ = result.params
        self.n_qubits_ = problem.n
        self.initial_params_ = init
        self.run_ = result.run
        self.success_probability_ = result.success_probability
        self.initial_success_probability_ = result.initial_success_probability
        self.degenerate_ = result.degenerate
        return self


class EHQO(_AnsatzMixin, BaseEstimator):
    """Stagewise optimization through ``n_steps`` interpolated Hamiltonians.

    ``depths`` overrides ``p`` with a per-step depth list (adaptive depth).
    """

    def __init__(
        self,
        n_steps=10,
        p=25,
        depths=None,
        init="epsilon",
        epsilon=1e-2,
        tau=0.5,
        optimizer="bfgs",
        intermediate_budget=10_000,
        final_budget=50_000,
        record_overlaps=True,
        random_state=None,
    ):
        self.n_steps = n_steps
        self.p = p
        self.depths = depths
        self.init = init
        self.epsilon = epsilon
        self.tau = tau
        self.optimizer = optimizer
        self.intermediate_budget = intermediate_budget
        self.final_budget = final_budget
        self.record_overlaps = record_overlaps
        self.random_state = random_state

    def _config(self):
        return EhqoConfig(
            n_steps=self.n_steps,
            depths=list(self.depths) if self.depths is not None else self.p,
            optimizer=self.optimizer,
            intermediate_budget=self.intermediate_budget,
            final_budget=self.final_budget,
            init=InitStrategy(self.init, epsilon=self.epsilon, tau=self.tau, p_seed=self.p),
            record_overlaps=self.record_overlaps,
        )

    def fit(self, X, y=None):
        problem = as_problem(X)
        result = run_ehqo(problem, self._config(), np.random.default_rng(self.random_state))
        self.params_ = result.params
        self.n_qubits_ = problem.n
        self.steps_ = result.steps
        self.success_probability_ = result.success_probability
        self.degenerate_ = result.degenerate
        return self
