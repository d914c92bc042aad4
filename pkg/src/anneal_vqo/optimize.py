"""Budgeted local optimizers: BFGS with central-difference gradients and Nelder-Mead.

Every call of the cost function, including gradient probes and line-search
trials, is charged against a :class:`Budget`. Both optimizers return the
best point they evaluated, never a worse one.

A cost object may expose ``central_probes(x, step)`` returning an array of
shape ``(dim, 2)`` with ``cost(x + step*e_k)`` and ``cost(x - step*e_k)``;
the gradient routine then evaluates all probes in one call. Each probe is
still charged and recorded individually.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_vector
from .exceptions import NumericError

CONVERGED = "converged"
BUDGET_EXHAUSTED = "budget_exhausted"
STALLED = "stalled"

FD_STEP = 1e-6


@dataclass
class Budget:
    max_evaluations: int
    evaluations_used: int = 0

    def __post_init__(self):
        if int(self.max_evaluations) < 1:
            raise ValueError("budget must allow at least one evaluation")
        self.max_evaluations = int(self.max_evaluations)

    @property
    def remaining(self):
        return self.max_evaluations - self.evaluations_used


@dataclass
class Tolerances:
    gtol: float = 1e-8
    xatol: float = 1e-8
    ftol: float = 0.0
    fd_step: float = FD_STEP
    max_backtracks: int = 40


@dataclass
class OptimizationRun:
    initial_params: object
    best_params: object
    initial_cost: float
    best_cost: float
    termination: str
    evaluations_used: int
    iterations: int
    trace: list = field(default_factory=list, repr=False)

    def running_best(self):
        costs = np.array([c for _, c in self.trace])
        return np.minimum.accumulate(costs) if costs.size else costs


class _Exhausted(Exception):
    pass


class _Evaluator:
    """Counting, tracing, best-seen wrapper around a cost function."""

    def __init__(self, cost, budget, record_trace=True):
        self.cost = cost
        self.budget = budget
        self.record_trace = record_trace
        self.trace = []
        self.best_x = None
        self.best_f = np.inf
        self.first_f = None

    def _record(self, x, f):
        if not np.isfinite(f):
            raise NumericError(f"cost returned {f!r} at evaluation {self.budget.evaluations_used}")
        if self.record_trace:
            self.trace.append((self.budget.evaluations_used, f))
        if self.first_f is None:
            self.first_f = f
        if f < self.best_f:
            self.best_f = f
            self.best_x = np.array(x, dtype=float)

    def __call__(self, x):
        if self.budget.remaining <= 0:
            raise _Exhausted
        f = float(self.cost(x))
        self.budget.evaluations_used += 1
        self._record(x, f)
        return f

    def gradient(self, x, step):
        dim = x.size
        batch = getattr(self.cost, "central_probes", None)
        if batch is not None and self.budget.remaining >= 2 * dim:
            values = np.asarray(batch(x, step), dtype=float)
            for k in range(dim):
                for col, sign in ((0, 1.0), (1, -1.0)):
                    self.budget.evaluations_used += 1
                    xk = x.copy()
                    xk[k] += sign * step
                    self._record(xk, values[k, col])
        else:
            values = np.empty((dim, 2))
            for k in range(dim):
                for col, sign in ((0, 1.0), (1, -1.0)):
                    xk = x.copy()
                    xk[k] += sign * step
                    values[k, col] = self(xk)
        return (values[:, 0] - values[:, 1]) / (2.0 * step)


def _as_budget(budget):
    return budget if isinstance(budget, Budget) else Budget(int(budget))


def _finish(ev, x0, f0, termination, iterations):
    return OptimizationRun(
        initial_params=np.array(x0, dtype=float),
        best_params=ev.best_x.copy(),
        initial_cost=f0,
        best_cost=ev.best_f,
        termination=termination,
        evaluations_used=ev.budget.evaluations_used,
        iterations=iterations,
        trace=ev.trace,
    )


def minimize_bfgs(cost, x0, budget, tolerances=None, record_trace=True):
    """Quasi-Newton minimization with Armijo backtracking.

    Gradients are central differences with step ``tolerances.fd_step``;
    each gradient costs ``2 * len(x0)`` evaluations. The inverse Hessian is
    reset to the identity when a step fails; a failed steepest-descent step
    ends the run as ``stalled``.
    """
    tol = tolerances or Tolerances()
    x0 = check_vector(x0, "x0")
    x = x0.copy()
    budget = _as_budget(budget)
    ev = _Evaluator(cost, budget, record_trace)
    if budget.remaining <= 0:
        raise ValueError("budget already exhausted")
    f0 = ev(x)
    f = f0
    iterations = 0
    eye = np.eye(x.size)
    try:
        g = ev.gradient(x, tol.fd_step)
        H = eye.copy()
        fresh = True
        while True:
            if np.max(np.abs(g)) < tol.gtol:
                return _finish(ev, x0, f0, CONVERGED, iterations)
            d = -H @ g
            slope = float(g @ d)
            if slope >= 0:
                H, fresh = eye.copy(), True
                d = -g
                slope = -float(g @ g)
            alpha = 1.0
            for _ in range(tol.max_backtracks):
                x_new = x + alpha * d
                f_new = ev(x_new)
                if f_new <= f + 1e-4 * alpha * slope:
                    break
                alpha *= 0.5
            else:
                if fresh:
                    return _finish(ev, x0, f0, STALLED, iterations)
                H, fresh = eye.copy(), True
                continue
            iterations += 1
            g_new = ev.gradient(x_new, tol.fd_step)
            s = x_new - x
            y = g_new - g
            sy = float(s @ y)
            if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
                if fresh:
                    H = eye * (sy / float(y @ y))
                rho = 1.0 / sy
                V = eye - rho * np.outer(s, y)
                H = V @ H @ V.T + rho * np.outer(s, s)
                fresh = False
            f_prev = f
            x, f, g = x_new, f_new, g_new
            if tol.ftol > 0 and abs(f_prev - f) <= tol.ftol * max(1.0, abs(f)):
                return _finish(ev, x0, f0, CONVERGED, iterations)
    except _Exhausted:
        return _finish(ev, x0, f0, BUDGET_EXHAUSTED, iterations)


def initial_simplex(x0, nonzdelt=0.05, zdelt=0.00025):
    """``x0`` plus one vertex per coordinate displaced by 5% (or 0.00025 if zero)."""
    dim = x0.size
    sim = np.tile(x0, (dim + 1, 1)).astype(float)
    for k in range(dim):
        sim[k + 1, k] = (1 + nonzdelt) * x0[k] if x0[k] != 0 else zdelt
    return sim


def minimize_nelder_mead(cost, x0, budget, tolerances=None, record_trace=True):
    """Downhill simplex with reflection 1, expansion 2, contraction 0.5, shrink 0.5.

    Stops when every vertex lies within ``tolerances.xatol`` (max norm) of
    the best vertex. A run that never improves on ``cost(x0)`` is reported
    as ``stalled``.
    """
    tol = tolerances or Tolerances()
    rho, chi, gam, sigma = 1.0, 2.0, 0.5, 0.5
    x0 = check_vector(x0, "x0")
    budget = _as_budget(budget)
    ev = _Evaluator(cost, budget, record_trace)
    iterations = 0
    try:
        sim = initial_simplex(x0)
        fsim = np.array([ev(v) for v in sim])
        f0 = fsim[0]
        while True:
            order = np.argsort(fsim, kind="stable")
            sim, fsim = sim[order], fsim[order]
            if np.max(np.abs(sim[1:] - sim[0])) <= tol.xatol:
                status = CONVERGED if ev.best_f < f0 else STALLED
                return _finish(ev, x0, f0, status, iterations)
            iterations += 1
            centroid = sim[:-1].mean(axis=0)
            xr = centroid + rho * (centroid - sim[-1])
            fr = ev(xr)
            shrink = False
            if fr < fsim[0]:
                xe = centroid + chi * (xr - centroid)
                fe = ev(xe)
                if fe < fr:
                    sim[-1], fsim[-1] = xe, fe
                else:
                    sim[-1], fsim[-1] = xr, fr
            elif fr < fsim[-2]:
                sim[-1], fsim[-1] = xr, fr
            elif fr < fsim[-1]:
                xc = centroid + gam * (xr - centroid)
                fc = ev(xc)
                if fc <= fr:
                    sim[-1], fsim[-1] = xc, fc
                else:
                    shrink = True
            else:
                xcc = centroid - gam * (centroid - sim[-1])
                fcc = ev(xcc)
                if fcc < fsim[-1]:
                    sim[-1], fsim[-1] = xcc, fcc
                else:
                    shrink = True
            if shrink:
                for k in range(1, sim.shape[0]):
                    sim[k] = sim[0] + sigma * (sim[k] - sim[0])
                    fsim[k] = ev(sim[k])
    except _Exhausted:
        if ev.best_x is None:
            raise ValueError("budget too small to evaluate the starting point")
        return _finish(ev, x0, ev.first_f, BUDGET_EXHAUSTED, iterations)


OPTIMIZERS = {
    "bfgs": minimize_bfgs,
    "nelder-mead": minimize_nelder_mead,
}


def get_optimizer(name):
    try:
        return OPTIMIZERS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown optimizer {name!r}; known: {sorted(OPTIMIZERS)}") from None
