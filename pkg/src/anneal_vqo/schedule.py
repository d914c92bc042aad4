"""Annealing schedules and layered ansatz parameters."""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive, check_positive_int


@dataclass(frozen=True)
class AnnealingSchedule:
    """Mixer weight ``A(s)`` and problem weight ``B(s)`` on ``s in [0, 1]``."""

    kind: str = "linear"

    def __post_init__(self):
        if self.kind not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.kind!r}; known: {sorted(SCHEDULES)}")

    def A(self, s):
        return SCHEDULES[self.kind][0](np.asarray(s, dtype=float))

    def B(self, s):
        return SCHEDULES[self.kind][1](np.asarray(s, dtype=float))


# name -> (A, B); register further schedules here
SCHEDULES = {
    "linear": (lambda s: 1.0 - s, lambda s: s),
}


def get_schedule(schedule):
    if isinstance(schedule, AnnealingSchedule):
        return schedule
    return AnnealingSchedule(str(schedule))


@dataclass(frozen=True, eq=False)
class VariationalParams:
    """Per-layer mixer angles ``beta`` and problem-phase angles ``gamma``."""

    beta: np.ndarray
    gamma: np.ndarray = field(default=None)

    def __post_init__(self):
        beta = np.array(self.beta, dtype=np.float64).ravel()
        gamma = np.array(self.gamma, dtype=np.float64).ravel()
        if beta.size < 1 or beta.shape != gamma.shape:
            raise ValueError(
                f"beta and gamma need equal nonzero length, got {beta.size} and {gamma.size}"
            )
        if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(gamma))):
            raise ValueError("variational angles must be finite")
        beta.setflags(write=False)
        gamma.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)

    @property
    def p(self):
        return self.beta.size

    def to_vector(self):
        """Flat ``[beta_1..beta_p, gamma_1..gamma_p]``."""
        return np.concatenate([self.beta, self.gamma])

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=np.float64).ravel()
        if x.size % 2:
            raise ValueError("parameter vector must have even length")
        p = x.size // 2
        return cls(x[:p], x[p:])

    @classmethod
    def filled(cls, p, value):
        p = check_positive_int(p, "p")
        return cls(np.full(p, float(value)), np.full(p, float(value)))

    def resample(self, p_new):
        """Piecewise-linear resampling of both angle sequences onto ``p_new`` layers.

        Layer ``j`` sits at position ``j / p``; outside the old grid the
        nearest end value is held.
        """
        p_new = check_positive_int(p_new, "p")
        old = np.arange(1, self.p + 1) / self.p
        new = np.arange(1, p_new + 1) / p_new
        return VariationalParams(np.interp(new, old, self.beta), np.interp(new, old, self.gamma))

    def __eq__(self, other):
        if not isinstance(other, VariationalParams):
            return NotImplemented
        return np.array_equal(self.beta, other.beta) and np.array_equal(self.gamma, other.gamma)

    def __repr__(self):
        return f"VariationalParams(p={self.p})"


def aqa_parameters(tau, p, schedule="linear"):
    """``beta_j = tau*A(j/p)``, ``gamma_j = tau*B(j/p)`` for ``j = 1..p``."""
    tau = check_positive(tau, "tau")
    p = check_positive_int(p, "p")
    sched = get_schedule(schedule)
    s = np.arange(1, p + 1) / p
    return VariationalParams(tau * sched.A(s), tau * sched.B(s))
