"""Step-size schedules ``(lambda_n)`` with their quantitative moduli.

A schedule carries three integer-valued moduli:

``theta(m)``
    rate of divergence: ``sum_{n=1}^{theta(m)} lambda_n >= m``.
``gamma(eps, N)``
    Cauchy modulus of ``sum |lambda_{n+N} - lambda_n|``: every block
    ``sum_{n=gamma+1}^{gamma+p}`` is at most ``eps``.
``alpha(eps)``
    rate of convergence of ``lambda_{n+1} -> 0``: ``lambda_{n+1} <= eps``
    for all ``n >= alpha(eps)``.

The validators below check those statements over finite prefixes. They
are written against plain term sequences so that the recurrence oracle in
:mod:`cyclic_halpern.rates` can reuse them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._numeric import TOL, ceil_guarded
from .errors import BudgetExceededError, InvalidInputError

__all__ = [
    "StepSchedule",
    "ModulusReport",
    "harmonic_schedule",
    "power_schedule",
    "constant_schedule",
    "schedule_from_descriptor",
    "check_divergence",
    "check_cauchy_tails",
    "validate_divergence_modulus",
    "validate_cauchy_modulus",
    "validate_vanishing_modulus",
]

# largest index any validator will materialise
INDEX_BUDGET = 10**8


class _RunningMax:
    """Monotone envelope ``m -> max(f(1), ..., f(m))`` of an integer function."""

    def __init__(self, f):
        self._f = f
        self._env = [0]

    def __call__(self, m):
        m = int(m)
        if m < 1:
            raise InvalidInputError(f"theta is defined on positive integers, got {m}")
        while len(self._env) <= m:
            self._env.append(max(self._env[-1], int(self._f(len(self._env)))))
        return self._env[m]


@dataclass(frozen=True)
class StepSchedule:
    """A step-size sequence together with its moduli.

    ``lam`` is vectorised over integer arrays of indices ``n >= 1``.
    ``gamma`` takes ``(eps, N)``; use :meth:`gamma_for` to bind ``N``.
    ``alpha`` is ``None`` when ``lambda_n`` does not tend to zero.
    Unless ``monotone`` is set, ``theta`` is replaced by its running
    maximum on construction, so it is nondecreasing whatever the caller
    supplied. The shipped families are monotone in closed form and skip the
    envelope (it would materialise every ``theta(k)`` up to the argument).
    """

    name: str
    lam: Callable
    theta: Callable[[int], int]
    gamma: Callable[[float, int], int]
    alpha: Callable[[float], int] | None = None
    params: dict = field(default_factory=dict)
    monotone: bool = False

    def __post_init__(self):
        if not self.monotone and not isinstance(self.theta, _RunningMax):
            object.__setattr__(self, "theta", _RunningMax(self.theta))

    def lambdas(self, n_max):
        """Array ``[lambda_1, ..., lambda_{n_max}]``."""
        lam = np.asarray(self.lam(np.arange(1, n_max + 1)), dtype=float)
        return np.broadcast_to(lam, (n_max,)).copy()

    def gamma_for(self, N):
        """Cauchy modulus with the family size bound."""
        return lambda eps: self.gamma(eps, N)

    def descriptor(self):
        return {"kind": self.name, **self.params}


# 4**m for m beyond this has more than 2e7 bits
MAX_THETA_ARG = 10**7


def _pow4(m):
    m = int(m)
    if m < 1:
        raise InvalidInputError(f"theta is defined on positive integers, got {m}")
    if m > MAX_THETA_ARG:
        raise BudgetExceededError(f"4**{m} is too large to evaluate")
    return 4**m


def harmonic_schedule(N=1):
    """``lambda_n = 1/(n+1)`` with ``theta(m) = 4**m``, ``gamma = ceil(N/eps)``, ``alpha = ceil(1/eps)``.

    ``N`` is only a default for :meth:`StepSchedule.gamma_for`; ``gamma``
    itself takes ``N`` as its second argument.
    """
    if N < 1:
        raise InvalidInputError("N must be >= 1")
    return StepSchedule(
        name="harmonic",
        lam=lambda n: 1.0 / (np.asarray(n) + 1.0),
        theta=_pow4,
        gamma=lambda eps, N=N: max(ceil_guarded(N / eps), 1),
        alpha=lambda eps: max(ceil_guarded(1.0 / eps), 1),
        monotone=True,
    )


def power_schedule(q):
    """``lambda_n = (n+1)**(-q)`` for ``0 < q <= 1``; ``q = 1`` is the harmonic schedule.

    Moduli for ``q < 1`` come from integral comparison:
    ``sum_{n<=K} (n+1)^-q >= ((K+2)^(1-q) - 2^(1-q)) / (1-q)``, and the
    shift differences telescope to at most ``N (g+2)^-q`` past index ``g``.
    """
    q = float(q)
    if not 0.0 < q <= 1.0:
        raise InvalidInputError(f"power exponent must lie in (0, 1], got {q}")
    if q == 1.0:
        return harmonic_schedule()
    e = 1.0 - q

    def theta(m):
        return max(ceil_guarded((e * m + 2.0**e) ** (1.0 / e)) - 2, 1)

    def gamma(eps, N):
        return max(ceil_guarded((N / eps) ** (1.0 / q)) - 2, 1)

    def alpha(eps):
        return max(ceil_guarded(eps ** (-1.0 / q)) - 2, 1)

    return StepSchedule(
        name="power",
        lam=lambda n: (np.asarray(n) + 1.0) ** (-q),
        theta=theta,
        gamma=gamma,
        alpha=alpha,
        params={"q": q},
        monotone=True,
    )


def constant_schedule(value):
    """``lambda_n = value``; the steps never vanish, so there is no ``alpha``."""
    c = float(value)
    if not 0.0 < c <= 1.0:
        raise InvalidInputError(f"constant step must lie in (0, 1], got {value}")
    return StepSchedule(
        name="constant",
        lam=lambda n: np.full(np.shape(n), c),
        theta=lambda m: max(ceil_guarded(m / c), 1),
        gamma=lambda eps, N: 1,
        alpha=None,
        params={"value": c},
        monotone=True,
    )


def schedule_from_descriptor(desc):
    if not isinstance(desc, dict) or "kind" not in desc:
        raise InvalidInputError(f"schedule descriptor needs a 'kind': {desc!r}")
    kind = desc["kind"]
    if kind == "harmonic":
        return harmonic_schedule()
    if kind == "power":
        return power_schedule(desc["q"])
    if kind == "constant":
        return constant_schedule(desc["value"])
    raise InvalidInputError(f"unknown schedule kind {kind!r}")


@dataclass(frozen=True)
class ModulusReport:
    """Outcome of a modulus validator.

    ``failures`` lists the offending arguments (``m`` or ``eps``).
    ``worst_slack`` is the smallest margin seen; negative means failure.
    """

    modulus: str
    checked: int
    failures: tuple
    worst_slack: float

    @property
    def passed(self):
        return not self.failures

    def to_dict(self):
        return {
            "modulus": self.modulus,
            "checked": self.checked,
            "failures": list(self.failures),
            "worst_slack": self.worst_slack,
            "pass": self.passed,
        }


def check_divergence(terms, theta, m_max, budget=INDEX_BUDGET):
    """Check ``sum_{n=1}^{theta(m)} terms(n) >= m`` for ``m = 1..m_max``, up to ``TOL``.

    ``terms`` is vectorised over index arrays starting at 1.
    """
    idx = [int(theta(m)) for m in range(1, m_max + 1)]
    top = max(idx)
    if top > budget:
        raise BudgetExceededError(f"theta({m_max}) = {top} exceeds the index budget {budget}")
    partial = np.cumsum(np.asarray(terms(np.arange(1, top + 1)), dtype=float))
    failures, worst = [], math.inf
    for m, k in enumerate(idx, start=1):
        s = partial[k - 1] if k >= 1 else 0.0
        worst = min(worst, s - m)
        if s < m - TOL:
            failures.append(m)
    return ModulusReport("divergence", m_max, tuple(failures), float(worst))


def check_cauchy_tails(terms, gamma, eps_grid, tail_horizon):
    """Check every block ``sum_{n=g+1}^{g+p} terms(n) <= eps`` with ``g = gamma(eps)``, ``p <= tail_horizon``."""
    failures, worst = [], math.inf
    for eps in eps_grid:
        g = int(gamma(eps))
        if g + tail_horizon > INDEX_BUDGET:
            raise BudgetExceededError(f"gamma({eps}) + horizon exceeds the index budget")
        block = np.cumsum(np.asarray(terms(np.arange(g + 1, g + tail_horizon + 1)), dtype=float))
        slack = eps - float(np.max(block))
        worst = min(worst, slack)
        if slack < -TOL:
            failures.append(eps)
    return ModulusReport("cauchy", len(eps_grid), tuple(failures), float(worst))


def validate_divergence_modulus(s, m_max):
    """Check that ``s.theta`` is a rate of divergence of ``sum lambda_n`` up to ``m_max``."""
    return check_divergence(s.lam, s.theta, m_max)


def validate_cauchy_modulus(s, N, eps_grid, tail_horizon):
    """Check ``s.gamma(., N)`` as a Cauchy modulus of ``sum |lambda_{n+N} - lambda_n|``."""

    def shift_diff(n):
        return np.abs(np.asarray(s.lam(n + N)) - np.asarray(s.lam(n)))

    return check_cauchy_tails(shift_diff, s.gamma_for(N), eps_grid, tail_horizon)


def validate_vanishing_modulus(s, eps_grid, horizon):
    """Check ``lambda_{n+1} <= eps`` for ``alpha(eps) <= n <= horizon``."""
    if s.alpha is None:
        raise InvalidInputError(f"schedule {s.name!r} has no vanishing modulus")
    failures, worst = [], math.inf
    for eps in eps_grid:
        a = int(s.alpha(eps))
        if a > horizon:
            raise InvalidInputError(f"horizon {horizon} is below alpha({eps}) = {a}")
        lam = np.asarray(s.lam(np.arange(a + 1, horizon + 2)), dtype=float)
        slack = eps - float(np.max(lam))
        worst = min(worst, slack)
        if slack < -TOL:
            failures.append(eps)
    return ModulusReport("vanishing", len(eps_grid), tuple(failures), float(worst))
