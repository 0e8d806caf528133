"""Exact integer rate calculators and a brute-force check of the recurrence bound.

All rates are Python integers; ceilings are taken with
:func:`~cyclic_halpern._numeric.ceil_guarded` and everything after the
ceilings is integer arithmetic. Values routinely exceed ``2**64``.

Symbols
-------
``sigma``      rate for ``a_n -> 0`` under ``a_{n+1} <= (1 - alpha_{n+1}) a_n + b_n``
``phi_tilde``  rate for the shift gap ``d(x_n, x_{n+N}) -> 0``
``phi``        rate for the residual ``d(x_n, T_{n,N} x_n) -> 0``
``psi``        common rate for both when ``lambda_n = 1/(n+1)``
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._numeric import TOL, ceil_guarded
from .errors import InvalidInputError, InvalidQueryError, ModulusInvalidError
from .schedules import check_cauchy_tails, check_divergence, harmonic_schedule

__all__ = [
    "RateQuery",
    "RateCertificate",
    "RecurrenceInstance",
    "OracleReport",
    "sigma",
    "phi_tilde",
    "phi",
    "psi",
    "certify",
    "recurrence_oracle",
    "geometric_instance",
    "harmonic_instance",
    "sample_instances",
]

# default number of iterations regarded as runnable
RUN_BUDGET = 10**7

# psi exponents above this are refused (the integer would have > 2e8 bits)
MAX_PSI_EXPONENT = 10**8


@dataclass(frozen=True)
class RateQuery:
    epsilon: float
    M: float
    N: int = 1
    delta: float = 0.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidQueryError(f"epsilon must be positive, got {self.epsilon}")
        if not self.M > 0:
            raise InvalidQueryError(f"M must be positive, got {self.M}")
        if int(self.N) != self.N or self.N < 1:
            raise InvalidQueryError(f"N must be a positive integer, got {self.N}")
        if not 0.0 <= self.delta < 1.0:
            raise InvalidQueryError(f"delta must lie in [0, 1), got {self.delta}")


def _log_term(x):
    return max(ceil_guarded(math.log(x)), 1)


def delta_multiplier(delta):
    """``ceil(1 / (1 - delta))``."""
    if not 0.0 <= delta < 1.0:
        raise InvalidQueryError(f"delta must lie in [0, 1), got {delta}")
    return ceil_guarded(1.0 / (1.0 - delta))


def sigma(epsilon, P, gamma, theta):
    """``theta(gamma(eps/2) + max(ceil(ln(2P/eps)), 1)) + 1``.

    >>> sigma(1.0, 1.0, lambda x: math.ceil(1 / x), lambda n: 4**n)
    65
    """
    if not (epsilon > 0 and P > 0):
        raise InvalidInputError("epsilon and P must be positive")
    m = int(gamma(epsilon / 2.0)) + _log_term(2.0 * P / epsilon)
    return int(theta(m)) + 1


def phi_tilde(q, gamma, theta):
    """Rate of convergence of the shift gap ``d(x_n, x_{n+N})``.

    ``theta(ceil(1/(1-delta)) * (gamma(eps/(4M)) + max(ceil(ln(4M/eps)), 1)))``
    where ``gamma`` is already bound to the family size.
    """
    k = delta_multiplier(q.delta)
    m = int(gamma(q.epsilon / (4.0 * q.M))) + _log_term(4.0 * q.M / q.epsilon)
    return int(theta(k * m))


def phi(q, gamma, theta, alpha):
    """Rate of convergence of the residual ``d(x_n, T_{n,N} x_n)``.

    ``max(phi_tilde(eps/2, ...), alpha(eps/(4MN)))``.
    """
    if alpha is None:
        raise InvalidQueryError("the residual rate needs a vanishing modulus alpha")
    half = RateQuery(q.epsilon / 2.0, q.M, q.N, q.delta)
    return max(phi_tilde(half, gamma, theta), int(alpha(q.epsilon / (4.0 * q.M * q.N))))


def psi(epsilon, M, N, delta):
    """Common rate for ``lambda_n = 1/(n+1)``: ``4 ** (ceil(1/(1-delta)) * (ceil(8M(N+1)/eps) + 2))``.

    >>> psi(16, 1, 1, 0.0), psi(16, 1, 1, 0.5)
    (64, 4096)
    """
    q = RateQuery(epsilon, M, N, delta)
    e = delta_multiplier(q.delta) * (ceil_guarded(8.0 * q.M * (q.N + 1) / q.epsilon) + 2)
    if e > MAX_PSI_EXPONENT:
        raise OverflowError(f"psi exponent {e} is too large to evaluate")
    return 4**e


@dataclass(frozen=True)
class RateCertificate:
    """Certified indices for one target ``epsilon``.

    ``sigma`` is the index for the recurrence variable ``a_n`` (it equals
    ``phi_tilde + 1``). ``phi`` and ``psi`` are ``None`` when the schedule
    lacks a vanishing modulus or is not harmonic, respectively.
    """

    epsilon: float
    sigma: int
    phi_tilde: int
    phi: int | None
    psi: int | None
    budget: int

    @property
    def feasible(self):
        top = self.phi if self.phi is not None else self.phi_tilde
        return max(top, self.phi_tilde) <= self.budget

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "sigma": self.sigma,
            "phi_tilde": self.phi_tilde,
            "phi": self.phi,
            "psi": self.psi,
            "feasible": self.feasible,
        }


def certify(q, schedule, budget=RUN_BUDGET):
    """All certified indices of ``schedule`` for the query ``q``."""
    gamma = schedule.gamma_for(q.N)
    pt = phi_tilde(q, gamma, schedule.theta)
    ph = phi(q, gamma, schedule.theta, schedule.alpha) if schedule.alpha is not None else None
    ps = psi(q.epsilon, q.M, q.N, q.delta) if schedule.name == "harmonic" else None
    k = delta_multiplier(q.delta)
    sg = sigma(
        q.epsilon,
        2.0 * q.M,
        lambda x: gamma(x / (2.0 * q.M)),
        lambda n: schedule.theta(k * n),
    )
    return RateCertificate(q.epsilon, sg, pt, ph, ps, budget)


@dataclass(frozen=True)
class RecurrenceInstance:
    """Data of ``a_{n+1} <= (1 - alpha_{n+1}) a_n + b_n`` with ``a_n <= P``.

    ``alpha_seq`` and ``b_seq`` are vectorised over integer index arrays;
    ``alpha_seq`` is only evaluated at ``n >= 2``.
    """

    alpha_seq: Callable
    b_seq: Callable
    P: float
    gamma_b: Callable[[float], int]
    theta_a: Callable[[int], int]
    label: str = ""


@dataclass(frozen=True)
class OracleReport:
    label: str
    horizon: int
    entries: tuple
    max_a: float

    @property
    def failures(self):
        return sum(e["violations"] for e in self.entries)

    @property
    def passed(self):
        return self.failures == 0

    def to_dict(self):
        return {
            "label": self.label,
            "horizon": self.horizon,
            "max_a": self.max_a,
            "entries": list(self.entries),
            "pass": self.passed,
        }


def _extremal_sequence(inst, horizon):
    # index 0 unused; a_1 = P and a_{n+1} = min(P, (1 - alpha_{n+1}) a_n + b_n)
    n = np.arange(1, horizon)
    keep = (1.0 - np.asarray(inst.alpha_seq(n + 1), dtype=float)).tolist()
    b = np.broadcast_to(np.asarray(inst.b_seq(n), dtype=float), n.shape).tolist()
    P = float(inst.P)
    a = [0.0, P]
    prev = P
    for c, bn in zip(keep, b):
        prev = c * prev + bn
        if prev > P:
            prev = P
        a.append(prev)
    return np.array(a)


def recurrence_oracle(inst, eps_grid, horizon):
    """Brute-force check that ``sigma`` is a rate for the extremal sequence.

    The extremal sequence starts at ``a_1 = P`` and takes the recurrence with
    equality, capped at ``P``; by induction it dominates every sequence that
    satisfies the inequality and stays below ``P``. For each ``eps`` the
    report counts indices ``sigma(eps) <= n <= horizon`` with
    ``a_n > eps + 1e-9``. The moduli are validated on the prefix that
    ``sigma`` relies on first.
    """
    need = {}
    for eps in eps_grid:
        m = int(inst.gamma_b(eps / 2.0)) + _log_term(2.0 * inst.P / eps)
        s = sigma(eps, inst.P, inst.gamma_b, inst.theta_a)
        if s > horizon:
            raise InvalidInputError(f"sigma({eps}) = {s} exceeds the horizon {horizon}")
        need[eps] = (m, s)

    m_max = max(m for m, _ in need.values())
    div = check_divergence(lambda n: inst.alpha_seq(n + 1), inst.theta_a, m_max)
    if not div.passed:
        raise ModulusInvalidError(f"theta_a is not a rate of divergence at m = {div.failures}")
    cauchy = check_cauchy_tails(inst.b_seq, inst.gamma_b, [e / 2.0 for e in eps_grid], horizon)
    if not cauchy.passed:
        raise ModulusInvalidError(f"gamma_b is not a Cauchy modulus at eps = {cauchy.failures}")

    a = _extremal_sequence(inst, horizon)
    entries = []
    for eps in eps_grid:
        m, s = need[eps]
        tail = a[s : horizon + 1]
        entries.append(
            {
                "epsilon": eps,
                "sigma": s,
                "max_tail": float(np.max(tail)),
                "violations": int(np.sum(tail > eps + TOL)),
            }
        )
    return OracleReport(inst.label, horizon, tuple(entries), float(np.max(a[1:])))


def geometric_instance(c, P, B=0.0, rho=0.5):
    """``alpha_n = c``, ``b_n = B rho**n``: geometric decay with summable forcing.

    ``theta(m) = ceil(m/c)``; the tail past ``g`` is ``B rho**(g+1) / (1 - rho)``,
    which gives ``gamma``.
    """
    if not 0.0 < c <= 1.0:
        raise InvalidInputError("c must lie in (0, 1]")
    if not 0.0 < rho < 1.0:
        raise InvalidInputError("rho must lie in (0, 1)")

    def gamma(eps):
        if B == 0:
            return 1
        return max(ceil_guarded(math.log(eps * (1.0 - rho) / B) / math.log(rho)) - 1, 1)

    return RecurrenceInstance(
        alpha_seq=lambda n: np.full(np.shape(n), c),
        b_seq=lambda n: B * rho ** np.asarray(n, dtype=float),
        P=P,
        gamma_b=gamma,
        theta_a=lambda m: max(ceil_guarded(m / c), 1),
        label=f"geometric(c={c:.4g}, P={P:.4g}, B={B:.4g}, rho={rho:.4g})",
    )


def harmonic_instance(M, N, delta, schedule=None):
    """Recurrence behind the shift gap: ``a_n = d(x_{n-1}, x_{n+N-1})``.

    ``alpha_n = (1-delta) lambda_{n-1}``, ``b_n = 2M |lambda_{n+N} - lambda_n|``,
    ``P = 2M``, with moduli ``gamma(eps/(2M))`` and ``theta(ceil(1/(1-delta)) m)``.
    """
    s = harmonic_schedule(N) if schedule is None else schedule
    k = delta_multiplier(delta)
    return RecurrenceInstance(
        alpha_seq=lambda n: (1.0 - delta) * s.lam(np.asarray(n) - 1),
        b_seq=lambda n: 2.0 * M * np.abs(s.lam(np.asarray(n) + N) - s.lam(n)),
        P=2.0 * M,
        gamma_b=lambda eps: s.gamma(eps / (2.0 * M), N),
        theta_a=lambda m: s.theta(k * m),
        label=f"{s.name}(M={M:.4g}, N={N}, delta={delta:.4g})",
    )


def sample_instances(count, seed, eps_min, horizon):
    """Seeded mix of harmonic-derived and geometric instances with ``sigma(eps_min) <= horizon``."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        if len(out) % 2 == 0:
            inst = harmonic_instance(
                M=float(rng.uniform(0.02, 0.3)),
                N=int(rng.integers(1, 4)),
                delta=float(rng.choice([0.0, rng.uniform(0.0, 0.6)])),
            )
        else:
            inst = geometric_instance(
                c=float(rng.uniform(0.01, 0.9)),
                P=float(rng.uniform(0.5, 5.0)),
                B=float(rng.choice([0.0, rng.uniform(0.0, 2.0)])),
                rho=float(rng.uniform(0.1, 0.95)),
            )
        if sigma(eps_min, inst.P, inst.gamma_b, inst.theta_a) <= horizon:
            out.append(inst)
    return out
