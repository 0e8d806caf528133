"""The two cyclic iteration schemes, their traces, and trace diagnostics.

Both schemes start at ``x_0 = u`` and use ``lambda_1, lambda_2, ...``:

* ``HALPERN``:  ``x_{n+1} = lambda_{n+1} u + (1 - lambda_{n+1}) T_{n+1} x_n``
* ``ANCHORED``: ``x_{n+1} = T_{n+1}(lambda_{n+1} u + (1 - lambda_{n+1}) x_n)``

where ``lambda u + (1 - lambda) v`` is ``combine(u, v, 1 - lambda)`` on the
space's bicombing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._numeric import TOL
from .errors import BoundViolationError, InvalidInputError

__all__ = [
    "IterationKind",
    "IterationTrace",
    "TraceInequalityReport",
    "step",
    "run",
    "shift_gap",
    "shift_gaps",
    "residual",
    "residuals",
    "one_step_gaps",
    "lemma42_check",
]

# iterates are checked against the bound every _BLOCK steps
_BLOCK = 1024


class IterationKind(enum.Enum):
    HALPERN = "halpern"
    ANCHORED = "anchored"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidInputError(f"unknown iteration kind {value!r}") from None

    @property
    def step_constant(self):
        """``c`` in ``d(x_{n+1}, T_{n+1} x_n) <= c M lambda_{n+1}``."""
        return 2.0 if self is IterationKind.HALPERN else 1.0


@dataclass(frozen=True, eq=False)
class IterationTrace:
    """Orbit ``x_0, ..., x_K`` of one run.

    ``points`` has shape ``(K + 1, dim)`` and ``lambdas[n - 1]`` holds
    ``lambda_n`` for ``n = 1..K``. Both arrays are read-only.
    """

    u: np.ndarray
    points: np.ndarray
    lambdas: np.ndarray
    M: float
    kind: IterationKind
    space: object

    def __len__(self):
        return self.points.shape[0]

    @property
    def n_max(self):
        return self.points.shape[0] - 1

    def lam(self, n):
        """``lambda_n`` for ``1 <= n <= K`` (scalar or array)."""
        return self.lambdas[np.asarray(n) - 1]


def step(kind, family, schedule, u, x_n, n):
    """One step from ``x_n`` to ``x_{n+1}``."""
    kind = IterationKind.parse(kind)
    lam = float(np.asarray(schedule.lam(n + 1)))
    return _step(kind, family, lam, u, x_n, n)


def _step(kind, family, lam, u, x_n, n):
    space = family.space
    if kind is IterationKind.HALPERN:
        return space.combine(u, family.apply(n + 1, x_n), 1.0 - lam)
    return family.apply(n + 1, space.combine(u, x_n, 1.0 - lam))


def run(kind, family, schedule, u, M, n_max):
    """Iterate ``n_max`` steps from ``x_0 = u`` and record the orbit.

    The hypotheses behind the rate certificates are enforced while running:
    ``2M <= r``, ``d(u, T_i u) <= M`` for every map (Halpern scheme only),
    and ``d(x_n, u) <= M`` for every recorded ``n >= 1``, all with 1e-9
    slack. A failed iterate bound raises :class:`BoundViolationError`
    naming the first offending index.
    """
    kind = IterationKind.parse(kind)
    space = family.space
    M = float(M)
    n_max = int(n_max)
    if n_max < 0:
        raise InvalidInputError("n_max must be nonnegative")
    if not M > 0:
        raise InvalidInputError("M must be positive")
    if 2.0 * M > space.certificate.r + TOL:
        raise InvalidInputError(f"2M = {2 * M:.6g} exceeds the certificate radius r = {space.certificate.r:.6g}")
    u = space.point(u)
    if kind is IterationKind.HALPERN:
        for i, T in enumerate(family.maps, start=1):
            d = float(space.distance(u, T(u)))
            if d > M + TOL:
                raise BoundViolationError(f"d(u, T_{i} u) = {d:.6g} exceeds M = {M:.6g}", n=0, value=d)

    lambdas = schedule.lambdas(n_max)
    points = np.empty((n_max + 1, space.dim))
    points[0] = u
    x = u
    checked = 1
    for n in range(n_max):
        x = _step(kind, family, lambdas[n], u, x, n)
        points[n + 1] = x
        if n + 2 - checked >= _BLOCK or n + 1 == n_max:
            _check_bound(space, u, M, points, checked, n + 2)
            checked = n + 2
    points.flags.writeable = False
    lambdas.flags.writeable = False
    return IterationTrace(u, points, lambdas, M, kind, space)


def _check_bound(space, u, M, points, start, stop):
    d = space.distance(points[start:stop], u)
    bad = np.flatnonzero(d > M + TOL)
    if bad.size:
        n = start + int(bad[0])
        raise BoundViolationError(
            f"d(x_{n}, u) = {float(d[bad[0]]):.6g} exceeds M = {M:.6g}",
            n=n,
            value=float(d[bad[0]]),
        )


def _index_check(trace, n, need):
    if n < 0 or n + need > trace.n_max:
        raise IndexError(f"index {n} (+{need}) outside trace 0..{trace.n_max}")


def shift_gap(trace, N, n):
    """``d(x_n, x_{n+N})``."""
    _index_check(trace, n, N)
    return float(trace.space.distance(trace.points[n], trace.points[n + N]))


def shift_gaps(trace, N):
    """Shift gaps for every ``n = 0..K-N`` as an array."""
    return trace.space.distance(trace.points[: len(trace) - N], trace.points[N:])


def residual(trace, family, n):
    """``d(x_n, T_{n,N} x_n)`` with the window composition evaluated afresh."""
    _index_check(trace, n, 0)
    x = trace.points[n]
    return float(trace.space.distance(x, family.compose_window(n, x)))


def _apply_cyclic(family, ns, X):
    # apply T_{ns[j]} to row j of X, grouping rows by cyclic index
    family._check_domain(X)
    out = np.empty_like(X)
    which = (ns - 1) % family.N
    for i, T in enumerate(family.maps):
        rows = which == i
        if np.any(rows):
            out[rows] = T(X[rows])
    return out


def residuals(trace, family, indices=None):
    """Residuals at ``indices`` (default: all), vectorised over the trace."""
    ns = np.arange(len(trace)) if indices is None else np.asarray(indices, dtype=int)
    X = trace.points[ns]
    Y = X
    for j in range(1, family.N + 1):
        Y = _apply_cyclic(family, ns + j, Y)
    return trace.space.distance(X, Y)


def one_step_gaps(trace, family):
    """``d(x_{n+1}, T_{n+1} x_n)`` for ``n = 0..K-1``."""
    ns = np.arange(trace.n_max)
    return trace.space.distance(trace.points[1:], _apply_cyclic(family, ns + 1, trace.points[:-1]))


@dataclass(frozen=True)
class TraceInequalityReport:
    """Violation counts for the three trace inequalities.

    ``step``: ``d(x_{n+1}, T_{n+1} x_n) <= c M lambda_{n+1}``.
    ``recurrence``: ``d(x_n, x_{n+N}) <= (1 - (1-delta) lambda_n) d(x_{n-1}, x_{n+N-1}) + c M |lambda_{n+N} - lambda_n|``.
    ``decomposition``: ``d(x_n, T_{n,N} x_n) <= d(x_n, x_{n+N}) + sum_{i=1}^N d(x_{n+i}, T_{n+i} x_{n+i-1})``.
    """

    checked: dict
    violations: dict
    worst_excess: dict

    @property
    def passed(self):
        return not any(self.violations.values())

    def to_dict(self):
        return {
            "checked": self.checked,
            "violations": self.violations,
            "worst_excess": self.worst_excess,
            "pass": self.passed,
        }


def _summary(excess):
    if excess.size == 0:
        return 0, 0, float("-inf")
    return int(excess.size), int(np.sum(excess > TOL)), float(np.max(excess))


def lemma42_check(trace, family, N=None):
    """Check the step bound, the shift recurrence and the residual decomposition on a trace."""
    N = family.N if N is None else int(N)
    if N != family.N:
        raise InvalidInputError(f"N = {N} does not match the family size {family.N}")
    K = trace.n_max
    c = trace.kind.step_constant * trace.M
    delta = trace.space.certificate.delta
    lam = np.concatenate([[np.nan], trace.lambdas])  # lam[n] = lambda_n

    steps = one_step_gaps(trace, family)
    gaps = shift_gaps(trace, N) if K >= N else np.empty(0)
    parts = {"step": steps - c * lam[1:]}

    if K > N:
        n = np.arange(1, K - N + 1)
        rhs = (1.0 - (1.0 - delta) * lam[n]) * gaps[n - 1] + c * np.abs(lam[n + N] - lam[n])
        parts["recurrence"] = gaps[n] - rhs
    else:
        parts["recurrence"] = np.empty(0)

    if K >= N:
        n = np.arange(0, K - N + 1)
        csum = np.concatenate([[0.0], np.cumsum(steps)])
        rhs = gaps[n] + (csum[n + N] - csum[n])
        parts["decomposition"] = residuals(trace, family, n) - rhs
    else:
        parts["decomposition"] = np.empty(0)

    checked, violations, worst = {}, {}, {}
    for name, excess in parts.items():
        checked[name], violations[name], worst[name] = _summary(excess)
    return TraceInequalityReport(checked, violations, worst)
