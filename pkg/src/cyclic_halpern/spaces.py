"""Geodesic model spaces with a chosen bicombing and an (r, delta)-convexity certificate.

Points are plain numpy arrays of ambient coordinates. Every operation
broadcasts over leading axes, so ``distance(space, X, Y)`` with ``X`` and
``Y`` of shape ``(n, dim)`` returns ``n`` distances.

======================  ==========================  =====================
space                   coordinates                 bicombing
======================  ==========================  =====================
``Euclidean(dim)``      Cartesian, ``dim``          linear
``SupNorm(dim)``        Cartesian, ``dim``          linear (l-infinity)
``HyperbolicPlane()``   hyperboloid sheet in R^3    hyperbolic geodesics
``Sphere(kappa, mu)``   unit vectors in R^3         slerp, scaled 1/sqrt(kappa)
======================  ==========================  =====================

The hyperboloid uses the Lorentz form ``<x, y> = x0*y0 + x1*y1 - x2*y2``
with the last coordinate timelike and positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numeric import TOL
from .errors import GeodesicRangeError, InvalidInputError

__all__ = [
    "ConvexityCertificate",
    "SpaceModel",
    "Euclidean",
    "SupNorm",
    "HyperbolicPlane",
    "Sphere",
    "ConvexityReport",
    "ComparisonReport",
    "distance",
    "combine",
    "cat_kappa_params",
    "check_rdelta_convexity",
    "check_spherical_comparison",
    "space_from_descriptor",
]

# sphere pairs whose angle exceeds pi - ANTIPODAL_GAP have no canonical geodesic
ANTIPODAL_GAP = 1e-6

# below this separation geodesic weights fall back to linear ones
_TINY = 1e-12


@dataclass(frozen=True)
class ConvexityCertificate:
    """Radius ``r`` of the bicombing and convexity defect ``delta``."""

    r: float
    delta: float

    def __post_init__(self):
        if not (self.r > 0):
            raise InvalidInputError(f"certificate radius must be positive, got {self.r}")
        if not (0.0 <= self.delta <= 1.0):
            raise InvalidInputError(f"delta must lie in [0, 1], got {self.delta}")

    def factor(self, t):
        """Lipschitz factor ``t + delta * (1 - t)`` of the bicombing at ``t``."""
        return t + self.delta * (1.0 - t)


def _check_t(t):
    if isinstance(t, float | int):
        if not 0.0 <= t <= 1.0:
            raise InvalidInputError(f"t must lie in [0, 1], got {t}")
        return t
    t = np.asarray(t, dtype=float)
    if np.any((t < 0.0) | (t > 1.0)) or np.any(np.isnan(t)):
        raise InvalidInputError("t must lie in [0, 1]")
    return t


def _tcol(t):
    # broadcast a scalar or (...,) parameter against (..., dim) points
    if isinstance(t, np.ndarray) and t.ndim > 0:
        return t[..., None]
    return t


class SpaceModel:
    """Common interface of the model spaces.

    Subclasses set ``dim`` (ambient coordinate length), ``intrinsic_dim``,
    ``certificate`` and ``origin`` and implement the metric, the bicombing
    and the exponential chart used for sampling.
    """

    kind: str = "abstract"
    dim: int
    intrinsic_dim: int
    certificate: ConvexityCertificate
    origin: np.ndarray

    def _coords(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise InvalidInputError(
                f"{self.kind} points have {self.dim} coordinates, got shape {x.shape}"
            )
        return x

    def point(self, coords):
        """Validate ``coords`` and return them as a point of this space."""
        return self._coords(coords).copy()

    def distance(self, x, y):
        raise NotImplementedError

    def combine(self, x, y, t):
        raise NotImplementedError

    def _exp_origin(self, v):
        raise NotImplementedError

    def _transport_origin(self, center, p):
        raise NotImplementedError

    def sample_ball(self, center, radius, size, rng):
        """Draw ``size`` points in the closed ball ``B(center, radius)``.

        Tangent vectors are rejection-sampled uniformly in a disc of radius
        ``radius`` and pushed through the exponential chart at ``center``,
        so every sample lies at distance at most ``radius`` from the center.
        """
        center = self.point(center)
        k = self.intrinsic_dim
        out = np.empty((0, k))
        while out.shape[0] < size:
            v = rng.uniform(-radius, radius, size=(2 * size + 8, k))
            v = v[np.sqrt(np.einsum("ij,ij->i", v, v)) <= radius]
            out = np.concatenate([out, v])
        return self._transport_origin(center, self._exp_origin(out[:size]))

    def descriptor(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor()})"


class _LinearSpace(SpaceModel):
    """Normed R^dim with the straight-line bicombing."""

    def __init__(self, dim):
        dim = int(dim)
        if dim < 1:
            raise InvalidInputError(f"dim must be >= 1, got {dim}")
        self.dim = dim
        self.intrinsic_dim = dim
        self.certificate = ConvexityCertificate(math.inf, 0.0)
        self.origin = np.zeros(dim)

    def combine(self, x, y, t):
        x = self._coords(x)
        y = self._coords(y)
        t = _tcol(_check_t(t))
        return (1.0 - t) * x + t * y

    def _exp_origin(self, v):
        return v

    def _transport_origin(self, center, p):
        return center + p

    def descriptor(self):
        return {"kind": self.kind, "dim": self.dim}


class Euclidean(_LinearSpace):
    kind = "euclidean"

    def distance(self, x, y):
        d = self._coords(x) - self._coords(y)
        return np.sqrt(np.sum(d * d, axis=-1))


class SupNorm(_LinearSpace):
    """R^dim with the maximum norm; hyperconvex, convex linear bicombing."""

    kind = "supnorm"

    def distance(self, x, y):
        return np.max(np.abs(self._coords(x) - self._coords(y)), axis=-1)

    def sample_ball(self, center, radius, size, rng):
        # the sup-norm ball is a cube
        center = self.point(center)
        return center + rng.uniform(-radius, radius, size=(size, self.dim))


def lorentz(x, y):
    """Lorentz form ``x0*y0 + x1*y1 - x2*y2`` over the last axis."""
    return x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1] - x[..., 2] * y[..., 2]


class HyperbolicPlane(SpaceModel):
    """Hyperbolic plane of curvature -1 in the hyperboloid model."""

    kind = "hyperbolic2"

    def __init__(self):
        self.dim = 3
        self.intrinsic_dim = 2
        self.certificate = ConvexityCertificate(math.inf, 0.0)
        self.origin = np.array([0.0, 0.0, 1.0])

    @staticmethod
    def lift(v):
        """Point of the sheet above the spatial coordinates ``v = (v0, v1)``."""
        v = np.asarray(v, dtype=float)
        return np.concatenate([v, np.sqrt(1.0 + np.sum(v * v, axis=-1, keepdims=True))], axis=-1)

    def point(self, coords):
        x = np.asarray(coords, dtype=float)
        if x.shape[-1:] == (2,):
            return self.lift(x)
        x = self._coords(x)
        if np.any(x[..., 2] <= 0) or np.any(np.abs(lorentz(x, x) + 1.0) > 1e-6):
            raise InvalidInputError("point is not on the upper sheet <x,x> = -1")
        return self._renormalize(x)

    @staticmethod
    def _renormalize(x):
        x = np.array(x, dtype=float, copy=True)
        x[..., 2] = np.sqrt(1.0 + x[..., 0] ** 2 + x[..., 1] ** 2)
        return x

    def distance(self, x, y):
        x = self._coords(x)
        y = self._coords(y)
        c = -lorentz(x, y)
        # arccosh loses half the digits near 1; use the chord form there
        w = x - y
        chord = np.sqrt(np.maximum(lorentz(w, w), 0.0))
        near = 2.0 * np.arcsinh(0.5 * chord)
        far = np.arccosh(np.maximum(c, 1.0))
        return np.where(c < 2.0, near, far)

    def combine(self, x, y, t):
        x = self._coords(x)
        y = self._coords(y)
        t = _check_t(t)
        d = self.distance(x, y)
        small = d < _TINY
        ds = np.where(small, 1.0, d)
        s = np.sinh(ds)
        wx = np.where(small, 1.0 - t, np.sinh((1.0 - t) * ds) / s)
        wy = np.where(small, t, np.sinh(t * ds) / s)
        return self._renormalize(wx[..., None] * x + wy[..., None] * y)

    def _exp_origin(self, v):
        s = np.sqrt(np.einsum("ij,ij->i", v, v))
        safe = np.where(s > 0, s, 1.0)
        dirs = v / safe[:, None]
        return np.column_stack([np.sinh(s)[:, None] * dirs, np.cosh(s)])

    @staticmethod
    def boost(center):
        """Lorentz boost taking the origin ``(0, 0, 1)`` to ``center``."""
        cs = center[:2]
        L = np.empty((3, 3))
        L[:2, :2] = np.eye(2) + np.outer(cs, cs) / (1.0 + center[2])
        L[:2, 2] = cs
        L[2, :2] = cs
        L[2, 2] = center[2]
        return L

    def _transport_origin(self, center, p):
        return self._renormalize(p @ self.boost(center).T)

    def descriptor(self):
        return {"kind": self.kind}


def cat_kappa_params(kappa, mu):
    """Convexity certificate of a CAT(kappa) space for a chosen ``mu``.

    Returns ``r = mu * D / 2`` and ``delta = 1 - cos(mu * pi / 2)`` where
    ``D = pi / sqrt(kappa)`` is the comparison diameter.

    Examples
    --------
    >>> c = cat_kappa_params(1.0, 2 / 3)
    >>> round(c.r, 6), round(c.delta, 6)
    (1.047198, 0.5)
    """
    kappa = float(kappa)
    mu = float(mu)
    if not kappa > 0:
        raise InvalidInputError(f"kappa must be positive, got {kappa}")
    if not 0.0 < mu <= 1.0:
        raise InvalidInputError(f"mu must lie in (0, 1], got {mu}")
    r = mu * math.pi / (2.0 * math.sqrt(kappa))
    delta = 1.0 if mu == 1.0 else 1.0 - math.cos(mu * math.pi / 2.0)
    return ConvexityCertificate(r, delta)


def _householder_to(target):
    """Orthogonal reflection sending the north pole to ``target``."""
    w = np.array([0.0, 0.0, 1.0]) - target
    nw = float(w @ w)
    if nw < 1e-30:
        return np.eye(3)
    return np.eye(3) - 2.0 * np.outer(w, w) / nw


class Sphere(SpaceModel):
    """Round 2-sphere of curvature ``kappa`` restricted to a certified radius.

    The certificate comes from :func:`cat_kappa_params` with the given
    ``mu``; ``mu = 1`` is accepted (full hemisphere radius) but yields
    ``delta = 1``, which the rate calculators reject. ``base`` marks the point about which rotations act and around
    which experiments place their working cap.
    """

    kind = "sphere"

    def __init__(self, kappa=1.0, mu=0.5, base=None):
        self.kappa = float(kappa)
        self.mu = float(mu)
        self.dim = 3
        self.intrinsic_dim = 2
        self.certificate = cat_kappa_params(self.kappa, self.mu)
        self.scale = 1.0 / math.sqrt(self.kappa)
        self.origin = np.array([0.0, 0.0, 1.0])
        self.base = self.origin.copy() if base is None else self.point(base)

    @staticmethod
    def _unit(x):
        return x / np.sqrt(np.sum(x * x, axis=-1, keepdims=True))

    def point(self, coords):
        x = self._coords(coords)
        if np.any(np.abs(np.sqrt(np.sum(x * x, axis=-1)) - 1.0) > 1e-6):
            raise InvalidInputError("sphere points must be unit vectors")
        return self._unit(x)

    def angle(self, x, y):
        x = self._coords(x)
        y = self._coords(y)
        # atan2(|x cross y|, x.y) stays accurate for tiny and near-antipodal angles;
        # the cross product is spelled out because np.cross dominates per-step cost
        x0, x1, x2 = x[..., 0], x[..., 1], x[..., 2]
        y0, y1, y2 = y[..., 0], y[..., 1], y[..., 2]
        c0 = x1 * y2 - x2 * y1
        c1 = x2 * y0 - x0 * y2
        c2 = x0 * y1 - x1 * y0
        return np.arctan2(np.sqrt(c0 * c0 + c1 * c1 + c2 * c2), x0 * y0 + x1 * y1 + x2 * y2)

    def distance(self, x, y):
        return self.scale * self.angle(x, y)

    def combine(self, x, y, t):
        x = self._coords(x)
        y = self._coords(y)
        t = _check_t(t)
        om = self.angle(x, y)
        if np.any(om > math.pi - ANTIPODAL_GAP):
            raise GeodesicRangeError("antipodal points have no canonical geodesic")
        if np.any(self.scale * om > self.certificate.r + TOL):
            raise GeodesicRangeError(
                f"points farther apart than the certified radius r={self.certificate.r:.6g}"
            )
        small = om < _TINY
        oms = np.where(small, 1.0, om)
        s = np.sin(oms)
        wx = np.where(small, 1.0 - t, np.sin((1.0 - t) * oms) / s)
        wy = np.where(small, t, np.sin(t * oms) / s)
        return self._unit(wx[..., None] * x + wy[..., None] * y)

    def _exp_origin(self, v):
        s = np.sqrt(np.einsum("ij,ij->i", v, v))
        a = s / self.scale
        dirs = v / np.where(s > 0, s, 1.0)[:, None]
        return np.column_stack([np.sin(a)[:, None] * dirs, np.cos(a)])

    def _transport_origin(self, center, p):
        return self._unit(p @ _householder_to(center).T)

    def rotation_matrix(self, angle, axis=None):
        """Rodrigues matrix of a rotation by ``angle`` about ``axis`` (default: base)."""
        k = self.base if axis is None else self.point(axis)
        K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
        return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)

    def descriptor(self):
        d = {"kind": self.kind, "kappa": self.kappa, "mu": self.mu}
        if not np.array_equal(self.base, self.origin):
            d["base"] = self.base.tolist()
        return d


def distance(space, x, y):
    """Distance between ``x`` and ``y`` in ``space`` (broadcasting)."""
    return space.distance(x, y)


def combine(space, x, y, t):
    """The point ``gamma_{x,y}(t)``, i.e. ``(1-t)x + ty`` on the bicombing."""
    return space.combine(x, y, t)


@dataclass(frozen=True)
class ConvexityReport:
    samples: int
    violations: int
    worst_excess: float

    @property
    def passed(self):
        return self.violations == 0

    def to_dict(self):
        return {
            "samples": self.samples,
            "violations": self.violations,
            "worst_excess": self.worst_excess,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class ComparisonReport:
    samples: int
    violations: int
    worst_excess: float
    grid_points: int
    scalar_violations: int
    scalar_worst_excess: float

    @property
    def passed(self):
        return self.violations == 0 and self.scalar_violations == 0

    def to_dict(self):
        return {
            "samples": self.samples,
            "violations": self.violations,
            "worst_excess": self.worst_excess,
            "grid_points": self.grid_points,
            "scalar_violations": self.scalar_violations,
            "scalar_worst_excess": self.scalar_worst_excess,
            "pass": self.passed,
        }


def _sample_triples(space, samples, rng, radius=None):
    r = space.certificate.r
    if radius is None:
        radius = r / 2.0 if math.isfinite(r) else 1.0
    if radius > r / 2.0:
        raise InvalidInputError(f"sampling radius {radius} exceeds r/2 = {r / 2}")
    base_radius = r / 2.0 if math.isfinite(r) else 1.0
    base = space.sample_ball(space.origin, base_radius, 1, rng)[0]
    x, y, z = (space.sample_ball(base, radius, samples, rng) for _ in range(3))
    t = rng.uniform(0.0, 1.0, size=samples)
    return x, y, z, t


def check_rdelta_convexity(space, samples=10_000, seed=0, radius=None):
    """Count sampled violations of the (r, delta)-convexity inequality.

    Triples ``x, y, z`` are drawn in a ball of radius ``radius`` (default
    ``r/2``, or 1 when ``r`` is infinite) around a seeded base point, so all
    pairwise distances are at most ``r``. A violation is
    ``d(g_xy(t), g_xz(t)) > (t + delta (1 - t)) d(y, z) + 1e-9``.
    """
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    x, y, z, t = _sample_triples(space, samples, rng, radius)
    lhs = space.distance(space.combine(x, y, t), space.combine(x, z, t))
    rhs = space.certificate.factor(t) * space.distance(y, z)
    excess = lhs - rhs
    return ConvexityReport(samples, int(np.sum(excess > TOL)), float(np.max(excess)))


def sine_ratio(t, mu):
    """``sin(t mu pi / 2) / sin(mu pi / 2)``, the sharp spherical comparison factor."""
    a = mu * math.pi / 2.0
    return np.sin(np.asarray(t) * a) / math.sin(a)


def check_spherical_comparison(kappa, mu, samples=10_000, seed=0, grid=1000):
    """Check the sine comparison bound on sampled sphere triples and on a t-grid.

    Sampled part: ``d(g_xy(t), g_xz(t)) <= sine_ratio(t, mu) d(y, z) + 1e-9``
    for triples within ``mu D / 2`` of each other. Scalar part: the sine
    ratio never exceeds ``t + (1 - cos(mu pi / 2)) (1 - t)`` on ``grid``
    equispaced points of ``[0, 1]``.
    """
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    space = Sphere(kappa, mu)
    rng = np.random.default_rng(seed)
    x, y, z, t = _sample_triples(space, samples, rng)
    lhs = space.distance(space.combine(x, y, t), space.combine(x, z, t))
    excess = lhs - sine_ratio(t, mu) * space.distance(y, z)

    ts = np.linspace(0.0, 1.0, grid)
    scalar = sine_ratio(ts, mu) - (ts + (1.0 - math.cos(mu * math.pi / 2.0)) * (1.0 - ts))
    return ComparisonReport(
        samples,
        int(np.sum(excess > TOL)),
        float(np.max(excess)),
        grid,
        int(np.sum(scalar > TOL)),
        float(np.max(scalar)),
    )


def space_from_descriptor(desc):
    """Build a space from a config descriptor such as ``{"kind": "euclidean", "dim": 2}``."""
    if not isinstance(desc, dict) or "kind" not in desc:
        raise InvalidInputError(f"space descriptor needs a 'kind': {desc!r}")
    kind = desc["kind"]
    if kind == "euclidean":
        return Euclidean(desc.get("dim", 2))
    if kind == "supnorm":
        return SupNorm(desc.get("dim", 2))
    if kind in ("hyperbolic2", "hyperbolic"):
        return HyperbolicPlane()
    if kind == "sphere":
        return Sphere(desc.get("kappa", 1.0), desc.get("mu", 0.5), desc.get("base"))
    raise InvalidInputError(f"unknown space kind {kind!r}")
