"""Nonexpansive self-maps and finite families with cyclic indexing.

Maps are callables on points (or stacks of points) of the space they are
bound to. A :class:`MappingFamily` holds ``T_1, ..., T_N`` and resolves the
``n``-th map through :func:`cyclic_index`, so ``T_n = T_{((n-1) mod N) + 1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numeric import TOL
from .errors import DomainError, InvalidInputError
from .spaces import Euclidean, HyperbolicPlane, Sphere

__all__ = [
    "MapSpec",
    "Identity",
    "Rotation",
    "ProjectionBall",
    "ProjectionHalfspace",
    "GeodesicContraction",
    "Ball",
    "MappingFamily",
    "NonexpansiveReport",
    "cyclic_index",
    "apply",
    "compose_window",
    "check_nonexpansive",
    "map_from_descriptor",
    "family_from_descriptors",
]


def cyclic_index(n, N):
    """Index in ``1..N`` of the ``n``-th map of a cyclic family.

    >>> [cyclic_index(n, 3) for n in range(1, 8)]
    [1, 2, 3, 1, 2, 3, 1]
    """
    if N < 1:
        raise InvalidInputError(f"family size must be >= 1, got {N}")
    if n < 1:
        raise InvalidInputError(f"map index must be >= 1, got {n}")
    return (n - 1) % N + 1


class MapSpec:
    """A self-map bound to a space. Subclasses implement ``__call__``."""

    kind = "abstract"

    def __init__(self, space):
        self.space = space

    def __call__(self, x):
        raise NotImplementedError

    def descriptor(self):
        return {"kind": self.kind}

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor()})"


class Identity(MapSpec):
    kind = "identity"

    def __call__(self, x):
        return np.array(x, dtype=float, copy=True)


class Rotation(MapSpec):
    """Isometric rotation about a fixed point.

    Euclidean spaces rotate the plane of the first two coordinates about
    ``center`` (default: origin). The hyperbolic plane rotates about its
    origin ``(0, 0, 1)``. The sphere rotates about ``axis``, which defaults
    to the space's base point so caps around the base are invariant.
    """

    kind = "rotation"

    def __init__(self, space, angle, center=None, axis=None):
        super().__init__(space)
        self.angle = float(angle)
        c, s = math.cos(self.angle), math.sin(self.angle)
        if isinstance(space, Sphere):
            self.axis = space.base if axis is None else space.point(axis)
            self._matrix = space.rotation_matrix(self.angle, self.axis)
            self.center = None
        elif isinstance(space, HyperbolicPlane):
            if center is not None:
                raise InvalidInputError("hyperbolic rotations act about the origin only")
            self._matrix = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
            self.center = None
        elif isinstance(space, Euclidean):
            if space.dim < 2:
                raise InvalidInputError("rotation needs dim >= 2")
            self._matrix = np.eye(space.dim)
            self._matrix[:2, :2] = [[c, -s], [s, c]]
            self.center = space.origin if center is None else space.point(center)
        else:
            # in l-infinity only signed permutations are isometries
            raise InvalidInputError(f"rotation is not an isometry of {space.kind}")

    def __call__(self, x):
        x = self.space._coords(x)
        if self.center is not None:
            return (x - self.center) @ self._matrix.T + self.center
        y = x @ self._matrix.T
        if isinstance(self.space, Sphere):
            return y / np.sqrt(np.sum(y * y, axis=-1, keepdims=True))
        return self.space._renormalize(y)

    def descriptor(self):
        d = {"kind": self.kind, "angle": self.angle}
        if self.center is not None and np.any(self.center != 0):
            d["center"] = self.center.tolist()
        return d


class ProjectionBall(MapSpec):
    """Metric projection onto a closed Euclidean ball."""

    kind = "proj_ball"

    def __init__(self, space, center, radius):
        if not isinstance(space, Euclidean):
            raise InvalidInputError("proj_ball is defined on Euclidean spaces only")
        super().__init__(space)
        self.center = space.point(center)
        self.radius = float(radius)
        if self.radius < 0:
            raise InvalidInputError("radius must be nonnegative")

    def __call__(self, x):
        x = self.space._coords(x)
        v = x - self.center
        nv = np.sqrt(np.sum(v * v, axis=-1, keepdims=True))
        scale = np.where(nv > self.radius, self.radius / np.where(nv > 0, nv, 1.0), 1.0)
        return self.center + scale * v

    def descriptor(self):
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


class ProjectionHalfspace(MapSpec):
    """Metric projection onto ``{x : <normal, x> <= offset}``."""

    kind = "proj_halfspace"

    def __init__(self, space, normal, offset):
        if not isinstance(space, Euclidean):
            raise InvalidInputError("proj_halfspace is defined on Euclidean spaces only")
        super().__init__(space)
        self.normal = space.point(normal)
        self.offset = float(offset)
        self._nn = float(self.normal @ self.normal)
        if self._nn == 0:
            raise InvalidInputError("halfspace normal must be nonzero")

    def __call__(self, x):
        x = self.space._coords(x)
        excess = np.maximum(x @ self.normal - self.offset, 0.0)
        return x - (excess / self._nn)[..., None] * self.normal

    def descriptor(self):
        return {"kind": self.kind, "normal": self.normal.tolist(), "offset": self.offset}


class GeodesicContraction(MapSpec):
    """``x -> combine(anchor, x, factor)``: slide toward ``anchor`` along the bicombing."""

    kind = "contraction"

    def __init__(self, space, anchor, factor):
        super().__init__(space)
        self.anchor = space.point(anchor)
        self.factor = float(factor)
        if not 0.0 <= self.factor <= 1.0:
            raise InvalidInputError(f"contraction factor must lie in [0, 1], got {factor}")

    def __call__(self, x):
        x = self.space._coords(x)
        return self.space.combine(np.broadcast_to(self.anchor, x.shape), x, self.factor)

    def descriptor(self):
        return {"kind": self.kind, "anchor": self.anchor.tolist(), "factor": self.factor}


@dataclass(frozen=True)
class Ball:
    """Closed metric ball used as the working set ``C`` of a family."""

    center: np.ndarray
    radius: float


class MappingFamily:
    """Ordered family ``T_1, ..., T_N`` on a common space.

    If ``domain`` is given, every application first checks that its input
    lies in that ball (with the usual 1e-9 slack) and raises
    :class:`DomainError` otherwise.
    """

    def __init__(self, maps, domain=None):
        maps = list(maps)
        if not maps:
            raise InvalidInputError("a family needs at least one map")
        space = maps[0].space
        if any(m.space is not space for m in maps):
            raise InvalidInputError("all maps of a family must be bound to the same space")
        self.maps = tuple(maps)
        self.space = space
        self.domain = domain

    @property
    def N(self):
        return len(self.maps)

    def __len__(self):
        return len(self.maps)

    def map_at(self, n):
        """The map ``T_n`` for a positive (unbounded) index ``n``."""
        return self.maps[cyclic_index(n, self.N) - 1]

    def window_indices(self, n):
        """Cyclic indices ``[i(n+1), ..., i(n+N)]`` applied by ``compose_window``."""
        return [cyclic_index(n + j, self.N) for j in range(1, self.N + 1)]

    def _check_domain(self, x):
        if self.domain is None:
            return
        d = self.space.distance(self.domain.center, x)
        if np.any(d > self.domain.radius + TOL):
            raise DomainError(
                f"point at distance {float(np.max(d)):.6g} from the working ball center "
                f"exceeds its radius {self.domain.radius:.6g}"
            )

    def apply(self, n, x):
        self._check_domain(x)
        return self.map_at(n)(x)

    def compose_window(self, n, x):
        if n < 0:
            raise InvalidInputError(f"window start must be >= 0, got {n}")
        for j in range(1, self.N + 1):
            x = self.apply(n + j, x)
        return x

    def descriptor(self):
        return [m.descriptor() for m in self.maps]


def apply(family, n, x):
    """Apply ``T_n`` of ``family`` to ``x``."""
    return family.apply(n, x)


def compose_window(family, n, x):
    """``T_{n+N}(... T_{n+1}(x))``: exactly ``N`` applications."""
    return family.compose_window(n, x)


@dataclass(frozen=True)
class NonexpansiveReport:
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


def check_nonexpansive(mapping, ball_center, ball_radius, samples=10_000, seed=0, space=None):
    """Sample pairs in a ball and count violations of ``d(Tx, Ty) <= d(x, y) + 1e-9``.

    ``mapping`` is any callable on stacks of points; pass ``space`` when it
    is not a :class:`MapSpec` (e.g. a window composition).
    """
    space = mapping.space if space is None else space
    r = space.certificate.r
    if ball_radius > r / 2.0 + TOL:
        raise InvalidInputError(f"ball radius {ball_radius} exceeds r/2 = {r / 2}")
    rng = np.random.default_rng(seed)
    x = space.sample_ball(ball_center, ball_radius, samples, rng)
    y = space.sample_ball(ball_center, ball_radius, samples, rng)
    excess = space.distance(mapping(x), mapping(y)) - space.distance(x, y)
    return NonexpansiveReport(samples, int(np.sum(excess > TOL)), float(np.max(excess)))


def map_from_descriptor(desc, space):
    """Build a map from a descriptor such as ``{"kind": "rotation", "angle": 0.7}``."""
    if not isinstance(desc, dict) or "kind" not in desc:
        raise InvalidInputError(f"map descriptor needs a 'kind': {desc!r}")
    kind = desc["kind"]
    if kind == "identity":
        return Identity(space)
    if kind == "rotation":
        return Rotation(space, desc["angle"], center=desc.get("center"), axis=desc.get("axis"))
    if kind == "proj_ball":
        return ProjectionBall(space, desc["center"], desc["radius"])
    if kind == "proj_halfspace":
        return ProjectionHalfspace(space, desc["normal"], desc["offset"])
    if kind == "contraction":
        return GeodesicContraction(space, desc["anchor"], desc["factor"])
    raise InvalidInputError(f"unknown map kind {kind!r}")


def family_from_descriptors(descs, space, domain=None):
    maps = [map_from_descriptor(d, space) for d in descs]
    if domain is not None:
        domain = Ball(space.point(domain["center"]), float(domain["radius"]))
    return MappingFamily(maps, domain)
