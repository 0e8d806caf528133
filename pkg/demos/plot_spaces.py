"""
Geodesics and convexity certificates
====================================

Every space carries a certificate ``(r, delta)``: geodesics started at one
point spread apart no faster than ``t + delta (1 - t)`` times the distance of
their endpoints, as long as all points are within ``r`` of each other.
"""

import math

import numpy as np

from cyclic_halpern.spaces import Euclidean, HyperbolicPlane, Sphere, check_rdelta_convexity, combine, distance

# flat and hyperbolic geometry: delta = 0 and no radius restriction
E = Euclidean(2)
print("Euclidean d((0,0),(3,4)) =", distance(E, [0, 0], [3, 4]))

H = HyperbolicPlane()
x, y = H.lift([0.0, 0.0]), H.lift([2.0, 1.0])
mid = combine(H, x, y, 0.5)
print("hyperbolic d(x, y)        =", float(distance(H, x, y)))
print("hyperbolic d(x, midpoint) =", float(distance(H, x, mid)))

# %%
# On the unit sphere with mu = 1/2 the certified radius is pi/4 and the
# defect is 1 - cos(pi/4); slerp stays on the sphere.
S = Sphere(kappa=1.0, mu=0.5)
print("sphere certificate:", S.certificate)
p = S.point([math.sin(0.3), 0.0, math.cos(0.3)])
q = S.point([0.0, math.sin(0.3), math.cos(0.3)])
for t in (0.0, 0.25, 0.5, 1.0):
    z = combine(S, p, q, t)
    print(f"  t={t:4.2f}  |z|={np.linalg.norm(z):.15f}  d(p,z)={float(distance(S, p, z)):.6f}")

# %%
# The certificates are checked by sampling triples in a ball.
for space in (E, H, S):
    rep = check_rdelta_convexity(space, samples=5000, seed=0)
    print(f"{space.kind:12s} violations={rep.violations}  worst excess={rep.worst_excess:.2e}")
