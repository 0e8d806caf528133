"""
Certified indices from the rate formulas
========================================

All rates are exact Python integers. With the harmonic steps
``lambda_n = 1/(n+1)`` the moduli are ``theta(m) = 4**m``,
``gamma(eps, N) = ceil(N/eps)`` and ``alpha(eps) = ceil(1/eps)``.
"""

from cyclic_halpern import RateQuery, certify, harmonic_schedule, psi
from cyclic_halpern.rates import harmonic_instance, recurrence_oracle

h = harmonic_schedule()

# two maps in the plane, iterates within M = 2 of the anchor
print(f"{'eps':>5} {'phi_tilde':>10} {'phi':>10} {'psi':>22}")
for eps in (16.0, 8.0, 4.0, 2.0):
    c = certify(RateQuery(eps, M=2.0, N=2, delta=0.0), h)
    print(f"{eps:5g} {c.phi_tilde:10d} {c.phi:10d} {c.psi:22d}")

# %%
# Positive curvature doubles every theta argument once delta > 0 and
# delta <= 1/2; for delta = 1 - cos(pi/4), ceil(1/(1 - delta)) = 2.
for delta in (0.0, 0.29289):
    print("delta", delta, "psi(16, 1, 1, delta) =", psi(16, 1, 1, delta))

# %%
# The scalar recurrence behind the shift gap can be run directly. Its
# worst-case (extremal) sequence must sit below eps from sigma(eps) on.
inst = harmonic_instance(M=0.25, N=2, delta=0.0)
rep = recurrence_oracle(inst, [1.0, 0.5], horizon=10**5)
for e in rep.entries:
    print(f"eps={e['epsilon']:<5} sigma={e['sigma']:<6} max a_n past sigma={e['max_tail']:.3e}")
