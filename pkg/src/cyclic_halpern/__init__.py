"""Cyclic Halpern-type iterations for finite families of nonexpansive maps.

Quick tour::

    from cyclic_halpern import spaces, mappings, schedules, iterations, rates

    E = spaces.Euclidean(2)
    family = mappings.MappingFamily([mappings.Rotation(E, 0.7), mappings.Rotation(E, 1.1)])
    sched = schedules.harmonic_schedule()
    cert = rates.certify(rates.RateQuery(epsilon=4.0, M=2.0, N=2), sched)
    trace = iterations.run("halpern", family, sched, [1.0, 0.0], M=2.0, n_max=cert.phi)
    iterations.residual(trace, family, cert.phi)   # <= 4.0
"""

from . import errors, iterations, mappings, rates, schedules, spaces
from .iterations import IterationKind, IterationTrace, lemma42_check, residual, run, shift_gap, step
from .mappings import MappingFamily, compose_window, cyclic_index
from .rates import RateCertificate, RateQuery, certify, phi, phi_tilde, psi, sigma
from .schedules import StepSchedule, harmonic_schedule
from .spaces import ConvexityCertificate, cat_kappa_params, combine, distance

__version__ = "0.1.0"

__all__ = [
    "errors",
    "iterations",
    "mappings",
    "rates",
    "schedules",
    "spaces",
    "IterationKind",
    "IterationTrace",
    "MappingFamily",
    "RateCertificate",
    "RateQuery",
    "StepSchedule",
    "ConvexityCertificate",
    "cat_kappa_params",
    "certify",
    "combine",
    "compose_window",
    "cyclic_index",
    "distance",
    "harmonic_schedule",
    "lemma42_check",
    "phi",
    "phi_tilde",
    "psi",
    "residual",
    "run",
    "shift_gap",
    "sigma",
    "step",
]
