import math

import numpy as np
import pytest

from cyclic_halpern.errors import BoundViolationError, InvalidInputError
from cyclic_halpern.iterations import (
    IterationKind,
    lemma42_check,
    residual,
    residuals,
    run,
    shift_gap,
    shift_gaps,
    step,
)
from cyclic_halpern.mappings import (
    Ball,
    GeodesicContraction,
    Identity,
    MappingFamily,
    ProjectionBall,
    ProjectionHalfspace,
    Rotation,
)
from cyclic_halpern.schedules import constant_schedule, harmonic_schedule, power_schedule
from cyclic_halpern.spaces import Euclidean, HyperbolicPlane, Sphere

H = IterationKind.HALPERN
A = IterationKind.ANCHORED


def test_kind_parsing():
    assert IterationKind.parse("halpern") is H
    assert IterationKind.parse("anchored") is A
    assert IterationKind.parse(A) is A
    with pytest.raises(InvalidInputError):
        IterationKind.parse("mann")


def test_halpern_step_identity():
    E = Euclidean(1)
    fam = MappingFamily([Identity(E)])
    assert step(H, fam, harmonic_schedule(), [0.0], [1.0], 0)[0] == 0.5


def test_anchored_step_contraction():
    E = Euclidean(1)
    fam = MappingFamily([GeodesicContraction(E, [0.0], 0.5)])
    assert step(A, fam, harmonic_schedule(), [1.0], [1.0], 0)[0] == 0.5


def test_unit_step_endpoints():
    E = Euclidean(2)
    T = Rotation(E, 0.4)
    fam = MappingFamily([T])
    one = constant_schedule(1.0)
    u, x = np.array([1.0, 0.0]), np.array([0.2, -0.7])
    np.testing.assert_array_equal(step(H, fam, one, u, x, 3), u)
    np.testing.assert_allclose(step(A, fam, one, u, x, 3), T(u))


def test_run_zero_steps():
    E = Euclidean(2)
    tr = run(H, MappingFamily([Rotation(E, 0.5)]), harmonic_schedule(), [1.0, 0.0], 1.0, 0)
    assert tr.points.shape == (1, 2)
    np.testing.assert_array_equal(tr.points[0], [1.0, 0.0])
    assert tr.n_max == 0


@pytest.mark.parametrize("kind", [H, A])
def test_identity_family_fixes_u(kind):
    E = Euclidean(3)
    u = np.array([0.3, -1.0, 2.0])
    tr = run(kind, MappingFamily([Identity(E), Identity(E)]), power_schedule(0.5), u, 1.0, 200)
    assert np.all(tr.points == u)
    assert np.all(shift_gaps(tr, 2) == 0)
    assert np.all(residuals(tr, MappingFamily([Identity(E), Identity(E)])) == 0)


def test_rotations_run_has_no_bound_violation():
    E = Euclidean(2)
    fam = MappingFamily([Rotation(E, 0.7), Rotation(E, 1.1)])
    tr = run(H, fam, harmonic_schedule(), [1.0, 0.0], 2.0, 10_000)
    assert tr.n_max == 10_000
    assert np.max(E.distance(tr.points, tr.u)) <= 2.0


def test_trace_is_read_only():
    E = Euclidean(1)
    tr = run(H, MappingFamily([Identity(E)]), harmonic_schedule(), [0.0], 1.0, 5)
    with pytest.raises(ValueError):
        tr.points[0, 0] = 1.0
    assert tr.lam(1) == 0.5
    np.testing.assert_allclose(tr.lam(np.array([1, 2, 3])), [1 / 2, 1 / 3, 1 / 4])


def test_bound_violation_names_first_index():
    # a map that pushes the orbit away from u; M is too small for it
    E = Euclidean(1)
    fam = MappingFamily([GeodesicContraction(E, [3.0], 0.5)])
    with pytest.raises(BoundViolationError) as info:
        run(A, fam, harmonic_schedule(), [0.0], 1.0, 50)
    assert info.value.n == 1
    assert info.value.value == pytest.approx(1.5)


def test_halpern_requires_bounded_displacement():
    E = Euclidean(2)
    fam = MappingFamily([Rotation(E, math.pi)])
    with pytest.raises(BoundViolationError) as info:
        run(H, fam, harmonic_schedule(), [1.0, 0.0], 1.5, 10)
    assert info.value.n == 0


def test_radius_hypothesis():
    S = Sphere(1.0, 0.5)
    fam = MappingFamily([Rotation(S, 0.3)])
    with pytest.raises(InvalidInputError):
        run(H, fam, harmonic_schedule(), S.base, S.certificate.r, 10)


def test_bad_arguments():
    E = Euclidean(1)
    fam = MappingFamily([Identity(E)])
    with pytest.raises(InvalidInputError):
        run(H, fam, harmonic_schedule(), [0.0], 1.0, -1)
    with pytest.raises(InvalidInputError):
        run(H, fam, harmonic_schedule(), [0.0], 0.0, 1)


@pytest.mark.parametrize("kind", [H, A])
def test_runs_are_bit_identical(kind):
    Hp = HyperbolicPlane()
    fam = MappingFamily([Rotation(Hp, 0.7), GeodesicContraction(Hp, Hp.lift([0.3, 0.1]), 0.5)])
    u = Hp.lift([0.2, 0.0])
    a = run(kind, fam, harmonic_schedule(), u, 2.0, 3000)
    b = run(kind, fam, harmonic_schedule(), u, 2.0, 3000)
    assert a.points.tobytes() == b.points.tobytes()


def _euclid_trace(kind=H, K=500):
    E = Euclidean(2)
    fam = MappingFamily(
        [Rotation(E, 0.7), ProjectionHalfspace(E, [1.0, 1.0], 0.5), ProjectionBall(E, [0.0, 0.0], 1.2)]
    )
    return run(kind, fam, harmonic_schedule(), [1.0, 0.0], 2.0, K), fam


def test_shift_gap_recomputation():
    tr, fam = _euclid_trace()
    E = tr.space
    for n in (0, 7, 100, 497):
        expected = float(np.linalg.norm(tr.points[n] - tr.points[n + 3]))
        assert shift_gap(tr, 3, n) == pytest.approx(expected, abs=1e-15)
        assert shift_gaps(tr, 3)[n] == pytest.approx(expected, abs=1e-15)
    with pytest.raises(IndexError):
        shift_gap(tr, 3, 498)
    assert E.dim == 2


def test_residual_recomputation():
    tr, fam = _euclid_trace()
    vec = residuals(tr, fam)
    for n in (0, 1, 2, 3, 250, 500):
        x = tr.points[n]
        y = x
        for j in range(1, 4):
            y = fam.maps[(n + j - 1) % 3](y)
        expected = float(np.linalg.norm(x - y))
        assert residual(tr, fam, n) == pytest.approx(expected, abs=1e-14)
        assert vec[n] == pytest.approx(expected, abs=1e-14)
    with pytest.raises(IndexError):
        residual(tr, fam, 501)


def test_periodic_orbit_has_zero_shift_gap():
    # a common fixed point: every map fixes the origin and so does the orbit
    E = Euclidean(2)
    fam = MappingFamily([Rotation(E, 0.4), Rotation(E, 1.3)])
    tr = run(H, fam, harmonic_schedule(), [0.0, 0.0], 1.0, 20)
    assert np.all(shift_gaps(tr, 2) == 0)
    assert np.all(residuals(tr, fam) == 0)


def test_single_map_is_classical_halpern():
    E = Euclidean(2)
    T = Rotation(E, 0.9, center=[0.3, 0.2])
    fam = MappingFamily([T])
    u = np.array([1.0, -0.5])
    tr = run(H, fam, harmonic_schedule(), u, 2.0, 100)
    x = u.copy()
    for n in range(100):
        lam = 1.0 / (n + 2)
        x = lam * u + (1 - lam) * T(x)
        np.testing.assert_allclose(tr.points[n + 1], x, atol=1e-13)
    for n in (0, 50, 100):
        assert residual(tr, fam, n) == pytest.approx(float(np.linalg.norm(tr.points[n] - T(tr.points[n]))))


@pytest.mark.parametrize("kind", [H, A])
def test_trace_inequalities_euclidean(kind):
    tr, fam = _euclid_trace(kind, 10_000)
    rep = lemma42_check(tr, fam)
    assert rep.passed, rep
    assert rep.checked == {"step": 10_000, "recurrence": 10_000 - 3, "decomposition": 10_000 - 2}


def test_trace_inequalities_identity():
    E = Euclidean(2)
    fam = MappingFamily([Identity(E)])
    tr = run(H, fam, harmonic_schedule(), [1.0, 1.0], 1.0, 50)
    assert lemma42_check(tr, fam).passed


@pytest.mark.parametrize("kind", [H, A])
def test_trace_inequalities_hyperbolic(kind):
    Hp = HyperbolicPlane()
    fam = MappingFamily([Rotation(Hp, 0.7), GeodesicContraction(Hp, Hp.lift([0.3, 0.1]), 0.5)])
    tr = run(kind, fam, harmonic_schedule(), Hp.lift([0.2, 0.0]), 2.0, 5000)
    assert lemma42_check(tr, fam).passed


@pytest.mark.parametrize("kind", [H, A])
def test_trace_inequalities_sphere(kind):
    S = Sphere(1.0, 0.5)
    fam = MappingFamily([Rotation(S, 0.7), Rotation(S, 1.1)], domain=Ball(S.base, S.certificate.r / 2))
    u = S.point([math.sin(math.pi / 16), 0.0, math.cos(math.pi / 16)])
    tr = run(kind, fam, harmonic_schedule(), u, math.pi / 8, 3000)
    rep = lemma42_check(tr, fam)
    assert rep.passed, rep


def test_trace_check_flags_a_doctored_trace():
    tr, fam = _euclid_trace(H, 200)
    pts = np.array(tr.points)
    pts[100] += 0.5
    from dataclasses import replace

    bad = replace(tr, points=pts)
    rep = lemma42_check(bad, fam)
    assert not rep.passed
    assert rep.violations["step"] >= 1


def test_trace_check_rejects_wrong_N():
    tr, fam = _euclid_trace(H, 20)
    with pytest.raises(InvalidInputError):
        lemma42_check(tr, fam, N=2)


def test_short_trace_has_nothing_to_check():
    tr, fam = _euclid_trace(H, 2)
    rep = lemma42_check(tr, fam)
    assert rep.checked["recurrence"] == 0
    assert rep.checked["decomposition"] == 0
    assert rep.passed
