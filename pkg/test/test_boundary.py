import dataclasses
import math

import numpy as np
import pytest

from jbtriple_kit.algebra.boundary import (
    GAMMA, GAMMA1, ORBIT_G0, SetSpec, ShilovWitness, algebraic_inner, algebraic_inner_frame,
    boundary_component, boundary_point_sample, component_contains, component_rank_preserved,
    delta_for_epsilon, determining_sup, eta_for_delta, gamma1_sample, gamma_in_orbit_closure_demo,
    gamma_sample, mean_value_check, minimality_gap, orbit_sample, rank_k_orbit_sample,
    russo_dye_reconstruct, sample_component, shilov_margin,
)
from jbtriple_kit.algebra.errors import DomainError, EmptyGamma1Error, NotMaximalError, UnknownTestFunctionError
from jbtriple_kit.algebra.factors import ball_norm, commutative_factor, element, from_matrix, random_element
from jbtriple_kit.algebra.moebius import random_automorphism
from jbtriple_kit.algebra.spectral import classify_tripotent, peirce_projections, tripotent_sample
from jbtriple_kit.algebra.testfunctions import make_test_function


def test_component_of_a_partial_boundary_point(c2):
    component = boundary_component(c2, element(c2, [1, 0.5]))
    assert np.allclose(component.tripotent.coords, [1, 0])
    assert component.rank == 1
    assert not component.is_singleton
    assert boundary_component(c2, element(c2, [1j, -1])).is_singleton


def test_component_samples_stay_inside(factor, rng):
    x = boundary_point_sample(factor, rng)
    assert ball_norm(factor, x) == pytest.approx(1.0)
    component = boundary_component(factor, x)
    assert 0 <= component.rank < factor.rank
    for y in sample_component(component, 5, rng, max_inner=0.9):
        assert component_contains(component, y)


def test_automorphisms_preserve_component_rank(factor, rng):
    x = boundary_point_sample(factor, rng, max_inner=0.8)
    g = random_automorphism(factor, rng, radius=0.8)
    check = component_rank_preserved(factor, x, g, samples=5, seed=rng)
    assert check.preserved


def test_gamma_samplers(factor, m23, rng):
    for e in gamma_sample(factor, 3, rng):
        assert classify_tripotent(factor, e).is_maximal
    with pytest.raises(EmptyGamma1Error):
        gamma1_sample(m23, 1, rng)


def test_rank_k_orbits_stay_in_rank_k_components(c2, rng):
    for x in rank_k_orbit_sample(c2, 1, 5, rng):
        assert boundary_component(c2, x / ball_norm(c2, x)).rank == 1


def test_orbit_of_a_partial_boundary_point(c2, rng):
    v = element(c2, [1, 0.5])
    component = boundary_component(c2, v)
    assert np.allclose(component.tripotent.coords, [1, 0])
    assert component.rank == 1
    for x in orbit_sample(c2, v, 10, rng):
        x = x / ball_norm(c2, x)
        assert boundary_component(c2, x).rank == 1
        # the identity component keeps the unimodular coordinate in place
        assert abs(x.coords[0]) == pytest.approx(1.0)
        assert abs(x.coords[1]) < 1.0
    swapped = [x for x in orbit_sample(c2, v, 40, rng, discrete=True) if abs(abs(x.coords[1]) - 1.0) < 1e-9]
    assert swapped


def test_components_of_distinct_tripotents_are_disjoint(c2, rng):
    tripotents = [element(c2, c) for c in ([1, 0], [1j, 0], [0, 1], [1, 1], [1, -1j])]
    components = [boundary_component(c2, e) for e in tripotents]
    assert [k.rank for k in components] == [1, 1, 1, 0, 0]
    for e, k in zip(tripotents, components):
        assert np.allclose(k.tripotent.coords, e.coords)
        for y in sample_component(k, 5, rng, max_inner=0.95):
            # x ↦ x − e lands in the open unit ball of the Peirce-0 space and comes back
            p0, _, _ = peirce_projections(c2, e)
            w = y - e
            assert ball_norm(c2, w) < 1.0
            assert ball_norm(c2, p0.apply(w) - w) < 1e-12
            assert np.allclose(boundary_component(c2, y).tripotent.coords, e.coords)
            for other in components:
                assert component_contains(other, y) == (other is k)


def test_matrix_components_are_disjoint(m22, rng):
    e = tripotent_sample(m22, 1, rng)
    d = tripotent_sample(m22, 1, rng)
    ke, kd = boundary_component(m22, e), boundary_component(m22, d)
    assert ke.rank == kd.rank == 1
    assert ball_norm(m22, e - d) > 1e-6
    for y in sample_component(ke, 5, rng, max_inner=0.9):
        assert component_contains(ke, y)
        assert not component_contains(kd, y)


def test_set_spec_validation(c2):
    with pytest.raises(ValueError):
        SetSpec("sphere")
    with pytest.raises(ValueError):
        SetSpec(ORBIT_G0)
    assert str(SetSpec(GAMMA1)) == "gamma1"


def test_russo_dye_reconstruction(factor, rng):
    b = random_element(factor, rng, 0.5)
    a = gamma_sample(factor, 1, rng)[0]
    result = russo_dye_reconstruct(factor, b, a, N=128)
    assert result.error < 1e-10
    assert result.all_certified
    assert result.certificate == ("unitary" if factor.admits_unitary else "maximal")


def test_russo_dye_argument_checks(c2):
    b = element(c2, [0.1, 0.1])
    with pytest.raises(DomainError):
        russo_dye_reconstruct(c2, b, element(c2, [0.5, 0.5]))
    with pytest.raises(DomainError):
        russo_dye_reconstruct(c2, b, element(c2, [1, 1]), N=3)


def test_mean_value_property(factor, rng):
    b = random_element(factor, rng, 0.5)
    a = gamma_sample(factor, 1, rng)[0]
    for name in ("affine", "product", "cubic"):
        fn = make_test_function(name, factor, rng)
        assert mean_value_check(factor, fn, b, a, 128) < 1e-9


def test_mean_value_needs_a_registered_function(c2, rng):
    b = random_element(c2, rng, 0.5)
    a = gamma_sample(c2, 1, rng)[0]
    with pytest.raises(UnknownTestFunctionError):
        mean_value_check(c2, lambda z: z.coords[0], b, a, 16)
    renamed = dataclasses.replace(make_test_function("affine", c2, rng), name="sine")
    with pytest.raises(UnknownTestFunctionError):
        mean_value_check(c2, renamed, b, a, 16)


def test_witness_peaks_at_e(factor, rng):
    e = gamma_sample(factor, 1, rng)[0]
    h = ShilovWitness(factor, e)
    assert h(e) == pytest.approx(1.0)
    assert h(-e) == pytest.approx(0.0, abs=1e-12)
    for _ in range(20):
        assert abs(h(random_element(factor, rng, 1.0, exact=True))) <= 1.0 + 1e-12


def test_witness_needs_a_maximal_tripotent(c2):
    with pytest.raises(NotMaximalError):
        ShilovWitness(c2, element(c2, [1, 0]))


def test_inner_product_forms_agree(factor, rng):
    x, y = random_element(factor, rng), random_element(factor, rng)
    assert algebraic_inner_frame(factor, x, y) == pytest.approx(algebraic_inner(factor, x, y))


def test_delta_for_epsilon():
    delta = delta_for_epsilon(1.0, 0.1)
    assert delta == pytest.approx(0.0045549, rel=1e-4)
    assert delta + math.sqrt(2 * delta) == pytest.approx(0.1)
    with pytest.raises(DomainError):
        delta_for_epsilon(0.0, 0.1)
    with pytest.raises(DomainError):
        eta_for_delta(0.0)


def test_minimality_gap_beats_the_margin(factor, rng):
    e = gamma_sample(factor, 1, rng)[0]
    _, eta = shilov_margin(factor, 0.2)
    report = minimality_gap(factor, e, 0.2, 200, rng)
    assert report.gap >= eta - 1e-12


def test_determining_sup_is_bounded_by_the_ball(factor, rng):
    fn = make_test_function("product", factor, rng)
    report = determining_sup(factor, fn, SetSpec(GAMMA), 100, 100, rng)
    assert report.sup_set <= report.sup_ball
    assert report.gap >= 0
    assert report.sample_counts == {"set": 100, "ball": 100}


def test_orbit_closure_on_the_disc():
    f = commutative_factor(1)
    points = gamma_in_orbit_closure_demo(f, element(f, [0.5j]), element(f, [1.0]))
    distances = [p.distance for p in points]
    assert all(d is not None for d in distances)
    assert distances == sorted(distances, reverse=True)
    assert distances[-1] == pytest.approx(1e-4, rel=1e-3)


def test_orbit_closure_from_the_boundary(c2, m22, rng):
    points = gamma_in_orbit_closure_demo(c2, element(c2, [1, 0.5]), element(c2, [1, -1]))
    distances = [p.distance for p in points]
    # only the second coordinate moves: (1 − t)·1.5 / (1 − t/2)
    assert distances == pytest.approx([(1 - t) * 1.5 / (1 - t / 2) for t in (0.9, 0.99, 0.999, 0.9999)], rel=1e-9)
    assert distances[-1] < 1e-3

    e = gamma_sample(m22, 1, rng)[0]
    v = from_matrix(m22, np.diag([1.0, 0.3]))
    distances = [p.distance for p in gamma_in_orbit_closure_demo(m22, v, from_matrix(m22, np.eye(2)))]
    assert distances == sorted(distances, reverse=True)
    assert distances[-1] < 1e-3
    assert all(p.distance is not None for p in gamma_in_orbit_closure_demo(m22, v, e))


def test_orbit_closure_rejects_points_outside(m22):
    with pytest.raises(DomainError):
        gamma_in_orbit_closure_demo(m22, from_matrix(m22, 2 * np.eye(2)), from_matrix(m22, np.eye(2)))
