import numpy as np
import pytest

from jbtriple_kit.algebra.errors import DomainError, NotATripotentError, SlowConvergenceError
from jbtriple_kit.algebra.factors import LinearMap, ball_norm, element, from_matrix, random_element, zero
from jbtriple_kit.algebra.spectral import (
    boundary_tripotent, classify_tripotent, element_rank, extend_to_maximal, frame_length,
    frame_orthogonality, is_tripotent, odd_calculus, odd_power, peirce_projections, spectral_decomposition,
    tripotent_leq, tripotent_residual, tripotent_sample,
)


def test_odd_powers(m23, c2, rng):
    x = random_element(m23, rng)
    X = x.as_matrix()
    assert np.allclose(odd_power(m23, x, 3).as_matrix(), X @ X.conj().T @ X)
    assert np.allclose(odd_power(m23, x, 1).coords, x.coords)
    y = element(c2, [0.5j, 2.0])
    assert np.allclose(odd_power(c2, y, 5).coords, y.coords * np.abs(y.coords) ** 4)
    with pytest.raises(DomainError):
        odd_power(c2, y, 4)


def test_decomposition_reconstructs(factor, rng):
    x = random_element(factor, rng)
    data = spectral_decomposition(factor, x)
    assert 1 <= len(data) <= factor.rank
    assert list(data.lambdas) == sorted(data.lambdas, reverse=True)
    assert data.lambdas[0] == pytest.approx(ball_norm(factor, x))
    assert np.allclose(data.reconstruct().coords, x.coords, atol=1e-12)
    assert frame_orthogonality(factor, data.frame) < 1e-10
    assert all(is_tripotent(factor, e) for e in data.frame)


def test_zero_has_empty_decomposition(factor):
    assert len(spectral_decomposition(factor, zero(factor))) == 0
    assert element_rank(factor, zero(factor)) == 0


def test_odd_calculus_matches_powers(factor, rng):
    x = random_element(factor, rng)
    assert np.allclose(odd_calculus(factor, x, [0, 0, 0, 1]).coords, odd_power(factor, x, 3).coords, atol=1e-12)
    assert np.allclose(odd_calculus(factor, x, [0, 2]).coords, 2 * x.coords, atol=1e-12)
    with pytest.raises(DomainError):
        odd_calculus(factor, x, [1, 1])


def test_classification(m22, m23, c2):
    flags = classify_tripotent(m22, from_matrix(m22, np.eye(2)))
    assert flags.is_tripotent and flags.is_maximal and flags.is_unitary and not flags.is_minimal

    e11 = from_matrix(m22, [[1, 0], [0, 0]])
    flags = classify_tripotent(m22, e11)
    assert flags.is_minimal and not flags.is_maximal

    flags = classify_tripotent(m23, from_matrix(m23, [[1, 0, 0], [0, 1, 0]]))
    assert flags.is_maximal and not flags.is_unitary

    assert not classify_tripotent(c2, element(c2, [0.5, 1])).is_tripotent


def test_peirce_projections_split_the_space(factor, rng):
    e = tripotent_sample(factor, max(1, factor.rank - 1), rng)
    p0, phalf, p1 = peirce_projections(factor, e)
    assert np.allclose((p0 + phalf + p1).matrix, np.eye(factor.dim), atol=1e-10)
    for p in (p0, phalf, p1):
        assert np.allclose((p @ p).matrix, p.matrix, atol=1e-10)
    with pytest.raises(NotATripotentError):
        peirce_projections(factor, 0.5 * e)


def test_tripotent_order(m22):
    e11 = from_matrix(m22, [[1, 0], [0, 0]])
    identity = from_matrix(m22, np.eye(2))
    assert tripotent_leq(m22, e11, identity)
    assert tripotent_leq(m22, zero(m22), e11)
    assert not tripotent_leq(m22, identity, e11)


def test_element_rank_counts_distinct_values(c2, m22):
    assert element_rank(c2, element(c2, [1, 0.5])) == 2
    assert element_rank(c2, element(c2, [0.5, -0.5j])) == 1
    assert element_rank(m22, from_matrix(m22, 0.3 * np.eye(2))) == 1


def test_boundary_tripotent_both_methods(c2):
    v = element(c2, [1, 0.5])
    for method in ("iterate", "spectral"):
        assert np.allclose(boundary_tripotent(c2, v, method).coords, [1, 0], atol=1e-9)
    assert frame_length(c2, boundary_tripotent(c2, v)) == 1
    with pytest.raises(DomainError):
        boundary_tripotent(c2, element(c2, [0.5, 0.5]))


def test_boundary_tripotent_value_just_below_one(c2):
    x = element(c2, [1, 1 - 1e-9])
    with pytest.raises(SlowConvergenceError) as info:
        boundary_tripotent(c2, x, "iterate")
    assert "spectral" in str(info.value)
    assert info.value.lambdas[1] == pytest.approx(1 - 1e-9, abs=1e-15)
    assert np.allclose(boundary_tripotent(c2, x, "spectral").coords, [1, 1], atol=1e-12)
    # outside the band the iteration still runs
    y = element(c2, [1, 1 - 1e-6])
    assert np.allclose(boundary_tripotent(c2, y, "iterate").coords, [1, 0], atol=1e-9)
    assert np.allclose(boundary_tripotent(c2, y, "spectral").coords, [1, 0], atol=1e-9)


def test_boundary_tripotent_on_matrices(m23, rng):
    e = tripotent_sample(m23, 1, rng)
    p0, _, _ = peirce_projections(m23, e)
    w = p0.apply(random_element(m23, rng))
    x = e + (0.5 / ball_norm(m23, w)) * w
    assert np.allclose(boundary_tripotent(m23, x, "iterate").coords, e.coords, atol=1e-8)
    assert np.allclose(boundary_tripotent(m23, x, "spectral").coords, e.coords, atol=1e-8)


def test_tripotent_samples(factor, rng):
    for k in range(factor.rank + 1):
        e = tripotent_sample(factor, k, rng)
        assert tripotent_residual(factor, e) < 1e-10
        assert frame_length(factor, e) == k
    u = tripotent_sample(factor, factor.rank, rng)
    assert classify_tripotent(factor, u).is_maximal
    assert np.linalg.norm(u.coords) ** 2 == pytest.approx(factor.rank)
    with pytest.raises(DomainError):
        tripotent_sample(factor, factor.rank + 1, rng)


def test_extend_to_maximal(m23, rng):
    e = tripotent_sample(m23, 1, rng)
    u = extend_to_maximal(m23, e)
    assert classify_tripotent(m23, u).is_maximal
    assert tripotent_leq(m23, e, u)


def test_spectral_data_is_isometry_invariant(m22, rng):
    x = random_element(m22, rng)
    T = LinearMap(m22, np.kron(np.array([[0, 1], [1, 0]]), np.eye(2)))
    assert np.allclose(spectral_decomposition(m22, T.apply(x)).lambdas, spectral_decomposition(m22, x).lambdas)
