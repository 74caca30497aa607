import numpy as np
import pytest

from jbtriple_kit.algebra.errors import DomainError, IdentitySkipped, NotQuasiInvertibleError
from jbtriple_kit.algebra.factors import element, from_matrix, random_element
from jbtriple_kit.algebra.operators import (
    IDENTITIES, bergmann, bergmann_sqrt, evaluate_identity, identity_arity, identity_scale,
    is_quasi_invertible, quasi_inverse, quasi_inverse_series, verify_identity,
)


def test_commutative_bergmann_is_a_square(c2):
    x = element(c2, [0.5, 0.2j])
    y = element(c2, [0.4, 0.3])
    expected = (1 - x.coords * np.conj(y.coords)) ** 2
    assert np.allclose(bergmann(c2, x, y).matrix, np.diag(expected))


def test_commutative_quasi_inverse(c2):
    x = element(c2, [0.5, 0.25])
    y = element(c2, [0.5, 1.0])
    result = quasi_inverse(c2, x, y)
    assert np.allclose(result.value.coords, [0.5 / 0.75, 0.25 / 0.75])
    assert result.solver == "direct"
    assert result.residual < 1e-14


def test_matrix_quasi_inverse_formula(m23, rng):
    x, y = random_element(m23, rng, 0.7), random_element(m23, rng, 0.7)
    X, Y = x.as_matrix(), y.as_matrix()
    expected = np.linalg.solve(np.eye(2) - X @ Y.conj().T, X)
    assert np.allclose(quasi_inverse(m23, x, y).value.as_matrix(), expected)


def test_series_agrees_with_direct_solve(factor, rng):
    x, y = random_element(factor, rng, 0.6), random_element(factor, rng, 0.6)
    direct = quasi_inverse(factor, x, y).value
    series = quasi_inverse_series(factor, x, y)
    assert np.allclose(series.coords, direct.coords, atol=1e-12)


def test_series_needs_small_product(c2):
    x = element(c2, [1.0, 0])
    with pytest.raises(DomainError):
        quasi_inverse_series(c2, x, x)


def test_singular_pair_is_rejected(c2):
    x = element(c2, [1.0, 0.5])
    assert not is_quasi_invertible(c2, x, x)
    with pytest.raises(NotQuasiInvertibleError):
        quasi_inverse(c2, x, x)


def test_bergmann_sqrt_squares_back(factor, rng):
    a = random_element(factor, rng, 0.9)
    root = bergmann_sqrt(factor, a)
    assert np.allclose(root.map.matrix @ root.map.matrix, bergmann(factor, a, a).matrix, atol=1e-12)
    assert np.allclose(root.map.matrix @ root.inverse_map.matrix, np.eye(factor.dim), atol=1e-10)
    assert min(root.eigenvalues) > 0


def test_bergmann_sqrt_outside_ball(m22):
    with pytest.raises(DomainError):
        bergmann_sqrt(m22, from_matrix(m22, np.eye(2)))


@pytest.mark.parametrize("name", sorted(IDENTITIES))
def test_identity_catalogue(name, factor, rng):
    for _ in range(5):
        inputs = [random_element(factor, rng, 0.45) for _ in range(identity_arity(name))]
        try:
            lhs, rhs = evaluate_identity(factor, name, inputs)
        except IdentitySkipped:
            continue
        assert np.linalg.norm(lhs - rhs) <= 1e-9 * identity_scale(lhs, rhs)


def test_identity_inputs_are_checked(c2):
    x = element(c2, [0.1, 0.1])
    with pytest.raises(ValueError):
        evaluate_identity(c2, "JP35", [x])
    with pytest.raises(IdentitySkipped):
        verify_identity(c2, "JP35", [x, element(c2, [1.0, 0])])
    with pytest.raises(KeyError):
        identity_arity("JP99")
