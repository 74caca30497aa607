import json

import numpy as np
import pytest

from jbtriple_kit.algebra.boundary import gamma_sample
from jbtriple_kit.algebra.codec import (
    automorphism_from_json, automorphism_to_json, element_from_json, element_to_json, factor_to_json,
    spectral_from_json, spectral_to_json,
)
from jbtriple_kit.algebra.errors import FactorSpecError, UnknownTestFunctionError
from jbtriple_kit.algebra.factors import parse_factor, random_element
from jbtriple_kit.algebra.moebius import random_automorphism
from jbtriple_kit.algebra.spectral import spectral_decomposition
from jbtriple_kit.algebra.testfunctions import POLYNOMIAL_FAMILY, make_test_function, registered_names


def test_registry():
    names = registered_names()
    assert set(POLYNOMIAL_FAMILY) < set(names)
    assert {"shilov", "shilov-vector"} < set(names)
    with pytest.raises(UnknownTestFunctionError):
        make_test_function("sine", parse_factor("commutative:2"))


def test_coefficients_follow_the_seed(m22, rng):
    z = random_element(m22, rng)
    for name in POLYNOMIAL_FAMILY:
        a, b = make_test_function(name, m22, 5), make_test_function(name, m22, 5)
        assert np.allclose(a(z), b(z))


def test_vector_valued_functions(m22, rng):
    z = random_element(m22, rng)
    assert make_test_function("vector-affine", m22, 1).vector_valued
    assert np.shape(make_test_function("vector-affine", m22, 1)(z)) == (2,)
    e = gamma_sample(m22, 1, rng)[0]
    value = make_test_function("shilov-vector", m22, 1, e=e)(e)
    assert np.allclose(value, [1.0, 0.5j])


def test_power_degree(c2, rng):
    z = random_element(c2, rng)
    p4 = make_test_function("power", c2, 9)
    p2 = make_test_function("power", c2, 9, degree=2)
    assert p4(z) == pytest.approx(p2(z) ** 2)


def test_factor_json_shape():
    f = parse_factor("sum:[matrix:2x3,commutative:1]")
    assert factor_to_json(f) == {"kind": "sum", "parts": [{"kind": "matrix", "p": 2, "q": 3},
                                                          {"kind": "commutative", "n": 1}]}


def test_element_json(factor, rng):
    x = random_element(factor, rng)
    data = json.loads(json.dumps(element_to_json(x)))
    back = element_from_json(data)
    assert back.factor == factor
    assert np.array_equal(back.coords, x.coords)
    with pytest.raises(FactorSpecError):
        element_from_json({"coords": data["coords"]})


def test_spectral_and_automorphism_json(m23, rng):
    x = random_element(m23, rng)
    s = spectral_decomposition(m23, x)
    back = spectral_from_json(json.loads(json.dumps(spectral_to_json(s))), x)
    assert back.lambdas == s.lambdas
    assert np.allclose(back.reconstruct().coords, x.coords)

    g = random_automorphism(m23, rng, radius=0.5)
    h = automorphism_from_json(json.loads(json.dumps(automorphism_to_json(g))))
    assert np.allclose(h(x * 0.5).coords, g(x * 0.5).coords)
