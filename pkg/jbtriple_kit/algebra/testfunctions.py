"""
Registered holomorphic test functions.

All of them are entire in the coordinates (no conjugation anywhere), so they
are continuous on the closed ball and satisfy the mean-value property along
transvection circles.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from jbtriple_kit.algebra.boundary import ShilovWitness, gamma_sample
from jbtriple_kit.algebra.errors import UnknownTestFunctionError
from jbtriple_kit.algebra.factors import Element, FactorDescriptor, SeedLike, as_generator, check_factor


@dataclass(frozen=True)
class HolomorphicFunction:
    name: str
    factor: FactorDescriptor
    fn: Callable[[Element], object] = field(repr=False)
    vector_valued: bool = False

    def __call__(self, z: Element):
        check_factor(self.factor, z)
        return self.fn(z)


def _coefficient(rng: np.random.Generator) -> complex:
    return complex(rng.standard_normal(), rng.standard_normal()) / np.sqrt(2.0)


def _functional(f: FactorDescriptor, rng: np.random.Generator) -> np.ndarray:
    w = rng.standard_normal(f.dim) + 1j * rng.standard_normal(f.dim)
    return w / np.sqrt(2.0 * f.dim)


def _constant(f, rng, value=None, **_):
    c = _coefficient(rng) if value is None else complex(value)
    return lambda z: c


def _affine(f, rng, **_):
    c, w = _coefficient(rng), _functional(f, rng)
    return lambda z: c + np.dot(w, z.coords)


def _product(f, rng, **_):
    c1, w1 = _coefficient(rng), _functional(f, rng)
    c2, w2 = _coefficient(rng), _functional(f, rng)
    return lambda z: (c1 + np.dot(w1, z.coords)) * (c2 + np.dot(w2, z.coords))


def _cubic(f, rng, **_):
    w1, w2 = _functional(f, rng), _functional(f, rng)

    def fn(z):
        a, b = np.dot(w1, z.coords), np.dot(w2, z.coords)
        return a * a * b + 0.5 * a - b ** 3
    return fn


def _power(f, rng, degree=4, **_):
    c, w = _coefficient(rng), _functional(f, rng)
    k = int(degree)
    return lambda z: (c + np.dot(w, z.coords)) ** k


def _exp_affine(f, rng, **_):
    c, w = _coefficient(rng), _functional(f, rng)
    return lambda z: np.exp(c + np.dot(w, z.coords))


def _shilov(f, rng, e=None, **_):
    if e is None:
        e = gamma_sample(f, 1, rng)[0]
    return ShilovWitness(f, e)


def _vector_affine(f, rng, **_):
    c = np.array([_coefficient(rng), _coefficient(rng)])
    W = np.vstack([_functional(f, rng), _functional(f, rng)])
    return lambda z: c + W @ z.coords


def _shilov_vector(f, rng, e=None, v=(1.0, 0.5j), **_):
    h = _shilov(f, rng, e=e)
    direction = np.asarray(v, dtype=np.complex128)
    return lambda z: h(z) * direction


_BUILDERS: Dict[str, Callable] = {
    "constant": _constant,
    "affine": _affine,
    "product": _product,
    "cubic": _cubic,
    "power": _power,
    "exp-affine": _exp_affine,
    "shilov": _shilov,
    "vector-affine": _vector_affine,
    "shilov-vector": _shilov_vector,
}
_VECTOR = {"vector-affine", "shilov-vector"}

# entire functions without a distinguished boundary point
POLYNOMIAL_FAMILY = ("constant", "affine", "product", "cubic", "power", "exp-affine", "vector-affine")


def registered_names() -> List[str]:
    return list(_BUILDERS)


def make_test_function(name: str, f: FactorDescriptor, seed: SeedLike = 0,
                       **params) -> HolomorphicFunction:
    """Instantiate a registered function with coefficients drawn from `seed`."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownTestFunctionError(name, _BUILDERS) from None
    fn = builder(f, as_generator(seed), **params)
    return HolomorphicFunction(name, f, fn, name in _VECTOR)
