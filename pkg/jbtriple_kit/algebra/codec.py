"""
JSON encoding of factors, elements, maps, spectral data and automorphisms.

Complex numbers travel as [re, im] pairs.
"""
from __future__ import annotations

from typing import Any, Dict, List, Mapping

import numpy as np

from jbtriple_kit.algebra.errors import FactorSpecError
from jbtriple_kit.algebra.factors import (
    COMMUTATIVE, MATRIX, ConjugateLinearMap, Element, FactorDescriptor, LinearMap, make_factor,
)
from jbtriple_kit.algebra.moebius import BallAutomorphism
from jbtriple_kit.algebra.spectral import SpectralData


def complex_to_json(z: complex) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(pair) -> complex:
    re, im = pair
    return complex(float(re), float(im))


def _array_to_json(a: np.ndarray) -> List:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        return [complex_to_json(z) for z in a]
    return [_array_to_json(row) for row in a]


def _array_from_json(data) -> np.ndarray:
    if data and isinstance(data[0], (list, tuple)) and data[0] and isinstance(data[0][0], (list, tuple)):
        return np.array([_array_from_json(row) for row in data], dtype=np.complex128)
    return np.array([complex_from_json(p) for p in data], dtype=np.complex128)


def factor_to_json(f: FactorDescriptor) -> Dict[str, Any]:
    if f.kind == MATRIX:
        return {"kind": MATRIX, "p": f.p, "q": f.q}
    if f.kind == COMMUTATIVE:
        return {"kind": COMMUTATIVE, "n": f.n}
    return {"kind": "sum", "parts": [factor_to_json(part) for part in f.parts]}


def factor_from_json(data: Mapping) -> FactorDescriptor:
    return make_factor(data)


def element_to_json(x: Element) -> Dict[str, Any]:
    return {"factor": factor_to_json(x.factor), "coords": _array_to_json(x.coords)}


def element_from_json(data: Mapping) -> Element:
    try:
        return Element(factor_from_json(data["factor"]), _array_from_json(data["coords"]))
    except KeyError as e:
        raise FactorSpecError(f"element JSON misses key {e}") from e


def map_to_json(m) -> Dict[str, Any]:
    kind = "linear" if isinstance(m, LinearMap) else "conjugate-linear"
    return {"factor": factor_to_json(m.factor), "kind": kind, "matrix": _array_to_json(m.matrix)}


def map_from_json(data: Mapping):
    f = factor_from_json(data["factor"])
    cls = LinearMap if data.get("kind", "linear") == "linear" else ConjugateLinearMap
    return cls(f, _array_from_json(data["matrix"]))


def spectral_to_json(s: SpectralData) -> Dict[str, Any]:
    return {"lambdas": list(s.lambdas), "frame": [element_to_json(e) for e in s.frame]}


def spectral_from_json(data: Mapping, base: Element) -> SpectralData:
    return SpectralData(
        base,
        tuple(float(v) for v in data["lambdas"]),
        tuple(element_from_json(e) for e in data["frame"]),
    )


def automorphism_to_json(g: BallAutomorphism) -> Dict[str, Any]:
    return {"isometry": map_to_json(g.isometry), "base": element_to_json(g.base)}


def automorphism_from_json(data: Mapping) -> BallAutomorphism:
    base = element_from_json(data["base"])
    return BallAutomorphism(base.factor, map_from_json(data["isometry"]), base)
