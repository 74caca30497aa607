"""
Bergmann operators, their square roots, quasi-inverses and the identity catalogue.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from jbtriple_kit.algebra.errors import (
    DomainError, IdentitySkipped, NonConvergenceError, NotQuasiInvertibleError, NumericalError,
    TripleError,
)
from jbtriple_kit.algebra.factors import (
    Element, FactorDescriptor, LinearMap, _norm_coords, _triple_coords, ball_norm, check_factor,
    d_operator, q_operator,
)

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
EIGEN_FLOOR = 1e-12
SERIES_CAP = 10 ** 6


@dataclass(frozen=True)
class QuasiInverseResult:
    value: Element
    solver: str
    residual: float
    condition: float = float("nan")


@dataclass(frozen=True)
class BergmannSqrt:
    """B_a = B(a,a)^½ and its inverse."""

    base: Element
    map: LinearMap
    inverse_map: LinearMap
    eigenvalues: Tuple[float, ...] = ()


def bergmann(f: FactorDescriptor, x: Element, y: Element) -> LinearMap:
    """B(x,y) = Id − 2D(x,y) + Q_x Q_y."""
    check_factor(f, x, y)
    qq = q_operator(f, x) @ q_operator(f, y)
    return LinearMap(f, np.eye(f.dim) - 2.0 * d_operator(f, x, y).matrix + qq.matrix)


def condition_number(f: FactorDescriptor, x: Element, y: Element) -> float:
    return float(np.linalg.cond(bergmann(f, x, y).matrix))


def is_quasi_invertible(f: FactorDescriptor, x: Element, y: Element,
                        threshold: float = CONDITION_LIMIT) -> bool:
    cond = condition_number(f, x, y)
    return bool(np.isfinite(cond) and cond <= threshold)


def quasi_inverse(f: FactorDescriptor, x: Element, y: Element,
                  threshold: float = CONDITION_LIMIT) -> QuasiInverseResult:
    """x^y = B(x,y)⁻¹(x − Q_x y) by an LU solve."""
    B = bergmann(f, x, y).matrix
    cond = float(np.linalg.cond(B))
    if not np.isfinite(cond) or cond > threshold:
        raise NotQuasiInvertibleError(cond, threshold)
    rhs = x.coords - _triple_coords(f, x.coords, y.coords, x.coords)
    value = lu_solve(lu_factor(B), rhs)
    residual = _norm_coords(f, B @ value - rhs)
    if cond > 1e8:
        logger.debug("quasi-inverse solved at condition %.3e, residual %.3e", cond, residual)
    return QuasiInverseResult(Element(f, value), "direct", residual, cond)


def qinv(f: FactorDescriptor, x: Element, y: Element) -> Element:
    """Shorthand for quasi_inverse(...).value."""
    return quasi_inverse(f, x, y).value


def quasi_inverse_series(f: FactorDescriptor, x: Element, y: Element,
                         tol: float = 1e-14, max_terms: int = SERIES_CAP) -> Element:
    """x^y = Σ D(x,y)^k x, summed until the increment drops below tol."""
    check_factor(f, x, y)
    if ball_norm(f, x) * ball_norm(f, y) >= 1.0:
        raise DomainError("series needs ‖x‖·‖y‖ < 1")
    D = d_operator(f, x, y).matrix
    term = x.coords.copy()
    total = term.copy()
    increment = _norm_coords(f, term)
    for k in range(1, max_terms + 1):
        if increment < tol:
            logger.debug("quasi-inverse series converged after %d terms", k)
            return Element(f, total)
        term = D @ term
        total = total + term
        increment = _norm_coords(f, term)
    raise NonConvergenceError(max_terms, increment)


def bergmann_sqrt(f: FactorDescriptor, a: Element, floor: float = EIGEN_FLOOR) -> BergmannSqrt:
    """Principal square root of B(a,a) by eigendecomposition."""
    check_factor(f, a)
    if ball_norm(f, a) >= 1.0:
        raise DomainError(f"B_a needs ‖a‖ < 1, got {ball_norm(f, a):.15g}")
    M = bergmann(f, a, a).matrix
    skew = float(np.linalg.norm(M - M.conj().T))
    if skew <= 1e-10 * (1.0 + float(np.linalg.norm(M))):
        w, Q = np.linalg.eigh(0.5 * (M + M.conj().T))
        if w.min() < floor:
            raise NumericalError("B(a,a) has a non-positive eigenvalue", float(w.min()))
        root = (Q * np.sqrt(w)) @ Q.conj().T
        inv_root = (Q / np.sqrt(w)) @ Q.conj().T
    else:
        w, V = np.linalg.eig(M)
        bad = [lam for lam in w if abs(lam.imag) > 1e-10 or lam.real < floor]
        if bad:
            raise NumericalError("B(a,a) has a non-positive eigenvalue", complex(bad[0]))
        w = w.real
        Vinv = np.linalg.inv(V)
        root = (V * np.sqrt(w)) @ Vinv
        inv_root = (V / np.sqrt(w)) @ Vinv
    return BergmannSqrt(a, LinearMap(f, root), LinearMap(f, inv_root), tuple(float(v) for v in w))


# ---------- Identity catalogue ----------
def _q(f: FactorDescriptor, x: Element, y: Element) -> Element:
    try:
        return quasi_inverse(f, x, y).value
    except NotQuasiInvertibleError as e:
        raise IdentitySkipped(f"quasi-inverse undefined: {e}") from e


def _b(f: FactorDescriptor, x: Element, y: Element) -> np.ndarray:
    return bergmann(f, x, y).matrix


def _inv(M: np.ndarray) -> np.ndarray:
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise IdentitySkipped(f"Bergmann operator singular (condition {cond:.3e})")
    return np.linalg.inv(M)


def _sqrt(f: FactorDescriptor, a: Element) -> BergmannSqrt:
    try:
        return bergmann_sqrt(f, a)
    except TripleError as e:
        raise IdentitySkipped(f"B_a undefined: {e}") from e


def _jp33(f, x, y, z):
    return _b(f, x, y + z), _b(f, x, y) @ _b(f, _q(f, x, y), z)


def _jp34(f, x, y, z):
    return _b(f, y + z, x), _b(f, z, _q(f, x, y)) @ _b(f, y, x)


def _jp35(f, x, y):
    return _inv(_b(f, x, y)), _b(f, _q(f, x, y), -y)


def _jp36(f, u, v, x, y):
    Buv = _b(f, u, v)
    Bvu_inv = _inv(_b(f, v, u))
    lhs = _b(f, Element(f, Buv @ x.coords), Element(f, Bvu_inv @ y.coords))
    return lhs, Buv @ _b(f, x, y) @ Bvu_inv


def _jp36_sqrt(f, a, x, y):
    Ba = _sqrt(f, a)
    lhs = _b(f, Ba.map.apply(x), Ba.inverse_map.apply(y))
    return lhs, Ba.map.matrix @ _b(f, x, y) @ Ba.inverse_map.matrix


def _jpa1(f, x, y, z):
    return _q(f, x, y + z).coords, _q(f, _q(f, x, y), z).coords


def _jpa2(f, x, y, z):
    lhs = _q(f, x + z, y).coords
    rhs = _q(f, x, y).coords + _inv(_b(f, x, y)) @ _q(f, z, _q(f, y, x)).coords
    return lhs, rhs


def _jps(f, x, y, z):
    Bxy = _b(f, x, y)
    lhs = _q(f, Element(f, Bxy @ z.coords), y).coords
    w = Element(f, _b(f, y, x) @ y.coords)
    return lhs, Bxy @ _q(f, z, w).coords


def _local1(f, a):
    return _q(f, a, a).coords, _sqrt(f, a).inverse_map.matrix @ a.coords


IDENTITIES: Dict[str, Tuple[int, Callable]] = {
    "JP33": (3, _jp33),
    "JP34": (3, _jp34),
    "JP35": (2, _jp35),
    "JP36": (4, _jp36),
    "JPA1": (3, _jpa1),
    "JPA2": (3, _jpa2),
    "JPS": (3, _jps),
    "local1": (1, _local1),
    "JP36-sqrt": (3, _jp36_sqrt),
}


def identity_arity(name: str) -> int:
    try:
        return IDENTITIES[name][0]
    except KeyError:
        raise KeyError(f"unknown identity {name!r}; known: {', '.join(IDENTITIES)}") from None


def evaluate_identity(f: FactorDescriptor, name: str,
                      inputs: Sequence[Element]) -> Tuple[np.ndarray, np.ndarray]:
    """Both sides of a catalogue identity (operator matrices or coordinate vectors)."""
    arity = identity_arity(name)
    if len(inputs) != arity:
        raise ValueError(f"{name} takes {arity} inputs, got {len(inputs)}")
    check_factor(f, *inputs)
    for x in inputs:
        if ball_norm(f, x) >= 1.0:
            raise IdentitySkipped(f"input outside the open ball (‖x‖ = {ball_norm(f, x):.6g})")
    return IDENTITIES[name][1](f, *inputs)


def verify_identity(f: FactorDescriptor, name: str, inputs: Sequence[Element]) -> float:
    """Frobenius (or vector) norm of left minus right."""
    lhs, rhs = evaluate_identity(f, name, inputs)
    return float(np.linalg.norm(lhs - rhs))


def identity_scale(lhs: np.ndarray, rhs: np.ndarray) -> float:
    return 1.0 + max(float(np.linalg.norm(lhs)), float(np.linalg.norm(rhs)))
