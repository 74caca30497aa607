"""
Ball automorphisms g = T∘g_a: transvections, the isometric cocycle k(a,b),
derivatives and random samplers for the linear part T.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import block_diag

from jbtriple_kit.algebra.errors import DomainError, NotQuasiInvertibleError
from jbtriple_kit.algebra.factors import (
    COMMUTATIVE, MATRIX, Element, FactorDescriptor, LinearMap, SeedLike, as_generator,
    ball_norm, check_factor, random_element, two_sided_norm, zero,
)
from jbtriple_kit.algebra.operators import (
    CONDITION_LIMIT, BergmannSqrt, bergmann, bergmann_sqrt, quasi_inverse,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BallAutomorphism:
    factor: FactorDescriptor
    isometry: LinearMap
    base: Element

    def __post_init__(self):
        check_factor(self.factor, self.base)
        if ball_norm(self.factor, self.base) >= 1.0:
            raise DomainError("automorphism base point must lie in the open ball")

    def __call__(self, x: Element) -> Element:
        return automorphism_apply(self, x)


class Transvection:
    """g_a with B_a computed once; repeated evaluation is the common case."""

    def __init__(self, f: FactorDescriptor, a: Element, sqrt: Optional[BergmannSqrt] = None):
        check_factor(f, a)
        self.factor = f
        self.base = a
        self.norm = ball_norm(f, a)
        if self.norm >= 1.0:
            raise DomainError(f"transvection needs ‖a‖ < 1, got {self.norm:.15g}")
        self.sqrt = sqrt if sqrt is not None else bergmann_sqrt(f, a)

    def __call__(self, x: Element) -> Element:
        f, a = self.factor, self.base
        check_factor(f, x)
        if self.norm * ball_norm(f, x) >= 1.0:
            raise DomainError(
                f"x outside the extension domain: ‖a‖·‖x‖ = {self.norm * ball_norm(f, x):.15g} ≥ 1"
            )
        return a + self.sqrt.map.apply(quasi_inverse(f, x, -a).value)

    def derivative(self, x0: Element) -> LinearMap:
        f, a = self.factor, self.base
        check_factor(f, x0)
        if self.norm * ball_norm(f, x0) >= 1.0:
            raise DomainError("x0 outside the extension domain")
        return LinearMap(f, self.sqrt.map.matrix @ _inverse(bergmann(f, x0, -a).matrix))


def _inverse(M: np.ndarray) -> np.ndarray:
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise NotQuasiInvertibleError(cond, CONDITION_LIMIT)
    return np.linalg.inv(M)


# ---------- Transvections and automorphisms ----------
def transvection_apply(f: FactorDescriptor, a: Element, x: Element) -> Element:
    """g_a(x) = a + B_a x^{−a}."""
    return Transvection(f, a)(x)


def transvection(f: FactorDescriptor, a: Element) -> BallAutomorphism:
    return BallAutomorphism(f, LinearMap.identity(f), a)


def identity_automorphism(f: FactorDescriptor) -> BallAutomorphism:
    return BallAutomorphism(f, LinearMap.identity(f), zero(f))


def automorphism_apply(g: BallAutomorphism, x: Element) -> Element:
    return g.isometry.apply(transvection_apply(g.factor, g.base, x))


def automorphism_inverse(g: BallAutomorphism) -> BallAutomorphism:
    """(T g_a)⁻¹ = g_{−a} T⁻¹ = T⁻¹ g_{−Ta}."""
    return BallAutomorphism(g.factor, g.isometry.inverse(), -g.isometry.apply(g.base))


def automorphism_compose(g: BallAutomorphism, h: BallAutomorphism) -> BallAutomorphism:
    """Canonical (T, a) form of g∘h."""
    f = g.factor
    S = h.isometry
    c = S.inverse().apply(g.base)
    k = k_isometry(f, c, h.base)
    d = transvection_apply(f, c, h.base)
    return BallAutomorphism(f, g.isometry @ S @ k, k.inverse().apply(d))


def translation_first_form(g: BallAutomorphism) -> Tuple[Element, LinearMap]:
    """g = g_b∘S with b = g(0) and S = T."""
    return g.isometry.apply(g.base), g.isometry


def k_isometry(f: FactorDescriptor, a: Element, b: Element) -> LinearMap:
    """k(a,b) = B_{g_a(b)}⁻¹ B_a B(b,−a)⁻¹ B_b."""
    ga = Transvection(f, a)
    if ball_norm(f, b) >= 1.0:
        raise DomainError("k(a,b) needs ‖b‖ < 1")
    gab = ga(b)
    M = (bergmann_sqrt(f, gab).inverse_map.matrix
         @ ga.sqrt.map.matrix
         @ _inverse(bergmann(f, b, -a).matrix)
         @ bergmann_sqrt(f, b).map.matrix)
    return LinearMap(f, M)


def transvection_derivative(f: FactorDescriptor, a: Element, x0: Element) -> LinearMap:
    """g_a'(x0) = B_a B(x0,−a)⁻¹."""
    return Transvection(f, a).derivative(x0)


def bergmann_identity_residual(f: FactorDescriptor, a: Element, b: Element) -> float:
    """‖B(g_a(b),g_a(b)) − B_a B(b,−a)⁻¹ B(b,b) B(−a,b)⁻¹ B_a‖_F."""
    ga = Transvection(f, a)
    gb = ga(b)
    Ba = ga.sqrt.map.matrix
    rhs = (Ba @ _inverse(bergmann(f, b, -a).matrix) @ bergmann(f, b, b).matrix
           @ _inverse(bergmann(f, -a, b).matrix) @ Ba)
    return float(np.linalg.norm(bergmann(f, gb, gb).matrix - rhs))


def bergmann_sqrt_norm(f: FactorDescriptor, a: Element) -> float:
    """Exact ‖B_a‖ in the JB*-norm."""
    check_factor(f, a)
    return _sqrt_norm_coords(f, a.coords)


def _psd_sqrt(M: np.ndarray) -> np.ndarray:
    w, Q = np.linalg.eigh(0.5 * (M + M.conj().T))
    return (Q * np.sqrt(np.clip(w, 0.0, None))) @ Q.conj().T


def bergmann_sqrt_closed_form(f: FactorDescriptor, a: Element) -> LinearMap:
    """B_a without an eigen-solve: (1 − aa*)^½ z (1 − a*a)^½, or 1 − |a_i|² per coordinate."""
    check_factor(f, a)
    if ball_norm(f, a) >= 1.0:
        raise DomainError(f"B_a needs ‖a‖ < 1, got {ball_norm(f, a):.15g}")
    return LinearMap(f, _closed_form_coords(f, a.coords))


def _closed_form_coords(f: FactorDescriptor, a: np.ndarray) -> np.ndarray:
    if f.kind == MATRIX:
        A = a.reshape(f.p, f.q)
        left = _psd_sqrt(np.eye(f.p) - A @ A.conj().T)
        right = _psd_sqrt(np.eye(f.q) - A.conj().T @ A)
        # row-major vec(L z R) = (L ⊗ Rᵀ) vec(z)
        return np.kron(left, right.T)
    if f.kind == COMMUTATIVE:
        return np.diag(1.0 - np.abs(a) ** 2).astype(np.complex128)
    return block_diag(*(_closed_form_coords(part, a[s]) for part, s in zip(f.parts, f.slices())))


def _sqrt_norm_coords(f: FactorDescriptor, a: np.ndarray) -> float:
    if f.kind == MATRIX:
        A = a.reshape(f.p, f.q)
        # B_a z = (1 − aa*)^½ z (1 − a*a)^½
        left = _psd_sqrt(np.eye(f.p) - A @ A.conj().T)
        right = _psd_sqrt(np.eye(f.q) - A.conj().T @ A)
        return two_sided_norm(left, right)
    if f.kind == COMMUTATIVE:
        return float(np.max(1.0 - np.abs(a) ** 2))
    return max(_sqrt_norm_coords(part, a[s]) for part, s in zip(f.parts, f.slices()))


def kaup_sauter_norm(f: FactorDescriptor, u: Element, t: float) -> float:
    """‖B_{tu}‖, bounded by 2√(1−t²) for a maximal tripotent u."""
    return bergmann_sqrt_norm(f, t * u)


# ---------- Isometries ----------
def haar_unitary(n: int, seed: SeedLike) -> np.ndarray:
    """Haar-distributed n×n unitary: QR of a complex Ginibre matrix with the phases of R fixed."""
    rng = as_generator(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _random_isometry_matrix(f: FactorDescriptor, rng: np.random.Generator) -> np.ndarray:
    if f.kind == MATRIX:
        U = haar_unitary(f.p, rng)
        V = haar_unitary(f.q, rng)
        # row-major vec(U X V*) = (U ⊗ conj(V)) vec(X)
        return np.kron(U, V.conj())
    if f.kind == COMMUTATIVE:
        return np.diag(np.exp(2j * np.pi * rng.random(f.n)))
    return block_diag(*(_random_isometry_matrix(part, rng) for part in f.parts))


def random_isometry(f: FactorDescriptor, seed: SeedLike) -> LinearMap:
    """Linear part T from the identity component: U·x·V* (Matrix), phases (Commutative), blockwise."""
    return LinearMap(f, _random_isometry_matrix(f, as_generator(seed)))


def _discrete_matrix(f: FactorDescriptor, rng: np.random.Generator) -> np.ndarray:
    if f.kind == MATRIX:
        P = np.eye(f.dim, dtype=np.complex128)
        if f.p == f.q and rng.random() < 0.5:
            n = f.p
            perm = [j * n + i for i in range(n) for j in range(n)]
            P = P[perm]
        return P
    if f.kind == COMMUTATIVE:
        return np.eye(f.n, dtype=np.complex128)[rng.permutation(f.n)]
    return block_diag(*(_discrete_matrix(part, rng) for part in f.parts))


def discrete_isometry(f: FactorDescriptor, seed: SeedLike) -> LinearMap:
    """Isometries outside the identity component: transpose (square Matrix), permutations (Commutative)."""
    return LinearMap(f, _discrete_matrix(f, as_generator(seed)))


def is_isometry(f: FactorDescriptor, T: LinearMap, samples: int = 100, seed: SeedLike = 0,
                tol: float = 1e-10) -> bool:
    rng = as_generator(seed)
    for _ in range(samples):
        x = random_element(f, rng, 1.0)
        if abs(ball_norm(f, T.apply(x)) - ball_norm(f, x)) > tol * (1.0 + ball_norm(f, x)):
            return False
    return True


def random_automorphism(f: FactorDescriptor, seed: SeedLike, radius: float = 0.9,
                        discrete: bool = False) -> BallAutomorphism:
    """(T, a) with T from random_isometry (optionally times a discrete isometry) and ‖a‖ ≤ radius."""
    rng = as_generator(seed)
    T = random_isometry(f, rng)
    if discrete:
        T = discrete_isometry(f, rng) @ T
    return BallAutomorphism(f, T, random_element(f, rng, radius))
