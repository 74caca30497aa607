"""
Spectral machinery: odd powers, frames, the odd functional calculus,
tripotent classification, Peirce projections and tripotent order.

Spectral values are stored in descending order, λ₁ = ‖x‖ first.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from jbtriple_kit.algebra.errors import DomainError, NotATripotentError, SlowConvergenceError
from jbtriple_kit.algebra.factors import (
    COMMUTATIVE, MATRIX, Element, FactorDescriptor, LinearMap, SeedLike, _norm_coords,
    _triple_coords, as_generator, ball_norm, check_factor, d_operator, q_operator, zero,
)
from jbtriple_kit.algebra.moebius import haar_unitary
from jbtriple_kit.algebra.operators import bergmann

logger = logging.getLogger(__name__)

DROP_RATIO = 1e-12
DISTINCT_TOL = 1e-9
SPECTRAL_THRESHOLD = 1e-8
ITERATION_TOL = 1e-10
ITERATION_CAP = 200


@dataclass(frozen=True)
class SpectralData:
    base: Element
    lambdas: Tuple[float, ...]
    frame: Tuple[Element, ...]

    def reconstruct(self) -> Element:
        out = zero(self.base.factor)
        for lam, e in zip(self.lambdas, self.frame):
            out = out + lam * e
        return out

    def __len__(self) -> int:
        return len(self.lambdas)


@dataclass(frozen=True)
class TripotentFlags:
    is_tripotent: bool
    is_minimal: bool
    is_maximal: bool
    is_unitary: bool
    residuals: Dict[str, float] = field(default_factory=dict)


# ---------- Odd powers ----------
def _check_odd(m: int) -> None:
    if int(m) != m or m < 1 or m % 2 == 0:
        raise DomainError(f"odd power needs an odd positive exponent, got {m}")


def odd_power(f: FactorDescriptor, x: Element, m: int) -> Element:
    """x^(2n+1) = {x, x^(2n−1), x}."""
    _check_odd(m)
    check_factor(f, x)
    y = x.coords
    for _ in range((m - 1) // 2):
        y = _triple_coords(f, x.coords, y, x.coords)
    return Element(f, y)


# ---------- Spectral decomposition ----------
def _decompose(f: FactorDescriptor, x: np.ndarray) -> List[Tuple[float, np.ndarray]]:
    if f.kind == MATRIX:
        U, s, Vh = np.linalg.svd(x.reshape(f.p, f.q), full_matrices=False)
        return [(float(s[i]), np.outer(U[:, i], Vh[i, :]).reshape(-1)) for i in range(s.size)]
    if f.kind == COMMUTATIVE:
        out = []
        for i, xi in enumerate(x):
            mod = abs(xi)
            if mod > 0.0:
                e = np.zeros(f.n, dtype=np.complex128)
                e[i] = xi / mod
                out.append((float(mod), e))
        return out
    pairs = []
    for part, s in zip(f.parts, f.slices()):
        for lam, e in _decompose(part, x[s]):
            full = np.zeros(f.dim, dtype=np.complex128)
            full[s] = e
            pairs.append((lam, full))
    return pairs


def spectral_decomposition(f: FactorDescriptor, x: Element) -> SpectralData:
    """x = Σ λ_i e_i over a frame; SVD for matrices, polar form for coordinates."""
    check_factor(f, x)
    nrm = _norm_coords(f, x.coords)
    if nrm == 0.0:
        return SpectralData(x, (), ())
    pairs = [(lam, e) for lam, e in _decompose(f, x.coords) if lam > DROP_RATIO * nrm]
    # stable sort keeps summand order among equal values
    order = sorted(range(len(pairs)), key=lambda i: -pairs[i][0])
    return SpectralData(
        x,
        tuple(pairs[i][0] for i in order),
        tuple(Element(f, pairs[i][1]) for i in order),
    )


def odd_calculus(f: FactorDescriptor, x: Element, coefficients: Sequence[complex]) -> Element:
    """p(x) = Σ p(λ_i) e_i; coefficients[k] multiplies t^k and must vanish for even k."""
    for k, c in enumerate(coefficients):
        if k % 2 == 0 and c != 0:
            raise DomainError(f"odd calculus needs an odd polynomial, coefficient of t^{k} is {c}")
    poly = np.polynomial.Polynomial(np.asarray(coefficients, dtype=np.complex128)
                                    if len(coefficients) else [0.0])
    data = spectral_decomposition(f, x)
    out = zero(f)
    for lam, e in zip(data.lambdas, data.frame):
        out = out + complex(poly(lam)) * e
    return out


# ---------- Tripotents ----------
def tripotent_residual(f: FactorDescriptor, e: Element) -> float:
    check_factor(f, e)
    return _norm_coords(f, _triple_coords(f, e.coords, e.coords, e.coords) - e.coords)


def is_tripotent(f: FactorDescriptor, e: Element, tol: float = 1e-8) -> bool:
    return tripotent_residual(f, e) <= tol


def classify_tripotent(f: FactorDescriptor, e: Element, tol: float = 1e-8) -> TripotentFlags:
    trip = tripotent_residual(f, e)
    maximal = float(np.linalg.norm(bergmann(f, e, e).matrix))
    qq = q_operator(f, e) @ q_operator(f, e)
    unitary = float(np.linalg.norm(qq.matrix - np.eye(f.dim)))
    D = d_operator(f, e, e).matrix
    w = np.linalg.eigvalsh(0.5 * (D + D.conj().T))
    ones = int(np.sum(np.abs(w - 1.0) <= max(tol, 1e-9)))
    residuals = {"tripotent": trip, "maximal": maximal, "unitary": unitary,
                 "peirce1_dim": float(ones)}
    if trip > tol:
        return TripotentFlags(False, False, False, False, residuals)
    return TripotentFlags(True, ones == 1, maximal <= tol, unitary <= tol, residuals)


def _require_tripotent(f: FactorDescriptor, e: Element, tol: float) -> None:
    r = tripotent_residual(f, e)
    if r > tol:
        raise NotATripotentError(r)


def peirce_projections(f: FactorDescriptor, e: Element,
                       tol: float = 1e-8) -> Tuple[LinearMap, LinearMap, LinearMap]:
    """P₀ = B(e,e), P½ = 2(D(e,e) − Q_eQ_e), P₁ = Q_eQ_e."""
    _require_tripotent(f, e, tol)
    qq = q_operator(f, e) @ q_operator(f, e)
    p0 = bergmann(f, e, e)
    phalf = 2.0 * (d_operator(f, e, e) - qq)
    return p0, phalf, qq


def tripotent_leq(f: FactorDescriptor, c: Element, e: Element, tol: float = 1e-8) -> bool:
    """c ≤ e: e − c is a tripotent orthogonal to c. 0 ≤ e for every e."""
    _require_tripotent(f, c, tol)
    _require_tripotent(f, e, tol)
    d = e - c
    if tripotent_residual(f, d) > tol:
        return False
    return float(np.linalg.norm(d_operator(f, d, c).matrix)) <= tol


def element_rank(f: FactorDescriptor, x: Element, tol: float = DISTINCT_TOL) -> int:
    """Number of distinct nonzero spectral values."""
    lambdas = spectral_decomposition(f, x).lambdas
    if not lambdas:
        return 0
    count = 1
    for prev, cur in zip(lambdas, lambdas[1:]):
        if prev - cur > tol:
            count += 1
    return count


def frame_length(f: FactorDescriptor, e: Element) -> int:
    return len(spectral_decomposition(f, e).lambdas)


def boundary_tripotent(f: FactorDescriptor, x: Element, method: str = "iterate",
                       max_iter: int = ITERATION_CAP, tol: float = ITERATION_TOL) -> Element:
    """The tripotent e with x ∈ K_e: lim x^(3^k) or Σ_{λ_i ≈ 1} e_i."""
    nrm = ball_norm(f, x)
    if abs(nrm - 1.0) > 1e-10:
        raise DomainError(f"boundary tripotent needs ‖x‖ = 1, got {nrm:.15g}")
    if method == "spectral":
        data = spectral_decomposition(f, x)
        out = zero(f)
        for lam, e in zip(data.lambdas, data.frame):
            if lam >= 1.0 - SPECTRAL_THRESHOLD:
                out = out + e
        return out
    if method != "iterate":
        raise ValueError(f"unknown method {method!r}; use 'iterate' or 'spectral'")
    lambdas = spectral_decomposition(f, x).lambdas
    if any(1.0 - SPECTRAL_THRESHOLD < lam < 1.0 - tol for lam in lambdas):
        raise SlowConvergenceError(max_iter, lambdas)
    # λ₁ above 1 diverges under cubing
    y = x.coords / nrm
    for k in range(1, max_iter + 1):
        nxt = _triple_coords(f, y, y, y)
        if _norm_coords(f, nxt - y) < tol:
            logger.debug("boundary tripotent after %d cubings", k)
            return Element(f, nxt)
        y = nxt
    raise SlowConvergenceError(max_iter, lambdas)


# ---------- Frames and sampling ----------
def extend_to_maximal(f: FactorDescriptor, e: Element, tol: float = 1e-8) -> Element:
    """A maximal tripotent u ≥ e, completing the frame of e."""
    _require_tripotent(f, e, tol)
    return Element(f, _extend_coords(f, e.coords))


def _extend_coords(f: FactorDescriptor, e: np.ndarray) -> np.ndarray:
    if f.kind == MATRIX:
        U, _, Vh = np.linalg.svd(e.reshape(f.p, f.q), full_matrices=True)
        r = min(f.p, f.q)
        return (U[:, :r] @ Vh[:r, :]).reshape(-1)
    if f.kind == COMMUTATIVE:
        out = e.copy()
        out[np.abs(out) < 0.5] = 1.0
        return out
    out = np.empty(f.dim, dtype=np.complex128)
    for part, s in zip(f.parts, f.slices()):
        out[s] = _extend_coords(part, e[s])
    return out


def _tripotent_coords(f: FactorDescriptor, k: int, rng: np.random.Generator) -> np.ndarray:
    if f.kind == MATRIX:
        U = haar_unitary(f.p, rng)
        V = haar_unitary(f.q, rng)
        return (U[:, :k] @ V[:, :k].conj().T).reshape(-1)
    if f.kind == COMMUTATIVE:
        out = np.zeros(f.n, dtype=np.complex128)
        idx = rng.choice(f.n, size=k, replace=False)
        out[idx] = np.exp(2j * np.pi * rng.random(k))
        return out
    # spread k frame slots across the summands
    slots = np.repeat(np.arange(len(f.parts)), [part.rank for part in f.parts])
    chosen = rng.choice(slots.size, size=k, replace=False)
    counts = np.bincount(slots[chosen], minlength=len(f.parts))
    out = np.empty(f.dim, dtype=np.complex128)
    for part, s, c in zip(f.parts, f.slices(), counts):
        out[s] = _tripotent_coords(part, int(c), rng)
    return out


def tripotent_sample(f: FactorDescriptor, k: int, seed: SeedLike) -> Element:
    """Random tripotent whose frame has exactly k elements."""
    if not 0 <= k <= f.rank:
        raise DomainError(f"frame length {k} outside 0..{f.rank} for {f}")
    return Element(f, _tripotent_coords(f, k, as_generator(seed)))


def frame_orthogonality(f: FactorDescriptor, frame: Sequence[Element]) -> float:
    """max ‖D(e_i, e_j)‖_F over i ≠ j."""
    worst = 0.0
    for i, ei in enumerate(frame):
        for j, ej in enumerate(frame):
            if i != j:
                worst = max(worst, float(np.linalg.norm(d_operator(f, ei, ej).matrix)))
    return worst

