"""
Boundary geometry of the unit ball: boundary components K_e = e + B₀(e),
samplers for Γ, Γ₁ and automorphism orbits, Russo-Dye quadrature,
determining-set suprema, the algebraic inner product and the witness
functions that single out points of Γ.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from jbtriple_kit.algebra.errors import (
    DomainError, EmptyGamma1Error, InternalConsistencyError, NotATripotentError, NotMaximalError,
    TripleError, UnknownTestFunctionError,
)
from jbtriple_kit.algebra.factors import (
    Element, FactorDescriptor, SeedLike, as_generator, ball_norm, check_factor, random_element,
)
from jbtriple_kit.algebra.moebius import BallAutomorphism, Transvection, random_automorphism
from jbtriple_kit.algebra.spectral import (
    boundary_tripotent, classify_tripotent, frame_length, peirce_projections,
    spectral_decomposition, tripotent_sample,
)

logger = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-9
GAMMA = "gamma"
GAMMA1 = "gamma1"
ORBIT_G0 = "orbit-g0"
ORBIT_G = "orbit-g"
SET_KINDS = (GAMMA, GAMMA1, ORBIT_G0, ORBIT_G)


# ---------- Boundary components ----------
@dataclass(frozen=True)
class BoundaryComponent:
    factor: FactorDescriptor
    tripotent: Element
    rank: int
    certificate_residual: float = 0.0
    peirce0_norm: float = 0.0

    @property
    def is_singleton(self) -> bool:
        return self.rank == 0


def _membership(f: FactorDescriptor, e: Element, x: Element) -> Tuple[float, float]:
    """(‖P₀(e)(x−e) − (x−e)‖, ‖P₀(e)x‖)."""
    p0, _, _ = peirce_projections(f, e)
    w = x - e
    return ball_norm(f, p0.apply(w) - w), ball_norm(f, p0.apply(x))


def boundary_component(f: FactorDescriptor, x: Element, method: str = "spectral",
                       tol: float = MEMBERSHIP_TOL) -> BoundaryComponent:
    """K_e containing the unit vector x, with rank = rank(f) − frame length of e."""
    e = boundary_tripotent(f, x, method=method)
    residual, p0_norm = _membership(f, e, x)
    # spectral values accepted as 1 leave their distance to 1 in x − e
    slack = max((1.0 - lam for lam in spectral_decomposition(f, x).lambdas if lam >= 1.0 - 1e-8),
                default=0.0)
    if residual > tol + 2.0 * slack or p0_norm >= 1.0:
        raise InternalConsistencyError(
            f"x failed the K_e membership certificate: residual {residual:.3e}, ‖P₀x‖ = {p0_norm:.6g}"
        )
    return BoundaryComponent(f, e, f.rank - frame_length(f, e), residual, p0_norm)


def component_contains(component: BoundaryComponent, x: Element,
                       tol: float = MEMBERSHIP_TOL) -> bool:
    f = component.factor
    check_factor(f, x)
    residual, _ = _membership(f, component.tripotent, x)
    return residual <= tol and ball_norm(f, x - component.tripotent) < 1.0


def sample_component(component: BoundaryComponent, n: int, seed: SeedLike,
                     max_inner: float = 1.0) -> List[Element]:
    """Points e + w with w drawn from the Peirce-0 space, ‖w‖ < max_inner ≤ 1."""
    f, e = component.factor, component.tripotent
    if component.rank == 0:
        return [e for _ in range(n)]
    rng = as_generator(seed)
    p0, _, _ = peirce_projections(f, e)
    out = []
    while len(out) < n:
        w = p0.apply(random_element(f, rng, 1.0, exact=True))
        nrm = ball_norm(f, w)
        if nrm < 1e-12:
            continue
        out.append(e + (max_inner * rng.random() / nrm) * w)
    return out


def boundary_point_sample(f: FactorDescriptor, seed: SeedLike, max_inner: float = 1.0) -> Element:
    """A unit vector in a boundary component of random rank."""
    rng = as_generator(seed)
    length = int(rng.integers(1, f.rank + 1))
    component = BoundaryComponent(f, tripotent_sample(f, length, rng), f.rank - length)
    return sample_component(component, 1, rng, max_inner)[0]


@dataclass(frozen=True)
class RankCheck:
    rank_before: int
    rank_after: int
    samples_checked: int = 0
    samples_inside: int = 0
    max_residual: float = 0.0

    @property
    def preserved(self) -> bool:
        return self.rank_before == self.rank_after and self.samples_inside == self.samples_checked


def component_rank_preserved(f: FactorDescriptor, v: Element, g: BallAutomorphism,
                             samples: int = 10, seed: SeedLike = 0) -> RankCheck:
    """Ranks of K_v and K_{g(v)}, plus how many sampled points of K_v land in K_{g(v)}."""
    before = boundary_component(f, v)
    gv = g(v)
    after = boundary_component(f, gv / ball_norm(f, gv))
    inside, worst = 0, 0.0
    for y in sample_component(before, samples, seed):
        gy = g(y)
        residual, _ = _membership(f, after.tripotent, gy)
        worst = max(worst, residual)
        if residual <= 1e-8 and ball_norm(f, gy - after.tripotent) < 1.0:
            inside += 1
    return RankCheck(before.rank, after.rank, samples, inside, worst)


# ---------- Γ, Γ₁ and orbit samplers ----------
def gamma_sample(f: FactorDescriptor, n: int, seed: SeedLike) -> List[Element]:
    """Maximal tripotents: U·[I|0]·V* for matrices, unimodular vectors for coordinates."""
    rng = as_generator(seed)
    return [tripotent_sample(f, f.rank, rng) for _ in range(n)]


def gamma1_sample(f: FactorDescriptor, n: int, seed: SeedLike) -> List[Element]:
    if not f.admits_unitary:
        raise EmptyGamma1Error(f"{f} has no unitary tripotent")
    return gamma_sample(f, n, seed)


def orbit_sample(f: FactorDescriptor, v: Element, n: int, seed: SeedLike,
                 discrete: bool = False, radius: float = 0.99) -> List[Element]:
    """g(v) for random canonical-form automorphisms g; `discrete` allows the whole group."""
    check_factor(f, v)
    rng = as_generator(seed)
    return [random_automorphism(f, rng, radius=radius, discrete=discrete)(v) for _ in range(n)]


def rank_k_orbit_sample(f: FactorDescriptor, k: int, n: int, seed: SeedLike) -> List[Element]:
    """Orbit of a point in a rank-k component; every sample lies in a rank-k component."""
    if not 0 <= k < f.rank:
        raise DomainError(f"component rank {k} outside 0..{f.rank - 1} for {f}")
    rng = as_generator(seed)
    e = tripotent_sample(f, f.rank - k, rng)
    component = BoundaryComponent(f, e, k)
    v = sample_component(component, 1, rng)[0]
    return orbit_sample(f, v, n, rng)


@dataclass(frozen=True)
class SetSpec:
    kind: str
    point: Optional[Element] = None

    def __post_init__(self):
        if self.kind not in SET_KINDS:
            raise ValueError(f"unknown set kind {self.kind!r}; known: {', '.join(SET_KINDS)}")
        if self.kind in (ORBIT_G0, ORBIT_G) and self.point is None:
            raise ValueError(f"{self.kind} needs a base point")

    def __str__(self) -> str:
        return self.kind


def sample_set(f: FactorDescriptor, spec: SetSpec, n: int, seed: SeedLike) -> List[Element]:
    if spec.kind == GAMMA:
        return gamma_sample(f, n, seed)
    if spec.kind == GAMMA1:
        return gamma1_sample(f, n, seed)
    return orbit_sample(f, spec.point, n, seed, discrete=spec.kind == ORBIT_G)


# ---------- Quadrature ----------
@dataclass(frozen=True)
class RussoDyeResult:
    approx: Element
    error: float
    witnesses: Tuple[Element, ...]
    certified: Tuple[bool, ...] = ()
    certificate: str = "none"

    @property
    def all_certified(self) -> bool:
        return all(self.certified)


def _circle(N: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(N) / N)


def russo_dye_reconstruct(f: FactorDescriptor, b: Element, a: Element, N: int = 512,
                          certify: bool = True, tol: float = 1e-8) -> RussoDyeResult:
    """b ≈ (1/N) Σ_k g_b(e^{2πik/N} a), a trapezoid rule on the circle."""
    check_factor(f, b, a)
    if abs(ball_norm(f, a) - 1.0) > 1e-10:
        raise DomainError(f"Russo-Dye needs ‖a‖ = 1, got {ball_norm(f, a):.15g}")
    if N < 4:
        raise DomainError(f"quadrature needs at least 4 nodes, got {N}")
    gb = Transvection(f, b)
    witnesses = tuple(gb(w * a) for w in _circle(N))
    approx = Element(f, np.mean([x.coords for x in witnesses], axis=0))
    error = ball_norm(f, approx - b)

    kind, certified = "none", ()
    if certify:
        flags = classify_tripotent(f, a, tol)
        if flags.is_unitary:
            kind = "unitary"
            certified = tuple(classify_tripotent(f, x, tol).is_unitary for x in witnesses)
        elif flags.is_maximal:
            kind = "maximal"
            certified = tuple(classify_tripotent(f, x, tol).is_maximal for x in witnesses)
        else:
            kind = "orbit-rank"
            rank = boundary_component(f, a).rank
            certified = tuple(_component_rank_or_none(f, x) == rank for x in witnesses)
    return RussoDyeResult(approx, error, witnesses, certified, kind)


def _component_rank_or_none(f: FactorDescriptor, x: Element) -> Optional[int]:
    try:
        return boundary_component(f, x / ball_norm(f, x)).rank
    except TripleError as e:
        logger.warning("witness has no certifiable component: %s", e)
        return None


def _require_registered(test_fn: Callable[[Element], object]) -> None:
    # testfunctions imports this module
    from jbtriple_kit.algebra.testfunctions import HolomorphicFunction, registered_names
    known = registered_names()
    if not isinstance(test_fn, HolomorphicFunction) or test_fn.name not in known:
        raise UnknownTestFunctionError(str(getattr(test_fn, "name", getattr(test_fn, "__name__", test_fn))), known)


def mean_value_check(f: FactorDescriptor, test_fn: Callable[[Element], object], b: Element,
                     a: Element, N: int = 512) -> float:
    """|f(b) − (1/N) Σ_k f(g_b(e^{2πik/N} a))|."""
    check_factor(f, b, a)
    _require_registered(test_fn)
    if abs(ball_norm(f, a) - 1.0) > 1e-10:
        raise DomainError(f"mean value needs ‖a‖ = 1, got {ball_norm(f, a):.15g}")
    gb = Transvection(f, b)
    values = [np.atleast_1d(np.asarray(test_fn(gb(w * a)), dtype=np.complex128))
              for w in _circle(N)]
    target = np.atleast_1d(np.asarray(test_fn(b), dtype=np.complex128))
    return float(np.linalg.norm(target - np.mean(values, axis=0)))


# ---------- Algebraic inner product and witnesses ----------
def algebraic_inner(f: FactorDescriptor, x: Element, y: Element) -> complex:
    """⟨x,y⟩_a: trace pairing for matrices, Euclidean for coordinates."""
    check_factor(f, x, y)
    return complex(np.vdot(y.coords, x.coords))


def algebraic_inner_frame(f: FactorDescriptor, x: Element, y: Element) -> complex:
    """Σ λ_i conj(φ_i(y)) over a spectral frame of x, φ_i(y) = ⟨y, e_i⟩."""
    check_factor(f, x, y)
    data = spectral_decomposition(f, x)
    return complex(sum(lam * np.conj(np.vdot(e.coords, y.coords))
                       for lam, e in zip(data.lambdas, data.frame)))


def algebraic_norm(f: FactorDescriptor, x: Element) -> float:
    return math.sqrt(max(algebraic_inner(f, x, x).real, 0.0))


def require_maximal(f: FactorDescriptor, e: Element, tol: float = 1e-8) -> None:
    flags = classify_tripotent(f, e, tol)
    if not flags.is_tripotent:
        raise NotATripotentError(flags.residuals["tripotent"])
    if not flags.is_maximal:
        raise NotMaximalError(flags.residuals["maximal"])


class ShilovWitness:
    """h(z) = ½(1 + ⟨z,e⟩_a / rank) for a maximal tripotent e; |h| ≤ 1 with equality only at e."""

    def __init__(self, f: FactorDescriptor, e: Element, tol: float = 1e-8):
        require_maximal(f, e, tol)
        self.factor = f
        self.tripotent = e
        self.rank = f.rank

    def __call__(self, z: Element) -> complex:
        return 0.5 * (1.0 + algebraic_inner(self.factor, z, self.tripotent) / self.rank)


def shilov_witness(f: FactorDescriptor, e: Element, z: Element) -> complex:
    return ShilovWitness(f, e)(z)


def shilov_witness_vector(f: FactorDescriptor, e: Element, z: Element,
                          v: Sequence[complex]) -> np.ndarray:
    return shilov_witness(f, e, z) * np.asarray(v, dtype=np.complex128)


def delta_for_epsilon(norm_e: float, epsilon: float) -> float:
    """Largest δ with δ·‖e‖_a + √(2δ)·‖e‖_a ≤ ε."""
    if norm_e <= 0 or epsilon <= 0:
        raise DomainError(f"need norm_e > 0 and epsilon > 0, got {norm_e}, {epsilon}")
    s = (-math.sqrt(2.0) + math.sqrt(2.0 + 4.0 * epsilon / norm_e)) / 2.0
    return s * s


def eta_for_delta(delta: float) -> float:
    """½|1+μ| > 1−η with |μ| ≤ 1 forces |1−μ| < δ."""
    if not 0 < delta <= 2:
        raise DomainError(f"delta must lie in (0, 2], got {delta}")
    return 1.0 - math.sqrt(1.0 - delta * delta / 4.0)


def shilov_margin(f: FactorDescriptor, epsilon: float) -> Tuple[float, float]:
    delta = delta_for_epsilon(math.sqrt(f.rank), epsilon)
    return delta, eta_for_delta(delta)


# ---------- Determining sets ----------
@dataclass(frozen=True)
class DeterminingReport:
    test_function_id: str
    sup_ball: float
    sup_set: float
    gap: float
    sample_counts: Dict[str, int] = field(default_factory=dict)


def _sup(test_fn: Callable[[Element], object], points: Sequence[Element]) -> float:
    best = 0.0
    for z in points:
        best = max(best, float(np.linalg.norm(np.atleast_1d(test_fn(z)))))
    return best


def _ball_samples(f: FactorDescriptor, n: int, rng: np.random.Generator) -> List[Element]:
    """Half interior, half on the unit sphere."""
    return [random_element(f, rng, 1.0, exact=bool(i % 2)) for i in range(n)]


def determining_sup(f: FactorDescriptor, test_fn: Callable[[Element], object], set_spec: SetSpec,
                    n_set: int, n_ball: int, seed: SeedLike,
                    anchors: Sequence[Element] = (), test_function_id: str = "") -> DeterminingReport:
    """Sup of |f| over ball samples against its sup over the candidate set.

    The set lies in B̄, so the ball supremum is taken over the union of both
    samples and sup_set ≤ sup_ball holds exactly.
    """
    rng = as_generator(seed)
    set_points = sample_set(f, set_spec, n_set, rng) + list(anchors)
    ball_points = _ball_samples(f, n_ball, rng)
    sup_set = _sup(test_fn, set_points)
    sup_ball = max(sup_set, _sup(test_fn, ball_points))
    name = test_function_id or getattr(test_fn, "name", type(test_fn).__name__)
    return DeterminingReport(name, sup_ball, sup_set, sup_ball - sup_set,
                             {"set": len(set_points), "ball": len(ball_points)})


def minimality_gap(f: FactorDescriptor, e: Element, radius: float, n: int,
                   seed: SeedLike) -> DeterminingReport:
    """Witness sup on B̄ outside B(e, radius) against its value 1 at e."""
    h = ShilovWitness(f, e)
    rng = as_generator(seed)
    outside: List[Element] = []
    pools = (lambda: gamma_sample(f, 1, rng)[0],
             lambda: random_element(f, rng, 1.0, exact=True),
             lambda: random_element(f, rng, 1.0))
    drawn = 0
    while len(outside) < n:
        z = pools[drawn % 3]()
        drawn += 1
        if ball_norm(f, z - e) >= radius:
            outside.append(z)
    sup_ball = max(abs(h(e)), _sup(h, outside))
    sup_set = _sup(h, outside)
    return DeterminingReport("shilov", sup_ball, sup_set, sup_ball - sup_set,
                             {"set": len(outside), "drawn": drawn})


# ---------- Orbit closure ----------
@dataclass(frozen=True)
class OrbitClosurePoint:
    t: float
    distance: Optional[float]
    error: Optional[str] = None


def gamma_in_orbit_closure_demo(f: FactorDescriptor, v: Element, e: Element,
                                t_grid: Sequence[float] = (0.9, 0.99, 0.999, 0.9999),
                                ) -> List[OrbitClosurePoint]:
    """‖g_{te}(v) − e‖ along t_grid; singular steps are reported, not raised."""
    check_factor(f, v, e)
    require_maximal(f, e)
    if ball_norm(f, v) > 1.0 + 1e-10:
        raise DomainError("orbit-closure demo needs v in the closed ball")
    out = []
    for t in t_grid:
        try:
            gv = Transvection(f, t * e)(v)
            out.append(OrbitClosurePoint(float(t), ball_norm(f, gv - e)))
        except TripleError as exc:
            logger.warning("orbit-closure step t=%s failed: %s", t, exc)
            out.append(OrbitClosurePoint(float(t), None, str(exc)))
    return out

