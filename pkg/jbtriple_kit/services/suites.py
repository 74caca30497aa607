"""
Invariant suites run by `verify`.

Every suite is a trial function: it draws its inputs from ctx.rng, checks
one family of identities or invariants and returns an Outcome whose residual
is compared against the suite's tolerance.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from jbtriple_kit.algebra.boundary import (
    ShilovWitness, algebraic_inner, algebraic_inner_frame, algebraic_norm, boundary_component,
    boundary_point_sample, component_rank_preserved, gamma1_sample, gamma_sample, mean_value_check,
    russo_dye_reconstruct, shilov_margin,
)
from jbtriple_kit.algebra.errors import IdentitySkipped
from jbtriple_kit.algebra.factors import (
    Element, ball_norm, d_operator, d_operator_norm, random_element, random_polydisc, sampled_operator_norm,
    triple_product,
)
from jbtriple_kit.algebra.moebius import (
    Transvection, automorphism_compose, automorphism_inverse, bergmann_identity_residual,
    bergmann_sqrt_closed_form, is_isometry, k_isometry, kaup_sauter_norm, random_automorphism,
    random_isometry, transvection_apply, transvection_derivative,
)
from jbtriple_kit.algebra.operators import (
    IDENTITIES, bergmann, bergmann_sqrt, evaluate_identity, identity_scale, quasi_inverse,
    quasi_inverse_series,
)
from jbtriple_kit.algebra.spectral import (
    classify_tripotent, boundary_tripotent, extend_to_maximal, frame_orthogonality, odd_calculus,
    odd_power, peirce_projections, spectral_decomposition, tripotent_leq, tripotent_residual,
    tripotent_sample,
)
from jbtriple_kit.algebra.testfunctions import POLYNOMIAL_FAMILY, make_test_function
from jbtriple_kit.config import KitConfig
from jbtriple_kit.services.common import Outcome, TrialContext
from jbtriple_kit.services.runner import TrialTask
from jbtriple_kit.services.suite_config import SuiteConfig

logger = logging.getLogger(__name__)

TrialFn = Callable[[TrialContext], Outcome]


@dataclass(frozen=True)
class Suite:
    name: str
    tolerance: str
    run_trial: TrialFn
    description: str = ""


def _rand(ctx: TrialContext, radius: float = 1.0, exact: bool = False) -> Element:
    return random_element(ctx.factor, ctx.rng, radius, exact)


def _fro(M: np.ndarray) -> float:
    return float(np.linalg.norm(M))


# ---------- Triple axioms ----------
def jordan_identity_trial(ctx: TrialContext) -> Outcome:
    """{a,b,{x,y,z}} = {{a,b,x},y,z} − {x,{b,a,y},z} + {x,y,{a,b,z}} on polydisc coordinates."""
    f = ctx.factor
    x, y, z, a, b = (random_polydisc(f, ctx.rng) for _ in range(5))

    def t(u, v, w):
        return triple_product(f, u, v, w)

    lhs = t(a, b, t(x, y, z))
    rhs = t(t(a, b, x), y, z) - t(x, t(b, a, y), z) + t(x, y, t(a, b, z))
    absolute = ball_norm(f, lhs - rhs)
    scale = 1.0 + float(np.prod([ball_norm(f, u) for u in (a, b, x, y, z)]))
    return Outcome(absolute / scale, {"absolute": absolute, "scale": scale})


def triple_axioms_trial(ctx: TrialContext) -> Outcome:
    f = ctx.factor
    x, y, z = (_rand(ctx) for _ in range(3))
    lam = complex(ctx.rng.standard_normal(), ctx.rng.standard_normal())
    nx = ball_norm(f, x)

    symmetric = ball_norm(f, triple_product(f, x, y, z) - triple_product(f, z, y, x))
    conj_linear = ball_norm(f, triple_product(f, x, lam * y, z) - lam.conjugate() * triple_product(f, x, y, z))
    D = d_operator(f, x, x).matrix
    hermitian = _fro(D - D.conj().T)
    positivity = max(0.0, -float(np.linalg.eigvalsh(0.5 * (D + D.conj().T)).min()))
    cstar = abs(ball_norm(f, triple_product(f, x, x, x)) - nx ** 3)
    exact = d_operator_norm(f, x)
    d_norm = abs(exact - nx ** 2)
    sampled = sampled_operator_norm(f, d_operator(f, x, x), n=20, seed=ctx.rng)
    sampled_excess = max(0.0, sampled - exact)

    metrics = {
        "symmetric": symmetric, "conjugate_linear": conj_linear, "hermitian": hermitian,
        "positivity": positivity, "cstar": cstar, "d_norm": d_norm, "sampled_excess": sampled_excess,
    }
    return Outcome(max(metrics.values()) / (1.0 + nx ** 3), metrics)


# ---------- Bergmann operators ----------
def jp_catalogue_trial(ctx: TrialContext) -> Outcome:
    """One random tuple (norms ≤ 0.6) for every identity in the catalogue."""
    f = ctx.factor
    metrics: Dict[str, object] = {}
    residuals: List[float] = []
    for name, (arity, _) in IDENTITIES.items():
        inputs = [_rand(ctx, 0.6) for _ in range(arity)]
        try:
            lhs, rhs = evaluate_identity(f, name, inputs)
        except IdentitySkipped as e:
            metrics[name] = None
            logger.warning("%s skipped on %s: %s", name, f, e.reason)
            continue
        r = float(np.linalg.norm(lhs - rhs)) / identity_scale(lhs, rhs)
        metrics[name] = r
        residuals.append(r)
    if not residuals:
        raise IdentitySkipped("every identity was skipped")
    return Outcome(max(residuals), metrics)


def bergmann_sqrt_trial(ctx: TrialContext) -> Outcome:
    """B_a² = B(a,a), B_a·B_a⁻¹ = Id, eigen and closed-form roots agree, series and direct quasi-inverse agree."""
    f = ctx.factor
    a = _rand(ctx, 0.95)
    root = bergmann_sqrt(f, a)
    B = bergmann(f, a, a).matrix
    S = root.map.matrix
    scale = 1.0 + _fro(B)
    x, y = _rand(ctx, 0.8), _rand(ctx, 0.8)
    direct = quasi_inverse(f, x, y)
    series = quasi_inverse_series(f, x, y)
    metrics = {
        "square": _fro(S @ S - B) / scale,
        "inverse": _fro(S @ root.inverse_map.matrix - np.eye(f.dim)) / scale,
        "closed_form": _fro(S - bergmann_sqrt_closed_form(f, a).matrix) / scale,
        "series": ball_norm(f, series - direct.value) / (1.0 + ball_norm(f, direct.value)),
        "condition": direct.condition,
    }
    return Outcome(max(metrics["square"], metrics["inverse"], metrics["closed_form"], metrics["series"]),
                   metrics)


def bergmann_identity_trial(ctx: TrialContext) -> Outcome:
    """B(g_a(b),g_a(b)) = B_a B(b,−a)⁻¹ B(b,b) B(−a,b)⁻¹ B_a for a ∈ B, b ∈ B̄."""
    f = ctx.factor
    a = _rand(ctx, 0.9)
    b = _rand(ctx, 1.0, exact=bool(ctx.rng.random() < 0.5))
    r = bergmann_identity_residual(f, a, b)
    return Outcome(r, {"norm_a": ball_norm(f, a), "norm_b": ball_norm(f, b)})


# ---------- Automorphisms ----------
def gamma_invariance_trial(ctx: TrialContext) -> Outcome:
    """g(e) stays a maximal tripotent."""
    f = ctx.factor
    g = random_automorphism(f, ctx.rng, radius=0.9)
    e = gamma_sample(f, 1, ctx.rng)[0]
    x = g(e)
    maximal = _fro(bergmann(f, x, x).matrix)
    tripotent = tripotent_residual(f, x)
    return Outcome(max(maximal, tripotent), {"maximal": maximal, "tripotent": tripotent,
                                             "norm_a": ball_norm(f, g.base)})


KAUP_SAUTER_TS = (0.9, 0.99, 0.999)


def gamma1_invariance_trial(ctx: TrialContext) -> Outcome:
    """g(u) stays unitary; ‖B_{tu}‖ ≤ 2√(1−t²)."""
    f = ctx.factor
    if not f.admits_unitary:
        raise IdentitySkipped(f"{f} has no unitary tripotent")
    u = gamma1_sample(f, 1, ctx.rng)[0]
    g = random_automorphism(f, ctx.rng, radius=0.9)
    x = g(u)
    flags = classify_tripotent(f, x, ctx.tolerance)
    unitary = flags.residuals["unitary"]
    excess = 0.0
    metrics: Dict[str, object] = {"unitary": unitary}
    for t in KAUP_SAUTER_TS:
        value = kaup_sauter_norm(f, u, t)
        metrics[f"kaup_sauter_{t}"] = value
        excess = max(excess, value - 2.0 * math.sqrt(1.0 - t * t))
    metrics["kaup_sauter_excess"] = max(0.0, excess)
    return Outcome(max(unitary, max(0.0, excess)), metrics)


def composition_trial(ctx: TrialContext) -> Outcome:
    """g_a∘g_b = g_{g_a(b)}∘k(a,b), g_a(b) = k(b,a)⁻¹ g_b(a), canonical composition and inverses."""
    f = ctx.factor
    a, b, x = _rand(ctx, 0.8), _rand(ctx, 0.8), _rand(ctx, 0.8)
    k = k_isometry(f, a, b)
    gab = transvection_apply(f, a, b)
    law = ball_norm(f, transvection_apply(f, a, transvection_apply(f, b, x))
                    - transvection_apply(f, gab, k.apply(x)))
    swap = ball_norm(f, gab - k_isometry(f, b, a).inverse().apply(transvection_apply(f, b, a)))

    g = random_automorphism(f, ctx.rng, radius=0.8)
    h = random_automorphism(f, ctx.rng, radius=0.8)
    y = _rand(ctx, 0.5)
    composed = ball_norm(f, automorphism_compose(g, h)(y) - g(h(y)))
    inverse = ball_norm(f, automorphism_inverse(g)(g(y)) - y)
    isometric = is_isometry(f, k, samples=20, seed=ctx.rng, tol=ctx.tol("isometry"))

    metrics = {"law": law, "swap": swap, "compose": composed, "inverse": inverse,
               "k_isometry": isometric}
    residual = max(law, swap, composed, inverse)
    return Outcome(residual, metrics, passed=residual <= ctx.tolerance and isometric)


FD_STEP = 1e-6


def derivative_trial(ctx: TrialContext) -> Outcome:
    """g_a'(x0) = B_a B(x0,−a)⁻¹ against central differences; g_a'(0) = B_a, g_a'(−a) = B_a⁻¹."""
    f = ctx.factor
    a, x0 = _rand(ctx, 0.8), _rand(ctx, 0.8)
    v = _rand(ctx, 1.0, exact=True)
    g = Transvection(f, a)
    Dv = transvection_derivative(f, a, x0).apply(v)
    fd = (g(x0 + FD_STEP * v) - g(x0 - FD_STEP * v)) / (2.0 * FD_STEP)
    relative = ball_norm(f, fd - Dv) / max(ball_norm(f, Dv), 1e-12)
    at_zero = _fro(g.derivative(a * 0).matrix - g.sqrt.map.matrix)
    at_minus_a = _fro(g.derivative(-a).matrix - g.sqrt.inverse_map.matrix) / (1.0 + _fro(g.sqrt.inverse_map.matrix))
    metrics = {"finite_difference": relative, "at_zero": at_zero, "at_minus_a": at_minus_a}
    return Outcome(max(metrics.values()), metrics)


# ---------- Spectral ----------
def spectral_trial(ctx: TrialContext) -> Outcome:
    f = ctx.factor
    x = _rand(ctx)
    nx = ball_norm(f, x)
    data = spectral_decomposition(f, x)
    metrics: Dict[str, object] = {
        "reconstruction": ball_norm(f, data.reconstruct() - x) / (1.0 + nx),
        "top_value": abs(data.lambdas[0] - nx) if data.lambdas else nx,
        "orthogonality": frame_orthogonality(f, data.frame),
        "frame_tripotent": max((tripotent_residual(f, e) for e in data.frame), default=0.0),
        "frame_length": len(data),
    }
    for m in (3, 5, 7):
        coeffs = [0.0] * m + [1.0]
        metrics[f"odd_power_{m}"] = ball_norm(f, odd_power(f, x, m) - odd_calculus(f, x, coeffs))
    T = random_isometry(f, ctx.rng)
    moved = spectral_decomposition(f, T.apply(x)).lambdas
    n = max(len(moved), len(data.lambdas))
    padded = [np.pad(np.asarray(lam, dtype=float), (0, n - len(lam))) for lam in (moved, data.lambdas)]
    metrics["isometry_invariance"] = float(np.max(np.abs(padded[0] - padded[1]))) if n else 0.0
    y, z = _rand(ctx), _rand(ctx)
    metrics["triple_automorphism"] = ball_norm(
        f, T.apply(triple_product(f, x, y, z)) - triple_product(f, T.apply(x), T.apply(y), T.apply(z))
    )
    residual = max(v for k, v in metrics.items() if k != "frame_length")
    return Outcome(residual, metrics, passed=residual <= ctx.tolerance and len(data) <= f.rank)


def peirce_trial(ctx: TrialContext) -> Outcome:
    """Peirce projections of a random tripotent, tripotent order and maximal extension."""
    f = ctx.factor
    k = int(ctx.rng.integers(0, f.rank + 1))
    e = tripotent_sample(f, k, ctx.rng)
    projections = peirce_projections(f, e)
    P = [p.matrix for p in projections]
    eye = np.eye(f.dim)
    D = d_operator(f, e, e).matrix
    idempotence = 0.0
    for i, Pi in enumerate(P):
        for j, Pj in enumerate(P):
            target = Pi if i == j else np.zeros_like(Pi)
            idempotence = max(idempotence, _fro(Pi @ Pj - target))
    eigen = max(_fro(D @ Pk - lam * Pk) for lam, Pk in zip((0.0, 0.5, 1.0), P))

    frame = spectral_decomposition(f, e).frame
    chosen = [c for c in frame if ctx.rng.random() < 0.5]
    c = sum(chosen[1:], chosen[0]) if chosen else e * 0
    u = extend_to_maximal(f, e)
    order_ok = tripotent_leq(f, c, e) and tripotent_leq(f, e, u) and classify_tripotent(f, u).is_maximal

    metrics = {"sum": _fro(P[0] + P[1] + P[2] - eye), "idempotence": idempotence, "eigenspaces": eigen,
               "frame_length": k, "order": order_ok}
    residual = max(metrics["sum"], idempotence, eigen)
    return Outcome(residual, metrics, passed=residual <= ctx.tolerance and order_ok)


# ---------- Boundary ----------
def boundary_trial(ctx: TrialContext) -> Outcome:
    """Iterated and spectral boundary tripotents agree; ranks are consistent and preserved by automorphisms."""
    f = ctx.factor
    x = boundary_point_sample(f, ctx.rng)
    agree = ball_norm(f, boundary_tripotent(f, x, "iterate") - boundary_tripotent(f, x, "spectral"))
    component = boundary_component(f, x)
    maximal = classify_tripotent(f, component.tripotent).is_maximal
    rank_ok = 0 <= component.rank < f.rank and (component.rank == 0) == maximal
    g = random_automorphism(f, ctx.rng, radius=0.9)
    check = component_rank_preserved(f, x, g, samples=5, seed=ctx.rng)
    metrics = {"agreement": agree, "rank": component.rank, "rank_after": check.rank_after,
               "samples_inside": check.samples_inside, "certificate": component.certificate_residual}
    return Outcome(agree, metrics, passed=agree <= ctx.tolerance and rank_ok and check.preserved)


def mean_value_trial(ctx: TrialContext) -> Outcome:
    """f(b) against its circle average over g_b(e^{iθ}a) for every registered function."""
    f = ctx.factor
    b = _rand(ctx, 0.6)
    a = gamma_sample(f, 1, ctx.rng)[0]
    nodes = int(ctx.params.get("nodes", 512))
    metrics: Dict[str, object] = {}
    for name in POLYNOMIAL_FAMILY + ("shilov", "shilov-vector"):
        fn = make_test_function(name, f, ctx.rng)
        scale = 1.0 + float(np.linalg.norm(np.atleast_1d(fn(b))))
        metrics[name] = mean_value_check(f, fn, b, a, nodes) / scale
    return Outcome(max(metrics.values()), metrics)


def algebraic_trial(ctx: TrialContext) -> Outcome:
    """Norm comparison, frame cross-check, witness values and the ε→δ→η chain."""
    f = ctx.factor
    x, y = _rand(ctx), _rand(ctx)
    n2 = ball_norm(f, x) ** 2
    a2 = algebraic_norm(f, x) ** 2
    lower = max(0.0, n2 - a2 - 1e-12 * (1.0 + n2))
    upper = max(0.0, a2 - f.rank * n2 - 1e-12 * (1.0 + n2))
    frame = abs(algebraic_inner(f, x, y) - algebraic_inner_frame(f, x, y))

    e = gamma_sample(f, 1, ctx.rng)[0]
    h = ShilovWitness(f, e)
    at_e = abs(h(e) - 1.0)
    at_minus_e = abs(h(-e))
    z = _rand(ctx)
    bound = max(0.0, abs(h(z)) - 1.0)

    epsilon = float(ctx.params.get("epsilon", 0.1))
    delta, eta = shilov_margin(f, epsilon)
    s = 0.05 * ctx.rng.random()
    near = (1.0 - s) * e + s * _rand(ctx)
    mu = algebraic_inner(f, near, e) / f.rank
    chain_ok = abs(1.0 - mu) >= delta or ball_norm(f, near - e) < epsilon
    far_ok = ball_norm(f, z - e) < epsilon or abs(h(z)) <= 1.0 - eta + 1e-12

    metrics = {"lower": lower, "upper": upper, "frame": frame, "at_e": at_e, "at_minus_e": at_minus_e,
               "bound": bound, "delta": delta, "eta": eta, "chain": chain_ok and far_ok}
    residual = max(lower, upper, frame / (1.0 + abs(algebraic_inner(f, x, y))), at_e, at_minus_e, bound)
    return Outcome(residual, metrics, passed=residual <= ctx.tolerance and chain_ok and far_ok)


def maximal_unitary_trial(ctx: TrialContext) -> Outcome:
    """Where unitaries exist every maximal tripotent is unitary."""
    f = ctx.factor
    if not f.admits_unitary:
        raise IdentitySkipped(f"{f} has no unitary tripotent")
    u = extend_to_maximal(f, tripotent_sample(f, int(ctx.rng.integers(0, f.rank + 1)), ctx.rng))
    flags = classify_tripotent(f, u, ctx.tolerance)
    return Outcome(flags.residuals["unitary"], {"maximal": flags.is_maximal},
                   passed=flags.is_maximal and flags.is_unitary)


RUSSO_DYE_NODES = (16, 64, 256)


def russo_dye_trial(ctx: TrialContext) -> Outcome:
    """Trapezoid reconstruction of b from g_b-images of a circle through a ∈ Γ."""
    f = ctx.factor
    b = _rand(ctx, 0.9)
    a = gamma_sample(f, 1, ctx.rng)[0]
    nodes = int(ctx.params.get("nodes", 512))
    errors = {}
    for N in RUSSO_DYE_NODES + (nodes,):
        errors[N] = russo_dye_reconstruct(f, b, a, N, certify=False).error
    final = russo_dye_reconstruct(f, b, a, nodes, certify=True)
    series = [errors[N] for N in sorted(errors)]
    monotone = all(later <= earlier + 1e-13 for earlier, later in zip(series, series[1:]))
    metrics = {f"error_{N}": errors[N] for N in sorted(errors)}
    metrics.update(monotone=monotone, certified=final.all_certified, norm_b=ball_norm(f, b))
    return Outcome(final.error, metrics,
                   passed=final.error <= ctx.tolerance and monotone and final.all_certified)


SUITES: Dict[str, Suite] = {s.name: s for s in (
    Suite("jordan-identity", "jordan", jordan_identity_trial, "Jordan triple identity"),
    Suite("triple-axioms", "jordan", triple_axioms_trial, "symmetry, hermitian D(x,x), C*-axiom"),
    Suite("jp-catalogue", "identity", jp_catalogue_trial, "Bergmann operator identity catalogue"),
    Suite("bergmann-sqrt", "bergmann_sqrt", bergmann_sqrt_trial, "B_a and quasi-inverse solvers"),
    Suite("bergmann-identity", "bergmann_identity", bergmann_identity_trial, "B(g_a(b),g_a(b)) factorisation"),
    Suite("gamma-invariance", "gamma_invariance", gamma_invariance_trial, "automorphisms preserve maximal tripotents"),
    Suite("gamma1-invariance", "gamma1_invariance", gamma1_invariance_trial, "automorphisms preserve unitaries"),
    Suite("composition", "composition", composition_trial, "k(a,b) cocycle, swap law, composition"),
    Suite("derivative", "derivative", derivative_trial, "transvection derivative"),
    Suite("spectral", "spectral", spectral_trial, "spectral decomposition and odd calculus"),
    Suite("peirce", "peirce", peirce_trial, "Peirce projections and tripotent order"),
    Suite("boundary", "boundary_agreement", boundary_trial, "boundary components and ranks"),
    Suite("mean-value", "mean_value", mean_value_trial, "mean-value property of test functions"),
    Suite("algebraic", "algebraic", algebraic_trial, "algebraic inner product and witness function"),
    Suite("maximal-unitary", "unitary", maximal_unitary_trial, "maximal tripotents are unitary"),
    Suite("russo-dye", "russo_dye", russo_dye_trial, "quadrature reconstruction"),
)}

ALL = "all"
SUITE_NAMES: Tuple[str, ...] = tuple(SUITES) + (ALL,)


def expand_suite(name: str) -> List[Suite]:
    if name == ALL:
        return list(SUITES.values())
    return [SUITES[name]]


def build_suite_tasks(cfg: SuiteConfig, kit: KitConfig) -> List[TrialTask]:
    """Tasks ordered suite, then seed, then factor, then trial index."""
    tasks: List[TrialTask] = []
    params = {"nodes": cfg.nodes}
    for suite in expand_suite(cfg.suite):
        count = cfg.trial_count(kit, suite.name)
        for seed in cfg.seeds:
            for f in cfg.factors:
                for trial in range(count):
                    tasks.append(TrialTask(len(tasks), suite.name, f, seed, trial, suite.tolerance,
                                           suite.run_trial, params))
    logger.debug("suite %s: %d tasks", cfg.suite, len(tasks))
    return tasks
