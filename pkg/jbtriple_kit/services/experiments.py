"""
Experiments run by `experiment <name>`: quadrature sweeps, determining-set
suprema, boundary-component sweeps, orbit-closure walks and witness margins.

Each experiment is a trial function like the verify suites, but it may hand
back several Outcomes (one per N, per t, per radius, ...).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from jbtriple_kit.algebra.boundary import (
    GAMMA, GAMMA1, ORBIT_G, ORBIT_G0, ShilovWitness, SetSpec, boundary_component,
    boundary_point_sample, component_rank_preserved, determining_sup, gamma_in_orbit_closure_demo,
    gamma_sample, mean_value_check, minimality_gap, russo_dye_reconstruct, shilov_margin,
)
from jbtriple_kit.algebra.codec import element_to_json
from jbtriple_kit.algebra.errors import IdentitySkipped
from jbtriple_kit.algebra.factors import Element, FactorDescriptor, ball_norm, random_element
from jbtriple_kit.algebra.moebius import bergmann_sqrt_norm, random_automorphism
from jbtriple_kit.algebra.operators import bergmann
from jbtriple_kit.algebra.spectral import boundary_tripotent, frame_length
from jbtriple_kit.algebra.testfunctions import POLYNOMIAL_FAMILY, make_test_function
from jbtriple_kit.config import KitConfig
from jbtriple_kit.services.common import Outcome, TrialContext
from jbtriple_kit.services.runner import TrialTask
from jbtriple_kit.services.suite_config import ExperimentConfig

logger = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-13


@dataclass(frozen=True)
class Experiment:
    name: str
    tolerance: str
    run_trial: Callable[[TrialContext], Sequence[Outcome]]
    description: str = ""


def _monotone_prefix(values: Sequence[float], slack: float = MONOTONE_SLACK) -> List[bool]:
    """flags[i]: values[0..i] never increase by more than slack."""
    flags, ok = [], True
    for i, v in enumerate(values):
        if i and v > values[i - 1] + slack:
            ok = False
        flags.append(ok)
    return flags


# ---------- russo-dye ----------
def russo_dye_experiment(ctx: TrialContext) -> List[Outcome]:
    """Error of the trapezoid reconstruction against N.

    Even trials take a ∈ Γ; odd trials on factors of rank > 1 take a unit
    vector from a lower-rank component, certified by component rank.
    """
    f = ctx.factor
    b = random_element(f, ctx.rng, 0.9)
    if ctx.params.get("trial", 0) % 2 and f.rank > 1:
        a = boundary_point_sample(f, ctx.rng, max_inner=0.8)
    else:
        a = gamma_sample(f, 1, ctx.rng)[0]
    Ns = sorted(ctx.params["N"])
    results = [russo_dye_reconstruct(f, b, a, N, certify=N == Ns[-1]) for N in Ns]
    monotone = _monotone_prefix([r.error for r in results])
    out = []
    for N, r, ok in zip(Ns, results, monotone):
        last = N == Ns[-1]
        passed = ok and (not last or (r.error <= ctx.tolerance and r.all_certified))
        metrics = {"N": N, "error": r.error, "norm_b": ball_norm(f, b), "monotone": ok}
        if last:
            metrics.update(certificate=r.certificate, certified=sum(r.certified))
        out.append(Outcome(r.error, metrics, passed=passed, detail=f"N={N}"))
    return out


# ---------- determining ----------
GAMMA_FUNCTIONS = ("product", "affine", "exp-affine", "shilov")
ORBIT_FUNCTIONS = ("affine", "product")


def determining_experiment(ctx: TrialContext) -> List[Outcome]:
    """sup over the candidate set against sup over the ball, per test function.

    Γ and Γ₁ are determining, so their relative gap is held to the tolerance.
    Orbits are determining only through their closure; their gap is reported.
    """
    f = ctx.factor
    kind = ctx.params.get("set_kind", GAMMA)
    if kind == GAMMA1 and not f.admits_unitary:
        raise IdentitySkipped(f"{f} has no unitary tripotent")
    orbit = kind in (ORBIT_G0, ORBIT_G)
    point = random_element(f, ctx.rng, 1.0, exact=True) if orbit else None
    spec = SetSpec(kind, point)
    names = tuple(ctx.params.get("test_functions") or (ORBIT_FUNCTIONS if orbit else GAMMA_FUNCTIONS))
    n_set, n_ball = int(ctx.params.get("n_set", 2000)), int(ctx.params.get("n_ball", 2000))

    out = []
    for name in names:
        anchors: Tuple = ()
        if name in ("shilov", "shilov-vector"):
            e = gamma_sample(f, 1, ctx.rng)[0]
            fn = make_test_function(name, f, ctx.rng, e=e)
            if not orbit:
                anchors = (e,)
        else:
            fn = make_test_function(name, f, ctx.rng)
        report = determining_sup(f, fn, spec, n_set, n_ball, ctx.rng, anchors, name)
        relative = report.gap / max(report.sup_ball, 1e-300)
        metrics = {"test_function": name, "set_kind": kind, "sup_ball": report.sup_ball,
                   "sup_set": report.sup_set, "gap": report.gap, "relative_gap": relative,
                   "samples_set": report.sample_counts["set"], "samples_ball": report.sample_counts["ball"]}
        passed = report.sup_set <= report.sup_ball and (orbit or relative <= ctx.tolerance)
        out.append(Outcome(relative, metrics, passed=passed, detail=f"{kind}:{name}"))
    return out


# ---------- boundary ----------
def boundary_experiment(ctx: TrialContext) -> List[Outcome]:
    """One (tripotent, rank) record per boundary sample, with its rank under a random automorphism."""
    f = ctx.factor
    x = boundary_point_sample(f, ctx.rng)
    component = boundary_component(f, x)
    agreement = ball_norm(f, boundary_tripotent(f, x, "iterate") - component.tripotent)
    g = random_automorphism(f, ctx.rng, radius=0.9)
    check = component_rank_preserved(f, x, g, samples=5, seed=ctx.rng)
    metrics = {
        "tripotent": element_to_json(component.tripotent),
        "rank": component.rank,
        "frame_length": frame_length(f, component.tripotent),
        "certificate": component.certificate_residual,
        "rank_after": check.rank_after,
        "samples_inside": check.samples_inside,
    }
    passed = agreement <= ctx.tolerance and 0 <= component.rank <= f.rank and check.preserved
    return [Outcome(agreement, metrics, passed=passed)]


# ---------- orbit-closure ----------
GENERIC_MARGIN = 0.36
GENERIC_ATTEMPTS = 50


def stall_margin(f: FactorDescriptor, v: Element, e: Element) -> float:
    """Smallest singular value of B(v, −e); g_{te}(v) stalls as t → 1 where it vanishes."""
    return float(np.linalg.svd(bergmann(f, v, -e).matrix, compute_uv=False)[-1])


def generic_boundary_point(f: FactorDescriptor, e: Element, rng: np.random.Generator,
                           margin: float = GENERIC_MARGIN) -> Tuple[Element, float, int]:
    """A unit vector v with stall_margin(v, e) ≥ margin, plus its margin and the draws it took."""
    for attempt in range(1, GENERIC_ATTEMPTS + 1):
        v = random_element(f, rng, 1.0, exact=True)
        m = stall_margin(f, v, e)
        if m >= margin:
            return v, m, attempt
    raise IdentitySkipped(f"no unit vector with stall margin ≥ {margin} in {GENERIC_ATTEMPTS} draws")


def orbit_closure_experiment(ctx: TrialContext) -> List[Outcome]:
    """‖g_{te}(v) − e‖ along the t grid; it must shrink and end below the tolerance.

    v is a generic point of the unit sphere unless a radius below 1 asks for an interior point.
    The residual is the distance times (1 − t²)/‖B_{te}‖, which is 1 for unitary e; a
    non-unitary e keeps a √(1 − t²) block in B_{te} and the raw distance only falls like √(1 − t).
    """
    f = ctx.factor
    e = gamma_sample(f, 1, ctx.rng)[0]
    radius = ctx.params.get("v_radius")
    if radius is None or float(radius) >= 1.0:
        v, margin, attempts = generic_boundary_point(f, e, ctx.rng)
    else:
        v = random_element(f, ctx.rng, float(radius))
        margin, attempts = stall_margin(f, v, e), 1
    points = gamma_in_orbit_closure_demo(f, v, e, sorted(ctx.params["t_grid"]))
    distances = [p.distance if p.distance is not None else float("inf") for p in points]
    monotone = _monotone_prefix(distances, slack=1e-12)
    norm_v = ball_norm(f, v)
    out = []
    for i, (p, ok) in enumerate(zip(points, monotone)):
        last = i == len(points) - 1
        if p.distance is None:
            out.append(Outcome(None, {"t": p.t}, passed=False, detail=p.error or "singular step"))
            continue
        scaled = p.distance * (1.0 - p.t ** 2) / bergmann_sqrt_norm(f, p.t * e)
        passed = ok and (not last or scaled <= ctx.tolerance)
        metrics = {"t": p.t, "distance": p.distance, "scaled_distance": scaled, "norm_v": norm_v,
                   "margin": margin, "draws": attempts}
        out.append(Outcome(scaled, metrics, passed=passed, detail=f"t={p.t}"))
    return out


# ---------- shilov / minimality ----------
def shilov_experiment(ctx: TrialContext) -> List[Outcome]:
    """sup |h| on the boundary away from B(e, ε) stays below 1 − η."""
    f = ctx.factor
    epsilon = float(ctx.params.get("epsilon", 0.1))
    delta, eta = shilov_margin(f, epsilon)
    e = gamma_sample(f, 1, ctx.rng)[0]
    h = ShilovWitness(f, e)
    report = minimality_gap(f, e, epsilon, int(ctx.params.get("samples", 10000)), ctx.rng)
    excess = max(0.0, report.sup_set - (1.0 - eta))
    at_e = abs(h(e) - 1.0)
    metrics = {"epsilon": epsilon, "delta": delta, "eta": eta, "sup_away": report.sup_set,
               "bound": 1.0 - eta, "at_e": at_e, "samples": report.sample_counts["set"]}
    return [Outcome(max(excess, at_e), metrics)]


MINIMALITY_RADII = (1.0, 2.0, 4.0)


def minimality_experiment(ctx: TrialContext) -> List[Outcome]:
    """Removing B(e, r) from the boundary drops the witness sup by at least η(δ(r))."""
    f = ctx.factor
    epsilon = float(ctx.params.get("epsilon", 0.1))
    e = gamma_sample(f, 1, ctx.rng)[0]
    n = int(ctx.params.get("n_set", 2000))
    out = []
    for scale in MINIMALITY_RADII:
        radius = epsilon * scale
        delta, eta = shilov_margin(f, radius)
        report = minimality_gap(f, e, radius, n, ctx.rng)
        shortfall = max(0.0, eta - report.gap)
        metrics = {"radius": radius, "delta": delta, "eta": eta, "gap": report.gap,
                   "sup_outside": report.sup_set, "drawn": report.sample_counts["drawn"]}
        out.append(Outcome(shortfall, metrics, detail=f"radius={radius:g}"))
    return out


# ---------- mean-value ----------
def mean_value_experiment(ctx: TrialContext) -> List[Outcome]:
    """|f(b) − circle average| per test function and N."""
    f = ctx.factor
    b = random_element(f, ctx.rng, 0.6)
    a = gamma_sample(f, 1, ctx.rng)[0]
    names = tuple(ctx.params.get("test_functions") or POLYNOMIAL_FAMILY + ("shilov",))
    Ns = sorted(ctx.params["N"])
    out = []
    for name in names:
        fn = make_test_function(name, f, ctx.rng)
        scale = 1.0 + float(np.linalg.norm(np.atleast_1d(fn(b))))
        errors = {N: mean_value_check(f, fn, b, a, N) / scale for N in Ns}
        metrics = {"test_function": name}
        metrics.update({f"error_{N}": err for N, err in errors.items()})
        out.append(Outcome(errors[Ns[-1]], metrics, detail=name))
    return out


EXPERIMENTS: Dict[str, Experiment] = {x.name: x for x in (
    Experiment("russo-dye", "russo_dye", russo_dye_experiment, "reconstruction error against N"),
    Experiment("determining", "determining_gap", determining_experiment, "sup over a set against sup over the ball"),
    Experiment("boundary", "boundary_agreement", boundary_experiment, "boundary tripotents and component ranks"),
    Experiment("orbit-closure", "orbit_closure", orbit_closure_experiment, "distance of g_te(v) to e"),
    Experiment("shilov", "algebraic", shilov_experiment, "witness margin away from e"),
    Experiment("minimality", "algebraic", minimality_experiment, "sup gap after removing a ball around e"),
    Experiment("mean-value", "mean_value", mean_value_experiment, "mean-value residual against N"),
)}

EXPERIMENT_NAMES: Tuple[str, ...] = tuple(EXPERIMENTS)


def experiment_params(cfg: ExperimentConfig) -> Dict[str, object]:
    return {
        "N": list(cfg.N),
        "epsilon": cfg.epsilon,
        "t_grid": list(cfg.t_grid),
        "v_radius": cfg.v_radius,
        "test_functions": list(cfg.test_functions),
        "set_kind": cfg.set_kind,
        "n_set": cfg.n_set,
        "n_ball": cfg.n_ball,
        "samples": cfg.samples,
    }


def build_experiment_tasks(cfg: ExperimentConfig, kit: KitConfig) -> List[TrialTask]:
    experiment = EXPERIMENTS[cfg.experiment]
    params = experiment_params(cfg)
    count = cfg.trial_count(kit)
    tasks: List[TrialTask] = []
    for seed in cfg.seeds:
        for f in cfg.factors:
            for trial in range(count):
                tasks.append(TrialTask(len(tasks), experiment.name, f, seed, trial, experiment.tolerance,
                                       experiment.run_trial, dict(params, trial=trial)))
    logger.debug("experiment %s: %d tasks", experiment.name, len(tasks))
    return tasks
