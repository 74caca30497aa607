from typing import Callable, Dict, List

import click

from jbtriple_kit.algebra.boundary import SET_KINDS
from jbtriple_kit.algebra.errors import FactorSpecError
from jbtriple_kit.algebra.testfunctions import registered_names
from jbtriple_kit.extensions import EXTRA_ARGS, collect_values, echo_outcome, kit_from, run_options, split_csv
from jbtriple_kit.services.experiments import EXPERIMENTS, build_experiment_tasks
from jbtriple_kit.services.report_writer import execute_run
from jbtriple_kit.services.suite_config import (
    ConfigError, build_experiment_config, known_tolerances, parse_tolerance_overrides,
)

from . import experiment_group

_EXTRA_OPTIONS: Dict[str, Callable] = {
    "N": click.option("--N", "N", help="Comma-separated node counts, e.g. 16,64,256,512."),
    "epsilon": click.option("--epsilon", type=float, help="Radius of the excluded ball around e."),
    "t_grid": click.option("--t-grid", "t_grid", help="Comma-separated t values in (0, 1)."),
    "v_radius": click.option("--v-radius", "v_radius", type=float,
                             help="Draw v inside the ball at this radius instead of on the boundary."),
    "test_functions": click.option("--test-function", "test_functions", multiple=True,
                                   help=f"Repeatable; one of: {', '.join(registered_names())}."),
    "set_kind": click.option("--set-kind", "set_kind", type=click.Choice(SET_KINDS)),
    "n_set": click.option("--n-set", "n_set", type=int, help="Samples drawn from the candidate set."),
    "n_ball": click.option("--n-ball", "n_ball", type=int, help="Samples drawn from the closed ball."),
    "samples": click.option("--samples", type=int, help="Boundary samples for the witness sup."),
}

_OPTIONS_BY_EXPERIMENT: Dict[str, List[str]] = {
    "russo-dye": ["N"],
    "determining": ["test_functions", "set_kind", "n_set", "n_ball"],
    "boundary": [],
    "orbit-closure": ["t_grid", "v_radius"],
    "shilov": ["epsilon", "samples"],
    "minimality": ["epsilon", "n_set"],
    "mean-value": ["N", "test_functions"],
}


def _make_command(name: str) -> click.Command:
    extras = _OPTIONS_BY_EXPERIMENT[name]

    @click.pass_context
    def command(ctx, factor, trials, seed, out, fmt, config_path, store, workers, **specific):
        kit = kit_from(ctx)
        if "test_functions" in specific:
            specific["test_functions"] = split_csv(specific["test_functions"])
        values = collect_values(config_path, dict(
            specific, factor=factor, trials=trials, seed=seed, out=out, format=fmt, store=store,
            workers=workers,
        ))
        try:
            overrides = parse_tolerance_overrides(ctx.args, known_tolerances(kit))
            cfg = build_experiment_config(kit, name, values, list(EXPERIMENTS), overrides)
        except (ConfigError, FactorSpecError) as e:
            raise click.UsageError(str(e)) from e

        report = execute_run(
            kit, "experiment", name, build_experiment_tasks(cfg, kit), cfg.tolerances,
            factors=cfg.factors, seeds=cfg.seeds, trials=cfg.trials, echo=cfg.echo(),
            out=cfg.out, fmt=cfg.fmt, store=cfg.store, workers=cfg.workers,
        )
        echo_outcome(report, cfg.fmt, by_detail=True)
        ctx.exit(report.exit_code)

    command = run_options(command)
    for key in reversed(extras):
        command = _EXTRA_OPTIONS[key](command)
    return click.command(name, context_settings=EXTRA_ARGS, help=EXPERIMENTS[name].description)(command)


for _name in EXPERIMENTS:
    experiment_group.add_command(_make_command(_name))
