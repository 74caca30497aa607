import click

from jbtriple_kit.algebra.errors import FactorSpecError
from jbtriple_kit.extensions import EXTRA_ARGS, collect_values, echo_outcome, kit_from, run_options
from jbtriple_kit.services.report_writer import execute_run
from jbtriple_kit.services.suite_config import (
    ConfigError, build_suite_config, known_tolerances, parse_tolerance_overrides,
)
from jbtriple_kit.services.suites import SUITE_NAMES, build_suite_tasks


@click.command("verify", context_settings=EXTRA_ARGS)
@click.option("--suite", help=f"One of: {', '.join(SUITE_NAMES)}.")
@click.option("--N", "N", help="Quadrature nodes for the russo-dye and mean-value suites (last value wins).")
@run_options
@click.pass_context
def verify_cmd(ctx, suite, N, factor, trials, seed, out, fmt, config_path, store, workers):
    """Run an invariant suite; exit 0 iff every residual is within tolerance.

    Extra `--tol.<name>=<value>` arguments override single tolerances.
    """
    kit = kit_from(ctx)
    values = collect_values(config_path, {
        "suite": suite, "N": N, "factor": factor, "trials": trials, "seed": seed, "out": out,
        "format": fmt, "store": store, "workers": workers,
    })
    try:
        overrides = parse_tolerance_overrides(ctx.args, known_tolerances(kit))
        cfg = build_suite_config(kit, values, SUITE_NAMES, overrides)
    except (ConfigError, FactorSpecError) as e:
        raise click.UsageError(str(e)) from e

    report = execute_run(
        kit, "verify", cfg.suite, build_suite_tasks(cfg, kit), cfg.tolerances,
        factors=cfg.factors, seeds=cfg.seeds, trials=cfg.trials, echo=cfg.echo(),
        out=cfg.out, fmt=cfg.fmt, store=cfg.store, workers=cfg.workers,
    )
    echo_outcome(report, cfg.fmt)
    ctx.exit(report.exit_code)
