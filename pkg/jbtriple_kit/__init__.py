import logging

import click

from .config import load_kit_config
from .extensions import configure_logging


def create_cli() -> click.Group:
    @click.group(help="Finite-rank JB*-triple verification kit.")
    @click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG logging on stderr.")
    @click.option("--settings", type=click.Path(dir_okay=False),
                  help="Kit settings file (default $JBTRIPLE_CONFIG or config/kit_config.json).")
    @click.pass_context
    def cli(ctx, verbose, settings):
        configure_logging(logging.DEBUG if verbose > 1 else logging.INFO if verbose else logging.WARNING)
        try:
            kit = load_kit_config(settings)
        except (OSError, ValueError) as e:
            raise click.UsageError(f"cannot load settings: {e}") from e
        ctx.ensure_object(dict)
        ctx.obj["kit"] = kit

    from .verify import verify_cmd
    from .experiments import experiment_group
    from .reports import report_group

    cli.add_command(verify_cmd)
    cli.add_command(experiment_group)
    cli.add_command(report_group)
    return cli
