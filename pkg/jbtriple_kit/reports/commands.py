import click
from sqlalchemy.exc import SQLAlchemyError

from jbtriple_kit.database import db
from jbtriple_kit.extensions import kit_from
from jbtriple_kit.services.report_writer import records_from_store, render_records
from jbtriple_kit.services.suite_config import FORMATS

from . import report_group


def _connect(ctx: click.Context) -> None:
    try:
        db.init_engine(kit_from(ctx).resolved_store_uri())
        db.create_schema()
    except SQLAlchemyError as e:
        raise click.UsageError(f"run store unavailable: {e}") from e


def _ts(value) -> str:
    return value.strftime("%Y-%m-%d %H:%M:%S") if value else "-"


@report_group.command("list")
@click.option("--limit", type=int, default=50, show_default=True)
@click.pass_context
def list_cmd(ctx, limit):
    """Most recent runs first."""
    _connect(ctx)
    rows = db.list_runs(limit)
    if not rows:
        click.echo("no runs stored", err=True)
        return
    click.echo(f"{'id':>5}  {'command':<10}  {'name':<18}  {'seeds':>8}  {'status':<9}  "
               f"{'pass':>6}  {'fail':>6}  {'skip':>6}  {'started':<19}  factors")
    for r in rows:
        click.echo(f"{r['id']:>5}  {r['command']:<10}  {r['name']:<18}  {r['seeds'] or '-':>8}  "
                   f"{r['status'] or '-':<9}  {r['passed'] or 0:>6}  {r['failed'] or 0:>6}  {r['skipped'] or 0:>6}  "
                   f"{_ts(r['started_at']):<19}  {r['factors']}")


@report_group.command("show")
@click.argument("run_id", type=int)
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="jsonl", show_default=True)
@click.pass_context
def show_cmd(ctx, run_id, fmt):
    """Print the stored records of RUN_ID; jsonl output matches the original file byte for byte."""
    _connect(ctx)
    if db.get_run(run_id) is None:
        raise click.BadParameter(f"no run with id {run_id}", param_hint="RUN_ID")
    click.echo(render_records(records_from_store(run_id), fmt), nl=False)
