import logging
import sys
from typing import Any, Callable, Dict, Iterable, Tuple

import click

from jbtriple_kit.config import KitConfig
from jbtriple_kit.services.report_writer import RunReport, failure_lines, format_summary, summarize
from jbtriple_kit.services.suite_config import FORMATS, ConfigError, load_run_file, merge

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"

_handler = None


def configure_logging(level: int = logging.WARNING) -> logging.Logger:
    """Attach a single stderr handler to the package logger; later calls rebind the stream and level."""
    global _handler
    log = logging.getLogger("jbtriple_kit")
    if _handler is None:
        _handler = logging.StreamHandler(sys.stderr)
        _handler.setFormatter(logging.Formatter(LOG_FORMAT))
        log.addHandler(_handler)
    else:
        _handler.setStream(sys.stderr)
    log.setLevel(level)
    return log


# ---------- Shared command plumbing ----------
EXTRA_ARGS = {"ignore_unknown_options": True, "allow_extra_args": True}


def run_options(fn: Callable) -> Callable:
    """Options shared by `verify` and every `experiment` subcommand."""
    decorators = [
        click.option("--factor", "factor", multiple=True,
                     help="matrix:PxQ, commutative:N or sum:[...]; repeatable. Defaults to the kit factor list."),
        click.option("--trials", type=int, help="Trials per factor (default from the kit config)."),
        click.option("--seed", help="Base seed or a comma list of seeds; trial i uses SeedSequence([seed, i]). Required."),
        click.option("--out", help="Record file, '-' for stdout. Default <OUTPUT_DIR>/<command>-<name>-seed<seeds>.<ext>."),
        click.option("--format", "fmt", type=click.Choice(FORMATS), help="Record format (default jsonl)."),
        click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     help="JSON run file; explicit flags win."),
        click.option("--store/--no-store", default=None, help="Copy records into the run store."),
        click.option("--workers", type=int, help="Worker threads."),
    ]
    for decorator in reversed(decorators):
        fn = decorator(fn)
    return fn


def kit_from(ctx: click.Context) -> KitConfig:
    return ctx.find_root().obj["kit"]


def collect_values(config_path: str, flags: Dict[str, Any]) -> Dict[str, Any]:
    """Run-file values overlaid with the flags that were actually given."""
    try:
        file_values = load_run_file(config_path)
    except ConfigError as e:
        raise click.UsageError(str(e)) from e
    cleaned = {k: (list(v) if isinstance(v, tuple) else v) for k, v in flags.items()}
    cleaned = {k: v for k, v in cleaned.items() if v not in (None, [])}
    return merge(file_values, cleaned)


def echo_outcome(report: RunReport, fmt: str, by_detail: bool = False) -> None:
    """Summary table plus one line per failed record; the table goes to stdout only beside a text file."""
    to_stdout = fmt == "text" and report.output_path is not None
    click.echo(format_summary(summarize(report.records, by_detail)), err=not to_stdout)
    for line in failure_lines(report.records):
        click.echo(line, err=True)
    if report.output_path:
        click.echo(f"records: {report.output_path}", err=True)
    if report.run_id is not None:
        click.echo(f"run id: {report.run_id}", err=True)


def split_csv(values: Iterable[str]) -> Tuple[str, ...]:
    out = []
    for v in values:
        out.extend(part.strip() for part in v.split(",") if part.strip())
    return tuple(out)
