import click

report_group = click.Group("report", help="List stored runs and re-export their records.")
from . import commands  # noqa
