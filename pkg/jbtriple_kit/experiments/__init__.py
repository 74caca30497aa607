import click

experiment_group = click.Group("experiment", help="Run an experiment sweep and tabulate its records.")
from . import commands  # noqa
