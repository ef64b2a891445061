import sys
from typing import Optional, Sequence

import click

from .commands import bounds, construct, norms, search, verify
from .commands.common import CommandFailed
from .core.config import settings
from .core.errors import ExtremalError
from .core.logs import configure_logging


class ExtremalGroup(click.Group):
    """
    Root group mapping failures to exit codes: 1 for bad input (usage
    errors included), 2 for verification mismatches.
    """

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except ExtremalError as exc:
            raise CommandFailed(exc) from exc

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.UsageError as exc:
            exc.show()
            code = 1
        except click.ClickException as exc:
            exc.show()
            code = exc.exit_code
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = 1
        else:
            code = rv if isinstance(rv, int) else 0
        if standalone_mode:
            sys.exit(code)
        return code


@click.group(name="extremal", cls=ExtremalGroup)
@click.version_option(settings.VERSION, prog_name=settings.PROJECT_NAME)
@click.option("-v", "--verbose", count=True, help="Log progress (-vv for debug)")
def main(verbose):
    """Extreme ratios between spectral and Frobenius norms of tensors."""
    level = {0: settings.effective_log_level, 1: "INFO"}.get(verbose, "DEBUG")
    configure_logging(level)


# Include commands
main.add_command(bounds.bounds)
main.add_command(bounds.order_gap_command)
main.add_command(construct.construct)
main.add_command(norms.norms)
main.add_command(search.search)
main.add_command(verify.verify_tables_command)
main.add_command(verify.check_conjecture2_command)
main.add_command(verify.uit_suite_command)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line on ``argv`` and return the exit code."""
    return main.main(args=list(argv) if argv is not None else None, prog_name="extremal", standalone_mode=False)
