import sys
from collections.abc import Sequence

import click

from src.cli.commands import cli
from src.core.exceptions import ClaimViolationError, InputError

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_CLAIM_VIOLATION = 2


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and map the outcome to a process exit code.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:].

    Returns:
        0 on success, 1 on bad input, 2 when the claim suite finds violations.

    """
    try:
        result = cli.main(
            args=list(argv) if argv is not None else None,
            prog_name="baitmenu",
            standalone_mode=False,
        )
    except ClaimViolationError as error:
        click.echo(f"Error: {error}", err=True)
        return EXIT_CLAIM_VIOLATION
    except click.ClickException as error:
        error.show()
        return EXIT_INPUT_ERROR
    except click.Abort:
        return EXIT_INPUT_ERROR
    except InputError as error:
        click.echo(f"Error: {error}", err=True)
        return EXIT_INPUT_ERROR
    return result if isinstance(result, int) else EXIT_OK


def run() -> None:
    """Console entry point."""
    sys.exit(main())


if __name__ == "__main__":
    run()
