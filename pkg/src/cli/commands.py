import sys
from pathlib import Path

import click
from loguru import logger

from src.core.config import settings
from src.core.exceptions import ClaimViolationError, InvalidMechanismError
from src.models import FiniteDistribution, OracleRow, RunConfig
from src.services.evaluator import exact_revenue, monte_carlo_revenue
from src.services.pricing import (
    optimal_spm,
    optimal_uniform_price,
    optimal_uspm,
)
from src.services.storage import Storage, format_table, write_records, write_table
from src.services.synthesis import synthesize
from src.services.validation import validate_distribution
from src.services.verification import exhaustive_greedy, run_claim_suite
from src.utils.instances import (
    example_distribution,
    staircase_mechanism,
    uniform_page_mechanism,
)

CANDIDATE_COLUMNS = [
    "mechanism_id",
    "pages",
    "revenue",
    "sale_prob",
    "expensive_sale_prob",
]
ORACLE_COLUMNS = [
    "n",
    "uprice_price",
    "uprice",
    "uspm_price",
    "uspm",
    "spm",
    "spm_prices",
    "greedy_matches_spm",
]
CLAIM_COLUMNS = ["claim", "instances", "violations", "worst_slack", "flagged"]
REPORT_COLUMNS = [
    "expected_revenue",
    "sale_probability",
    "expected_buyer_utility",
    "expensive_sale_probability",
    "stop_probabilities",
]

# Published revenues of the two worked-example mechanisms. The uniform pages
# are published rounded; their closed form is shown next to it.
PUBLISHED_REVENUES = {
    "uniform-pages": "22.8 (9 + 0.81*0.19*89.9 = 22.8356)",
    "staircase": "38.3133",
}

GREEDY_CHECK_MAX_BUYERS = 4
GREEDY_CHECK_MAX_SUPPORT = 3

EXISTING_FILE = click.Path(exists=True, dir_okay=False, path_type=Path)


class SupplyType(click.ParamType):
    """Item supply: a non-negative integer or "inf"."""

    name = "supply"

    def convert(
        self, value: object, param: click.Parameter | None, ctx: click.Context | None
    ) -> int | None:
        """Parse a supply option value."""
        if value is None or value == "inf":
            return None
        try:
            supply = int(value)
        except (TypeError, ValueError):
            self.fail(f"{value!r} is neither an integer nor 'inf'", param, ctx)
        if supply < 0:
            self.fail(f"supply must be >= 0, got {supply}", param, ctx)
        return supply


seed_option = click.option(
    "--seed",
    type=int,
    default=settings.SEED,
    envvar="BAITMENU_SEED",
    show_default=True,
    help="Root seed for every random draw.",
)


def load_distribution(storage: Storage, path: Path) -> FiniteDistribution:
    """Read a distribution file and reject one that breaks a model invariant."""
    distribution = storage.distributions.load(path)
    violations = validate_distribution(distribution)
    if violations:
        raise InvalidMechanismError(violations)
    return distribution


def configure_logging(verbose: bool) -> None:
    """Send loguru output to stderr at the configured level."""
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else settings.LOG_LEVEL)


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log debug output to stderr.")
@click.pass_context
def cli(ctx: click.Context, verbose: bool) -> None:
    """Revenue evaluation and bait-mechanism synthesis for paged menus."""
    configure_logging(verbose)
    ctx.obj = Storage()


@cli.command("eval")
@click.argument("mechanism_path", type=EXISTING_FILE)
@click.argument("distribution_path", type=EXISTING_FILE)
@click.option(
    "--output-dir",
    type=click.Path(file_okay=False, path_type=Path),
    help="Also write the report as a one-row report.csv here.",
)
@click.pass_obj
def evaluate(
    storage: Storage,
    mechanism_path: Path,
    distribution_path: Path,
    output_dir: Path | None,
) -> None:
    """Print the exact revenue report of a mechanism as JSON."""
    config = RunConfig(
        subcommand="eval",
        inputs=[mechanism_path, distribution_path],
        output_dir=output_dir,
    )
    logger.debug("Run config: {}", config)

    report = exact_revenue(
        storage.mechanisms.load(mechanism_path),
        storage.distributions.load(distribution_path),
    )
    click.echo(report.model_dump_json(indent=2))
    if config.output_dir is not None:
        write_records(
            [report.csv_row()], config.output_dir / "report.csv", REPORT_COLUMNS
        )


@cli.command("mc")
@click.argument("mechanism_path", type=EXISTING_FILE)
@click.argument("distribution_path", type=EXISTING_FILE)
@click.option("--samples", type=int, default=settings.SAMPLES, show_default=True)
@seed_option
@click.pass_obj
def monte_carlo(
    storage: Storage,
    mechanism_path: Path,
    distribution_path: Path,
    samples: int,
    seed: int,
) -> None:
    """Print a seeded Monte Carlo revenue estimate with its standard error."""
    config = RunConfig(
        subcommand="mc",
        inputs=[mechanism_path, distribution_path],
        seed=seed,
        samples=samples,
    )
    logger.debug("Run config: {}", config)

    estimate = monte_carlo_revenue(
        storage.mechanisms.load(mechanism_path),
        storage.distributions.load(distribution_path),
        samples=config.samples,
        seed=config.seed,
    )
    click.echo(estimate.summary())


@cli.command("synthesize")
@click.argument("distribution_path", type=EXISTING_FILE)
@click.option(
    "--k", "k", type=click.IntRange(min=1), required=True, help="Page capacity."
)
@click.option("--delta", type=click.FloatRange(min=0, min_open=True), required=True)
@click.option("--supply", type=SupplyType(), default="inf", show_default=True)
@click.option("--grid-step", type=click.FloatRange(min=0, min_open=True), default=None)
@click.option("--margin", type=click.FloatRange(min=0, min_open=True), default=None)
@click.option(
    "--output-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path(),
    show_default=True,
)
@click.pass_obj
def synthesize_command(
    storage: Storage,
    distribution_path: Path,
    k: int,
    delta: float,
    supply: int | None,
    grid_step: float | None,
    margin: float | None,
    output_dir: Path,
) -> None:
    """Write the best bait mechanism as JSON and every scored candidate as CSV."""
    config = RunConfig(
        subcommand="synthesize",
        inputs=[distribution_path],
        grid_step=grid_step,
        margin=margin,
        output_dir=output_dir,
    )
    logger.debug("Run config: {}", config)

    result = synthesize(
        load_distribution(storage, distribution_path),
        k,
        delta,
        supply,
        grid_step=config.grid_step,
        margin=config.margin,
    )
    storage.mechanisms.dump(result.mechanism, output_dir / "mechanism.json")
    write_table(result.candidates, output_dir / "candidates.csv", CANDIDATE_COLUMNS)
    click.echo(result.report.model_dump_json(indent=2))


def oracle_rows(distribution: FiniteDistribution, max_buyers: int) -> list[OracleRow]:
    """Pricing-oracle table rows for 1..max_buyers buyers."""
    rows = []
    for n in range(1, max_buyers + 1):
        uprice_price, uprice = optimal_uniform_price(n, distribution)
        uspm_price, uspm = optimal_uspm(n, distribution)
        policy, spm = optimal_spm(n, distribution)
        checkable = (
            n <= GREEDY_CHECK_MAX_BUYERS
            and len(distribution.support) <= GREEDY_CHECK_MAX_SUPPORT
        )
        rows.append(
            OracleRow(
                n=n,
                uprice_price=uprice_price,
                uprice=uprice,
                uspm_price=uspm_price,
                uspm=uspm,
                spm=spm,
                spm_prices=" ".join(f"{p:g}" for p in policy.prices),
                greedy_matches_spm=(
                    abs(exhaustive_greedy(n, distribution) - spm) <= settings.TOLERANCE
                    if checkable
                    else None
                ),
            )
        )
    return rows


@cli.command("oracles")
@click.argument("distribution_path", type=EXISTING_FILE)
@click.option("--n", "n", type=click.IntRange(min=1), default=8, show_default=True)
@click.pass_obj
def oracles(storage: Storage, distribution_path: Path, n: int) -> None:
    """Print uniform, U-SPM and SPM pricing tables for 1..n buyers as CSV."""
    distribution = load_distribution(storage, distribution_path)
    click.echo(format_table(oracle_rows(distribution, n), ORACLE_COLUMNS), nl=False)


@cli.command("verify")
@seed_option
@click.option(
    "--scale",
    type=click.FloatRange(min=0, min_open=True),
    default=1.0,
    show_default=True,
    help="Fraction of the default instance counts to run.",
)
@click.option("--output-dir", type=click.Path(file_okay=False, path_type=Path))
def verify(seed: int, scale: float, output_dir: Path | None) -> None:
    """Run the claim suite; exits with code 2 when any claim is violated."""
    config = RunConfig(subcommand="verify", seed=seed, output_dir=output_dir)
    logger.debug("Run config: {}", config)

    results = run_claim_suite(seed=config.seed, scale=scale)
    click.echo(format_table(results, CLAIM_COLUMNS), nl=False)
    if config.output_dir is not None:
        write_table(results, config.output_dir / "claims.csv", CLAIM_COLUMNS)

    for result in results:
        if result.flagged:
            logger.warning("{}: {} instances flagged", result.claim, result.flagged)
    violated = [result.claim for result in results if not result.passed]
    if violated:
        raise ClaimViolationError(violated)


@cli.command("example")
def example() -> None:
    """Reproduce both worked-example mechanisms next to their published revenues."""
    distribution = example_distribution()
    mechanisms = {
        "uniform-pages": uniform_page_mechanism(),
        "staircase": staircase_mechanism(),
    }
    for name, mechanism in mechanisms.items():
        report = exact_revenue(mechanism, distribution)
        click.echo(
            f"{name:<14} pages={mechanism.page_count:<3} "
            f"exact={report.expected_revenue:.4f} published={PUBLISHED_REVENUES[name]}"
        )
