from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field

from src.models.domain import Mechanism


class RevenueReport(BaseModel):
    """Exact revenue and stopping statistics of one mechanism."""

    model_config = ConfigDict(frozen=True)

    expected_revenue: float
    sale_probability: float
    stop_probabilities: list[float]
    expected_buyer_utility: float
    expensive_sale_probability: float | None = None

    def survival_probabilities(self) -> list[float]:
        """Return Pr[buyer sees page t] for t = 1, 2, ..."""
        survival = []
        remaining = 1.0
        for probability in self.stop_probabilities:
            survival.append(remaining)
            remaining -= probability
        return survival

    def csv_row(self) -> dict[str, object]:
        """One CSV row of the report, stop probabilities space-separated."""
        return {
            "expected_revenue": self.expected_revenue,
            "sale_probability": self.sale_probability,
            "expected_buyer_utility": self.expected_buyer_utility,
            "expensive_sale_probability": self.expensive_sale_probability,
            "stop_probabilities": " ".join(
                f"{p:.12g}" for p in self.stop_probabilities
            ),
        }


class MonteCarloEstimate(BaseModel):
    """Seeded Monte Carlo revenue estimate."""

    model_config = ConfigDict(frozen=True)

    estimate: float
    standard_error: float
    samples: int
    seed: int
    chunk_size: int

    def summary(self) -> str:
        """One-line estimate with its standard error."""
        return f"{self.estimate:.6f} ± {self.standard_error:.6f} (n={self.samples})"


class CandidateRow(BaseModel):
    """One scored candidate of the synthesizer's pool."""

    model_config = ConfigDict(frozen=True)

    mechanism_id: str
    pages: int
    revenue: float
    sale_prob: float
    expensive_sale_prob: float | None = None


class SynthesisResult(BaseModel):
    """Winning bait mechanism plus the full scored candidate pool."""

    model_config = ConfigDict(frozen=True)

    mechanism: Mechanism
    report: RevenueReport
    candidates: list[CandidateRow]


class ClaimResult(BaseModel):
    """Outcome of numerically checking one claim on many instances."""

    model_config = ConfigDict(frozen=True)

    claim: str
    instances: int
    violations: int
    worst_slack: float
    flagged: int = 0

    @property
    def passed(self) -> bool:
        """Whether no instance violated the claim."""
        return self.violations == 0


class TruncationResult(BaseModel):
    """First-T-pages mechanism kept by the survival truncation."""

    model_config = ConfigDict(frozen=True)

    mechanism: Mechanism
    page_count: int
    survival_probabilities: list[float]


class OracleRow(BaseModel):
    """One line of the pricing-oracle table."""

    model_config = ConfigDict(frozen=True)

    n: int
    uprice_price: float
    uprice: float
    uspm_price: float
    uspm: float
    spm: float
    spm_prices: str
    greedy_matches_spm: bool | None = None


class RunConfig(BaseModel):
    """Resolved options of one CLI invocation."""

    model_config = ConfigDict(frozen=True)

    subcommand: str
    inputs: list[Path] = Field(default_factory=list)
    seed: int = 0
    samples: int | None = None
    grid_step: float | None = None
    margin: float | None = None
    output_dir: Path | None = None
