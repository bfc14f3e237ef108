from pydantic import BaseModel, ConfigDict, Field

from src.models.domain import Label


class PricePolicy(BaseModel):
    """Ordered posted prices of a sequential posted-price or greedy menu."""

    model_config = ConfigDict(frozen=True)

    prices: tuple[float, ...] = ()


class UtilityBracket(BaseModel):
    """Confidence interval [lower, upper] for a bait page's utility."""

    model_config = ConfigDict(frozen=True)

    lower: float
    upper: float

    def contains(self, utility: float, tolerance: float = 1e-9) -> bool:
        """Whether utility lies in the closed bracket, up to tolerance."""
        return self.lower - tolerance <= utility <= self.upper + tolerance


class TwoPricePage(BaseModel):
    """A bait page using at most two prices, with its bracket probability."""

    model_config = ConfigDict(frozen=True)

    low_price: float
    high_price: float
    low_count: int
    high_count: int
    probability: float
    epsilon: float = 0.0

    @property
    def size(self) -> int:
        """Number of bait items on the page."""
        return self.low_count + self.high_count

    def prices(self) -> list[float]:
        """Low prices first, then high prices."""
        return [self.low_price] * self.low_count + [self.high_price] * self.high_count


class BaitPage(BaseModel):
    """One page of a bait skeleton: the bait layout and its bracket."""

    model_config = ConfigDict(frozen=True)

    layout: TwoPricePage
    bracket: UtilityBracket
    free_slots: int


class BaitSkeleton(BaseModel):
    """Bait side of a bait mechanism as recovered from the dynamic program."""

    model_config = ConfigDict(frozen=True)

    k: int
    delta: float
    supply: int | None = None
    pages: tuple[BaitPage, ...]
    success_probability: float
    free_slots: int

    @property
    def page_count(self) -> int:
        """Number of bait pages."""
        return len(self.pages)


class SpreadingCertificate(BaseModel):
    """Largest eta such that the prior is (delta, eta)-spreading."""

    model_config = ConfigDict(frozen=True)

    eta: float = Field(gt=0.0, le=1.0)
    witness: float


class ExpensiveItem(BaseModel):
    """Position of one price inside a mechanism, used by the TOP split."""

    model_config = ConfigDict(frozen=True)

    page: int
    price: float
    label: Label | None = None


class TopSplit(BaseModel):
    """Split of a mechanism's prices into expensive (TOP) and bait items."""

    model_config = ConfigDict(frozen=True)

    expensive: tuple[ExpensiveItem, ...]
    bait: tuple[ExpensiveItem, ...]
    top_bait_price: float
    expensive_count: int
    like_probability: float
    like_probability_with_top_bait: float
    sandwich_holds: bool
