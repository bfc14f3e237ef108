from bisect import bisect_left, bisect_right
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):  # noqa: D101
        __str__ = str.__str__
        __format__ = str.__format__
from itertools import accumulate
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, PrivateAttr, model_validator

from src.core.numeric import HALF_TICK


class Label(StrEnum):
    """Role of an offer inside a bait mechanism."""

    BAIT = "bait"
    EXPENSIVE = "expensive"


LABEL_RANK: dict[Label | None, int] = {None: 0, Label.BAIT: 1, Label.EXPENSIVE: 2}


class FiniteDistribution(BaseModel):
    """Value prior with finite support, drawn i.i.d. for every offered item.

    Only the shape (aligned lengths) is enforced on construction; the remaining
    invariants are reported by `validate` so they can be surfaced as data.
    """

    model_config = ConfigDict(frozen=True)

    support: tuple[float, ...]
    probs: tuple[float, ...]

    _cumulative: tuple[float, ...] = PrivateAttr(default=())

    @model_validator(mode="after")
    def _check_alignment(self) -> "FiniteDistribution":
        if len(self.support) != len(self.probs):
            error_message = "support and probs must have the same length"
            raise ValueError(error_message)
        if not self.support:
            error_message = "support must not be empty"
            raise ValueError(error_message)
        return self

    def model_post_init(self, _: object) -> None:
        """Cache the cumulative probabilities used by the CDF lookups."""
        self._cumulative = tuple(accumulate(self.probs))

    @classmethod
    def point_mass(cls, value: float) -> "FiniteDistribution":
        """Distribution putting all mass on one value."""
        return cls(support=(value,), probs=(1.0,))

    @property
    def min_value(self) -> float:
        """Lowest support value."""
        return self.support[0]

    @property
    def max_value(self) -> float:
        """Highest support value."""
        return self.support[-1]

    def cdf(self, point: float) -> float:
        """Return Pr[v <= point]."""
        index = bisect_right(self.support, point + HALF_TICK)
        if index == 0:
            return 0.0
        if index == len(self.support):
            return 1.0
        return min(1.0, self._cumulative[index - 1])

    def cdf_strict(self, point: float) -> float:
        """Return Pr[v < point]."""
        index = bisect_left(self.support, point - HALF_TICK)
        if index == 0:
            return 0.0
        if index == len(self.support):
            return 1.0
        return min(1.0, self._cumulative[index - 1])

    def survival(self, point: float) -> float:
        """Return Pr[v >= point]."""
        return 1.0 - self.cdf_strict(point)

    def cdf_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorised `cdf`."""
        return self._lookup(np.searchsorted(self.support, points + HALF_TICK, "right"))

    def cdf_strict_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorised `cdf_strict`."""
        return self._lookup(np.searchsorted(self.support, points - HALF_TICK, "left"))

    def _lookup(self, indices: np.ndarray) -> np.ndarray:
        table = np.concatenate(([0.0], np.minimum(self._cumulative, 1.0)))
        table[-1] = 1.0
        return table[indices]


class MenuPage(BaseModel):
    """One batch of offers shown together."""

    model_config = ConfigDict(frozen=True)

    prices: tuple[float, ...] = ()
    labels: tuple[Label, ...] | None = None

    def __len__(self) -> int:
        return len(self.prices)

    def label_at(self, index: int) -> Label | None:
        """Label of the offer at index, None on an unlabelled page."""
        return None if self.labels is None else self.labels[index]

    def offers(self) -> list[tuple[float, Label | None]]:
        """Pairs of (price, label) in page order."""
        return [(price, self.label_at(i)) for i, price in enumerate(self.prices)]


class Mechanism(BaseModel):
    """A finite sequence of menu pages with page capacity, search cost and supply.

    `supply` is None when the seller's supply is unbounded.
    """

    model_config = ConfigDict(frozen=True)

    k: int
    delta: float
    supply: int | None = None
    pages: tuple[MenuPage, ...] = ()

    @classmethod
    def from_prices(
        cls,
        pages: list[list[float]],
        *,
        k: int,
        delta: float,
        supply: int | None = None,
        labels: list[list[Label]] | None = None,
    ) -> "Mechanism":
        """Build a mechanism from per-page price lists and optional labels."""
        menu_pages = tuple(
            MenuPage(
                prices=tuple(prices),
                labels=None if labels is None else tuple(labels[index]),
            )
            for index, prices in enumerate(pages)
        )
        return cls(k=k, delta=delta, supply=supply, pages=menu_pages)

    @property
    def item_count(self) -> int:
        """Number of offers across all pages."""
        return sum(len(page) for page in self.pages)

    @property
    def page_count(self) -> int:
        """Number of pages."""
        return len(self.pages)

    @property
    def has_labels(self) -> bool:
        """Whether any page carries bait/expensive labels."""
        return any(page.labels is not None for page in self.pages)

    def all_prices(self) -> list[float]:
        """Every price in page order, then within-page order."""
        return [price for page in self.pages for price in page.prices]

    def truncated(self, page_count: int) -> "Mechanism":
        """The first page_count pages under the same k, delta and supply."""
        return self.model_copy(update={"pages": self.pages[:page_count]})


class ValuationProfile(BaseModel):
    """One value per offered item, in page order then within-page order."""

    model_config = ConfigDict(frozen=True)

    values: tuple[float, ...]


class PurchaseOutcome(BaseModel):
    """What a single buyer trace produced."""

    model_config = ConfigDict(frozen=True)

    stop_page: int
    bought_price: float | None = None
    buyer_utility: float = 0.0
    bought_label: Label | None = None


class BuyerTrace(BaseModel):
    """Page-by-page record of one buyer's browsing.

    Entry t - 1 of each tuple describes page t; the last entry is the stop page.
    """

    model_config = ConfigDict(frozen=True)

    page_utilities: tuple[float, ...]
    best_utilities: tuple[float, ...]
    best_prices: tuple[float | None, ...]
    outcome: PurchaseOutcome


class Violation(BaseModel):
    """A broken model invariant, reported as data."""

    model_config = ConfigDict(frozen=True)

    field: str
    rule: str


class Offer(NamedTuple):
    """The best offer on a page (or so far): utility, price, label.

    Tuples order exactly like the buyer's preference: utility first, then the
    higher price, then expensive over bait.
    """

    utility: float
    price: float | None
    label: Label | None

    def key(self) -> tuple[float, float, int]:
        """Sort key matching the buyer's preference order."""
        price = -np.inf if self.price is None else self.price
        return (self.utility, price, LABEL_RANK[self.label])


NO_OFFER = Offer(utility=-np.inf, price=None, label=None)


class PageOutcome(BaseModel):
    """One atom of a page's outcome law."""

    model_config = ConfigDict(frozen=True)

    utility: float
    price: float | None
    label: Label | None = None
    probability: float

    @property
    def offer(self) -> Offer:
        """This atom as an Offer."""
        return Offer(self.utility, self.price, self.label)


class PageOutcomeDistribution(BaseModel):
    """Exact joint law of (page utility, tie-broken best price) for one page."""

    model_config = ConfigDict(frozen=True)

    outcomes: tuple[PageOutcome, ...]

    def total(self) -> float:
        """Total mass of the law."""
        return sum(outcome.probability for outcome in self.outcomes)

    def as_dict(self) -> dict[tuple[float, float | None], float]:
        """Mass per (utility, price), summed over labels."""
        merged: dict[tuple[float, float | None], float] = {}
        for outcome in self.outcomes:
            key = (outcome.utility, outcome.price)
            merged[key] = merged.get(key, 0.0) + outcome.probability
        return merged
