from collections.abc import Sequence

from src.core.exceptions import ProfileLengthError
from src.core.numeric import at_least, canonical
from src.models import (
    NO_OFFER,
    BuyerTrace,
    Mechanism,
    MenuPage,
    Offer,
    PurchaseOutcome,
    ValuationProfile,
)

EMPTY_PAGE = MenuPage()


def best_offer(page: MenuPage, values: Sequence[float]) -> Offer:
    """Return the offer the buyer prefers on one page.

    Ties on utility go to the highest price, then to an expensive label.
    """
    best = NO_OFFER
    for (price, label), value in zip(page.offers(), values, strict=True):
        offer = Offer(canonical(value - price), price, label)
        if offer.key() > best.key():
            best = offer
    return best


def continues(utility: float, previous: float, delta: float) -> bool:
    """Whether a page utility is enough to keep browsing (equality continues)."""
    return at_least(utility, canonical(previous + delta))


def purchase(best: Offer, stop_page: int) -> PurchaseOutcome:
    """Buy the best offer seen when its utility is non-negative."""
    if at_least(best.utility, 0.0):
        return PurchaseOutcome(
            stop_page=stop_page,
            bought_price=best.price,
            buyer_utility=best.utility,
            bought_label=best.label,
        )
    return PurchaseOutcome(stop_page=stop_page)


def simulate(mechanism: Mechanism, profile: ValuationProfile) -> BuyerTrace:
    """Replay the impatient buyer on one valuation profile.

    Args:
        mechanism: A validated mechanism.
        profile: One value per offered item, aligned with the page order.

    Returns:
        The per-page utilities, the running best offer and the purchase made.

    Raises:
        ProfileLengthError: If the profile does not cover every offered item.

    """
    if len(profile.values) != mechanism.item_count:
        raise ProfileLengthError(mechanism.item_count, len(profile.values))

    page_utilities: list[float] = []
    best_utilities: list[float] = []
    best_prices: list[float | None] = []

    previous = 0.0
    best = NO_OFFER
    cursor = 0

    # An implicit empty page after the last listed page always forces a stop.
    for stop_page, page in enumerate((*mechanism.pages, EMPTY_PAGE), start=1):
        values = profile.values[cursor : cursor + len(page)]
        cursor += len(page)

        offer = best_offer(page, values)
        best = max(best, offer, key=Offer.key)

        page_utilities.append(offer.utility)
        best_utilities.append(best.utility)
        best_prices.append(best.price)

        if not continues(offer.utility, previous, mechanism.delta):
            return BuyerTrace(
                page_utilities=tuple(page_utilities),
                best_utilities=tuple(best_utilities),
                best_prices=tuple(best_prices),
                outcome=purchase(best, stop_page),
            )
        previous = offer.utility

    error_message = "the implicit empty page must stop the buyer"
    raise AssertionError(error_message)
