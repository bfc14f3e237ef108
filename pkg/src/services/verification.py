import math
from itertools import combinations_with_replacement, product

from loguru import logger

from src.core.config import settings
from src.core.exceptions import InputError, SearchSpaceError
from src.models import (
    ClaimResult,
    ExpensiveItem,
    FiniteDistribution,
    Mechanism,
    PricePolicy,
    TopSplit,
    TruncationResult,
    ValuationProfile,
)
from src.services.buyer import simulate
from src.services.evaluator import exact_revenue
from src.services.pricing import greedy_revenue


def top_split(
    mechanism: Mechanism,
    distribution: FiniteDistribution,
    threshold: float | None = None,
) -> TopSplit:
    """Split a mechanism's prices into the expensive TOP set and the bait rest.

    Prices are taken from the highest down while the chance that the buyer
    likes at least one of them stays within the threshold (1/12 by default).
    The first price not taken is the top bait price, 0 when every item is taken.
    """
    threshold = settings.TOP_THRESHOLD if threshold is None else threshold
    items = [
        ExpensiveItem(page=t, price=price, label=label)
        for t, page in enumerate(mechanism.pages, start=1)
        for price, label in page.offers()
    ]
    ordered = sorted(items, key=lambda item: -item.price)

    dislike = 1.0
    expensive: list[ExpensiveItem] = []
    for item in ordered:
        candidate = dislike * distribution.cdf_strict(item.price)
        if 1.0 - candidate > threshold + settings.TOLERANCE:
            break
        expensive.append(item)
        dislike = candidate

    bait = ordered[len(expensive) :]
    top_bait_price = bait[0].price if bait else 0.0
    like = 1.0 - dislike
    like_with_top_bait = (
        1.0 - dislike * distribution.cdf_strict(top_bait_price) if bait else like
    )
    sandwich_holds = like <= threshold + settings.TOLERANCE and (
        not bait or like_with_top_bait > threshold
    )

    return TopSplit(
        expensive=tuple(expensive),
        bait=tuple(bait),
        top_bait_price=top_bait_price,
        expensive_count=len(expensive),
        like_probability=like,
        like_probability_with_top_bait=like_with_top_bait,
        sandwich_holds=sandwich_holds,
    )


def survival_truncation(
    mechanism: Mechanism,
    distribution: FiniteDistribution,
    threshold: float | None = None,
) -> TruncationResult:
    """Keep the first T pages, T the last page seen with probability >= threshold.

    Raises:
        InputError: If the threshold is outside (0, 1].

    """
    threshold = settings.SURVIVAL_THRESHOLD if threshold is None else threshold
    if not 0 < threshold <= 1:
        error_message = f"survival threshold must lie in (0, 1], got {threshold}"
        raise InputError(error_message)

    report = exact_revenue(mechanism, distribution)
    survival = report.survival_probabilities()[: mechanism.page_count]
    page_count = max(
        (
            t
            for t, seen in enumerate(survival, start=1)
            if seen >= threshold - settings.TOLERANCE
        ),
        default=0,
    )
    return TruncationResult(
        mechanism=mechanism.truncated(page_count),
        page_count=page_count,
        survival_probabilities=survival,
    )


def enumerate_revenue(mechanism: Mechanism, distribution: FiniteDistribution) -> float:
    """Expected revenue by replaying the buyer on every valuation profile."""
    revenue = 0.0
    atoms = list(zip(distribution.support, distribution.probs, strict=True))
    for profile in product(atoms, repeat=mechanism.item_count):
        values = tuple(value for value, _ in profile)
        weight = math.prod(prob for _, prob in profile)
        trace = simulate(mechanism, ValuationProfile(values=values))
        if trace.outcome.bought_price is not None:
            revenue += weight * trace.outcome.bought_price
    return revenue


def exhaustive_greedy(n: int, distribution: FiniteDistribution) -> float:
    """Best greedy revenue over every n-item menu priced on the support."""
    return max(
        greedy_revenue(PricePolicy(prices=menu), distribution)
        for menu in combinations_with_replacement(distribution.support, n)
    )


def brute_force_optimal(
    distribution: FiniteDistribution,
    k: int,
    delta: float,
    price_candidates: list[float],
    max_pages: int,
    supply: int | None = None,
) -> tuple[Mechanism, float]:
    """Score every mechanism of up to max_pages pages built from the candidates.

    Each page is a multiset of 1..k candidate prices. Ties keep the first
    layout found, pages enumerated shortest first.

    Raises:
        SearchSpaceError: If |candidates|^(k * max_pages) exceeds the search cap.

    """
    candidates = sorted(set(price_candidates))
    best = Mechanism(k=k, delta=delta, supply=supply)
    if not candidates:
        return best, 0.0

    size = float(len(candidates)) ** (k * max_pages)
    if size > settings.MAX_SEARCH_SPACE:
        raise SearchSpaceError(size, settings.MAX_SEARCH_SPACE)

    layouts = [
        list(prices)
        for count in range(1, k + 1)
        for prices in combinations_with_replacement(candidates, count)
    ]
    best_revenue = -math.inf
    for page_count in range(1, max_pages + 1):
        for pages in product(layouts, repeat=page_count):
            if supply is not None and sum(len(page) for page in pages) > supply:
                continue
            mechanism = Mechanism.from_prices(
                list(pages), k=k, delta=delta, supply=supply
            )
            revenue = exact_revenue(mechanism, distribution).expected_revenue
            if revenue > best_revenue + settings.TOLERANCE:
                best, best_revenue = mechanism, revenue

    logger.debug(
        "Brute force best revenue {} over {} layouts", best_revenue, len(layouts)
    )
    return best, max(best_revenue, 0.0)


def run_claim_suite(seed: int | None = None, scale: float = 1.0) -> list[ClaimResult]:
    """Run every claim check over seeded random instances.

    Args:
        seed: Root seed; every check derives its own sub-seed from it.
        scale: Fraction of the default instance counts to run.

    Returns:
        One result per claim, in a fixed order. Failures are reported as data.

    """
    # The checks build on the oracles above.
    from src.utils.claims import ClaimSuite  # noqa: PLC0415

    return ClaimSuite(seed=settings.SEED if seed is None else seed, scale=scale).run()
