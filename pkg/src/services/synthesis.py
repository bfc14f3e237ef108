import math
from collections.abc import Iterable, Sequence
from itertools import combinations_with_replacement
from typing import NamedTuple

import numpy as np
from loguru import logger

from src.core.config import settings
from src.core.exceptions import InputError, ReductionError
from src.core.numeric import HALF_TICK, canonical
from src.models import (
    BaitPage,
    BaitSkeleton,
    CandidateRow,
    FiniteDistribution,
    Label,
    Mechanism,
    MenuPage,
    SpreadingCertificate,
    SynthesisResult,
    TwoPricePage,
    UtilityBracket,
)
from src.services.evaluator import exact_revenue, page_outcome_distribution
from src.services.pricing import optimal_uniform_price

SALE_CONDITION = 0.5
MEDIAN_MASS = 0.5


def spreading_coefficient(
    distribution: FiniteDistribution, delta: float
) -> SpreadingCertificate:
    """Largest eta with Pr[v >= p | v >= p - delta] >= eta on every support price."""
    if delta <= 0:
        error_message = f"delta must be > 0, got {delta}"
        raise InputError(error_message)

    eta, witness = 1.0, distribution.support[0]
    for price in distribution.support:
        ratio = distribution.survival(price) / distribution.survival(price - delta)
        if ratio < eta:
            eta, witness = ratio, price
    return SpreadingCertificate(eta=eta, witness=witness)


def bracket_probability(
    prices: Sequence[float], bracket: UtilityBracket, distribution: FiniteDistribution
) -> float:
    """Pr[lower <= page utility <= upper] for a page with the given prices."""
    at_most_upper = math.prod(distribution.cdf(p + bracket.upper) for p in prices)
    below_lower = math.prod(distribution.cdf_strict(p + bracket.lower) for p in prices)
    return at_most_upper - below_lower


def _two_price_probability(
    low: tuple[float, float], high: tuple[float, float], low_count: int, size: int
) -> float:
    # low/high are (Pr[v <= p + upper], Pr[v < p + lower]) for each price.
    high_count = size - low_count
    return (low[0] ** low_count) * (high[0] ** high_count) - (low[1] ** low_count) * (
        high[1] ** high_count
    )


def two_price_reduction(
    prices: Sequence[float], bracket: UtilityBracket, distribution: FiniteDistribution
) -> TwoPricePage:
    """Replace a bait page by one with at most two prices and the same size.

    The convex-hull argument guarantees a two-price page whose bracket
    probability is at least 1 - 2 * eps, where 1 - eps is the original page's.
    Every price pair and split is scored exactly and the best one is kept.

    Args:
        prices: The original page's prices.
        bracket: The utility bracket the page must keep the buyer in.
        distribution: The i.i.d. value prior.

    Returns:
        The best two-price page together with its probability and eps.

    Raises:
        InputError: If the page is empty.
        ReductionError: If no page reaches 1 - 2 * eps.

    """
    if not prices:
        error_message = "two-price reduction needs a non-empty page"
        raise InputError(error_message)

    size = len(prices)
    epsilon = 1.0 - bracket_probability(prices, bracket, distribution)
    distinct = sorted(set(prices))
    factors = {
        p: (
            distribution.cdf(p + bracket.upper),
            distribution.cdf_strict(p + bracket.lower),
        )
        for p in distinct
    }

    best: TwoPricePage | None = None
    for low_index, low in enumerate(distinct):
        splits = [(low, size)] + [
            (high, count)
            for high in distinct[low_index + 1 :]
            for count in range(1, size)
        ]
        for high, low_count in splits:
            probability = _two_price_probability(
                factors[low], factors[high], low_count, size
            )
            if best is None or probability > best.probability:
                best = TwoPricePage(
                    low_price=low,
                    high_price=high,
                    low_count=low_count,
                    high_count=size - low_count,
                    probability=probability,
                    epsilon=epsilon,
                )

    if best is None or best.probability < 1.0 - 2.0 * epsilon - settings.TOLERANCE:
        error_message = f"no two-price page reaches 1 - 2*eps for eps={epsilon}"
        raise ReductionError(error_message)
    return best


def median_thresholds(distributions: Sequence[FiniteDistribution]) -> list[float]:
    """Thresholds 0 = a_0 <= a_1 <= ... <= a_n < a_{n+1} = inf from medians.

    Each a_i is a median of the i-th variable. The lower median is used unless
    the running threshold already falls in the variable's median interval.
    """
    thresholds = [0.0]
    for distribution in distributions:
        support = distribution.support
        lower = next(v for v in support if distribution.cdf(v) >= MEDIAN_MASS)
        upper = max(v for v in support if distribution.survival(v) >= MEDIAN_MASS)
        thresholds.append(min(max(thresholds[-1], lower), upper))
    thresholds.append(math.inf)
    return [float(a) for a in np.maximum.accumulate(thresholds)]


def utility_grid(distribution: FiniteDistribution, grid_step: float) -> list[float]:
    """Grid utilities 0, step, 2*step, ... reaching at least the top value."""
    if grid_step <= 0:
        error_message = f"grid_step must be > 0, got {grid_step}"
        raise InputError(error_message)
    count = math.ceil(distribution.max_value / grid_step - HALF_TICK) + 1
    return [canonical(i * grid_step) for i in range(count)]


def bait_price_candidates(
    distribution: FiniteDistribution, grid: Iterable[float]
) -> list[float]:
    """Prices v - g that put a liked bait item exactly on a grid utility."""
    grid = list(grid)
    return sorted(
        {
            canonical(value - g)
            for value in distribution.support
            for g in grid
            if value - g >= -HALF_TICK
        }
    )


class _BracketSearch:
    """Best bait page for each (bracket, bait size), memoised across stages."""

    def __init__(
        self, distribution: FiniteDistribution, k: int, prices: np.ndarray
    ) -> None:
        self.distribution = distribution
        self.k = k
        self.prices = prices
        self.cache: dict[tuple[float, float], list[TwoPricePage | None]] = {}

    def best_pages(self, lower: float, upper: float) -> list[TwoPricePage | None]:
        """Best page of every size 1..k for the bracket, or None when unreachable."""
        key = (lower, upper)
        if key not in self.cache:
            self.cache[key] = self._search(lower, upper)
        return self.cache[key]

    def _representatives(
        self, lower: float, upper: float
    ) -> list[tuple[float, float, float]]:
        at_most = self.distribution.cdf_many(self.prices + upper)
        below = self.distribution.cdf_strict_many(self.prices + lower)

        # Prices with the same factor pair are interchangeable; keep the highest.
        by_signature: dict[tuple[float, float], float] = {}
        for price, a, b in zip(self.prices, at_most, below, strict=True):
            by_signature[(float(a), float(b))] = float(price)
        by_signature.pop((1.0, 1.0), None)

        ranked = sorted(
            by_signature.items(), key=lambda item: (-item[0][0], item[0][1])
        )
        frontier: list[tuple[float, float, float]] = []
        smallest_below = math.inf
        for (a, b), price in ranked:
            if b < smallest_below:
                frontier.append((price, a, b))
                smallest_below = b
        return sorted(frontier)

    def _search(self, lower: float, upper: float) -> list[TwoPricePage | None]:
        representatives = self._representatives(lower, upper)
        pages: list[TwoPricePage | None] = []
        for size in range(1, self.k + 1):
            best: TwoPricePage | None = None
            for i, (low, a_low, b_low) in enumerate(representatives):
                splits = [(low, a_low, b_low, size)] + [
                    (high, a_high, b_high, count)
                    for high, a_high, b_high in representatives[i + 1 :]
                    for count in range(1, size)
                ]
                for high, a_high, b_high, low_count in splits:
                    probability = _two_price_probability(
                        (a_low, b_low), (a_high, b_high), low_count, size
                    )
                    if probability > HALF_TICK and (
                        best is None or probability > best.probability
                    ):
                        best = TwoPricePage(
                            low_price=low,
                            high_price=high,
                            low_count=low_count,
                            high_count=size - low_count,
                            probability=probability,
                        )
            pages.append(best)
        return pages


class _Entry(NamedTuple):
    probability: float
    parent: tuple[float, int] | None
    page: TwoPricePage | None
    bracket: UtilityBracket | None


def _prune(layer: dict[tuple[float, int], _Entry]) -> dict[tuple[float, int], _Entry]:
    """Drop states beaten by one with lower upper bound, more slots and more mass."""
    kept: dict[tuple[float, int], _Entry] = {}
    best_for_slots: dict[int, float] = {}
    for (upper, slots), entry in sorted(
        layer.items(), key=lambda item: (item[0][0], -item[0][1], -item[1].probability)
    ):
        if best_for_slots.get(slots, -1.0) >= entry.probability:
            continue
        kept[(upper, slots)] = entry
        for fewer in range(slots + 1):
            if best_for_slots.get(fewer, -1.0) < entry.probability:
                best_for_slots[fewer] = entry.probability
    return kept


def synthesize_bait_dp(
    distribution: FiniteDistribution,
    k: int,
    delta: float,
    supply: int | None,
    grid_step: float | None = None,
) -> list[BaitSkeleton]:
    """Fill D[upper, slots] stage by stage and recover one skeleton per length.

    D holds the highest probability that the bait pages carry the buyer through
    the current stage with bait utility at most `upper` while leaving `slots`
    free places for expensive items. Each stage's bracket starts at the previous
    upper bound plus delta, so brackets are disjoint and probabilities multiply.

    Args:
        distribution: The i.i.d. value prior.
        k: Page capacity.
        delta: Search cost.
        supply: Item supply, None when unbounded.
        grid_step: Utility grid spacing; defaults to delta.

    Returns:
        For every page count T reached with probability at least the acceptance
        threshold, the skeleton with the most free slots. Empty when none exists.

    """
    if k < 1:
        error_message = f"k must be >= 1, got {k}"
        raise InputError(error_message)
    grid_step = grid_step or delta
    grid = utility_grid(distribution, grid_step)
    search = _BracketSearch(
        distribution=distribution,
        k=k,
        prices=np.asarray(bait_price_candidates(distribution, grid)),
    )
    threshold = settings.DP_ACCEPTANCE
    max_stages = math.inf if supply is None else supply // k

    layer: dict[tuple[float, int], _Entry] = {
        (0.0, 0): _Entry(probability=1.0, parent=None, page=None, bracket=None)
    }
    stages: list[dict[tuple[float, int], _Entry]] = []

    while len(stages) < max_stages:
        following: dict[tuple[float, int], _Entry] = {}
        for (previous_upper, slots), entry in layer.items():
            lower = canonical(previous_upper + delta)
            for upper in grid:
                if upper < lower - HALF_TICK:
                    continue
                for size, page in enumerate(search.best_pages(lower, upper), start=1):
                    if page is None:
                        continue
                    probability = entry.probability * page.probability
                    if probability < threshold - HALF_TICK:
                        continue
                    key = (upper, slots + k - size)
                    if key not in following or probability > following[key].probability:
                        following[key] = _Entry(
                            probability=probability,
                            parent=(previous_upper, slots),
                            page=page,
                            bracket=UtilityBracket(lower=lower, upper=upper),
                        )
        if not following:
            break
        layer = _prune(following)
        stages.append(layer)
        logger.debug("DP stage {}: {} live states", len(stages), len(layer))

    return [_backtrack(stages, t, k, delta, supply) for t in range(1, len(stages) + 1)]


def _backtrack(
    stages: list[dict[tuple[float, int], _Entry]],
    page_count: int,
    k: int,
    delta: float,
    supply: int | None,
) -> BaitSkeleton:
    layer = stages[page_count - 1]
    key = max(layer, key=lambda item: (item[1], layer[item].probability, -item[0]))
    success = layer[key].probability
    free_slots = key[1]

    pages: list[BaitPage] = []
    for stage in reversed(stages[:page_count]):
        entry = stage[key]
        pages.append(
            BaitPage(
                layout=entry.page,
                bracket=entry.bracket,
                free_slots=k - entry.page.size,
            )
        )
        key = entry.parent

    return BaitSkeleton(
        k=k,
        delta=delta,
        supply=supply,
        pages=tuple(reversed(pages)),
        success_probability=success,
        free_slots=free_slots,
    )


def _assemble(
    skeleton: BaitSkeleton, page_prices: Sequence[float], final_price: float | None
) -> Mechanism:
    """Fill every free slot with its page's expensive price and append a final page."""
    pages: list[list[float]] = []
    labels: list[list[Label]] = []
    for bait_page, price in zip(skeleton.pages, page_prices, strict=True):
        bait_prices = bait_page.layout.prices()
        pages.append(bait_prices + [price] * bait_page.free_slots)
        labels.append(
            [Label.BAIT] * len(bait_prices) + [Label.EXPENSIVE] * bait_page.free_slots
        )

    if final_price is not None:
        used = sum(len(page) for page in pages)
        room = skeleton.k
        if skeleton.supply is not None:
            room = min(room, skeleton.supply - used)
        if room > 0:
            pages.append([final_price] * room)
            labels.append([Label.EXPENSIVE] * room)

    return Mechanism.from_prices(
        pages, k=skeleton.k, delta=skeleton.delta, supply=skeleton.supply, labels=labels
    )


def expensive_price_candidates(
    distribution: FiniteDistribution, grid: Iterable[float], margin: float
) -> list[float]:
    """Prices v - g - margin that undercut the next bait step by the margin."""
    grid = list(grid)
    return sorted(
        {
            canonical(value - g - margin)
            for value in distribution.support
            for g in grid
            if HALF_TICK < value - g - margin <= distribution.max_value
        }
    )


def conditioned_bait_law(
    bait_page: BaitPage, distribution: FiniteDistribution
) -> list[tuple[float, float]]:
    """Law of a bait page's utility given that it lands in the page's bracket."""
    law = page_outcome_distribution(
        MenuPage(prices=tuple(bait_page.layout.prices())), distribution
    )
    inside = [
        (outcome.utility, outcome.probability)
        for outcome in law.outcomes
        if bait_page.bracket.contains(outcome.utility)
    ]
    total = math.fsum(probability for _, probability in inside)
    if total <= 0:
        return []
    return [(utility, probability / total) for utility, probability in inside]


def conditional_sale_holds(
    price: float,
    slots: int,
    next_law: Sequence[tuple[float, float]],
    distribution: FiniteDistribution,
    delta: float,
) -> bool:
    """Whether an expensive item that stops the buyer is then also bought.

    Checks Pr[v - p >= u_b | v - p >= u_b - delta] >= 1/2, with v the best of
    `slots` values and u_b the next page's bracket-conditioned bait utility.
    """
    wins = math.fsum(
        probability * (1.0 - distribution.cdf_strict(price + utility) ** slots)
        for utility, probability in next_law
    )
    interferes = math.fsum(
        probability * (1.0 - distribution.cdf_strict(price - delta + utility) ** slots)
        for utility, probability in next_law
    )
    return interferes <= 0 or wins >= SALE_CONDITION * interferes - settings.TOLERANCE


def attach_expensive(
    skeleton: BaitSkeleton,
    distribution: FiniteDistribution,
    delta: float,
    margin: float,
    grid_step: float | None = None,
) -> list[Mechanism]:
    """Turn a bait skeleton into candidate bait mechanisms.

    Two families are produced. The spreading family prices every free slot and
    a final page of k items uniformly at each candidate p. The general family
    picks, per page, a price in [p*/3, p*/2] (p* the optimal uniform price for
    half the free slots) that passes `conditional_sale_holds` against the next
    page's bait.

    Raises:
        InputError: If the margin is not strictly between 0 and delta.

    """
    if not 0 < margin < delta:
        error_message = f"margin must lie in (0, delta), got {margin}"
        raise InputError(error_message)

    grid = utility_grid(distribution, grid_step or delta)
    candidates = expensive_price_candidates(distribution, grid, margin)

    half_slots = max(1, skeleton.free_slots // 2)
    star_price, _ = optimal_uniform_price(half_slots, distribution)
    top_upper = skeleton.pages[-1].bracket.upper if skeleton.pages else 0.0
    proof_price = canonical(star_price - top_upper)
    spreading = sorted(set(candidates) | ({proof_price} if proof_price > 0 else set()))

    mechanisms = [
        _assemble(skeleton, [price] * skeleton.page_count, price) for price in spreading
    ]

    if star_price > 0:
        mechanisms.append(
            _assemble(
                skeleton,
                _general_page_prices(
                    skeleton, distribution, delta, star_price, candidates
                ),
                star_price / 2,
            )
        )

    if not mechanisms:
        mechanisms.append(bait_only_mechanism(skeleton))
    return mechanisms


def bait_only_mechanism(skeleton: BaitSkeleton) -> Mechanism:
    """The skeleton's bait pages alone, with every free slot left empty."""
    pages = [page.layout.prices() for page in skeleton.pages]
    labels = [[Label.BAIT] * len(prices) for prices in pages]
    return Mechanism.from_prices(
        pages, k=skeleton.k, delta=skeleton.delta, supply=skeleton.supply, labels=labels
    )


def _general_page_prices(
    skeleton: BaitSkeleton,
    distribution: FiniteDistribution,
    delta: float,
    star_price: float,
    candidates: Sequence[float],
) -> list[float]:
    low, high = star_price / 3, star_price / 2
    window = sorted(
        {low, high}
        | {p for p in candidates if low - HALF_TICK <= p <= high + HALF_TICK},
        reverse=True,
    )

    prices = []
    for t, bait_page in enumerate(skeleton.pages):
        chosen = high
        if bait_page.free_slots and t + 1 < skeleton.page_count:
            next_law = conditioned_bait_law(skeleton.pages[t + 1], distribution)
            chosen = next(
                (
                    p
                    for p in window
                    if conditional_sale_holds(
                        p, bait_page.free_slots, next_law, distribution, delta
                    )
                ),
                high,
            )
        prices.append(chosen)
    return prices


def staircase_family(
    distribution: FiniteDistribution,
    k: int,
    delta: float,
    supply: int | None,
    margin: float,
) -> list[tuple[str, Mechanism]]:
    """One bait per page climbing by delta, the rest expensive just under the next step.

    Page t carries a bait at v_low - t*delta and k - 1 expensive items at
    v_high - (t + 1)*delta - margin, for support anchors v_low < v_high.
    """
    if k < 2:  # noqa: PLR2004
        return []
    family = []
    max_pages = math.inf if supply is None else supply // k
    for v_low in distribution.support:
        for v_high in distribution.support:
            if v_high <= v_low:
                continue
            page_count = 1
            while page_count <= max_pages:
                bait = [canonical(v_low - t * delta) for t in range(1, page_count + 1)]
                expensive = [
                    canonical(v_high - (t + 1) * delta - margin)
                    for t in range(1, page_count + 1)
                ]
                if bait[-1] < -HALF_TICK or expensive[-1] <= 0:
                    break
                pages = [
                    [b] + [e] * (k - 1)
                    for b, e in zip(bait, expensive, strict=True)
                ]
                labels = [[Label.BAIT] + [Label.EXPENSIVE] * (k - 1) for _ in pages]
                name = f"staircase-{v_low:g}-{v_high:g}-T{page_count}"
                family.append(
                    (
                        name,
                        Mechanism.from_prices(
                            pages, k=k, delta=delta, supply=supply, labels=labels
                        ),
                    )
                )

                final = canonical(v_high - (page_count + 2) * delta - margin)
                fits = supply is None or (page_count + 1) * k <= supply
                if final > 0 and fits:
                    family.append(
                        (
                            f"{name}-final",
                            Mechanism.from_prices(
                                [*pages, [final] * k],
                                k=k,
                                delta=delta,
                                supply=supply,
                                labels=[*labels, [Label.EXPENSIVE] * k],
                            ),
                        )
                    )
                page_count += 1
    return family


def single_page_family(
    distribution: FiniteDistribution, k: int, delta: float, supply: int | None
) -> list[tuple[str, Mechanism]]:
    """The optimal uniform page plus every single page priced on the support."""
    size = k if supply is None else min(k, supply)
    if size < 1:
        return []

    price, _ = optimal_uniform_price(size, distribution)
    family = [
        (
            "single-uniform",
            Mechanism.from_prices(
                [[price] * size],
                k=k,
                delta=delta,
                supply=supply,
                labels=[[Label.EXPENSIVE] * size],
            ),
        )
    ]

    layouts = math.comb(len(distribution.support) + size - 1, size)
    if layouts <= settings.SINGLE_PAGE_FAMILY_CAP:
        for index, prices in enumerate(
            combinations_with_replacement(distribution.support, size)
        ):
            family.append(
                (
                    f"single-{index}",
                    Mechanism.from_prices(
                        [list(prices)],
                        k=k,
                        delta=delta,
                        supply=supply,
                        labels=[[Label.EXPENSIVE] * size],
                    ),
                )
            )
    return family


def is_bait_mechanism(mechanism: Mechanism) -> bool:
    """Labelled, with at most two distinct bait prices on every page."""
    if not mechanism.has_labels:
        return False
    for page in mechanism.pages:
        if page.labels is None:
            return False
        bait_prices = {
            price
            for price, label in zip(page.prices, page.labels, strict=True)
            if label == Label.BAIT
        }
        if len(bait_prices) > 2:  # noqa: PLR2004
            return False
    return True


def synthesize(
    distribution: FiniteDistribution,
    k: int,
    delta: float,
    supply: int | None,
    grid_step: float | None = None,
    margin: float | None = None,
) -> SynthesisResult:
    """Build the candidate pool and return its best member by exact revenue.

    The pool holds the empty mechanism, single-page mechanisms, every expensive
    attachment of every DP skeleton and the staircase family. Ties go to fewer
    pages, then to a lower total price.

    Args:
        distribution: The i.i.d. value prior.
        k: Page capacity.
        delta: Search cost.
        supply: Item supply, None when unbounded.
        grid_step: Utility grid spacing; defaults to delta.
        margin: Expensive-price offset; defaults to delta / 10.

    Returns:
        The winning mechanism, its revenue report and every scored candidate.

    """
    grid_step = grid_step or delta
    margin = margin or delta / 10

    pool = [
        ("empty", Mechanism(k=k, delta=delta, supply=supply)),
        *single_page_family(distribution, k, delta, supply),
    ]
    skeletons = synthesize_bait_dp(distribution, k, delta, supply, grid_step)
    for skeleton in skeletons:
        pool.extend(
            (f"bait-T{skeleton.page_count}-{index}", mechanism)
            for index, mechanism in enumerate(
                attach_expensive(skeleton, distribution, delta, margin, grid_step)
            )
        )
    pool.extend(staircase_family(distribution, k, delta, supply, margin))
    logger.info(
        "Scoring {} candidates ({} DP skeletons)", len(pool), len(skeletons)
    )

    scored = [
        (name, mechanism, exact_revenue(mechanism, distribution))
        for name, mechanism in pool
    ]
    name, mechanism, report = min(
        scored,
        key=lambda item: (
            -canonical(item[2].expected_revenue),
            item[1].page_count,
            canonical(sum(item[1].all_prices())),
        ),
    )
    logger.info("Best candidate {} with revenue {}", name, report.expected_revenue)

    return SynthesisResult(
        mechanism=mechanism,
        report=report,
        candidates=[
            CandidateRow(
                mechanism_id=candidate_name,
                pages=candidate.page_count,
                revenue=candidate_report.expected_revenue,
                sale_prob=candidate_report.sale_probability,
                expensive_sale_prob=candidate_report.expensive_sale_probability,
            )
            for candidate_name, candidate, candidate_report in scored
        ],
    )
