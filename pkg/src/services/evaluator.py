import math
from collections import defaultdict
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from loguru import logger

from src.core.config import settings
from src.core.exceptions import InputError, InvalidMechanismError
from src.core.numeric import DECIMALS, HALF_TICK, canonical
from src.models import (
    NO_OFFER,
    FiniteDistribution,
    Label,
    Mechanism,
    MenuPage,
    MonteCarloEstimate,
    Offer,
    PageOutcome,
    PageOutcomeDistribution,
    RevenueReport,
)
from src.models.domain import LABEL_RANK
from src.services.buyer import EMPTY_PAGE, continues, purchase
from src.services.validation import SEED_MASK, draw_values, validate


class UtilityState(NamedTuple):
    """Previous page utility plus the best offer seen so far."""

    previous: float
    best: Offer


class UtilityStateDistribution(NamedTuple):
    """Mass over live buyer states, plus the mass that has already stopped."""

    masses: dict[UtilityState, float]
    absorbed: float = 0.0

    @classmethod
    def initial(cls) -> "UtilityStateDistribution":
        """Every buyer alive before page 1, with no offer seen."""
        return cls(masses={UtilityState(previous=0.0, best=NO_OFFER): 1.0})

    def live_mass(self) -> float:
        """Mass of the buyers still browsing."""
        return math.fsum(self.masses.values())


@lru_cache(maxsize=4096)
def page_outcome_distribution(
    page: MenuPage, distribution: FiniteDistribution
) -> PageOutcomeDistribution:
    """Exact law of the buyer's best offer on one page.

    Offers are folded in one at a time, so the law stays a small map keyed by
    (utility, price, label) rather than a product over all value profiles.
    """
    atoms = list(zip(distribution.support, distribution.probs, strict=True))
    law: dict[Offer, float] = {NO_OFFER: 1.0}
    for price, label in page.offers():
        folded: dict[Offer, float] = defaultdict(float)
        for offer, mass in law.items():
            for value, prob in atoms:
                candidate = Offer(canonical(value - price), price, label)
                folded[max(offer, candidate, key=Offer.key)] += mass * prob
        law = folded

    outcomes = tuple(
        PageOutcome(
            utility=offer.utility,
            price=offer.price,
            label=offer.label,
            probability=mass,
        )
        for offer, mass in sorted(law.items(), key=lambda item: item[0].key())
        if mass > 0
    )
    return PageOutcomeDistribution(outcomes=outcomes)


def exact_revenue(
    mechanism: Mechanism, distribution: FiniteDistribution
) -> RevenueReport:
    """Compute the exact expected revenue by propagating the buyer's state.

    Args:
        mechanism: The mechanism to evaluate.
        distribution: The i.i.d. value prior.

    Returns:
        Expected revenue, sale probability, per-page stop probabilities, expected
        buyer utility and, for labelled mechanisms, the expensive-sale probability.

    Raises:
        InvalidMechanismError: If the inputs break a model invariant.

    """
    violations = validate(mechanism, distribution)
    if violations:
        raise InvalidMechanismError(violations)

    state = UtilityStateDistribution.initial()
    stop_probabilities: list[float] = []
    revenue = sale = buyer_utility = expensive_sale = 0.0

    for stop_page, page in enumerate((*mechanism.pages, EMPTY_PAGE), start=1):
        law = page_outcome_distribution(page, distribution)
        survivors: dict[UtilityState, float] = defaultdict(float)
        stopped = 0.0

        for current, mass in state.masses.items():
            for outcome in law.outcomes:
                joint = mass * outcome.probability
                offer = outcome.offer
                best = max(current.best, offer, key=Offer.key)

                if continues(offer.utility, current.previous, mechanism.delta):
                    survivors[UtilityState(previous=offer.utility, best=best)] += joint
                    continue

                stopped += joint
                result = purchase(best, stop_page)
                if result.bought_price is not None:
                    revenue += joint * result.bought_price
                    sale += joint
                    buyer_utility += joint * result.buyer_utility
                    if result.bought_label == Label.EXPENSIVE:
                        expensive_sale += joint

        stop_probabilities.append(stopped)
        state = UtilityStateDistribution(
            masses=dict(survivors), absorbed=state.absorbed + stopped
        )

        drift = abs(state.live_mass() + state.absorbed - 1.0)
        if drift > settings.TOLERANCE:
            logger.warning("State mass drifted by {} after page {}", drift, stop_page)
        if not state.masses:
            break

    # Pages after the one where all mass stopped are never seen.
    stop_probabilities.extend(
        [0.0] * (mechanism.page_count + 1 - len(stop_probabilities))
    )

    return RevenueReport(
        expected_revenue=revenue,
        sale_probability=sale,
        stop_probabilities=stop_probabilities,
        expected_buyer_utility=buyer_utility,
        expensive_sale_probability=expensive_sale if mechanism.has_labels else None,
    )


def simulate_revenues(mechanism: Mechanism, values: np.ndarray) -> np.ndarray:
    """Run the buyer on a batch of valuation profiles at once.

    Args:
        mechanism: The mechanism to replay.
        values: Array of shape (traces, items) with one profile per row.

    Returns:
        The revenue collected on each trace.

    """
    traces = values.shape[0]
    previous = np.zeros(traces)
    active = np.ones(traces, dtype=bool)
    best_utility = np.full(traces, -np.inf)
    best_price = np.full(traces, -np.inf)
    best_rank = np.zeros(traces, dtype=int)
    revenue = np.zeros(traces)

    cursor = 0
    for page in (*mechanism.pages, EMPTY_PAGE):
        size = len(page)
        if size == 0:
            utility = np.full(traces, -np.inf)
            price = np.full(traces, -np.inf)
            rank = np.zeros(traces, dtype=int)
        else:
            prices = np.asarray(page.prices, dtype=float)
            ranks = np.asarray([LABEL_RANK[page.label_at(i)] for i in range(size)])
            utilities = np.round(values[:, cursor : cursor + size] - prices, DECIMALS)
            utility = utilities.max(axis=1)
            tied = utilities == utility[:, None]
            price = np.where(tied, prices, -np.inf).max(axis=1)
            rank = np.where(tied & (prices == price[:, None]), ranks, -1).max(axis=1)
        cursor += size

        better = (utility > best_utility) | (
            (utility == best_utility)
            & ((price > best_price) | ((price == best_price) & (rank > best_rank)))
        )
        update = active & better
        best_utility = np.where(update, utility, best_utility)
        best_price = np.where(update, price, best_price)
        best_rank = np.where(update, rank, best_rank)

        threshold = np.round(previous + mechanism.delta, DECIMALS) - HALF_TICK
        keeps_going = utility >= threshold
        stopping = active & ~keeps_going
        buys = stopping & (best_utility >= -HALF_TICK)
        revenue[buys] = best_price[buys]

        previous = np.where(active, utility, previous)
        active &= keeps_going
        if not active.any():
            break

    return revenue


def monte_carlo_revenue(
    mechanism: Mechanism,
    distribution: FiniteDistribution,
    samples: int,
    seed: int,
    chunk_size: int | None = None,
) -> MonteCarloEstimate:
    """Estimate expected revenue from seeded random valuation profiles.

    Samples are drawn in chunks, each from its own child of the seed sequence,
    so the result depends only on (seed, samples, chunk_size).

    Raises:
        InputError: If fewer than one sample is requested.
        InvalidMechanismError: If the inputs break a model invariant.

    """
    if samples < 1:
        error_message = f"samples must be >= 1, got {samples}"
        raise InputError(error_message)
    violations = validate(mechanism, distribution)
    if violations:
        raise InvalidMechanismError(violations)

    chunk_size = chunk_size or settings.CHUNK_SIZE
    chunk_count = math.ceil(samples / chunk_size)
    children = np.random.SeedSequence(seed & SEED_MASK).spawn(chunk_count)

    revenues = []
    for index, child in enumerate(children):
        size = min(chunk_size, samples - index * chunk_size)
        values = draw_values(
            distribution, np.random.default_rng(child), (size, mechanism.item_count)
        )
        revenues.append(simulate_revenues(mechanism, values))
    revenue = np.concatenate(revenues)

    # Constant samples get their exact value and zero spread.
    if revenue.min() == revenue.max():
        estimate, deviation = float(revenue[0]), 0.0
    else:
        estimate, deviation = float(revenue.mean()), float(revenue.std(ddof=1))
    logger.debug("Monte Carlo: {} samples in {} chunks", samples, chunk_count)

    return MonteCarloEstimate(
        estimate=estimate,
        standard_error=deviation / math.sqrt(samples),
        samples=samples,
        seed=seed,
        chunk_size=chunk_size,
    )
