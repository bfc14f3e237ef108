import math
import zlib
from abc import ABC, abstractmethod
from itertools import product
from typing import ClassVar

import numpy as np
from loguru import logger
from pydantic import BaseModel

from src.core.config import settings
from src.core.exceptions import ReductionError
from src.core.numeric import canonical
from src.models import (
    ClaimResult,
    FiniteDistribution,
    MenuPage,
    PricePolicy,
    UtilityBracket,
)
from src.services.evaluator import exact_revenue, page_outcome_distribution
from src.services.pricing import (
    greedy_revenue,
    optimal_spm,
    optimal_uniform_price,
    optimal_uspm,
)
from src.services.synthesis import (
    bait_only_mechanism,
    bracket_probability,
    median_thresholds,
    spreading_coefficient,
    synthesize,
    synthesize_bait_dp,
    two_price_reduction,
)
from src.services.validation import SEED_MASK
from src.services.verification import (
    brute_force_optimal,
    enumerate_revenue,
    exhaustive_greedy,
    survival_truncation,
    top_split,
)
from src.utils.instances import random_distribution, random_mechanism, random_prices


class Tally(BaseModel):
    """Running count of instances, violations and the smallest signed slack."""

    claim: str
    instances: int = 0
    violations: int = 0
    flagged: int = 0
    worst_slack: float = math.inf

    def record(self, slack: float, *, flag: bool = False) -> None:
        """Count one instance; negative slack beyond the tolerance is a violation."""
        self.instances += 1
        self.worst_slack = min(self.worst_slack, slack)
        if slack < -settings.TOLERANCE:
            self.violations += 1
        if flag:
            self.flagged += 1

    def result(self) -> ClaimResult:
        """Freeze the tally into a claim result."""
        return ClaimResult(
            claim=self.claim,
            instances=self.instances,
            violations=self.violations,
            worst_slack=0.0 if self.instances == 0 else self.worst_slack,
            flagged=self.flagged,
        )


class ClaimCheck(ABC):
    """Abstract base class for claim checks chained into a suite."""

    CLAIM: ClassVar[str]
    INSTANCES: ClassVar[int]

    def __init__(self) -> None:
        """Initialise a new check with no next check set."""
        self._next_check: ClaimCheck | None = None

    def set_next(self, check: "ClaimCheck") -> "ClaimCheck":
        """Set the next check in the chain.

        Args:
            check: The check to run after this one.

        Returns:
            The check that was set as next, allowing for method chaining.

        """
        self._next_check = check
        return check

    def handle(
        self, seed: int, scale: float, results: list[ClaimResult]
    ) -> list[ClaimResult]:
        """Run this check and pass the collected results down the chain.

        Args:
            seed: Root seed of the suite.
            scale: Fraction of the default instance count to run.
            results: Results of the checks already run.

        Returns:
            The results of this check and every subsequent check.

        """
        rng = np.random.default_rng([seed & SEED_MASK, zlib.crc32(self.CLAIM.encode())])
        tally = Tally(claim=self.CLAIM)
        self.process(rng, max(1, round(self.INSTANCES * scale)), tally)
        result = tally.result()
        logger.info(
            "{}: {} instances, {} violations",
            result.claim,
            result.instances,
            result.violations,
        )

        results = [*results, result]
        if self._next_check:
            return self._next_check.handle(seed, scale, results)
        return results

    @abstractmethod
    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Check the claim on `count` random instances, recording each slack.

        Args:
            rng: Generator seeded for this check only.
            count: Number of instances to draw.
            tally: Accumulator receiving one signed slack per instance.

        """


class UniformMenuHalfCheck(ClaimCheck):
    """Uprice(c * l) <= c * Uprice(l)."""

    CLAIM = "umenu_half"
    INSTANCES = 200
    MAX_ITEMS = 8

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Record the worst c * Uprice(l) - Uprice(c * l) over small l and c."""
        for _ in range(count):
            distribution = random_distribution(rng)
            tally.record(
                min(
                    c * optimal_uniform_price(ell, distribution)[1]
                    - optimal_uniform_price(c * ell, distribution)[1]
                    for ell in range(1, self.MAX_ITEMS + 1)
                    for c in range(1, self.MAX_ITEMS + 1)
                )
            )


class ProphetBoundCheck(ClaimCheck):
    """SPM(n) <= 2 * Uprice(n)."""

    CLAIM = "spm_le_2uprice"
    INSTANCES = 200
    MAX_BUYERS = 8

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Record the worst 2 * Uprice(n) - SPM(n) over 1..MAX_BUYERS buyers."""
        for _ in range(count):
            distribution = random_distribution(rng)
            tally.record(
                min(
                    2 * optimal_uniform_price(n, distribution)[1]
                    - optimal_spm(n, distribution)[1]
                    for n in range(1, self.MAX_BUYERS + 1)
                )
            )


class GreedyEqualsSpmCheck(ClaimCheck):
    """Best greedy menu revenue equals optimal sequential posted pricing."""

    CLAIM = "greedy_eq_spm"
    INSTANCES = 50
    MAX_BUYERS = 4

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Record the largest greedy/SPM gap as a non-positive slack."""
        for _ in range(count):
            distribution = random_distribution(rng, max_size=3)
            tally.record(
                -max(
                    abs(
                        exhaustive_greedy(n, distribution)
                        - optimal_spm(n, distribution)[1]
                    )
                    for n in range(1, self.MAX_BUYERS + 1)
                )
            )


class UniformSpmCheck(ClaimCheck):
    """U-SPM(n) equals Uprice(n)."""

    CLAIM = "uspm_eq_uprice"
    INSTANCES = 200
    MAX_BUYERS = 8

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Record the largest U-SPM/Uprice gap as a non-positive slack."""
        for _ in range(count):
            distribution = random_distribution(rng)
            tally.record(
                -max(
                    abs(
                        optimal_uspm(n, distribution)[1]
                        - optimal_uniform_price(n, distribution)[1]
                    )
                    for n in range(1, self.MAX_BUYERS + 1)
                )
            )


class EpsilonDoublingCheck(ClaimCheck):
    """prod(1 - 2 eps_t) >= 2 prod(1 - eps_t) - 1 for eps_t in [0, 1/2]."""

    CLAIM = "eps_to_2eps"
    INSTANCES = 10_000
    MAX_LENGTH = 10

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Draw every loss sequence at once and record one slack per row."""
        eps = rng.uniform(0.0, 0.5, size=(count, self.MAX_LENGTH))
        lengths = rng.integers(1, self.MAX_LENGTH + 1, size=count)
        eps[np.arange(self.MAX_LENGTH)[None, :] >= lengths[:, None]] = 0.0
        slack = np.prod(1 - 2 * eps, axis=1) - (2 * np.prod(1 - eps, axis=1) - 1)
        for value in slack:
            tally.record(float(value))


class TwoPriceCheck(ClaimCheck):
    """The two-price page keeps the bracket probability at least 1 - 2 eps."""

    CLAIM = "baits_2_prices"
    INSTANCES = 1000
    MAX_PAGE = 6
    MAX_DRAWS_PER_INSTANCE = 20

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Reduce random pages against random brackets until `count` are recorded.

        Brackets are cut at random quantiles of the page's utility law and
        draws losing half the mass or more are redrawn.

        """
        for _ in range(count * self.MAX_DRAWS_PER_INSTANCE):
            if tally.instances >= count:
                break
            distribution = random_distribution(rng)
            prices = random_prices(
                rng, distribution, 1.0, int(rng.integers(1, self.MAX_PAGE + 1))
            )
            law = page_outcome_distribution(
                MenuPage(prices=tuple(prices)), distribution
            )
            utilities = np.array([outcome.utility for outcome in law.outcomes])
            masses = np.cumsum([outcome.probability for outcome in law.outcomes])
            lower = float(utilities[np.searchsorted(masses, rng.uniform(0.0, 0.2))])
            top = np.searchsorted(masses, rng.uniform(0.8, 1.0))
            upper = float(utilities[min(top, len(utilities) - 1)])
            bracket = UtilityBracket(lower=min(lower, upper), upper=upper)

            epsilon = 1.0 - bracket_probability(prices, bracket, distribution)
            if epsilon >= 0.5:  # noqa: PLR2004
                continue
            try:
                page = two_price_reduction(prices, bracket, distribution)
            except ReductionError:
                tally.record(-1.0)
                continue
            tally.record(page.probability - (1.0 - 2.0 * epsilon))


class UtilityControlCheck(ClaimCheck):
    """Median brackets catch every other variable with probability >= 1 - 2 eps."""

    CLAIM = "utility_control"
    INSTANCES = 100
    MAX_VARIABLES = 4
    MAX_EPSILON = 0.25

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Record both parity classes of every instance whose ordering loss is small."""
        for _ in range(count):
            n = int(rng.integers(1, self.MAX_VARIABLES + 1))
            variables = [self._variable(rng, i) for i in range(n)]
            atoms = [
                list(zip(v.support, v.probs, strict=True)) for v in variables
            ]
            ordered = 0.0
            profiles = []
            for profile in product(*atoms):
                values = [value for value, _ in profile]
                weight = math.prod(prob for _, prob in profile)
                profiles.append((values, weight))
                if values[0] >= 0 and all(a <= b for a, b in zip(values, values[1:])):
                    ordered += weight

            epsilon = 1.0 - ordered
            if epsilon >= self.MAX_EPSILON:
                continue
            alpha = median_thresholds(variables)
            for parity in (1, 0):
                caught = math.fsum(
                    weight
                    for values, weight in profiles
                    if all(
                        alpha[i - 1] <= values[i - 1] <= alpha[i + 1]
                        for i in range(1, n + 1)
                        if i % 2 == parity
                    )
                )
                tally.record(caught - (1.0 - 2.0 * epsilon))

    @staticmethod
    def _variable(rng: np.random.Generator, index: int) -> FiniteDistribution:
        size = int(rng.integers(1, 4))
        window = np.arange(3 * index, 3 * index + 6)
        support = sorted(rng.choice(window, size=size, replace=False))
        probs = rng.dirichlet(np.ones(size))
        probs[-1] = 1.0 - probs[:-1].sum()
        return FiniteDistribution(
            support=tuple(float(v) for v in support),
            probs=tuple(float(p) for p in probs),
        )


class ExactEnumerationCheck(ClaimCheck):
    """The exact evaluator agrees with replaying the buyer on every profile."""

    CLAIM = "exact_eq_enumeration"
    INSTANCES = 100

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Compare both evaluators on tiny mechanisms."""
        for _ in range(count):
            distribution = random_distribution(rng, max_size=2)
            mechanism = random_mechanism(rng, distribution, max_pages=4, max_items=2)
            exact = exact_revenue(mechanism, distribution).expected_revenue
            tally.record(-abs(exact - enumerate_revenue(mechanism, distribution)))


class SandwichCheck(ClaimCheck):
    """Pr[like TOP] <= 1/12 < Pr[like TOP or the top bait item]."""

    CLAIM = "top_split_sandwich"
    INSTANCES = 200

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Record the tighter side of the sandwich for each random mechanism."""
        threshold = settings.TOP_THRESHOLD
        for _ in range(count):
            distribution = random_distribution(rng)
            mechanism = random_mechanism(rng, distribution, max_pages=4, max_items=3)
            split = top_split(mechanism, distribution)
            slack = threshold - split.like_probability
            if split.bait:
                slack = min(slack, split.like_probability_with_top_bait - threshold)
            tally.record(slack if split.sandwich_holds else min(slack, -1.0))


class OneTimeUpperCheck(ClaimCheck):
    """Rev(M_T) <= Greedy(TOP) + top bait price."""

    CLAIM = "upper_one_time"
    INSTANCES = 200

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Bound the revenue of each survival-truncated random mechanism."""
        for _ in range(count):
            distribution = random_distribution(rng, max_size=2)
            mechanism = random_mechanism(rng, distribution, max_pages=3, max_items=2)
            truncated = survival_truncation(mechanism, distribution).mechanism
            split = top_split(truncated, distribution)
            bound = (
                greedy_revenue(
                    PricePolicy(prices=tuple(item.price for item in split.expensive)),
                    distribution,
                )
                + split.top_bait_price
            )
            revenue = exact_revenue(truncated, distribution).expected_revenue
            tally.record(bound - revenue)


class SurvivalBookkeepingCheck(ClaimCheck):
    """The truncation keeps exactly the pages seen with probability >= 11/12."""

    CLAIM = "opt_survive_bookkeeping"
    INSTANCES = 200

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Check the cut point and that survival never increases."""
        threshold = settings.SURVIVAL_THRESHOLD
        for _ in range(count):
            distribution = random_distribution(rng)
            mechanism = random_mechanism(rng, distribution, max_pages=5, max_items=2)
            result = survival_truncation(mechanism, distribution)
            survival = result.survival_probabilities
            slack = survival[result.page_count - 1] - threshold
            if result.page_count < len(survival):
                slack = min(slack, threshold - survival[result.page_count])
            if any(b > a + settings.TOLERANCE for a, b in zip(survival, survival[1:])):
                slack = min(slack, -1.0)
            tally.record(slack)


class UtilityStepCheck(ClaimCheck):
    """A utility step reached with probability >= 2/3 is at most 3/2 * Uprice(k)."""

    CLAIM = "uutil_T"
    INSTANCES = 200
    MAX_PAGE = 4
    REACH = 2 / 3

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Record 3/2 * Uprice(k) minus the highest step reached often enough."""
        for _ in range(count):
            distribution = random_distribution(rng)
            k = int(rng.integers(1, self.MAX_PAGE + 1))
            prices = random_prices(rng, distribution, 1.0, k)
            law = page_outcome_distribution(
                MenuPage(prices=tuple(prices)), distribution
            )
            reached = 1.0
            step = 0.0
            for outcome in law.outcomes:
                if reached >= self.REACH - settings.TOLERANCE:
                    step = max(step, outcome.utility)
                reached -= outcome.probability
            tally.record(1.5 * optimal_uniform_price(k, distribution)[1] - step)


class NonDecreasingCheck(ClaimCheck):
    """Bait-only skeletons reach their last page with the DP probability.

    Brackets must chain by delta, so u(t) - t*delta never decreases.
    """

    CLAIM = "sq_non_decreasing"
    INSTANCES = 10

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Replay every skeleton of random instances without expensive items."""
        for _ in range(count):
            distribution = random_distribution(rng, high=20.0)
            k = int(rng.integers(1, 4))
            delta = canonical(float(rng.uniform(1.0, 3.0)))
            for skeleton in synthesize_bait_dp(distribution, k, delta, None):
                uppers = [0.0] + [page.bracket.upper for page in skeleton.pages]
                chained = all(
                    math.isclose(page.bracket.lower, canonical(uppers[t] + delta))
                    for t, page in enumerate(skeleton.pages)
                )
                report = exact_revenue(bait_only_mechanism(skeleton), distribution)
                reached = report.stop_probabilities[skeleton.page_count]
                slack = reached - skeleton.success_probability
                tally.record(slack if chained else min(slack, -1.0))


class SpreadingCheck(ClaimCheck):
    """Pr[v >= p] >= eta * Pr[v >= p - delta] on the support, with 0 < eta <= 1."""

    CLAIM = "spreading_eta"
    INSTANCES = 200

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Record the worst spreading inequality over the support."""
        for _ in range(count):
            distribution = random_distribution(rng)
            delta = canonical(float(rng.uniform(0.5, 20.0)))
            eta = spreading_coefficient(distribution, delta).eta
            tally.record(
                min(
                    distribution.survival(p) - eta * distribution.survival(p - delta)
                    for p in distribution.support
                )
            )


class RatioCheck(ClaimCheck):
    """Synthesized revenue against the brute-force optimum on tiny instances."""

    CLAIM = "synthesis_ratio"
    INSTANCES = 20
    MAX_PAGES = 2
    K = 2

    def process(self, rng: np.random.Generator, count: int, tally: Tally) -> None:
        """Skip instances with zero optimum; flag low ratios, fail very low ones."""
        for _ in range(count):
            distribution = random_distribution(rng, max_size=2)
            delta = canonical(distribution.max_value / 10)
            margin = canonical(delta / 10)
            candidates = sorted(
                {
                    canonical(max(0.0, v - shift))
                    for v in distribution.support
                    for shift in (0.0, delta, delta + margin)
                }
            )
            _, optimum = brute_force_optimal(
                distribution, self.K, delta, candidates, self.MAX_PAGES
            )
            if optimum <= 0:
                continue
            revenue = synthesize(
                distribution, self.K, delta, None, grid_step=delta, margin=margin
            ).report.expected_revenue
            ratio = revenue / optimum
            tally.record(ratio - settings.RATIO_FLOOR, flag=ratio < settings.RATIO_FLAG)


class ClaimSuite:
    """Run every claim check in a fixed order."""

    def __init__(self, seed: int, scale: float = 1.0) -> None:
        """Initialise the suite with a chain of checks.

        Args:
            seed: Root seed; each check derives its own generator from it.
            scale: Fraction of the default instance counts to run.

        """
        self.seed = seed
        self.scale = scale

        checks = [
            UniformMenuHalfCheck(),
            ProphetBoundCheck(),
            GreedyEqualsSpmCheck(),
            UniformSpmCheck(),
            EpsilonDoublingCheck(),
            TwoPriceCheck(),
            UtilityControlCheck(),
            ExactEnumerationCheck(),
            SandwichCheck(),
            OneTimeUpperCheck(),
            SurvivalBookkeepingCheck(),
            UtilityStepCheck(),
            NonDecreasingCheck(),
            SpreadingCheck(),
            RatioCheck(),
        ]
        for check, following in zip(checks, checks[1:]):
            check.set_next(following)
        self.handler = checks[0]

    def run(self) -> list[ClaimResult]:
        """Run the chain and return one result per check, in order."""
        return self.handler.handle(self.seed, self.scale, [])
