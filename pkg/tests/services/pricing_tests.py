from itertools import product
from unittest import TestCase

import numpy as np

from src.models import FiniteDistribution, PricePolicy
from src.services.pricing import (
    greedy_revenue,
    optimal_spm,
    optimal_uniform_price,
    optimal_uspm,
    spm_revenue,
    uniform_price_revenue,
)
from src.services.verification import exhaustive_greedy
from src.utils.instances import example_distribution, random_distribution


class TestUniformPricing(TestCase):
    def setUp(self) -> None:
        self.distribution = example_distribution()

    def test_should_price_two_items_at_the_top_value(self) -> None:
        assert abs(uniform_price_revenue(2, 100.0, self.distribution) - 19.0) < 1e-9

    def test_should_earn_nothing_at_zero_or_above_the_support(self) -> None:
        assert uniform_price_revenue(1, 0.0, self.distribution) == 0.0
        assert uniform_price_revenue(5, 101.0, self.distribution) == 0.0

    def test_should_pick_the_low_value_for_a_single_item(self) -> None:
        price, revenue = optimal_uniform_price(1, self.distribution)
        assert price == 10.0
        assert abs(revenue - 10.0) < 1e-9

    def test_should_pick_the_high_value_for_two_items(self) -> None:
        price, revenue = optimal_uniform_price(2, self.distribution)
        assert price == 100.0
        assert abs(revenue - 19.0) < 1e-9

    def test_should_price_a_point_mass_at_its_value(self) -> None:
        for ell in (1, 3, 7):
            assert optimal_uniform_price(ell, FiniteDistribution.point_mass(4.0)) == (
                4.0,
                4.0,
            )


class TestGreedyRevenue(TestCase):
    def setUp(self) -> None:
        self.distribution = example_distribution()

    def test_should_offer_the_dearest_item_first(self) -> None:
        menu = PricePolicy(prices=(10.0, 100.0))
        assert abs(greedy_revenue(menu, self.distribution) - 19.0) < 1e-9

    def test_should_always_sell_below_the_support(self) -> None:
        assert greedy_revenue(PricePolicy(prices=(7.0,)), self.distribution) == 7.0

    def test_should_earn_nothing_from_an_empty_menu(self) -> None:
        assert greedy_revenue(PricePolicy(), self.distribution) == 0.0


class TestSequentialPostedPricing(TestCase):
    def test_should_solve_two_buyers_by_backward_induction(self) -> None:
        policy, revenue = optimal_spm(2, example_distribution())

        assert abs(revenue - 19.0) < 1e-9
        assert policy.prices == (100.0, 10.0)

    def test_should_match_uniform_pricing_for_one_buyer(self) -> None:
        rng = np.random.default_rng(2)
        for _ in range(20):
            distribution = random_distribution(rng)
            _, revenue = optimal_spm(1, distribution)
            assert abs(revenue - optimal_uniform_price(1, distribution)[1]) < 1e-9

    def test_should_match_exhaustive_price_triples(self) -> None:
        distribution = FiniteDistribution(
            support=(1.0, 2.0, 3.0), probs=(1 / 3, 1 / 3, 1 / 3)
        )

        best = max(
            spm_revenue(prices, distribution)
            for prices in product(distribution.support, repeat=3)
        )

        assert abs(optimal_spm(3, distribution)[1] - best) < 1e-9

    def test_should_equal_the_best_greedy_menu(self) -> None:
        rng = np.random.default_rng(4)
        for _ in range(20):
            distribution = random_distribution(rng, max_size=3)
            for n in range(1, 5):
                spm = optimal_spm(n, distribution)[1]
                assert abs(exhaustive_greedy(n, distribution) - spm) < 1e-9

    def test_should_stay_within_twice_uniform_pricing(self) -> None:
        rng = np.random.default_rng(6)
        for _ in range(20):
            distribution = random_distribution(rng)
            for n in range(1, 9):
                spm = optimal_spm(n, distribution)[1]
                assert spm <= 2 * optimal_uniform_price(n, distribution)[1] + 1e-9


class TestUniformSequentialPostedPricing(TestCase):
    def test_should_match_uniform_pricing_on_the_worked_example(self) -> None:
        price, revenue = optimal_uspm(2, example_distribution())
        assert price == 100.0
        assert abs(revenue - 19.0) < 1e-9

    def test_should_sell_a_point_mass_at_its_value(self) -> None:
        assert optimal_uspm(1, FiniteDistribution.point_mass(3.0)) == (3.0, 3.0)

    def test_should_equal_uniform_pricing_on_random_priors(self) -> None:
        rng = np.random.default_rng(8)
        for _ in range(30):
            distribution = random_distribution(rng)
            for n in range(1, 9):
                uspm_price, uspm = optimal_uspm(n, distribution)
                uprice_price, uprice = optimal_uniform_price(n, distribution)
                assert abs(uspm - uprice) < 1e-9
                if abs(uspm_price - uprice_price) > 0:
                    # Distinct prices are only allowed on an exact revenue tie.
                    assert abs(
                        uniform_price_revenue(n, uspm_price, distribution) - uprice
                    ) < 1e-9
