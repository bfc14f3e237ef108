from unittest import TestCase

import numpy as np

from src.core.exceptions import ProfileLengthError
from src.models import Label, Mechanism, ValuationProfile
from src.services.buyer import simulate
from src.utils.instances import (
    random_distribution,
    random_mechanism,
    staircase_mechanism,
    uniform_page_mechanism,
)


class TestSimulate(TestCase):
    def setUp(self) -> None:
        self.mechanism = uniform_page_mechanism()

    def test_should_buy_the_expensive_item_liked_on_the_second_page(self) -> None:
        trace = simulate(self.mechanism, ValuationProfile(values=(10, 10, 100, 10)))

        assert trace.page_utilities == (1.0, 1.1)
        assert trace.outcome.stop_page == 2
        assert trace.outcome.bought_price == 98.9
        assert trace.outcome.buyer_utility == 1.1

    def test_should_fall_back_to_the_earlier_cheap_item(self) -> None:
        trace = simulate(self.mechanism, ValuationProfile(values=(100, 10, 10, 10)))

        assert trace.outcome.stop_page == 2
        assert trace.outcome.bought_price == 9.0
        assert trace.outcome.buyer_utility == 91.0

    def test_should_continue_when_utility_rises_by_exactly_delta(self) -> None:
        mechanism = Mechanism.from_prices([[9.0], [8.0]], k=1, delta=1.0)

        trace = simulate(mechanism, ValuationProfile(values=(10, 10)))

        assert trace.page_utilities == (1.0, 2.0, float("-inf"))
        assert trace.outcome.stop_page == 3
        assert trace.outcome.bought_price == 8.0

    def test_should_stop_and_buy_nothing_when_every_offer_is_too_dear(self) -> None:
        mechanism = Mechanism.from_prices([[50.0]], k=1, delta=1.0)

        trace = simulate(mechanism, ValuationProfile(values=(10,)))

        assert trace.outcome.stop_page == 1
        assert trace.outcome.bought_price is None
        assert trace.outcome.buyer_utility == 0.0

    def test_should_buy_at_zero_utility(self) -> None:
        mechanism = Mechanism.from_prices([[10.0]], k=1, delta=1.0)

        trace = simulate(mechanism, ValuationProfile(values=(10,)))

        assert trace.outcome.bought_price == 10.0
        assert trace.outcome.buyer_utility == 0.0

    def test_should_report_the_label_of_the_item_bought(self) -> None:
        values = (10, 10, 10, 100) + (10,) * 16
        trace = simulate(staircase_mechanism(), ValuationProfile(values=values))

        assert trace.outcome.stop_page == 3
        assert trace.outcome.bought_price == 96.9
        assert trace.outcome.bought_label == Label.EXPENSIVE

    def test_should_stop_on_the_implicit_empty_page(self) -> None:
        mechanism = Mechanism.from_prices([[0.0]], k=1, delta=1.0)

        trace = simulate(mechanism, ValuationProfile(values=(10,)))

        assert trace.outcome.stop_page == 2
        assert trace.outcome.bought_price == 0.0

    def test_should_reject_a_profile_of_the_wrong_length(self) -> None:
        with self.assertRaises(ProfileLengthError) as ctx:
            simulate(self.mechanism, ValuationProfile(values=(10, 10)))

        assert ctx.exception.expected == 4
        assert ctx.exception.actual == 2

    def test_should_climb_the_whole_staircase_on_all_ten_values(self) -> None:
        trace = simulate(staircase_mechanism(), ValuationProfile(values=(10,) * 20))

        assert trace.page_utilities[:10] == tuple(float(t) for t in range(1, 11))
        assert trace.outcome.stop_page == 11
        assert trace.outcome.bought_price == 0.0
        assert trace.outcome.buyer_utility == 10.0
        assert trace.outcome.bought_label == Label.BAIT

    def test_should_stop_at_once_on_an_empty_mechanism(self) -> None:
        trace = simulate(Mechanism(k=2, delta=1.0), ValuationProfile(values=()))

        assert trace.page_utilities == (float("-inf"),)
        assert trace.outcome.stop_page == 1
        assert trace.outcome.bought_price is None
        assert trace.outcome.buyer_utility == 0.0

    def test_should_buy_a_tied_item_after_the_only_page(self) -> None:
        mechanism = Mechanism.from_prices([[9.0, 9.0]], k=2, delta=1.0)

        trace = simulate(mechanism, ValuationProfile(values=(10, 10)))

        assert trace.page_utilities == (1.0, float("-inf"))
        assert trace.outcome.stop_page == 2
        assert trace.outcome.bought_price == 9.0
        assert trace.best_utilities == (1.0, 1.0)


class TestMonotoneContinuation(TestCase):
    def test_should_never_stop_earlier_after_raising_a_value(self) -> None:
        rng = np.random.default_rng(2)
        for _ in range(200):
            distribution = random_distribution(rng, max_size=3)
            mechanism = random_mechanism(rng, distribution, max_pages=4, max_items=3)
            values = [
                float(v)
                for v in rng.choice(distribution.support, size=mechanism.item_count)
            ]
            trace = simulate(mechanism, ValuationProfile(values=tuple(values)))
            stop = trace.outcome.stop_page
            if stop > mechanism.page_count:
                continue

            start = sum(len(page) for page in mechanism.pages[: stop - 1])
            for index in range(start, start + len(mechanism.pages[stop - 1])):
                raised = values.copy()
                raised[index] += 5.0

                again = simulate(mechanism, ValuationProfile(values=tuple(raised)))

                assert again.outcome.stop_page >= stop
                assert again.page_utilities[stop - 1] >= trace.page_utilities[stop - 1]
