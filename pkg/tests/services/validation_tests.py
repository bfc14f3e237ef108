from unittest import TestCase

import numpy as np

from src.models import FiniteDistribution, Mechanism
from src.services.validation import draw_values, make_rng, sample_profile, validate
from src.utils.instances import example_distribution, uniform_page_mechanism


class TestValidate(TestCase):
    def setUp(self) -> None:
        self.distribution = example_distribution()

    def test_should_accept_the_worked_example(self) -> None:
        assert validate(uniform_page_mechanism(), self.distribution) == []

    def test_should_name_the_page_that_exceeds_capacity(self) -> None:
        mechanism = Mechanism.from_prices([[1.0], [1.0, 2.0, 3.0]], k=2, delta=1.0)

        violations = validate(mechanism, self.distribution)

        assert [v.field for v in violations] == ["pages[1]"]
        assert violations[0].rule == "page capacity: 3 prices exceed k=2"

    def test_should_flag_negative_and_infinite_prices(self) -> None:
        mechanism = Mechanism.from_prices([[-1.0, float("inf")]], k=2, delta=1.0)

        fields = [v.field for v in validate(mechanism, self.distribution)]

        assert fields == ["pages[0][0]", "pages[0][1]"]

    def test_should_flag_a_non_positive_search_cost(self) -> None:
        mechanism = Mechanism.from_prices([[1.0]], k=1, delta=0.0)
        assert [v.field for v in validate(mechanism, self.distribution)] == ["delta"]

    def test_should_flag_more_items_than_supply(self) -> None:
        mechanism = Mechanism.from_prices([[1.0, 1.0], [2.0]], k=2, delta=1.0, supply=2)
        assert [v.field for v in validate(mechanism, self.distribution)] == ["supply"]

    def test_should_flag_probabilities_that_do_not_sum_to_one(self) -> None:
        distribution = FiniteDistribution(support=(1.0, 2.0), probs=(0.5, 0.4))
        fields = [v.field for v in validate(uniform_page_mechanism(), distribution)]
        assert fields == ["distribution.probs"]

    def test_should_flag_unsorted_support_and_zero_mass(self) -> None:
        distribution = FiniteDistribution(
            support=(2.0, 1.0, 3.0), probs=(0.5, 0.5, 0.0)
        )

        fields = {v.field for v in validate(uniform_page_mechanism(), distribution)}

        assert fields == {"distribution.support", "distribution.probs[2]"}


class TestSampling(TestCase):
    def test_should_only_draw_support_values(self) -> None:
        values = draw_values(example_distribution(), make_rng(3), (1000, 4))
        assert set(np.unique(values)) <= {10.0, 100.0}
        assert values.shape == (1000, 4)

    def test_should_match_the_prior_frequencies(self) -> None:
        values = draw_values(example_distribution(), make_rng(0), 100_000)
        assert abs((values == 100.0).mean() - 0.1) < 0.005

    def test_should_draw_the_same_profile_for_the_same_seed(self) -> None:
        mechanism = uniform_page_mechanism()
        first = sample_profile(mechanism, example_distribution(), seed=7)
        second = sample_profile(mechanism, example_distribution(), seed=7)
        assert first == second
        assert len(first.values) == mechanism.item_count
