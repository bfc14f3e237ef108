import math
from unittest import TestCase
from unittest.mock import Mock

import numpy as np

from src.models import ClaimResult
from src.utils.claims import (
    ClaimSuite,
    EpsilonDoublingCheck,
    ProphetBoundCheck,
    SpreadingCheck,
    Tally,
    TwoPriceCheck,
)

CLAIMS = [
    "umenu_half",
    "spm_le_2uprice",
    "greedy_eq_spm",
    "uspm_eq_uprice",
    "eps_to_2eps",
    "baits_2_prices",
    "utility_control",
    "exact_eq_enumeration",
    "top_split_sandwich",
    "upper_one_time",
    "opt_survive_bookkeeping",
    "uutil_T",
    "sq_non_decreasing",
    "spreading_eta",
    "synthesis_ratio",
]


class TestTally(TestCase):
    def setUp(self) -> None:
        self.tally = Tally(claim="demo")

    def test_should_report_zero_slack_when_nothing_was_checked(self) -> None:
        result = self.tally.result()

        assert result.instances == 0
        assert result.worst_slack == 0.0
        assert result.passed

    def test_should_count_negative_slack_as_a_violation(self) -> None:
        self.tally.record(0.5)
        self.tally.record(-0.25)

        result = self.tally.result()

        assert result.instances == 2
        assert result.violations == 1
        assert result.worst_slack == -0.25
        assert not result.passed

    def test_should_tolerate_rounding_noise(self) -> None:
        self.tally.record(-1e-12)
        assert self.tally.result().violations == 0

    def test_should_count_flags_separately(self) -> None:
        self.tally.record(0.1, flag=True)

        result = self.tally.result()

        assert result.flagged == 1
        assert result.violations == 0


class TestClaimCheck(TestCase):
    def setUp(self) -> None:
        self.check = EpsilonDoublingCheck()

    def test_should_hold_for_random_loss_sequences(self) -> None:
        tally = Tally(claim=self.check.CLAIM)

        self.check.process(np.random.default_rng(0), 500, tally)

        assert tally.instances == 500
        assert tally.violations == 0

    def test_should_properly_chain_to_next_check(self) -> None:
        next_check = Mock()
        next_check.handle.return_value = ["done"]
        self.check.set_next(next_check)

        results = self.check.handle(7, 0.01, [])

        assert results == ["done"]
        passed = next_check.handle.call_args.args
        assert passed[:2] == (7, 0.01)
        assert [result.claim for result in passed[2]] == ["eps_to_2eps"]

    def test_should_record_every_requested_two_price_page(self) -> None:
        tally = Tally(claim=TwoPriceCheck.CLAIM)

        TwoPriceCheck().process(np.random.default_rng(1), 50, tally)

        assert tally.instances == 50
        assert tally.violations == 0

    def test_should_run_at_least_one_instance(self) -> None:
        results = ProphetBoundCheck().handle(0, 0.0, [])
        assert results[0].instances == 1

    def test_should_be_deterministic_for_a_seed(self) -> None:
        first = SpreadingCheck().handle(3, 0.1, [])
        second = SpreadingCheck().handle(3, 0.1, [])
        assert first == second


class TestClaimSuite(TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.results: list[ClaimResult] = ClaimSuite(seed=0).run()
        cls.by_claim = {result.claim: result for result in cls.results}

    def test_should_run_every_claim_in_order(self) -> None:
        assert [result.claim for result in self.results] == CLAIMS

    def test_should_report_a_finite_slack_per_claim(self) -> None:
        for result in self.results:
            assert math.isfinite(result.worst_slack)

    def test_should_find_no_violation_of_any_claim(self) -> None:
        for result in self.results:
            assert result.passed, result.claim

    def test_should_check_the_default_instance_counts(self) -> None:
        counts = {
            "umenu_half": 200,
            "spm_le_2uprice": 200,
            "eps_to_2eps": 10_000,
            "baits_2_prices": 1000,
            "exact_eq_enumeration": 100,
            "synthesis_ratio": 20,
        }
        for claim, count in counts.items():
            assert self.by_claim[claim].instances == count, claim

    def test_should_check_greedy_menus_exactly(self) -> None:
        assert self.by_claim["greedy_eq_spm"].worst_slack >= -1e-9
        assert self.by_claim["uspm_eq_uprice"].worst_slack >= -1e-9
