import math
from unittest import TestCase

from src.core.numeric import at_least, canonical


class TestCanonical(TestCase):
    def test_should_snap_float_noise_to_the_nine_decimal_grid(self) -> None:
        assert canonical(0.1 + 0.2) == 0.3
        assert canonical(100 - 98.9) == 1.1

    def test_should_turn_negative_zero_into_zero(self) -> None:
        assert math.copysign(1.0, canonical(-0.0)) == 1.0

    def test_should_pass_infinities_through(self) -> None:
        assert canonical(-math.inf) == -math.inf


class TestAtLeast(TestCase):
    def test_should_treat_values_within_half_a_tick_as_equal(self) -> None:
        assert at_least(1.0, 1.0 + 4e-10)
        assert not at_least(1.0, 1.0 + 1e-9)

    def test_should_order_negative_infinity_below_everything(self) -> None:
        assert not at_least(-math.inf, 0.0)
        assert at_least(0.0, -math.inf)
