import math

DECIMALS = 9
HALF_TICK = 5e-10

NEG_INF = -math.inf


def canonical(value: float) -> float:
    """Snap a money amount to the 1e-9 grid used for all utility comparisons."""
    if math.isinf(value):
        return value
    return round(value, DECIMALS) + 0.0


def at_least(left: float, right: float) -> bool:
    """Compare two canonical amounts, treating values within half a tick as equal."""
    if math.isinf(left) or math.isinf(right):
        return left >= right
    return left >= right - HALF_TICK
