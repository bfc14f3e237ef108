import math

import numpy as np

from src.models import FiniteDistribution, Mechanism, ValuationProfile, Violation

PROBABILITY_SUM_TOLERANCE = 1e-12
SEED_MASK = (1 << 64) - 1


def validate(mechanism: Mechanism, distribution: FiniteDistribution) -> list[Violation]:
    """Check every core model invariant.

    Args:
        mechanism: The mechanism to check.
        distribution: The value prior the mechanism is evaluated against.

    Returns:
        One violation per broken rule; an empty list means the inputs are valid.

    """
    return validate_distribution(distribution) + _mechanism_violations(mechanism)


def validate_distribution(distribution: FiniteDistribution) -> list[Violation]:
    """Check the value prior on its own, for commands that take no mechanism."""
    violations = []
    total = math.fsum(distribution.probs)
    if abs(total - 1.0) > PROBABILITY_SUM_TOLERANCE:
        violations.append(
            Violation(field="distribution.probs", rule=f"must sum to 1, got {total!r}")
        )
    violations.extend(
        Violation(field=f"distribution.probs[{i}]", rule="must be > 0")
        for i, prob in enumerate(distribution.probs)
        if not prob > 0
    )
    violations.extend(
        Violation(field=f"distribution.support[{i}]", rule="must be finite and >= 0")
        for i, value in enumerate(distribution.support)
        if not (math.isfinite(value) and value >= 0)
    )
    if any(b <= a for a, b in zip(distribution.support, distribution.support[1:])):
        violations.append(
            Violation(field="distribution.support", rule="must be strictly ascending")
        )
    return violations


def _mechanism_violations(mechanism: Mechanism) -> list[Violation]:
    violations = []
    if mechanism.k < 1:
        violations.append(Violation(field="k", rule="page capacity must be >= 1"))
    if not (math.isfinite(mechanism.delta) and mechanism.delta > 0):
        violations.append(Violation(field="delta", rule="search cost must be > 0"))

    for t, page in enumerate(mechanism.pages):
        if len(page) > mechanism.k:
            violations.append(
                Violation(
                    field=f"pages[{t}]",
                    rule=f"page capacity: {len(page)} prices exceed k={mechanism.k}",
                )
            )
        violations.extend(
            Violation(field=f"pages[{t}][{i}]", rule="price must be finite and >= 0")
            for i, price in enumerate(page.prices)
            if not (math.isfinite(price) and price >= 0)
        )
        if page.labels is not None and len(page.labels) != len(page):
            violations.append(
                Violation(field=f"labels[{t}]", rule="must label every price")
            )

    if mechanism.supply is not None:
        if mechanism.supply < 0:
            violations.append(Violation(field="supply", rule="must be >= 0"))
        elif mechanism.item_count > mechanism.supply:
            violations.append(
                Violation(
                    field="supply",
                    rule=(
                        f"{mechanism.item_count} prices exceed supply "
                        f"m={mechanism.supply}"
                    ),
                )
            )
    return violations


def make_rng(seed: int) -> np.random.Generator:
    """Generator for a seed masked to 64 bits."""
    return np.random.default_rng(seed & SEED_MASK)


def draw_values(
    distribution: FiniteDistribution,
    rng: np.random.Generator,
    shape: int | tuple[int, ...],
) -> np.ndarray:
    """Draw i.i.d. values from the prior by inverting its CDF."""
    cumulative = np.cumsum(distribution.probs)
    indices = np.searchsorted(cumulative, rng.random(shape), side="right")
    support = np.asarray(distribution.support, dtype=float)
    return support[np.minimum(indices, len(support) - 1)]


def sample_profile(
    mechanism: Mechanism, distribution: FiniteDistribution, seed: int
) -> ValuationProfile:
    """Draw one valuation profile aligned with the mechanism's offers."""
    values = draw_values(distribution, make_rng(seed), mechanism.item_count)
    return ValuationProfile(values=tuple(float(value) for value in values))
