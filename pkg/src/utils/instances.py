import numpy as np

from src.core.numeric import canonical
from src.models import FiniteDistribution, Label, Mechanism

LOW_VALUE = 1.0
HIGH_VALUE = 100.0


def example_distribution() -> FiniteDistribution:
    """Values are 10 with probability 0.9 and 100 otherwise."""
    return FiniteDistribution(support=(10.0, 100.0), probs=(0.9, 0.1))


def uniform_page_mechanism() -> Mechanism:
    """Two pages of two items at 9, then at 98.9; k=2, delta=1."""
    return Mechanism.from_prices([[9.0, 9.0], [98.9, 98.9]], k=2, delta=1.0)


def staircase_mechanism() -> Mechanism:
    """Ten pages, each with one bait at 10 - t and one expensive item at 98.9 - t."""
    pages = [[canonical(10.0 - t), canonical(98.9 - t)] for t in range(1, 11)]
    labels = [[Label.BAIT, Label.EXPENSIVE] for _ in pages]
    return Mechanism.from_prices(pages, k=2, delta=1.0, labels=labels)


def random_distribution(
    rng: np.random.Generator,
    min_size: int = 2,
    max_size: int = 4,
    low: float = LOW_VALUE,
    high: float = HIGH_VALUE,
) -> FiniteDistribution:
    """Log-uniform support values in [low, high] with Dirichlet probabilities."""
    size = int(rng.integers(min_size, max_size + 1))
    support: set[float] = set()
    while len(support) < size:
        support.add(canonical(float(np.exp(rng.uniform(np.log(low), np.log(high))))))

    probs = rng.dirichlet(np.ones(size))
    # Shift rounding residue onto the largest atom so the sum is exactly 1.
    probs = np.round(probs, 12)
    probs[np.argmax(probs)] += 1.0 - probs.sum()
    return FiniteDistribution(
        support=tuple(sorted(support)), probs=tuple(float(p) for p in probs)
    )


def random_prices(
    rng: np.random.Generator,
    distribution: FiniteDistribution,
    delta: float,
    count: int,
) -> list[float]:
    """Prices mixing support values, one-step discounts and uniform draws."""
    support = distribution.support
    anchors = [*support, *(max(0.0, v - delta) for v in support)]
    prices = []
    for _ in range(count):
        if rng.random() < 0.7:  # noqa: PLR2004
            prices.append(canonical(float(rng.choice(anchors))))
        else:
            draw = rng.uniform(0.0, distribution.max_value * 1.1)
            prices.append(canonical(float(draw)))
    return prices


def random_mechanism(
    rng: np.random.Generator,
    distribution: FiniteDistribution,
    max_pages: int = 3,
    max_items: int = 2,
    delta: float | None = None,
) -> Mechanism:
    """Unlabelled mechanism with up to max_pages pages of up to max_items prices."""
    delta = delta if delta is not None else canonical(float(rng.uniform(0.5, 5.0)))
    pages = [
        random_prices(rng, distribution, delta, int(rng.integers(1, max_items + 1)))
        for _ in range(int(rng.integers(1, max_pages + 1)))
    ]
    return Mechanism.from_prices(pages, k=max_items, delta=delta)
