from collections.abc import Callable, Iterable

from src.models import FiniteDistribution, PricePolicy

TIE_TOLERANCE = 1e-12


def uniform_price_revenue(
    ell: int, price: float, distribution: FiniteDistribution
) -> float:
    """Revenue of posting one price on ell items: (1 - Pr[v < p]^ell) * p.

    A buyer whose value equals the price buys, hence the strict CDF.
    """
    return (1.0 - distribution.cdf_strict(price) ** ell) * price


def _argmax_on_support(
    distribution: FiniteDistribution, revenue_of: Callable[[float], float]
) -> tuple[float, float]:
    # Ascending scan with a strict improvement test keeps the lower price on ties.
    best_price = distribution.support[0]
    best_revenue = revenue_of(best_price)
    for price in distribution.support[1:]:
        revenue = revenue_of(price)
        if revenue > best_revenue + TIE_TOLERANCE:
            best_price, best_revenue = price, revenue
    return best_price, best_revenue


def optimal_uniform_price(
    ell: int, distribution: FiniteDistribution
) -> tuple[float, float]:
    """Best uniform price for ell items and its revenue.

    An optimal price always lies on the support: between support points the sale
    probability is flat while the price grows.
    """
    return _argmax_on_support(
        distribution, lambda price: uniform_price_revenue(ell, price, distribution)
    )


def greedy_revenue(menu: PricePolicy, distribution: FiniteDistribution) -> float:
    """Expected revenue from a greedy buyer shown the menu in descending order."""
    return spm_revenue(sorted(menu.prices, reverse=True), distribution)


def spm_revenue(prices: Iterable[float], distribution: FiniteDistribution) -> float:
    """Revenue of offering one item to i.i.d. buyers at the given prices, in order."""
    revenue = 0.0
    unsold = 1.0
    for price in prices:
        sells = distribution.survival(price)
        revenue += unsold * sells * price
        unsold *= 1.0 - sells
    return revenue


def optimal_spm(n: int, distribution: FiniteDistribution) -> tuple[PricePolicy, float]:
    """Optimal sequential posted pricing over n buyers by backward induction.

    Returns:
        The offered price sequence (first buyer first) and its revenue.

    """
    continuation = 0.0
    stage_prices: list[float] = []
    for _ in range(n):
        tail = continuation
        price, continuation = _argmax_on_support(
            distribution,
            lambda p, tail=tail: distribution.survival(p) * p
            + distribution.cdf_strict(p) * tail,
        )
        stage_prices.append(price)

    # The last stage solved is the first buyer's price.
    return PricePolicy(prices=tuple(reversed(stage_prices))), continuation


def optimal_uspm(n: int, distribution: FiniteDistribution) -> tuple[float, float]:
    """Optimal sequential posted pricing when every buyer sees the same price."""
    return _argmax_on_support(
        distribution, lambda price: spm_revenue([price] * n, distribution)
    )
