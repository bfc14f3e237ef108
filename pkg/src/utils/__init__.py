from src.utils.claims import ClaimSuite
from src.utils.instances import example_distribution, random_distribution

__all__ = ["ClaimSuite", "example_distribution", "random_distribution"]
