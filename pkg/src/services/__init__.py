from src.services.evaluator import exact_revenue, monte_carlo_revenue
from src.services.storage import Storage
from src.services.synthesis import synthesize
from src.services.verification import run_claim_suite

__all__ = [
    "Storage",
    "exact_revenue",
    "monte_carlo_revenue",
    "run_claim_suite",
    "synthesize",
]
