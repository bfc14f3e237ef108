from src.models.bait import (
    BaitPage,
    BaitSkeleton,
    ExpensiveItem,
    PricePolicy,
    SpreadingCertificate,
    TopSplit,
    TwoPricePage,
    UtilityBracket,
)
from src.models.domain import (
    NO_OFFER,
    BuyerTrace,
    FiniteDistribution,
    Label,
    Mechanism,
    MenuPage,
    Offer,
    PageOutcome,
    PageOutcomeDistribution,
    PurchaseOutcome,
    ValuationProfile,
    Violation,
)
from src.models.files import DistributionFile, MechanismFile
from src.models.reports import (
    CandidateRow,
    ClaimResult,
    MonteCarloEstimate,
    OracleRow,
    RevenueReport,
    RunConfig,
    SynthesisResult,
    TruncationResult,
)

__all__ = [
    "NO_OFFER",
    "BaitPage",
    "BaitSkeleton",
    "BuyerTrace",
    "CandidateRow",
    "ClaimResult",
    "DistributionFile",
    "ExpensiveItem",
    "FiniteDistribution",
    "Label",
    "Mechanism",
    "MechanismFile",
    "MenuPage",
    "MonteCarloEstimate",
    "Offer",
    "OracleRow",
    "PageOutcome",
    "PageOutcomeDistribution",
    "PricePolicy",
    "PurchaseOutcome",
    "RevenueReport",
    "RunConfig",
    "SpreadingCertificate",
    "SynthesisResult",
    "TopSplit",
    "TruncationResult",
    "TwoPricePage",
    "UtilityBracket",
    "ValuationProfile",
    "Violation",
]
