from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from src.models.domain import FiniteDistribution, Label, Mechanism, MenuPage

UNBOUNDED = "inf"


class DistributionFile(BaseModel):
    """Wire schema of a distribution JSON file."""

    model_config = ConfigDict(extra="forbid")

    support: list[float]
    probs: list[float]

    def to_domain(self) -> FiniteDistribution:
        """Convert to the value prior."""
        return FiniteDistribution(support=tuple(self.support), probs=tuple(self.probs))

    @classmethod
    def from_domain(cls, distribution: FiniteDistribution) -> "DistributionFile":
        """Mirror a value prior in file form."""
        return cls(support=list(distribution.support), probs=list(distribution.probs))


class MechanismFile(BaseModel):
    """Wire schema of a mechanism JSON file."""

    model_config = ConfigDict(extra="forbid")

    k: int = Field(ge=1)
    delta: float
    supply: int | Literal["inf"] = UNBOUNDED
    pages: list[list[float]]
    labels: list[list[Label]] | None = None

    def to_domain(self) -> Mechanism:
        """Convert to a mechanism, rejecting labels that do not cover every page."""
        if self.labels is not None and len(self.labels) != len(self.pages):
            error_message = "labels must list one entry per page"
            raise ValueError(error_message)

        pages = tuple(
            MenuPage(
                prices=tuple(prices),
                labels=None if self.labels is None else tuple(self.labels[index]),
            )
            for index, prices in enumerate(self.pages)
        )
        supply = None if self.supply == UNBOUNDED else self.supply
        return Mechanism(k=self.k, delta=self.delta, supply=supply, pages=pages)

    @classmethod
    def from_domain(cls, mechanism: Mechanism) -> "MechanismFile":
        """Mirror a mechanism in file form, writing labels only when present."""
        labels = None
        if mechanism.has_labels:
            labels = [
                [page.label_at(i) or Label.BAIT for i in range(len(page))]
                for page in mechanism.pages
            ]
        return cls(
            k=mechanism.k,
            delta=mechanism.delta,
            supply=UNBOUNDED if mechanism.supply is None else mechanism.supply,
            pages=[list(page.prices) for page in mechanism.pages],
            labels=labels,
        )
