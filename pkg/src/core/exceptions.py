from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from src.models import Violation


class BaseError(Exception):
    """Base exception for all baitmenu errors."""


class InputError(BaseError):
    """Raised when user supplied data cannot be used."""


class FileParsingError(InputError):
    """Raised when a JSON input file cannot be parsed."""

    INVALID_JSON = "File is not valid JSON"
    INVALID_FORMAT = "Invalid data format"
    UNREADABLE = "File could not be read"

    def __init__(
        self,
        path: Path,
        message: str,
        original_error: Exception,
        field: str | None = None,
    ) -> None:
        """Initialise file parsing error.

        Args:
            path: The file that failed to parse.
            message: Error description.
            original_error: The original exception that was caught.
            field: Dotted location of the offending field, when known.

        """
        self.path = path
        self.field = field
        self.original_error = original_error
        location = f"{path}" if field is None else f"{path}: field '{field}'"
        super().__init__(f"{message} ({location})")


class DistributionParsingError(FileParsingError):
    """Raised when a distribution file cannot be parsed."""


class MechanismParsingError(FileParsingError):
    """Raised when a mechanism file cannot be parsed."""


class InvalidMechanismError(InputError):
    """Raised when a mechanism or distribution breaks a model invariant."""

    def __init__(self, violations: list["Violation"]) -> None:
        """Initialise invalid mechanism error.

        Args:
            violations: Every rule the inputs break.

        """
        self.violations = violations
        details = "; ".join(f"{v.field}: {v.rule}" for v in violations)
        super().__init__(f"Invalid inputs: {details}")


class ProfileLengthError(InputError):
    """Raised when a valuation profile does not match the mechanism."""

    def __init__(self, expected: int, actual: int) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"Valuation profile has {actual} entries, mechanism offers {expected} items"
        )


class SearchSpaceError(InputError):
    """Raised when an exhaustive search would exceed its size cap."""

    def __init__(self, size: float, bound: int) -> None:
        self.size = size
        self.bound = bound
        super().__init__(
            f"Search space of {size:.3g} layouts exceeds the bound of {bound}"
        )


class ReductionError(BaseError):
    """Raised when the two-price page reduction finds no feasible page.

    The reduction is guaranteed to succeed, so this signals a bug rather than
    bad input.
    """


class ClaimViolationError(BaseError):
    """Raised when the claim suite finds at least one violation."""

    def __init__(self, claims: list[str]) -> None:
        self.claims = claims
        super().__init__(f"Claims violated: {', '.join(claims)}")
