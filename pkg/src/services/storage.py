import json
from collections.abc import Iterable
from pathlib import Path

import pandas as pd
from loguru import logger
from pydantic import BaseModel, ValidationError

from src.core.exceptions import (
    DistributionParsingError,
    FileParsingError,
    MechanismParsingError,
)
from src.models import DistributionFile, FiniteDistribution, Mechanism, MechanismFile


def _error_field(error: ValidationError) -> str | None:
    errors = error.errors()
    if not errors or not errors[0]["loc"]:
        return None
    return ".".join(str(part) for part in errors[0]["loc"])


def _read_json(path: Path, error_type: type[FileParsingError]) -> object:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as error:
        raise error_type(path, error_type.UNREADABLE, error) from error
    try:
        return json.loads(text)
    except json.JSONDecodeError as error:
        raise error_type(path, error_type.INVALID_JSON, error) from error


class Distributions:
    """Distribution JSON files."""

    def load(self, path: Path) -> FiniteDistribution:
        """Read a distribution file.

        Args:
            path: The JSON file to read.

        Returns:
            The parsed value prior. Model invariants are not checked here.

        Raises:
            DistributionParsingError: If the file is unreadable, not JSON or
                does not match the schema.

        """
        data = _read_json(path, DistributionParsingError)
        try:
            return DistributionFile.model_validate(data).to_domain()
        except ValidationError as error:
            raise DistributionParsingError(
                path,
                DistributionParsingError.INVALID_FORMAT,
                error,
                field=_error_field(error),
            ) from error

    def dump(self, distribution: FiniteDistribution, path: Path) -> None:
        """Write a distribution file, creating parent directories."""
        _write_model(DistributionFile.from_domain(distribution), path)


class Mechanisms:
    """Mechanism JSON files."""

    def load(self, path: Path) -> Mechanism:
        """Read a mechanism file.

        Args:
            path: The JSON file to read.

        Returns:
            The parsed mechanism. Model invariants are not checked here.

        Raises:
            MechanismParsingError: If the file is unreadable, not JSON or does
                not match the schema.

        """
        data = _read_json(path, MechanismParsingError)
        try:
            return MechanismFile.model_validate(data).to_domain()
        except ValidationError as error:
            raise MechanismParsingError(
                path,
                MechanismParsingError.INVALID_FORMAT,
                error,
                field=_error_field(error),
            ) from error
        except ValueError as error:
            raise MechanismParsingError(
                path, MechanismParsingError.INVALID_FORMAT, error, field="labels"
            ) from error

    def dump(self, mechanism: Mechanism, path: Path) -> None:
        """Write a mechanism file, creating parent directories."""
        _write_model(MechanismFile.from_domain(mechanism), path)


def _write_model(model: BaseModel, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.debug("Wrote {}", path)


def _frame(rows: Iterable[BaseModel], columns: list[str]) -> pd.DataFrame:
    return pd.DataFrame(
        [row.model_dump(include=set(columns)) for row in rows], columns=columns
    )


def _write_frame(frame: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    logger.debug("Wrote {} rows to {}", len(frame), path)


def write_table(rows: Iterable[BaseModel], path: Path, columns: list[str]) -> None:
    """Write models as a CSV table with a fixed header."""
    _write_frame(_frame(rows, columns), path)


def write_records(
    records: Iterable[dict[str, object]], path: Path, columns: list[str]
) -> None:
    """Write plain records as a CSV table with a fixed header."""
    _write_frame(pd.DataFrame(list(records), columns=columns), path)


def format_table(rows: Iterable[BaseModel], columns: list[str]) -> str:
    """Render models as CSV text with a fixed header."""
    return _frame(rows, columns).to_csv(index=False)


class Storage:
    """Entry point for every file the command line reads or writes."""

    def __init__(self) -> None:
        """Initialise the storage with its resources."""
        self.distributions = Distributions()
        self.mechanisms = Mechanisms()
