import json
import tempfile
from pathlib import Path
from unittest import TestCase

import pandas as pd

from src.core.exceptions import DistributionParsingError, MechanismParsingError
from src.models import CandidateRow, FiniteDistribution, Label
from src.services.storage import Storage, format_table, write_table
from src.utils.instances import example_distribution, staircase_mechanism

CANDIDATE_COLUMNS = ["mechanism_id", "pages", "revenue"]


class TestDistributions(TestCase):
    def setUp(self) -> None:
        self.directory = tempfile.TemporaryDirectory()
        self.root = Path(self.directory.name)
        self.storage = Storage()

    def tearDown(self) -> None:
        self.directory.cleanup()

    def test_should_load_a_distribution_file(self) -> None:
        path = self.root / "f.json"
        path.write_text(json.dumps({"support": [10, 100], "probs": [0.9, 0.1]}))

        distribution = self.storage.distributions.load(path)

        assert distribution == example_distribution()

    def test_should_write_a_file_it_can_read_back(self) -> None:
        path = self.root / "nested" / "f.json"

        self.storage.distributions.dump(FiniteDistribution.point_mass(3.0), path)

        loaded = self.storage.distributions.load(path)
        assert loaded == FiniteDistribution.point_mass(3.0)

    def test_should_raise_parsing_error_when_json_invalid(self) -> None:
        path = self.root / "f.json"
        path.write_text("{not json")

        with self.assertRaises(DistributionParsingError) as ctx:
            self.storage.distributions.load(path)

        assert DistributionParsingError.INVALID_JSON in str(ctx.exception)
        assert ctx.exception.path == path

    def test_should_name_the_offending_field(self) -> None:
        path = self.root / "f.json"
        path.write_text(json.dumps({"support": [1], "probs": ["lots"]}))

        with self.assertRaises(DistributionParsingError) as ctx:
            self.storage.distributions.load(path)

        assert ctx.exception.field == "probs.0"
        assert "field 'probs.0'" in str(ctx.exception)

    def test_should_reject_misaligned_lengths(self) -> None:
        path = self.root / "f.json"
        path.write_text(json.dumps({"support": [1, 2], "probs": [1.0]}))

        with self.assertRaises(DistributionParsingError):
            self.storage.distributions.load(path)

    def test_should_raise_parsing_error_when_file_missing(self) -> None:
        with self.assertRaises(DistributionParsingError) as ctx:
            self.storage.distributions.load(self.root / "missing.json")

        assert DistributionParsingError.UNREADABLE in str(ctx.exception)


class TestMechanisms(TestCase):
    def setUp(self) -> None:
        self.directory = tempfile.TemporaryDirectory()
        self.root = Path(self.directory.name)
        self.storage = Storage()

    def tearDown(self) -> None:
        self.directory.cleanup()

    def test_should_keep_labels_and_unbounded_supply(self) -> None:
        path = self.root / "m.json"

        self.storage.mechanisms.dump(staircase_mechanism(), path)
        data = json.loads(path.read_text())
        mechanism = self.storage.mechanisms.load(path)

        assert data["supply"] == "inf"
        assert data["labels"][0] == ["bait", "expensive"]
        assert mechanism.supply is None
        assert mechanism.pages[0].labels == (Label.BAIT, Label.EXPENSIVE)

    def test_should_reject_labels_for_missing_pages(self) -> None:
        path = self.root / "m.json"
        path.write_text(
            json.dumps(
                {"k": 1, "delta": 1.0, "pages": [[1], [2]], "labels": [["bait"]]}
            )
        )

        with self.assertRaises(MechanismParsingError) as ctx:
            self.storage.mechanisms.load(path)

        assert ctx.exception.field == "labels"

    def test_should_name_a_bad_page_capacity(self) -> None:
        path = self.root / "m.json"
        path.write_text(json.dumps({"k": 0, "delta": 1.0, "pages": []}))

        with self.assertRaises(MechanismParsingError) as ctx:
            self.storage.mechanisms.load(path)

        assert ctx.exception.field == "k"


class TestTables(TestCase):
    def setUp(self) -> None:
        self.rows = [
            CandidateRow(mechanism_id="a", pages=1, revenue=2.5, sale_prob=1.0),
            CandidateRow(mechanism_id="b", pages=3, revenue=4.0, sale_prob=0.5),
        ]

    def test_should_write_the_fixed_header_in_order(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "out" / "candidates.csv"

            write_table(self.rows, path, CANDIDATE_COLUMNS)
            frame = pd.read_csv(path)

        assert list(frame.columns) == CANDIDATE_COLUMNS
        assert list(frame["mechanism_id"]) == ["a", "b"]

    def test_should_format_rows_as_csv_text(self) -> None:
        text = format_table(self.rows, CANDIDATE_COLUMNS)
        assert text.splitlines() == ["mechanism_id,pages,revenue", "a,1,2.5", "b,3,4.0"]

    def test_should_write_only_the_header_for_no_rows(self) -> None:
        header = format_table([], CANDIDATE_COLUMNS).strip()
        assert header == "mechanism_id,pages,revenue"
