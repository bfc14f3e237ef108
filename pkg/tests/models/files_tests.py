from unittest import TestCase

from pydantic import ValidationError

from src.models import Label, Mechanism, MechanismFile


class TestMechanismFile(TestCase):
    def test_should_read_unbounded_supply_as_none(self) -> None:
        mechanism = MechanismFile.model_validate(
            {"k": 2, "delta": 1.0, "supply": "inf", "pages": [[9, 9]]}
        ).to_domain()
        assert mechanism.supply is None
        assert mechanism.pages[0].prices == (9.0, 9.0)

    def test_should_write_unbounded_supply_as_inf(self) -> None:
        mechanism = Mechanism.from_prices([[1.0]], k=1, delta=1.0)
        assert MechanismFile.from_domain(mechanism).supply == "inf"

    def test_should_keep_labels_when_present(self) -> None:
        mechanism = MechanismFile.model_validate(
            {
                "k": 2,
                "delta": 1.0,
                "supply": 4,
                "pages": [[9, 97.9]],
                "labels": [["bait", "expensive"]],
            }
        ).to_domain()
        assert mechanism.supply == 4
        assert mechanism.pages[0].labels == (Label.BAIT, Label.EXPENSIVE)

    def test_should_reject_unknown_fields(self) -> None:
        with self.assertRaises(ValidationError):
            MechanismFile.model_validate(
                {"k": 1, "delta": 1.0, "pages": [], "colour": "red"}
            )

    def test_should_reject_a_zero_page_capacity(self) -> None:
        with self.assertRaises(ValidationError):
            MechanismFile.model_validate({"k": 0, "delta": 1.0, "pages": []})
