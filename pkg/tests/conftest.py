import os
from pathlib import Path

import pytest

from farf.core import AttributeSpec, NOMINAL, NUMERIC, StreamSchema

ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = Path(os.environ.get("FARF_DATA_DIR", ROOT / "data"))


def adult_available() -> bool:
    return (DATA_DIR / "adult.data").exists() and (DATA_DIR / "adult.test").exists()


@pytest.fixture
def toy_schema():
    return StreamSchema(
        (
            AttributeSpec("x", NUMERIC),
            AttributeSpec("color", NOMINAL, ("red", "green", "blue")),
            AttributeSpec("sex", NOMINAL, ("female", "male")),
            AttributeSpec("y", NOMINAL, ("no", "yes")),
        ),
        "sex", "female", "y", "yes",
    )


# verdict lines from test_acceptance.py, echoed after the run so passing ones are visible too
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
