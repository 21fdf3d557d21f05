"""Tests for the hierarchical navigation control package."""

from pathlib import Path

ALPHA = 0.2
BETA = 1.0

LINE_POINTS = [[0.0], [1.0], [10.0], [11.0]]
LINE_TREE = "((1,2),(3,4));"


def load_fixture(filename: str) -> str:
    """Load a fixture."""
    path = Path(__package__) / "fixtures" / filename
    return path.read_text(encoding="utf-8")
