"""Feeder-based local energy market clearing (two-step and one-step)."""

from importlib.resources import files

from ._core import *  # noqa: F401,F403
from ._core import load_scenario


def table1_path():
    """Path of the bundled 20-player, 3-area golden scenario."""
    return str(files(__package__) / "data" / "table1.json")


def load_table1():
    return load_scenario(table1_path())
