"""The shipped machine corpus."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from ptmrnn.fileformat import parse_spec

SIGMA_DETERMINISTIC_2PDA = ("m_geo", "m_rt", "m_count", "m_six")
QPTMS = ("m_third", "m_tape")
PTMS = ("m_coin", "m_walk")
FULL_2PDA = ("m_full",)
ALL = SIGMA_DETERMINISTIC_2PDA + QPTMS + PTMS + FULL_2PDA


def fixture_path(name: str) -> Path:
    """Filesystem path of ``NAME.machine``."""
    return Path(str(resources.files(__package__).joinpath(f"{name}.machine")))


def load_fixture(name: str):
    """Parses and validates the fixture called ``name``."""
    return parse_spec(fixture_path(name).read_text(encoding="utf-8"))
