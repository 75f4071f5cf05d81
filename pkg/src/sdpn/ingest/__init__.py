"""Readers for models, programs and configuration patterns."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from ..model import SDPN, Configuration
from .errors import ParseError
from .patterns import ConfigPattern, parse_config_pattern, format_pattern
from .program import ProgramAst, cfg_to_sdpn, parse_program
from .sdpn_text import format_sdpn, parse_configuration, parse_sdpn

__all__ = [
    "ConfigPattern", "ParseError", "ProgramAst", "cfg_to_sdpn", "format_pattern", "format_sdpn",
    "load_model", "parse_config_pattern", "parse_configuration", "parse_program", "parse_sdpn",
]


def load_model(path: str | Path) -> tuple[SDPN, Optional[Configuration]]:
    """Read a ``.sdpn`` model or a ``.cfgp`` program.

    Programs also yield their initial configuration; models yield None.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".cfgp":
        return cfg_to_sdpn(parse_program(text, str(path)))
    return parse_sdpn(text, str(path)), None
