"""Intermittent interval maps, run-length prefix coding and information growth."""

from ._core import *  # noqa: F401,F403
from ._core import MapSpec, run_cli

__all__ = [name for name in dir() if not name.startswith("_")]
