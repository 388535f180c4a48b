"""Elo, m-ELO and am-ELO rating estimators for pairwise comparison data."""

from ._core import *  # noqa: F401,F403
from ._core import (
    ArenaState,
    Dataset,
    DivergenceError,
    FitResult,
    JointFitResult,
    ParseError,
    RoundSkipped,
    StableArenaError,
)

__version__ = "0.1.0"
