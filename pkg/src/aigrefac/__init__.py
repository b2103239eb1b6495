"""aigrefac: a parallel refactoring engine for And-Inverter Graphs.

The package exposes the AIG container and its core operations (`core`),
AIGER file I/O (`aiger`), cut-based resynthesis primitives (`resynth`),
the sequential and parallel refactoring passes (`engine`), simulation and
equivalence checking (`verify`), benchmark circuit generators (`circuits`),
and a command line front end (`cli`).
"""

from .core import Aig, AigNode, IntegrityError, Literal, Mffc, StrashTable
from .engine import (
    LevelGroups,
    PassConfig,
    PassStats,
    Replacement,
    WorkerContext,
    parallel_pass,
    schedule,
    sequential_pass,
)
from .resynth import CandidateGraph, Cube, Cut, Sop, TruthTable
from .verify import EquivResult, VerificationError, equiv_check, simulate, stats

__version__ = "0.1.0"

__all__ = [
    "Aig",
    "AigNode",
    "CandidateGraph",
    "Cube",
    "Cut",
    "EquivResult",
    "IntegrityError",
    "LevelGroups",
    "Literal",
    "Mffc",
    "PassConfig",
    "PassStats",
    "Replacement",
    "Sop",
    "StrashTable",
    "TruthTable",
    "VerificationError",
    "WorkerContext",
    "equiv_check",
    "parallel_pass",
    "schedule",
    "sequential_pass",
    "simulate",
    "stats",
]
