"""Bit-parallel simulation, equivalence checking, and graph statistics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import _kernels as K
from .core import Aig


class VerificationError(RuntimeError):
    """Functional equivalence was required but does not hold."""


class InterfaceMismatchError(ValueError):
    """The two graphs do not have the same PI/PO arity."""


@dataclass
class EquivResult:
    verdict: str  # "equivalent_exhaustive" | "equivalent_sampled" | "counterexample"
    patterns: int
    po_index: Optional[int] = None
    assignment: List[bool] = field(default_factory=list)

    @property
    def equivalent(self) -> bool:
        return self.verdict != "counterexample"

    def __bool__(self) -> bool:
        return self.equivalent


def simulate(aig: Aig, pi_words: np.ndarray) -> np.ndarray:
    """Simulate 64 patterns per word column; returns PO words.

    ``pi_words`` has shape (num PIs, W), dtype uint64, row i driving PI i in
    ``aig.pis`` order.  The graph must be in id-topological form (as after
    parsing, construction, or any pass boundary).
    """
    pi_words = np.ascontiguousarray(pi_words, dtype=np.uint64)
    if pi_words.ndim != 2 or pi_words.shape[0] != len(aig.pis):
        raise InterfaceMismatchError(
            f"pattern rows {pi_words.shape[0]} != PI count {len(aig.pis)}")
    n = aig.num_nodes
    w = pi_words.shape[1]
    node_words = np.zeros((n, w), dtype=np.uint64)
    po_words = np.zeros((len(aig.pos), w), dtype=np.uint64)
    K.simulate_words(aig.graph(), np.asarray(aig.pis, dtype=np.int64),
                     pi_words, node_words,
                     np.asarray(aig.pos, dtype=np.int64), po_words)
    return po_words


def _replay(a: Aig, b: Aig, assignment: List[bool], po_index: int) -> bool:
    words = np.zeros((len(a.pis), 1), dtype=np.uint64)
    for i, bit in enumerate(assignment):
        if bit:
            words[i, 0] = 1
    wa = simulate(a, words)
    wb = simulate(b, words)
    return bool((wa[po_index, 0] ^ wb[po_index, 0]) & np.uint64(1))


def _counterexample(a: Aig, b: Aig, diff: np.ndarray, pi_words: np.ndarray,
                    patterns_done: int, exhaustive_base: int = -1,
                    ) -> EquivResult:
    po_idx, word_idx = np.argwhere(diff != 0)[0]
    bit = int(int(diff[po_idx, word_idx]) & -int(diff[po_idx, word_idx])
              ).bit_length() - 1
    if exhaustive_base >= 0:
        minterm = (exhaustive_base + int(word_idx)) * 64 + bit
        assignment = [bool((minterm >> i) & 1) for i in range(pi_words.shape[0])]
    else:
        assignment = [bool((int(pi_words[i, word_idx]) >> bit) & 1)
                      for i in range(pi_words.shape[0])]
    res = EquivResult("counterexample", patterns_done, int(po_idx), assignment)
    if not _replay(a, b, assignment, int(po_idx)):
        raise VerificationError(
            "counterexample witness failed to replay; simulation is inconsistent")
    return res


def equiv_check(a: Aig, b: Aig, max_patterns: int = 1 << 16,
                seed: int = 1) -> EquivResult:
    """Combinational equivalence by simulation.

    Exhaustive when the PI count is at most 16, otherwise seeded random
    sampling with at least ``max_patterns`` patterns.  A counterexample
    carries the PI assignment and failing PO index, replayed before return.
    """
    if len(a.pis) != len(b.pis) or len(a.pos) != len(b.pos):
        raise InterfaceMismatchError(
            f"interface mismatch: {len(a.pis)}/{len(a.pos)} PIs/POs vs "
            f"{len(b.pis)}/{len(b.pos)}")
    npi = len(a.pis)
    if len(a.pos) == 0:
        return EquivResult("equivalent_exhaustive", 0)

    if npi <= 16:
        total = 1 << npi
        w_total = max(1, total // 64)
        chunk = min(w_total, 128)
        for base in range(0, w_total, chunk):
            w = min(chunk, w_total - base)
            pi_words = np.zeros((npi, w), dtype=np.uint64)
            K.fill_exhaustive(pi_words, base * 64)
            diff = simulate(a, pi_words) ^ simulate(b, pi_words)
            if npi < 6:
                diff &= np.uint64((1 << total) - 1)
            if np.any(diff):
                return _counterexample(a, b, diff, pi_words, total,
                                       exhaustive_base=base)
        return EquivResult("equivalent_exhaustive", total)

    w_round = 256  # 16384 patterns per round
    done = 0
    rnd = 0
    while done < max_patterns:
        round_seed = np.int64(K.splitmix64(np.uint64(seed) ^ np.uint64(rnd))
                              & np.uint64(0x7FFFFFFFFFFFFFFF))
        pi_words = np.zeros((npi, w_round), dtype=np.uint64)
        K.fill_random(pi_words, round_seed)
        diff = simulate(a, pi_words) ^ simulate(b, pi_words)
        done += w_round * 64
        rnd += 1
        if np.any(diff):
            return _counterexample(a, b, diff, pi_words, done)
    return EquivResult("equivalent_sampled", done)


def stats(aig: Aig) -> dict:
    return {
        "pis": len(aig.pis),
        "pos": len(aig.pos),
        "area": aig.area(),
        "depth": aig.depth(),
    }
