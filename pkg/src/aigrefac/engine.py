"""Sequential and parallel refactoring passes over a shared AIG.

A pass levelizes the graph once and freezes level groups; groups are
processed from the PIs toward the POs so that same-group nodes have
pairwise-disjoint MFFCs.  Within a group each worker runs the full
cut / cone / truth table / cover / evaluate / apply pipeline on its
contiguous chunk of roots, recycling MFFC slots in place; a barrier ends
the group, after which a single-threaded step drains deletion queues,
inlines buffered roots, and clears reuse flags.  Single-worker runs fuse
that cleanup into the node loop (a rewrite's deletions land before the
next root is costed), which keeps the pass ledger exact: area delta
equals the sum of accepted gains.

A pass ends with a zero-count sweep, PO writeback, and compaction back
to boundary form.  Structural errors abort the pass and restore the
pass-start snapshot; capacity and scratch exhaustion grow the arena or
the per-worker buffers and retry.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from . import _engine_kernels as EK
from . import _kernels as K
from .core import Aig, IntegrityError, Mffc
from .resynth import (CandidateGraph, K_DEFAULT, K_MAX, build_candidate,
                      compute_tt, evaluate, isop, recon_cut)
from .verify import VerificationError, equiv_check

_ERROR_NAMES = {
    K.E_CAPACITY: "node arena full",
    K.E_CYCLE: "cycle detected",
    K.E_DOUBLE_DELETE: "double deletion",
    K.E_DEAD_OPERAND: "dead operand",
    K.E_SCRATCH: "scratch buffer overflow",
    K.E_INTEGRITY: "structural integrity violation",
}

_MAX_ATTEMPTS = 3


def _env_debug() -> bool:
    return os.environ.get("AIGREFAC_DEBUG_CHECKS", "") == "1"


@dataclass
class PassConfig:
    """Knobs for a refactoring run.

    ``threads`` is the worker count (1 runs the fused single-worker
    driver); ``cut_size`` bounds reconvergence-driven cuts; ``zero_gain``
    accepts rewrites that keep the node count unchanged; ``iterations``
    repeats the pass; ``seed`` feeds randomized policies (currently the
    debug disjointness sampler); ``verify_each_pass`` runs an equivalence
    check against the pre-pass graph after every pass; ``debug_checks``
    adds pass-boundary audits and per-group MFFC disjointness sampling
    (default from the AIGREFAC_DEBUG_CHECKS environment variable).
    """

    threads: int = 1
    cut_size: int = K_DEFAULT
    zero_gain: bool = False
    iterations: int = 1
    seed: int = 0
    verify_each_pass: bool = False
    debug_checks: bool = field(default_factory=_env_debug)

    def __post_init__(self) -> None:
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if not 2 <= self.cut_size <= K_MAX:
            raise ValueError(
                f"cut_size must be in [2, {K_MAX}], got {self.cut_size}")
        if self.iterations < 1:
            raise ValueError(
                f"iterations must be >= 1, got {self.iterations}")

    @property
    def K(self) -> int:
        return self.cut_size


@dataclass
class LevelGroups:
    """Frozen work schedule: one group of And ids per live level.

    ``snapshot`` holds the level of every node at schedule time; groups
    are in ascending level order and each group's ids ascend.
    """

    snapshot: np.ndarray
    levels: List[int]
    groups: List[np.ndarray]

    def __len__(self) -> int:
        return len(self.groups)

    def __iter__(self) -> Iterator[Tuple[int, np.ndarray]]:
        return iter(zip(self.levels, self.groups))

    @property
    def total_nodes(self) -> int:
        return sum(len(g) for g in self.groups)


def schedule(aig: Aig) -> LevelGroups:
    """Group live And nodes by level from a fresh levelization."""
    lvls, _ = aig.levelize()
    n = aig.num_nodes
    live = np.nonzero((aig.dead[:n] == 0) & (aig.kind[:n] == K.KIND_AND))[0]
    by_level = lvls[live]
    levels: List[int] = []
    groups: List[np.ndarray] = []
    for lv in np.unique(by_level):
        levels.append(int(lv))
        groups.append(live[by_level == lv].astype(np.int64))
    return LevelGroups(snapshot=lvls, levels=levels, groups=groups)


class WorkerContext:
    """Per-worker buffers: scratch arrays, deletion queue, counters."""

    def __init__(self, aig: Aig, cfg: Optional[PassConfig] = None,
                 worker_id: int = 0,
                 queue_cap: Optional[int] = None,
                 applied_cap: Optional[int] = None):
        self.worker_id = worker_id
        self.cfg = cfg if cfg is not None else PassConfig()
        n = aig.num_nodes
        self._queue_cap = queue_cap if queue_cap else 2 * n + 1024
        self._applied_cap = applied_cap if applied_cap else n + 64
        self._capacity = aig.capacity
        self.scratch = EK.make_scratch(self._capacity, self.cfg.cut_size,
                                       self._queue_cap, self._applied_cap)

    def _ensure(self, aig: Aig) -> None:
        if self._capacity < aig.capacity:
            self._capacity = aig.capacity
            self.scratch = EK.make_scratch(
                self._capacity, self.cfg.cut_size,
                self._queue_cap, self._applied_cap)

    @property
    def deletion_queue(self) -> List[int]:
        sm = self.scratch.smeta
        return [int(v) for v in self.scratch.queue[:int(sm[EK.SM_NQ])]]

    @property
    def recycle_pool(self) -> List[int]:
        """Unclaimed recyclable slots of the node task in flight."""
        s = self.scratch
        sm = s.smeta
        lo = max(1, int(sm[EK.SM_POOL_I]))
        pool = []
        for i in range(lo, int(sm[EK.SM_NMEM])):
            v = int(s.members[i])
            if s.mpay[v] & EK.MP_UNSTR:
                pool.append(v)
        return pool

    @property
    def stats(self) -> Dict[str, int]:
        sm = self.scratch.smeta
        return {
            "visited": int(sm[EK.SM_VISITED]),
            "evaluated": int(sm[EK.SM_EVALUATED]),
            "accepted": int(sm[EK.SM_ACCEPTED]),
            "gain_sum": int(sm[EK.SM_GAINSUM]),
            "allocated": int(sm[EK.SM_ALLOCS]),
            "recycled": int(sm[EK.SM_RECYCLED]),
        }


@dataclass
class Replacement:
    """An accepted candidate, ready for the replacement stage."""

    root: int
    candidate: CandidateGraph
    mffc: Mffc
    gain: int


@dataclass
class PassStats:
    """Counters for one pass (or an aggregate over iterations)."""

    area_before: int = 0
    area_after: int = 0
    depth_before: int = 0
    depth_after: int = 0
    passes: int = 1
    threads: int = 1
    groups: int = 0
    visited: int = 0
    evaluated: int = 0
    accepted: int = 0
    gain_sum: int = 0
    skipped: int = 0
    rejected_gain: int = 0
    rejected_level: int = 0
    rejected_collision: int = 0
    rejected_overflow: int = 0
    allocated: int = 0
    recycled: int = 0
    absorbed: int = 0
    buffered: int = 0
    zombie_hits: int = 0
    kept_reused: int = 0
    deleted: int = 0
    deferred: int = 0
    retained: int = 0
    merged: int = 0
    trivial: int = 0
    warnings: int = 0
    presweep_deleted: int = 0
    wall_time: float = 0.0
    per_pass: List["PassStats"] = field(default_factory=list, repr=False)

    _SUMMED = (
        "groups", "visited", "evaluated", "accepted", "gain_sum", "skipped",
        "rejected_gain", "rejected_level", "rejected_collision",
        "rejected_overflow", "allocated", "recycled", "absorbed", "buffered",
        "zombie_hits", "kept_reused", "deleted", "deferred", "retained",
        "merged", "trivial", "warnings", "presweep_deleted",
    )

    @classmethod
    def aggregate(cls, parts: Sequence["PassStats"]) -> "PassStats":
        if not parts:
            return cls(passes=0)
        if len(parts) == 1:
            return parts[0]
        agg = cls(
            area_before=parts[0].area_before,
            area_after=parts[-1].area_after,
            depth_before=parts[0].depth_before,
            depth_after=parts[-1].depth_after,
            passes=len(parts),
            threads=parts[0].threads,
            wall_time=sum(p.wall_time for p in parts),
            per_pass=list(parts),
        )
        for name in cls._SUMMED:
            setattr(agg, name, sum(getattr(p, name) for p in parts))
        return agg


class _Abort(Exception):
    """Internal: pass-level kernel failure with an error code."""

    def __init__(self, code: int):
        super().__init__(_ERROR_NAMES.get(code, f"kernel error {code}"))
        self.code = code


# ---------------------------------------------------------------------------
# pass-local snapshots shared by the kernels


def _build_fanout_csr(aig: Aig) -> Tuple[np.ndarray, np.ndarray]:
    """Fanout CSR over node ids, padded to the arena capacity.

    Offsets carry one entry per arena slot so that ids allocated later in
    the pass index an empty range instead of falling off the end.
    """
    cap = aig.capacity
    cnt = np.zeros(cap + 1, dtype=np.int64)
    K.count_fanouts(aig.graph(), cnt)
    csr_off = np.cumsum(cnt)
    csr_edges = np.zeros(int(csr_off[-1]), dtype=np.int64)
    cur = np.zeros(cap, dtype=np.int64)
    K.fill_fanouts(aig.graph(), csr_off, cur, csr_edges)
    return csr_off, csr_edges


def _build_po_csr(aig: Aig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """PO index lists per node, plus the mutable PO literal array."""
    cap = aig.capacity
    po_lits = np.asarray(aig.pos, dtype=np.int64)
    nodes = po_lits >> 1
    po_idx = np.argsort(nodes, kind="stable").astype(np.int64)
    counts = np.bincount(nodes, minlength=cap) if len(nodes) else \
        np.zeros(cap, dtype=np.int64)
    po_off = np.zeros(cap + 1, dtype=np.int64)
    po_off[1:] = np.cumsum(counts[:cap])
    return po_off, po_idx, po_lits


def _make_params(cfg: PassConfig, workers: int, epoch: int) -> np.ndarray:
    p = np.zeros(EK.P_LEN, dtype=np.int64)
    p[EK.P_K] = cfg.cut_size
    p[EK.P_W] = EK.words_for(cfg.cut_size)
    p[EK.P_ZERO_GAIN] = 1 if cfg.zero_gain else 0
    p[EK.P_EPOCH] = epoch
    p[EK.P_STRICT] = 1 if workers == 1 else 0
    p[EK.P_APPLY] = 1
    p[EK.P_MEMBERS] = 0 if workers == 1 else 1
    return p


def _bump_epoch(aig: Aig) -> int:
    epoch = int(aig.meta[K.M_EPOCH]) + 1
    aig.meta[K.M_EPOCH] = epoch
    return epoch


def _chunks(n_items: int, workers: int) -> List[Tuple[int, int]]:
    base, rem = divmod(n_items, workers)
    bounds = []
    lo = 0
    for w in range(workers):
        hi = lo + base + (1 if w < rem else 0)
        bounds.append((lo, hi))
        lo = hi
    return bounds


# ---------------------------------------------------------------------------
# group-boundary cleanup (single-threaded)


def _post_group(G, contexts: Sequence[WorkerContext], PS, csr_off, csr_edges,
                po_off, po_idx, po_lits, deferred, nd: int, epoch: int,
                strict: int) -> int:
    """Drain queues in worker order, inline buffered roots, clear flags."""
    for ctx in contexts:
        sm = ctx.scratch.smeta
        nq = int(sm[EK.SM_NQ])
        if nq > 0:
            rc = int(EK.k_drain(G, PS, ctx.scratch.queue, nq,
                                deferred, nd, epoch))
            if rc < 0:
                raise _Abort(-rc)
            nd = rc
            sm[EK.SM_NQ] = 0
    for ctx in contexts:
        sm = ctx.scratch.smeta
        napp = int(sm[EK.SM_NAPP])
        if napp > 0:
            rc = int(EK.k_inline(G, PS, ctx.scratch.approot,
                                 ctx.scratch.apout, napp, csr_off, csr_edges,
                                 po_off, po_idx, po_lits, strict))
            if rc < 0:
                raise _Abort(-rc)
            sm[EK.SM_NAPP] = 0
    for ctx in contexts:
        sm = ctx.scratch.smeta
        nf = int(sm[EK.SM_NF])
        if nf > 0:
            EK.k_clear_flags(G, ctx.scratch.flagged, nf)
            sm[EK.SM_NF] = 0
    pf = int(PS.pc[EK.PC_NF])
    if pf > 0:
        EK.k_clear_flags(G, PS.flag, pf)
        PS.pc[EK.PC_NF] = 0
    if int(PS.pc[EK.PC_WL]) != 0:
        raise _Abort(K.E_INTEGRITY)
    return nd


def post_process(aig: Aig, contexts: Sequence[WorkerContext]) -> None:
    """Sequential stage over worker queues against the current graph.

    Drains deletion queues (worker index ascending, queue order within),
    inlines any recorded buffered roots, and clears reuse flags.  Queued
    nodes that were revived stay live.
    """
    aig.ensure_strash()
    csr_off, csr_edges = _build_fanout_csr(aig)
    po_off, po_idx, po_lits = _build_po_csr(aig)
    PS = EK.make_post(aig.capacity)
    deferred = np.zeros(aig.capacity, dtype=np.int64)
    epoch = int(aig.meta[K.M_EPOCH])
    G = aig.graph()
    try:
        _post_group(G, contexts, PS, csr_off, csr_edges, po_off, po_idx,
                    po_lits, deferred, 0, epoch, 0)
    except _Abort as ab:
        raise IntegrityError(f"post-processing failed: {ab}") from None
    aig.pos = [int(x) for x in po_lits]


# ---------------------------------------------------------------------------
# single-node staged operations


def refactor_node(ctx: WorkerContext, aig: Aig, root: int,
                  cfg: Optional[PassConfig] = None) -> Optional[Replacement]:
    """Evaluation stage for one root; costs a candidate, never mutates.

    Returns a Replacement when the candidate's gain clears the acceptance
    bar, else None.
    """
    cfg = cfg if cfg is not None else ctx.cfg
    cut = recon_cut(aig, root, cfg.cut_size)
    if len(cut.leaves) < 2:
        return None
    tt = compute_tt(aig, cut)
    sop = isop(tt)
    cand = build_candidate(aig, cut, sop, aig.mffc_collect(root).members)
    # the gain prices deaths, so the claimed set holds alive exactly the
    # leaves the cover still references; dropped leaves may die with it
    anchors = [cut.leaves[v] for v in range(sop.k)
               if any((c.pos | c.neg) >> v & 1 for c in sop.cubes)]
    mffc = aig.mffc_collect(root, anchors=anchors)
    decision = evaluate(mffc.size, cand, cfg.zero_gain)
    if not decision:
        return None
    return Replacement(root=root, candidate=cand, mffc=mffc,
                       gain=decision.gain)


def apply_replacement(ctx: WorkerContext, aig: Aig, repl: Replacement) -> None:
    """Replacement stage: realize the candidate on the live graph.

    Re-executes the step lookups against the current table (sharing found
    now may exceed the estimate), rewrites the root in place, recycles
    MFFC slots, and immediately drains the deletion queue so the caller
    sees settled counts.  Raises IntegrityError if the root is no longer
    rewritable or a fanout rekey would collide.
    """
    root = repl.root
    n = aig.num_nodes
    if not 0 <= root < n:
        raise IndexError(f"node id {root} out of range")
    if aig.dead[root] or aig.kind[root] != K.KIND_AND or aig.f1[root] == 1:
        raise IntegrityError(f"node {root} is not a rewritable And node")
    aig.ensure_strash()
    need = n + len(repl.candidate.steps) + 4
    if need > aig.capacity:
        aig.grow(need)
    ctx._ensure(aig)
    cap = aig.capacity
    lvls, _ = aig.levelize()
    aig.snap = np.zeros(cap, dtype=np.int64)
    aig.snap[:n] = lvls[:n]
    epoch = _bump_epoch(aig)
    cfg = ctx.cfg
    P = _make_params(cfg, 1, epoch)
    P[EK.P_LEVEL] = -1  # no group context: no same-level hit restriction
    P[EK.P_ZERO_GAIN] = 1 if repl.gain == 0 else P[EK.P_ZERO_GAIN]
    tmask = EK.mask_for(cfg.cut_size)
    csr_off, csr_edges = _build_fanout_csr(aig)
    po_off, po_idx, po_lits = _build_po_csr(aig)
    PS = EK.make_post(cap)
    deferred = np.zeros(cap, dtype=np.int64)
    G = aig.graph()
    ids = np.asarray([root], dtype=np.int64)
    sm = ctx.scratch.smeta
    before = int(sm[EK.SM_ACCEPTED])
    collide_before = int(sm[EK.SM_REJ_COLLIDE])
    rc = int(EK.k_seq_range(G, ctx.scratch, P, tmask, ids, 0, 1,
                            csr_off, csr_edges, PS, po_off, po_idx, po_lits,
                            deferred, 0))
    if rc < 0:
        raise IntegrityError(f"replacement failed: "
                             f"{_ERROR_NAMES.get(-rc, f'kernel error {-rc}')}")
    if int(sm[EK.SM_ACCEPTED]) == before:
        if int(sm[EK.SM_REJ_COLLIDE]) > collide_before:
            raise IntegrityError(
                f"replacing node {root} would create a duplicate "
                f"structural pair in a fanout")
        raise IntegrityError(
            f"replacement of node {root} no longer applies "
            f"(rejected on re-evaluation against the current graph)")
    aig.pos = [int(x) for x in po_lits]
    aig.levelize()


# ---------------------------------------------------------------------------
# pass driver


def _sample_disjoint(aig: Aig, ids: np.ndarray, seed: int, level: int) -> None:
    """Debug check: sampled same-group MFFCs must be pairwise disjoint."""
    take = min(len(ids), 32)
    if take < 2:
        return
    if len(ids) <= take:
        sample = ids
    else:
        rng = np.random.default_rng([seed & 0xFFFFFFFF, level])
        sample = rng.choice(ids, size=take, replace=False)
    seen: Dict[int, int] = {}
    for r in sorted(int(x) for x in sample):
        for m in aig.mffc_collect(r).members:
            if m in seen:
                raise IntegrityError(
                    f"MFFC overlap at level {level}: node {m} in MFFCs of "
                    f"roots {seen[m]} and {r}")
            seen[m] = r


def _presweep(aig: Aig) -> int:
    """Delete already-dereferenced And nodes before the pass is measured."""
    n = aig.num_nodes
    out = np.zeros(n + 1, dtype=np.int64)
    G = aig.graph()
    m = int(EK.k_collect_zero_ref(G, out))
    if m == 0:
        return 0
    PS = EK.make_post(n + 1)
    rc = int(EK.k_sweep(G, PS, out, m))
    if rc < 0:
        raise IntegrityError(f"pre-pass sweep failed: "
                             f"{_ERROR_NAMES.get(-rc, rc)}")
    return int(PS.pc[EK.PC_DELETED])


def _run_threads(G, contexts, P, tmask, groups, cfg, csr_off, csr_edges,
                 PS, po_off, po_idx, po_lits, deferred, aig) -> int:
    """Fork-join group processing for two or more workers."""
    T = len(contexts)
    start = threading.Barrier(T + 1)
    done = threading.Barrier(T + 1)
    ctrl: Dict[str, object] = {"stop": False, "ids": None, "bounds": None}
    results: List[object] = [0] * T

    def work(w: int) -> None:
        while True:
            start.wait()
            if ctrl["stop"]:
                return
            try:
                ids = ctrl["ids"]
                lo, hi = ctrl["bounds"][w]
                rc = 0
                if hi > lo:
                    rc = int(EK.k_process_range(
                        G, contexts[w].scratch, P, tmask, ids, lo, hi,
                        csr_off, csr_edges))
                results[w] = rc
            except BaseException as exc:  # surfaced by the main thread
                results[w] = exc
            finally:
                done.wait()

    threads = [threading.Thread(target=work, args=(w,), daemon=True)
               for w in range(T)]
    for t in threads:
        t.start()
    nd = 0
    try:
        for level, ids in groups:
            if cfg.debug_checks:
                _sample_disjoint(aig, ids, cfg.seed, level)
            P[EK.P_LEVEL] = level
            ctrl["ids"] = ids
            ctrl["bounds"] = _chunks(len(ids), T)
            start.wait()
            done.wait()
            for rc in results:
                if isinstance(rc, BaseException):
                    raise rc
                if rc < 0:
                    raise _Abort(-rc)
            nd = _post_group(G, contexts, PS, csr_off, csr_edges,
                             po_off, po_idx, po_lits, deferred, nd,
                             int(P[EK.P_EPOCH]), 0)
    finally:
        ctrl["stop"] = True
        start.wait()
        for t in threads:
            t.join()
    return nd


def _attempt(aig: Aig, cfg: PassConfig, workers: int, groups: LevelGroups,
             scratch_scale: int) -> Tuple[List[WorkerContext], np.ndarray]:
    """One pass attempt over frozen groups; raises _Abort on kernel errors.

    Returns the worker contexts and the post counters for stats assembly.
    Leaves the graph swept and compacted.
    """
    cap = aig.capacity
    n = aig.num_nodes
    aig.snap = np.zeros(cap, dtype=np.int64)
    aig.snap[:n] = groups.snapshot[:n]
    epoch = _bump_epoch(aig)
    G = aig.graph()
    csr_off, csr_edges = _build_fanout_csr(aig)
    po_off, po_idx, po_lits = _build_po_csr(aig)
    queue_cap = (2 * n + 1024) * scratch_scale
    applied_cap = (n // workers + 1024) * scratch_scale
    contexts = [WorkerContext(aig, cfg, worker_id=w, queue_cap=queue_cap,
                              applied_cap=applied_cap)
                for w in range(workers)]
    P = _make_params(cfg, workers, epoch)
    tmask = EK.mask_for(cfg.cut_size)
    PS = EK.make_post(cap)
    deferred = np.zeros(cap, dtype=np.int64)

    if workers == 1:
        ctx = contexts[0]
        nd = 0
        for level, ids in groups:
            if cfg.debug_checks:
                _sample_disjoint(aig, ids, cfg.seed, level)
            P[EK.P_LEVEL] = level
            rc = int(EK.k_seq_range(G, ctx.scratch, P, tmask, ids, 0,
                                    len(ids), csr_off, csr_edges, PS,
                                    po_off, po_idx, po_lits, deferred, nd))
            if rc < 0:
                raise _Abort(-rc)
            nd = rc
    else:
        _run_threads(G, contexts, P, tmask, groups, cfg, csr_off, csr_edges,
                     PS, po_off, po_idx, po_lits, deferred, aig)

    # end of pass: sweep survivorless slots, write POs back, re-normalize
    nn = int(aig.meta[K.M_NNODES])
    out = np.zeros(nn + 1, dtype=np.int64)
    m = int(EK.k_collect_zero_ref(G, out))
    if m > 0:
        rc = int(EK.k_sweep(G, PS, out, m))
        if rc < 0:
            raise _Abort(-rc)
    aig.pos = [int(x) for x in po_lits]
    if cfg.debug_checks:
        aig.audit()
    aig.compact()
    return contexts, PS.pc.copy()


def _pass_once(aig: Aig, cfg: PassConfig, workers: int) -> PassStats:
    t0 = time.perf_counter()
    aig.ensure_strash()
    presweep_deleted = _presweep(aig)
    area_before = aig.num_ands
    groups = schedule(aig)
    depth_before = aig.depth()
    pre_copy = aig.copy() if cfg.verify_each_pass else None

    headroom = aig.num_nodes + max(1024, aig.num_nodes // 4)
    if aig.capacity < headroom:
        aig.grow(headroom)
    snapshot = aig.state_snapshot()

    scratch_scale = 1
    contexts: List[WorkerContext] = []
    pc = np.zeros(EK.PC_LEN, dtype=np.int64)
    for attempt in range(_MAX_ATTEMPTS):
        try:
            contexts, pc = _attempt(aig, cfg, workers, groups, scratch_scale)
            break
        except _Abort as ab:
            aig.state_restore(snapshot)
            retryable = attempt + 1 < _MAX_ATTEMPTS
            if ab.code == K.E_CAPACITY and retryable:
                aig.grow(aig.capacity * 2)
                snapshot = aig.state_snapshot()
            elif ab.code == K.E_SCRATCH and retryable:
                scratch_scale *= 4
            else:
                raise IntegrityError(
                    f"pass aborted and graph restored: {ab}") from None

    st = PassStats(
        area_before=area_before,
        area_after=aig.num_ands,
        depth_before=depth_before,
        depth_after=aig.depth(),
        threads=workers,
        groups=len(groups),
        presweep_deleted=presweep_deleted,
        wall_time=time.perf_counter() - t0,
    )
    for ctx in contexts:
        sm = ctx.scratch.smeta
        st.visited += int(sm[EK.SM_VISITED])
        st.evaluated += int(sm[EK.SM_EVALUATED])
        st.accepted += int(sm[EK.SM_ACCEPTED])
        st.gain_sum += int(sm[EK.SM_GAINSUM])
        st.skipped += int(sm[EK.SM_SKIPPED])
        st.rejected_gain += int(sm[EK.SM_REJ_GAIN])
        st.rejected_level += int(sm[EK.SM_REJ_LEVEL])
        st.rejected_collision += int(sm[EK.SM_REJ_COLLIDE])
        st.rejected_overflow += int(sm[EK.SM_REJ_OVERFLOW])
        st.allocated += int(sm[EK.SM_ALLOCS])
        st.recycled += int(sm[EK.SM_RECYCLED])
        st.absorbed += int(sm[EK.SM_ABS_CNT])
        st.buffered += int(sm[EK.SM_BUF_CNT])
        st.zombie_hits += int(sm[EK.SM_ZOMBIES])
        st.kept_reused += int(sm[EK.SM_KEPT_REUSED])
    st.deleted = int(pc[EK.PC_DELETED])
    st.deferred = int(pc[EK.PC_DEFERRED])
    st.retained = int(pc[EK.PC_RETAINED])
    st.merged = int(pc[EK.PC_MERGED])
    st.trivial = int(pc[EK.PC_TRIVIAL])
    st.warnings = int(pc[EK.PC_WARN])

    if workers == 1 and st.area_before - st.area_after != st.gain_sum:
        raise IntegrityError(
            f"gain ledger out of balance: area delta "
            f"{st.area_before - st.area_after} != gain sum {st.gain_sum}")

    if pre_copy is not None:
        verdict = equiv_check(pre_copy, aig, max_patterns=1 << 16,
                              seed=cfg.seed)
        if not verdict.equivalent:
            raise VerificationError(
                f"pass changed PO {verdict.po_index}: "
                f"counterexample {verdict.assignment}")
    return st


def _run(aig: Aig, cfg: PassConfig, workers: int) -> PassStats:
    parts = [_pass_once(aig, cfg, workers) for _ in range(cfg.iterations)]
    return PassStats.aggregate(parts)


def sequential_pass(aig: Aig, cfg: Optional[PassConfig] = None) -> PassStats:
    """Run ``cfg.iterations`` single-worker passes in schedule order.

    Deterministic: identical input and config produce a byte-identical
    graph.  Deletions land immediately after each accepted rewrite, so
    area delta equals the sum of accepted gains exactly.
    """
    cfg = cfg if cfg is not None else PassConfig()
    return _run(aig, cfg, 1)


def parallel_pass(aig: Aig, cfg: Optional[PassConfig] = None) -> PassStats:
    """Run ``cfg.iterations`` passes with ``cfg.threads`` workers.

    With one thread this is exactly ``sequential_pass``.  With more, each
    level group is chunked across workers and a sequential cleanup runs
    at every group boundary.
    """
    cfg = cfg if cfg is not None else PassConfig()
    return _run(aig, cfg, max(1, cfg.threads))
