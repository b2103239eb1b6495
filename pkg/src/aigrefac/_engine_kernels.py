"""Compiled kernels for the refactoring engine.

Everything here runs under ``nogil`` so worker threads overlap.  Shared graph
state is the ``Graph`` bundle from :mod:`._kernels`; per-worker state is the
``Scratch`` bundle defined below.  Mutations of shared state follow one
protocol:

* reference counts move only through atomic add; an acquire that raises a
  count from zero sets the node's reuse flag, a release that reaches zero
  queues the node (workers never run deletion cascades),
* structural-hash buckets are guarded by striped spinlocks; a worker holds at
  most two bucket locks at once (output absorption) in stripe-index order,
* node slots come either from the worker's own recycling pool (its MFFC,
  removed from the hash table up front) or from the bump allocator guarded by
  the allocator lock.

Deletion cascades, buffer inlining, and flag clearing run single-threaded in
the post-processing kernels at the bottom of this file.
"""

from collections import namedtuple

import numpy as np
from numba import njit
from numpy import int64, uint64

from ._atomics import atomic_add, lock_acquire, lock_release
from ._kernels import (E_CAPACITY, E_DOUBLE_DELETE, E_INTEGRITY, E_SCRATCH,
                       KIND_AND, M_ALLOC_LOCK, M_CAP, M_NANDS, M_NNODES,
                       _VAR_MASKS, delete_dereferenced, hash_key,
                       mffc_collect, strash_remove)

K_MAX = 16
CONE_CAP = 768      # max interior nodes of a cut cone
CUBE_CAP = 2048
STEP_CAP = 8192
ISOP_MAXD = K_MAX + 2

# smeta slots: per-candidate state first, pass counters after.
SM_TAG = 0
SM_ERROR = 1
SM_NQ = 2           # deletion queue length (reset per group)
SM_NF = 3           # flagged list length (reset per group)
SM_NAPP = 4         # applied buffer list length (reset per group)
SM_NLEAVES = 5
SM_NCONE = 6
SM_NMEM = 7
SM_MFFC = 8
SM_NCUBES = 9
SM_NSTEPS = 10
SM_COST = 11
SM_OUT = 12
SM_ABSORB = 13
SM_GAIN = 14
SM_POOL_I = 15
SM_OUTLIT = 16
SM_VISITED = 17
SM_EVALUATED = 18
SM_ACCEPTED = 19
SM_GAINSUM = 20
SM_ALLOCS = 21
SM_RECYCLED = 22
SM_ZOMBIES = 23
SM_SKIPPED = 24
SM_REJ_LEVEL = 25
SM_REJ_COLLIDE = 26
SM_REJ_GAIN = 27
SM_REJ_OVERFLOW = 28
SM_ABS_CNT = 29
SM_BUF_CNT = 30
SM_KEPT_REUSED = 31
SM_LEN = 40

# params array slots
P_K = 0
P_W = 1
P_ZERO_GAIN = 2
P_LEVEL = 3
P_EPOCH = 4
P_STRICT = 5
P_APPLY = 6
P_MEMBERS = 7       # 0: exact transient walk (one worker); 1: snapshot check
P_LEN = 8

# mpay flag bits; the tt slot index lives above MP_SHIFT.
MP_LEAF = 1
MP_INTERIOR = 2
MP_MEMBER = 4
MP_HIT = 8
MP_EMITTED = 16
MP_VISITED = 32
MP_EXCL = 64        # member kept alive by a hit; not recyclable
MP_UNSTR = 128      # pool slot already removed from the hash table
MP_SHIFT = 8

REJ = int64(-(2 ** 62))

Scratch = namedtuple("Scratch", [
    "mark", "mpay",                    # int64[cap] visit tag / payload
    "smeta",                           # int64[SM_LEN]
    "leaves",                          # int64[K_MAX]
    "anch",                            # int64[K_MAX]
    "cone",                            # int64[CONE_CAP]
    "members",                         # int64[CONE_CAP + 2]
    "dstack",                          # int64[2*CONE_CAP + 8]
    "tts",                             # uint64[(CONE_CAP + K_MAX) * W]
    "arena",                           # uint64[(ISOP_MAXD*6 + 2) * W]
    "ist_state", "ist_var", "ist_out", "ist_c0", "ist_c1",  # int64[ISOP_MAXD]
    "cpos", "cneg", "ckeep", "couts",  # int64[CUBE_CAP]
    "tcodes",                          # int64[CUBE_CAP + 2]
    "sa", "sb", "skey0", "skey1", "slit",  # int64[STEP_CAP]
    "queue", "flagged",                # int64[qcap]
    "approot", "apout",                # int64[acap]
])

# post-processing bundle (single-threaded phase)
Post = namedtuple("Post", ["flag", "wl", "dsink", "dwork", "pc"])

PC_NF = 0
PC_WL = 1
PC_WARN = 2
PC_MERGED = 3
PC_DELETED = 4
PC_RETAINED = 5
PC_ERRNODE = 6
PC_TRIVIAL = 7
PC_DEFERRED = 8
PC_LEN = 16


def words_for(cut_size):
    return 1 if cut_size <= 6 else 1 << (cut_size - 6)


def mask_for(cut_size):
    if cut_size < 6:
        return np.uint64((1 << (1 << cut_size)) - 1)
    return np.uint64(0xFFFFFFFFFFFFFFFF)


def make_scratch(capacity, cut_size, queue_cap, applied_cap):
    w = words_for(cut_size)
    return Scratch(
        mark=np.zeros(capacity, dtype=np.int64),
        mpay=np.zeros(capacity, dtype=np.int64),
        smeta=np.zeros(SM_LEN, dtype=np.int64),
        leaves=np.zeros(K_MAX, dtype=np.int64),
        anch=np.zeros(K_MAX, dtype=np.int64),
        cone=np.zeros(CONE_CAP, dtype=np.int64),
        members=np.zeros(CONE_CAP + 2, dtype=np.int64),
        dstack=np.zeros(2 * CONE_CAP + 8, dtype=np.int64),
        tts=np.zeros((CONE_CAP + K_MAX) * w, dtype=np.uint64),
        arena=np.zeros((ISOP_MAXD * 6 + 2) * w, dtype=np.uint64),
        ist_state=np.zeros(ISOP_MAXD, dtype=np.int64),
        ist_var=np.zeros(ISOP_MAXD, dtype=np.int64),
        ist_out=np.zeros(ISOP_MAXD, dtype=np.int64),
        ist_c0=np.zeros(ISOP_MAXD, dtype=np.int64),
        ist_c1=np.zeros(ISOP_MAXD, dtype=np.int64),
        cpos=np.zeros(CUBE_CAP, dtype=np.int64),
        cneg=np.zeros(CUBE_CAP, dtype=np.int64),
        ckeep=np.zeros(CUBE_CAP, dtype=np.int64),
        couts=np.zeros(CUBE_CAP, dtype=np.int64),
        tcodes=np.zeros(CUBE_CAP + 2, dtype=np.int64),
        sa=np.zeros(STEP_CAP, dtype=np.int64),
        sb=np.zeros(STEP_CAP, dtype=np.int64),
        skey0=np.zeros(STEP_CAP, dtype=np.int64),
        skey1=np.zeros(STEP_CAP, dtype=np.int64),
        slit=np.zeros(STEP_CAP, dtype=np.int64),
        queue=np.zeros(queue_cap, dtype=np.int64),
        flagged=np.zeros(queue_cap, dtype=np.int64),
        approot=np.zeros(applied_cap, dtype=np.int64),
        apout=np.zeros(applied_cap, dtype=np.int64),
    )


def make_post(capacity):
    return Post(
        flag=np.zeros(capacity, dtype=np.int64),
        wl=np.zeros(2 * capacity + 8, dtype=np.int64),
        dsink=np.zeros(capacity, dtype=np.int64),
        dwork=np.zeros(capacity, dtype=np.int64),
        pc=np.zeros(PC_LEN, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# shared-state primitives


@njit(cache=True, nogil=True, inline="always")
def _bucket(G, a, b):
    return hash_key(a, b, len(G.shead) - 1)


@njit(cache=True, nogil=True, inline="always")
def _stripe_of(G, bkt):
    return bkt & (len(G.slock) - 1)


@njit(cache=True, nogil=True, inline="always")
def _chain_find(G, a, b, bkt):
    n = G.shead[bkt]
    while n != -1:
        if G.f0[n] == a and G.f1[n] == b:
            return n
        n = G.snext[n]
    return int64(-1)


@njit(cache=True, nogil=True)
def _chain_remove(G, v, bkt):
    prev = int64(-1)
    cur = G.shead[bkt]
    while cur != -1:
        if cur == v:
            if prev == -1:
                G.shead[bkt] = G.snext[cur]
            else:
                G.snext[prev] = G.snext[cur]
            G.snext[cur] = -1
            return 0
        prev = cur
        cur = G.snext[cur]
    return -1


@njit(cache=True, nogil=True, inline="always")
def _chain_insert(G, v, bkt):
    G.snext[v] = G.shead[bkt]
    G.shead[bkt] = v


@njit(cache=True, nogil=True)
def _locked_find(G, a, b):
    bkt = _bucket(G, a, b)
    st = _stripe_of(G, bkt)
    lock_acquire(G.slock, st)
    h = _chain_find(G, a, b, bkt)
    lock_release(G.slock, st)
    return h


@njit(cache=True, nogil=True)
def _flag_reused(G, S, n):
    G.reused[n] = 1
    nf = S.smeta[SM_NF]
    if nf >= len(S.flagged):
        S.smeta[SM_ERROR] = E_SCRATCH
    else:
        S.flagged[nf] = n
        S.smeta[SM_NF] = nf + 1


@njit(cache=True, nogil=True)
def _ref_acquire(G, S, n, epoch):
    """Atomic count increment; raising from zero flags the node as reused.

    The first reference of a node created this pass is exempt: that is not
    a revival, just construction order.  An already-flagged node is not
    re-counted.
    """
    old = atomic_add(G.ref, n, 1)
    if old == 0 and n != 0 and G.fresh[n] != epoch and G.reused[n] == 0:
        _flag_reused(G, S, n)
        S.smeta[SM_ZOMBIES] += 1


@njit(cache=True, nogil=True)
def _flag_hit(G, S, h, epoch, hitflag):
    """Mark a strash hit under its bucket lock, without moving its count.

    The consuming edge is acquired when the consumer materializes; no drain
    runs between the two, so the count can wait.  The flag cannot: with
    ``hitflag`` (multi-worker mode) it is set even on a live node, because
    the node may sit in another worker's recycling pool between membership
    claim and prologue unstrash, and that prologue's under-lock recheck
    keys off the flag.  Single-worker runs flag only zero-count revivals so
    the exact membership walk stays unblocked.
    """
    if (hitflag != 0 or G.ref[h] == 0) and G.reused[h] == 0:
        if G.ref[h] == 0 and G.fresh[h] != epoch:
            S.smeta[SM_ZOMBIES] += 1
        _flag_reused(G, S, h)


@njit(cache=True, nogil=True)
def _dec_release(G, S, n):
    """Atomic count decrement; a zero crossing queues, never deletes."""
    old = atomic_add(G.ref, n, -1)
    if old == 1 and G.kind[n] == KIND_AND and G.dead[n] == 0:
        nq = S.smeta[SM_NQ]
        if nq >= len(S.queue):
            S.smeta[SM_ERROR] = E_SCRATCH
        else:
            S.queue[nq] = n
            S.smeta[SM_NQ] = nq + 1


# ---------------------------------------------------------------------------
# truth-table helpers over flat uint64 arrays with W words per slot


@njit(cache=True, nogil=True)
def _fill_var(ar, slot, v, w_words, tmask):
    base = slot * w_words
    if v < 6:
        for w in range(w_words):
            ar[base + w] = _VAR_MASKS[v] & tmask
    else:
        blk = 1 << (v - 6)
        for w in range(w_words):
            if (w >> (v - 6)) & 1:
                ar[base + w] = uint64(0xFFFFFFFFFFFFFFFF)
            else:
                ar[base + w] = uint64(0)


@njit(cache=True, nogil=True, inline="always")
def _pat_word(v, w):
    if v < 6:
        return _VAR_MASKS[v]
    if (w >> (v - 6)) & 1:
        return uint64(0xFFFFFFFFFFFFFFFF)
    return uint64(0)


@njit(cache=True, nogil=True)
def _tt_cof(ar, dst, src, v, half, w_words):
    """Cofactor src slot at var v (half 0 negative, 1 positive) into dst."""
    db = dst * w_words
    sb = src * w_words
    if v < 6:
        m = _VAR_MASKS[v]
        sh = uint64(1 << v)
        for w in range(w_words):
            x = ar[sb + w]
            if half == 0:
                y = x & ~m
                ar[db + w] = y | (y << sh)
            else:
                y = x & m
                ar[db + w] = y | (y >> sh)
    else:
        blk = 1 << (v - 6)
        for w in range(w_words):
            grp = w & ~(2 * blk - 1)
            off = w & (blk - 1)
            sw = grp + off + (blk if half == 1 else 0)
            ar[db + w] = ar[sb + sw]


@njit(cache=True, nogil=True)
def _tt_has_var(ar, slot, v, w_words):
    base = slot * w_words
    if v < 6:
        m = _VAR_MASKS[v]
        sh = uint64(1 << v)
        for w in range(w_words):
            x = ar[base + w]
            a = x & ~m
            b = (x >> sh) & ~m
            if a != b:
                return True
        return False
    blk = 1 << (v - 6)
    for w in range(w_words):
        if (w >> (v - 6)) & 1:
            continue
        if ar[base + w] != ar[base + w + blk]:
            return True
    return False


@njit(cache=True, nogil=True)
def _tt_is_zero(ar, slot, w_words):
    base = slot * w_words
    for w in range(w_words):
        if ar[base + w] != uint64(0):
            return False
    return True


@njit(cache=True, nogil=True)
def _tt_is_ones(ar, slot, w_words, tmask):
    base = slot * w_words
    for w in range(w_words):
        if ar[base + w] != tmask:
            return False
    return True


@njit(cache=True, nogil=True)
def _tt_eq(ar, s0, s1, w_words):
    b0 = s0 * w_words
    b1 = s1 * w_words
    for w in range(w_words):
        if ar[b0 + w] != ar[b1 + w]:
            return False
    return True


@njit(cache=True, nogil=True)
def _tt_copy(ar, dst, src, w_words):
    db = dst * w_words
    sb = src * w_words
    for w in range(w_words):
        ar[db + w] = ar[sb + w]


@njit(cache=True, nogil=True)
def _tt_zero(ar, slot, w_words):
    base = slot * w_words
    for w in range(w_words):
        ar[base + w] = uint64(0)


@njit(cache=True, nogil=True)
def _tt_ones(ar, slot, w_words, tmask):
    base = slot * w_words
    for w in range(w_words):
        ar[base + w] = tmask


@njit(cache=True, nogil=True)
def _tt_andnot(ar, dst, src, w_words):
    db = dst * w_words
    sb = src * w_words
    for w in range(w_words):
        ar[db + w] = ar[db + w] & ~ar[sb + w]


@njit(cache=True, nogil=True)
def _tt_and_into(ar, dst, src, w_words):
    db = dst * w_words
    sb = src * w_words
    for w in range(w_words):
        ar[db + w] = ar[db + w] & ar[sb + w]


@njit(cache=True, nogil=True)
def _tt_or_into(ar, dst, src, w_words):
    db = dst * w_words
    sb = src * w_words
    for w in range(w_words):
        ar[db + w] = ar[db + w] | ar[sb + w]


# ---------------------------------------------------------------------------
# cut, cone, truth table


@njit(cache=True, nogil=True)
def k_cut(G, S, root, cut_k):
    """Greedy cut growth: repeatedly expand the cheapest expandable leaf.

    Leaf cost is the number of fanins that are not already leaves; ties go
    to the lowest node id.  Expansion stops when every candidate would push
    the leaf count past ``cut_k`` or the interior count would exceed the
    cone budget.  Leaves are kept sorted ascending (canonical tt var order).
    """
    sm = S.smeta
    tag = sm[SM_TAG]
    nl = 0
    for e in range(2):
        f = G.f0[root] if e == 0 else G.f1[root]
        fn = f >> 1
        if S.mark[fn] != tag or (S.mpay[fn] & MP_LEAF) == 0:
            S.mark[fn] = tag
            S.mpay[fn] = MP_LEAF
            S.leaves[nl] = fn
            nl += 1
    if nl == 2 and S.leaves[0] > S.leaves[1]:
        t = S.leaves[0]
        S.leaves[0] = S.leaves[1]
        S.leaves[1] = t
    S.mark[root] = tag
    S.mpay[root] = MP_INTERIOR
    interior = 1
    while True:
        best = -1
        best_cost = 99
        for i in range(nl):
            lf = S.leaves[i]
            if G.kind[lf] != KIND_AND:
                continue
            cost = 0
            for e in range(2):
                f = G.f0[lf] if e == 0 else G.f1[lf]
                fn = f >> 1
                if S.mark[fn] != tag or (S.mpay[fn] & MP_LEAF) == 0:
                    cost += 1
            if cost < best_cost:
                best_cost = cost
                best = i
        if best < 0:
            break
        if nl - 1 + best_cost > cut_k:
            break
        if interior + 1 > CONE_CAP:
            break
        lf = S.leaves[best]
        for i in range(best, nl - 1):
            S.leaves[i] = S.leaves[i + 1]
        nl -= 1
        S.mpay[lf] = MP_INTERIOR
        interior += 1
        for e in range(2):
            f = G.f0[lf] if e == 0 else G.f1[lf]
            fn = f >> 1
            if S.mark[fn] == tag and (S.mpay[fn] & MP_LEAF) != 0:
                continue
            S.mark[fn] = tag
            S.mpay[fn] = MP_LEAF
            j = nl
            while j > 0 and S.leaves[j - 1] > fn:
                S.leaves[j] = S.leaves[j - 1]
                j -= 1
            S.leaves[j] = fn
            nl += 1
    sm[SM_NLEAVES] = nl


@njit(cache=True, nogil=True)
def k_cone(G, S, root):
    """Post-order DFS over the cut interior; assigns tt slots bottom-up."""
    sm = S.smeta
    tag = S.mark[root]
    ncone = 0
    sp = 0
    S.dstack[sp] = root
    sp += 1
    S.mpay[root] |= MP_VISITED
    while sp > 0:
        v = S.dstack[sp - 1]
        pend = int64(-1)
        for e in range(2):
            f = G.f0[v] if e == 0 else G.f1[v]
            fn = f >> 1
            pay = S.mpay[fn] if S.mark[fn] == tag else int64(0)
            if (pay & (MP_LEAF | MP_EMITTED)) != 0:
                continue
            if (pay & MP_VISITED) != 0:
                return int64(-E_INTEGRITY)  # revisit on stack: cycle
            if G.kind[fn] != KIND_AND:
                return int64(-E_INTEGRITY)  # walked past the cut boundary
            pend = fn
            break
        if pend >= 0:
            if sp >= len(S.dstack):
                return int64(-E_SCRATCH)
            S.mark[pend] = tag
            S.mpay[pend] = MP_INTERIOR | MP_VISITED
            S.dstack[sp] = pend
            sp += 1
            continue
        sp -= 1
        if ncone >= CONE_CAP:
            return int64(-E_SCRATCH)
        S.cone[ncone] = v
        S.mpay[v] = ((S.mpay[v] & ((1 << MP_SHIFT) - 1)) | MP_EMITTED
                     | (ncone << MP_SHIFT))
        ncone += 1
    sm[SM_NCONE] = ncone
    return int64(ncone)


@njit(cache=True, nogil=True)
def k_tt(G, S, cut_k, w_words, tmask):
    """Evaluate cone truth tables bottom-up over the sorted leaf variables."""
    sm = S.smeta
    nl = sm[SM_NLEAVES]
    for i in range(nl):
        lf = S.leaves[i]
        slot = CONE_CAP + i
        S.mpay[lf] = (S.mpay[lf] & ((1 << MP_SHIFT) - 1)) | (slot << MP_SHIFT)
        _fill_var(S.tts, slot, i, w_words, tmask)
    ncone = sm[SM_NCONE]
    for j in range(ncone):
        v = S.cone[j]
        f0 = G.f0[v]
        f1 = G.f1[v]
        s0 = S.mpay[f0 >> 1] >> MP_SHIFT
        s1 = S.mpay[f1 >> 1] >> MP_SHIFT
        b = j * w_words
        b0 = s0 * w_words
        b1 = s1 * w_words
        c0 = uint64(0xFFFFFFFFFFFFFFFF) if (f0 & 1) != 0 else uint64(0)
        c1 = uint64(0xFFFFFFFFFFFFFFFF) if (f1 & 1) != 0 else uint64(0)
        for w in range(w_words):
            S.tts[b + w] = ((S.tts[b0 + w] ^ c0) & (S.tts[b1 + w] ^ c1)) & tmask


@njit(cache=True, nogil=True)
def k_members(G, S, root, csr_off, csr_edges):
    """Read-only MFFC-within-cone membership, anchored at the cut leaves.

    A cone node joins when its current count equals the number of verified
    fanout edges coming from already-claimed members.  Iterating the cone in
    reverse emit order visits consumers before their fanins, so the check is
    complete in one sweep.  No shared counts are touched: concurrent count
    movements by other workers are permanent (acquires exclude a node
    conservatively, releases by slot recycling mean the edge really is
    gone), so a single read per node is sound, unlike a transient
    deref/re-ref walk racing another walk over a shared cone.
    """
    sm = S.smeta
    tag = sm[SM_TAG]
    ncone = sm[SM_NCONE]
    S.members[0] = root
    S.mpay[root] |= MP_MEMBER
    sz = 1
    for j in range(ncone - 2, -1, -1):
        s = S.cone[j]
        if G.reused[s] != 0:
            continue
        needed = G.ref[s]
        have = 0
        for e in range(csr_off[s], csr_off[s + 1]):
            enc = csr_edges[e]
            g = enc >> 1
            if G.dead[g] != 0:
                continue
            if S.mark[g] != tag or (S.mpay[g] & MP_MEMBER) == 0:
                continue
            cur = G.f0[g] if (enc & 1) == 0 else G.f1[g]
            if (cur >> 1) == s:
                have += 1
        if needed == have:
            S.members[sz] = s
            sz += 1
            S.mpay[s] |= MP_MEMBER
    sm[SM_NMEM] = sz
    sm[SM_MFFC] = sz
    return int64(sz)


@njit(cache=True, nogil=True)
def k_members_walk(G, S, root, supp):
    """Support-anchored deref/re-ref membership for the single-worker path.

    Anchors only the leaves the cover references (``supp`` is a bitmask
    over leaf indices): a leaf the cover dropped loses its last consumers
    at apply time, so its dying cone belongs to the claimed set, or the
    gain would miss those deaths.  Exact against the live graph, including
    nodes created earlier in this pass, which the snapshot-edge check must
    leave out (their incoming edges are younger than the snapshot).  That
    exactness is what the sequential gain ledger balances against.  Not
    safe with concurrent workers: overlapping transient walks race on
    shared cones.  Returns -E_SCRATCH when the death set outgrows the
    member buffer (the caller skips the root).
    """
    sm = S.smeta
    tag = sm[SM_TAG]
    na = 0
    for v in range(sm[SM_NLEAVES]):
        if ((supp >> v) & 1) != 0:
            S.anch[na] = S.leaves[v]
            na += 1
    sz = mffc_collect(G, root, S.anch, na, S.members, 1)
    if sz == -E_SCRATCH:
        return int64(-E_SCRATCH)
    if sz <= 0:
        return int64(-E_INTEGRITY)
    for i in range(sz):
        m = S.members[i]
        if S.mark[m] == tag:
            S.mpay[m] |= MP_MEMBER
        else:
            # dropped-leaf cones lie outside the marked cut cone
            S.mark[m] = tag
            S.mpay[m] = MP_MEMBER
    sm[SM_NMEM] = sz
    sm[SM_MFFC] = sz
    return int64(sz)


# ---------------------------------------------------------------------------
# irredundant sum-of-products (explicit-stack Minato-Morreale with L == U)


@njit(cache=True, nogil=True)
def _cube_tt(S, c, cut_k, w_words, tmask, dst):
    _tt_ones(S.arena, dst, w_words, tmask)
    base = dst * w_words
    pm = S.cpos[c]
    nm = S.cneg[c]
    for v in range(cut_k):
        if ((pm >> v) & 1) != 0:
            for w in range(w_words):
                S.arena[base + w] = S.arena[base + w] & _pat_word(v, w)
        elif ((nm >> v) & 1) != 0:
            for w in range(w_words):
                S.arena[base + w] = S.arena[base + w] & ~_pat_word(v, w)


@njit(cache=True, nogil=True)
def k_isop(S, cut_k, w_words, tmask):
    """Cover the root tt exactly; returns the cube count or a negated error.

    -E_SCRATCH: cube budget exhausted.  -E_INTEGRITY: the cover failed the
    exactness check (a bug, not an input condition).  On success the cubes
    are irredundant and sorted ascending by (positive mask, negative mask),
    i.e. by first covered minterm.
    """
    out_slot = ISOP_MAXD * 6
    tmp_slot = out_slot + 1
    root_slot = S.smeta[SM_NCONE] - 1
    rb = root_slot * w_words
    for w in range(w_words):
        S.arena[0 * w_words + w] = S.tts[rb + w]
        S.arena[1 * w_words + w] = S.tts[rb + w]
    nc = 0
    d = 0
    S.ist_state[0] = 0
    S.ist_out[0] = out_slot
    while d >= 0:
        base = 6 * d
        st = S.ist_state[d]
        if st == 0:
            if _tt_is_zero(S.arena, base, w_words):
                _tt_zero(S.arena, S.ist_out[d], w_words)
                d -= 1
                continue
            if _tt_is_ones(S.arena, base + 1, w_words, tmask):
                if nc >= CUBE_CAP:
                    return int64(-E_SCRATCH)
                S.cpos[nc] = 0
                S.cneg[nc] = 0
                nc += 1
                _tt_ones(S.arena, S.ist_out[d], w_words, tmask)
                d -= 1
                continue
            var = -1
            for v in range(cut_k):
                if (_tt_has_var(S.arena, base, v, w_words)
                        or _tt_has_var(S.arena, base + 1, v, w_words)):
                    var = v
                    break
            if var < 0:
                return int64(-E_INTEGRITY)
            S.ist_var[d] = var
            child = base + 6
            _tt_cof(S.arena, child, base, var, 0, w_words)       # L0
            _tt_cof(S.arena, tmp_slot, base + 1, var, 1, w_words)  # U1
            _tt_andnot(S.arena, child, tmp_slot, w_words)
            _tt_cof(S.arena, child + 1, base + 1, var, 0, w_words)  # U0
            S.ist_c0[d] = nc
            S.ist_state[d] = 1
            d += 1
            S.ist_state[d] = 0
            S.ist_out[d] = base + 2
        elif st == 1:
            var = S.ist_var[d]
            for j in range(S.ist_c0[d], nc):
                S.cneg[j] |= int64(1) << var
            child = base + 6
            _tt_cof(S.arena, child, base, var, 1, w_words)        # L1
            _tt_cof(S.arena, tmp_slot, base + 1, var, 0, w_words)  # U0
            _tt_andnot(S.arena, child, tmp_slot, w_words)
            _tt_cof(S.arena, child + 1, base + 1, var, 1, w_words)  # U1
            S.ist_c1[d] = nc
            S.ist_state[d] = 2
            d += 1
            S.ist_state[d] = 0
            S.ist_out[d] = base + 3
        elif st == 2:
            var = S.ist_var[d]
            for j in range(S.ist_c1[d], nc):
                S.cpos[j] |= int64(1) << var
            child = base + 6
            _tt_cof(S.arena, child, base, var, 0, w_words)        # L0
            _tt_andnot(S.arena, child, base + 2, w_words)         # & ~V0
            _tt_cof(S.arena, tmp_slot, base, var, 1, w_words)     # L1
            _tt_andnot(S.arena, tmp_slot, base + 3, w_words)      # & ~V1
            _tt_or_into(S.arena, child, tmp_slot, w_words)
            _tt_cof(S.arena, child + 1, base + 1, var, 0, w_words)  # U0
            _tt_cof(S.arena, tmp_slot, base + 1, var, 1, w_words)   # U1
            _tt_and_into(S.arena, child + 1, tmp_slot, w_words)
            S.ist_state[d] = 3
            d += 1
            S.ist_state[d] = 0
            S.ist_out[d] = S.ist_out[d - 1]
        else:
            var = S.ist_var[d]
            ob = S.ist_out[d] * w_words
            v0 = (base + 2) * w_words
            v1 = (base + 3) * w_words
            for w in range(w_words):
                p = _pat_word(var, w)
                S.arena[ob + w] = (S.arena[ob + w]
                                   | (S.arena[v0 + w] & ~p)
                                   | (S.arena[v1 + w] & p))
            d -= 1
    if not _tt_eq(S.arena, out_slot, 0, w_words):
        return int64(-E_INTEGRITY)
    # Backward irredundancy sweep: drop a cube when the rest still covers f.
    for j in range(nc):
        S.ckeep[j] = 1
    for i in range(nc - 1, -1, -1):
        _tt_zero(S.arena, out_slot, w_words)
        for j in range(nc):
            if j == i or S.ckeep[j] == 0:
                continue
            _cube_tt(S, j, cut_k, w_words, tmask, tmp_slot)
            _tt_or_into(S.arena, out_slot, tmp_slot, w_words)
        if _tt_eq(S.arena, out_slot, 0, w_words):
            S.ckeep[i] = 0
    m = 0
    for j in range(nc):
        if S.ckeep[j] != 0:
            S.cpos[m] = S.cpos[j]
            S.cneg[m] = S.cneg[j]
            m += 1
    nc = m
    for i in range(1, nc):
        p = S.cpos[i]
        q = S.cneg[i]
        j = i - 1
        while j >= 0 and (S.cpos[j] > p or (S.cpos[j] == p and S.cneg[j] > q)):
            S.cpos[j + 1] = S.cpos[j]
            S.cneg[j + 1] = S.cneg[j]
            j -= 1
        S.cpos[j + 1] = p
        S.cneg[j + 1] = q
    S.smeta[SM_NCUBES] = nc
    return int64(nc)


# ---------------------------------------------------------------------------
# candidate evaluation


@njit(cache=True, nogil=True, inline="always")
def _resolve(S, code):
    if code >= 0:
        return code
    i = (-code - 2) >> 1
    c = (-code - 2) & 1
    sl = S.slit[i]
    if sl < 0:
        return int64(-1)
    return sl ^ c


@njit(cache=True, nogil=True, inline="always")
def _neg_code(code):
    if code >= 0:
        return code ^ 1
    i = (-code - 2) >> 1
    c = (-code - 2) & 1
    return -(2 * i + (c ^ 1)) - 2


@njit(cache=True, nogil=True)
def _mark_excl(G, S, h):
    """Mark the member subtree kept alive by a hit on ``h``; returns its size.

    These members survive the rewrite, so the cost model charges each exactly
    once, and the recycling pool skips them.
    """
    tag = S.smeta[SM_TAG]
    if (S.mpay[h] & MP_EXCL) != 0:
        return int64(0)
    S.mpay[h] |= MP_EXCL | MP_HIT
    cnt = 1
    sp = 0
    S.dstack[sp] = h
    sp += 1
    while sp > 0:
        sp -= 1
        v = S.dstack[sp]
        for e in range(2):
            f = G.f0[v] if e == 0 else G.f1[v]
            fn = f >> 1
            if S.mark[fn] != tag:
                continue
            pay = S.mpay[fn]
            if (pay & MP_MEMBER) == 0 or (pay & MP_EXCL) != 0:
                continue
            S.mpay[fn] = pay | MP_EXCL
            cnt += 1
            S.dstack[sp] = fn
            sp += 1
    return cnt


@njit(cache=True, nogil=True)
def _emit_eval(G, S, x, y, glv, epoch):
    """Evaluate one AND step; returns a code or REJ.

    Steps are memoized so a duplicate key inside a candidate is charged
    once.  A strash hit on a non-fresh node whose snapshot level equals the
    group level rejects the whole candidate: accepting it would create a
    mid-pass edge onto an unprocessed root of this group.
    """
    sm = S.smeta
    rx = _resolve(S, x)
    ry = _resolve(S, y)
    nst = sm[SM_NSTEPS]
    if rx >= 0 and ry >= 0:
        a = rx if rx <= ry else ry
        b = ry if rx <= ry else rx
        if a == 0:
            return int64(0)
        if a == 1:
            return b
        if a == b:
            return a
        if (a ^ 1) == b:
            return int64(0)
        for j in range(nst):
            if S.skey0[j] == a and S.skey1[j] == b:
                return -(2 * j) - 2
        if nst >= STEP_CAP:
            sm[SM_REJ_OVERFLOW] += 1
            return REJ
        h = _locked_find(G, a, b)
        if h >= 0:
            if G.fresh[h] != epoch and G.snap[h] == glv:
                sm[SM_REJ_LEVEL] += 1
                return REJ
            member = (S.mark[h] == sm[SM_TAG]
                      and (S.mpay[h] & MP_MEMBER) != 0)
            if member:
                sm[SM_COST] += _mark_excl(G, S, h)
            elif G.ref[h] == 0:
                sm[SM_COST] += 1
            if sm[SM_COST] > sm[SM_MFFC]:
                sm[SM_REJ_GAIN] += 1
                return REJ
            S.sa[nst] = x
            S.sb[nst] = y
            S.skey0[nst] = a
            S.skey1[nst] = b
            S.slit[nst] = 2 * h
            sm[SM_NSTEPS] = nst + 1
            return -(2 * nst) - 2
        S.sa[nst] = x
        S.sb[nst] = y
        S.skey0[nst] = a
        S.skey1[nst] = b
        S.slit[nst] = -1
        sm[SM_NSTEPS] = nst + 1
        sm[SM_COST] += 1
        if sm[SM_COST] > sm[SM_MFFC]:
            sm[SM_REJ_GAIN] += 1
            return REJ
        return -(2 * nst) - 2
    for j in range(nst):
        if ((S.sa[j] == x and S.sb[j] == y)
                or (S.sa[j] == y and S.sb[j] == x)):
            return -(2 * j) - 2
    if nst >= STEP_CAP:
        sm[SM_REJ_OVERFLOW] += 1
        return REJ
    S.sa[nst] = x
    S.sb[nst] = y
    S.skey0[nst] = -1
    S.skey1[nst] = -1
    S.slit[nst] = -1
    sm[SM_NSTEPS] = nst + 1
    sm[SM_COST] += 1
    if sm[SM_COST] > sm[SM_MFFC]:
        sm[SM_REJ_GAIN] += 1
        return REJ
    return -(2 * nst) - 2


@njit(cache=True, nogil=True)
def _reduce_and(G, S, n, glv, epoch):
    """Balanced AND-reduce of S.tcodes[0:n]; returns a code or REJ."""
    if n == 0:
        return int64(1)
    while n > 1:
        m = 0
        i = 0
        while i + 1 < n:
            c = _emit_eval(G, S, S.tcodes[i], S.tcodes[i + 1], glv, epoch)
            if c == REJ:
                return REJ
            S.tcodes[m] = c
            m += 1
            i += 2
        if i < n:
            S.tcodes[m] = S.tcodes[i]
            m += 1
        n = m
    return S.tcodes[0]


@njit(cache=True, nogil=True)
def k_eval(G, S, root, P, csr_off, csr_edges):
    """Cost the candidate against the live graph; returns 1 on acceptance.

    Writes SM_OUT / SM_ABSORB / SM_GAIN for the apply step.  A buffered
    (non-absorbable) output with a concrete literal is prechecked against
    every fanout patch it would cause at inline time: a patch that would be
    trivial, collide with an existing table entry, or collide with one of
    this candidate's own step keys rejects the candidate.
    """
    sm = S.smeta
    cut_k = P[P_K]
    glv = P[P_LEVEL]
    epoch = P[P_EPOCH]
    nc = sm[SM_NCUBES]
    sm[SM_NSTEPS] = 0
    sm[SM_COST] = 0
    sm[SM_ABSORB] = 0
    out = int64(0)
    if nc == 0:
        out = int64(0)
    elif nc == 1 and S.cpos[0] == 0 and S.cneg[0] == 0:
        out = int64(1)
    else:
        for c in range(nc):
            tn = 0
            pm = S.cpos[c]
            nm = S.cneg[c]
            for v in range(cut_k):
                if ((pm >> v) & 1) != 0:
                    S.tcodes[tn] = 2 * S.leaves[v]
                    tn += 1
                elif ((nm >> v) & 1) != 0:
                    S.tcodes[tn] = 2 * S.leaves[v] + 1
                    tn += 1
            r = _reduce_and(G, S, tn, glv, epoch)
            if r == REJ:
                return int64(0)
            S.couts[c] = r
        if nc == 1:
            out = S.couts[0]
        else:
            for c in range(nc):
                S.tcodes[c] = _neg_code(S.couts[c])
            r = _reduce_and(G, S, nc, glv, epoch)
            if r == REJ:
                return int64(0)
            out = _neg_code(r)
    nst = sm[SM_NSTEPS]
    absorb = False
    rl = _resolve(S, out)
    if out < 0 and rl < 0:
        idx = (-out - 2) >> 1
        cm = (-out - 2) & 1
        if idx != nst - 1:
            sm[SM_REJ_OVERFLOW] += 1  # dangling steps; should not happen
            return int64(0)
        if cm == 0:
            absorb = True
        # complemented fresh output: patched keys contain a fresh node id,
        # so they cannot pre-exist and no precheck is needed
    if not absorb and rl >= 0:
        if (rl >> 1) == root:
            sm[SM_REJ_COLLIDE] += 1
            return int64(0)
        for e in range(csr_off[root], csr_off[root + 1]):
            g = csr_edges[e] >> 1
            if G.dead[g] != 0:
                continue
            for which in range(2):
                cur = G.f0[g] if which == 0 else G.f1[g]
                if (cur >> 1) != root:
                    continue
                q = rl ^ (cur & 1)
                o = G.f1[g] if which == 0 else G.f0[g]
                a2 = q if q <= o else o
                b2 = o if q <= o else q
                if a2 <= 1 or (a2 >> 1) == (b2 >> 1):
                    sm[SM_REJ_COLLIDE] += 1
                    return int64(0)
                for j in range(nst):
                    if S.skey0[j] == a2 and S.skey1[j] == b2:
                        sm[SM_REJ_COLLIDE] += 1
                        return int64(0)
                if _locked_find(G, a2, b2) >= 0:
                    sm[SM_REJ_COLLIDE] += 1
                    return int64(0)
    gain = sm[SM_MFFC] - sm[SM_COST]
    sm[SM_GAIN] = gain
    sm[SM_OUT] = out
    sm[SM_ABSORB] = 1 if absorb else 0
    if gain > 0 or (gain == 0 and P[P_ZERO_GAIN] != 0):
        return int64(1)
    sm[SM_REJ_GAIN] += 1
    return int64(0)


# ---------------------------------------------------------------------------
# candidate application


@njit(cache=True, nogil=True)
def _apply_prologue(G, S):
    """Retire the recycling pool from the hash table before materializing.

    Members kept alive by a hit (or revived by another worker) stay in the
    table and shield their member fanins; everything else is unhashed so no
    later probe, local or remote, can land on a dying node.  The root's own
    entry leaves the table as well: its key references member slots, and a
    fresh step built from those slots after recycling would otherwise alias
    the stale entry and wire the root into its own replacement cone.
    """
    sm = S.smeta
    nmem = sm[SM_NMEM]
    for idx in range(1, nmem):
        v = S.members[idx]
        pay = S.mpay[v]
        keep = (pay & MP_EXCL) != 0
        if not keep and G.reused[v] != 0:
            keep = True
            sm[SM_KEPT_REUSED] += 1
        if not keep:
            bkt = _bucket(G, G.f0[v], G.f1[v])
            st = _stripe_of(G, bkt)
            lock_acquire(G.slock, st)
            if G.reused[v] != 0:
                keep = True
                sm[SM_KEPT_REUSED] += 1
            else:
                _chain_remove(G, v, bkt)
                S.mpay[v] = pay | MP_UNSTR
            lock_release(G.slock, st)
        if keep:
            S.mpay[v] |= MP_EXCL
            tag = sm[SM_TAG]
            for e in range(2):
                fn = (G.f0[v] if e == 0 else G.f1[v]) >> 1
                if S.mark[fn] == tag and (S.mpay[fn] & MP_MEMBER) != 0:
                    S.mpay[fn] |= MP_EXCL
    root = S.members[0]
    bkt = _bucket(G, G.f0[root], G.f1[root])
    st = _stripe_of(G, bkt)
    lock_acquire(G.slock, st)
    _chain_remove(G, root, bkt)
    lock_release(G.slock, st)
    sm[SM_POOL_I] = 1


@njit(cache=True, nogil=True)
def _claim_slot(G, S):
    """Next recyclable slot from the pool, else the bump allocator; -1 full.

    Pool slots were already unhashed by the prologue and are unreachable by
    any probe, so claiming is lock-free.  The old occupant's fanin counts
    are released here; its incoming count stays with the slot and drains as
    the dead consumers are processed.
    """
    sm = S.smeta
    nmem = sm[SM_NMEM]
    i = sm[SM_POOL_I]
    while i < nmem:
        v = S.members[i]
        i += 1
        if (S.mpay[v] & MP_UNSTR) == 0:
            continue
        sm[SM_POOL_I] = i
        _dec_release(G, S, G.f0[v] >> 1)
        _dec_release(G, S, G.f1[v] >> 1)
        sm[SM_RECYCLED] += 1
        return int64(v)
    sm[SM_POOL_I] = i
    lock_acquire(G.meta, M_ALLOC_LOCK)
    n = G.meta[M_NNODES]
    if n >= G.meta[M_CAP]:
        lock_release(G.meta, M_ALLOC_LOCK)
        return int64(-1)
    G.meta[M_NNODES] = n + 1
    lock_release(G.meta, M_ALLOC_LOCK)
    atomic_add(G.meta, M_NANDS, 1)
    G.ref[n] = 0
    sm[SM_ALLOCS] += 1
    return int64(n)


@njit(cache=True, nogil=True)
def _materialize_step(G, S, i, epoch, hitflag):
    """Resolve step i into a literal: trivia, memo, hit, or a new node."""
    rx = _resolve(S, S.sa[i])
    ry = _resolve(S, S.sb[i])
    if rx < 0 or ry < 0:
        return int64(-E_INTEGRITY)
    a = rx if rx <= ry else ry
    b = ry if rx <= ry else rx
    if a == 0 or (a ^ 1) == b:
        S.slit[i] = 0
        S.skey0[i] = -1
        S.skey1[i] = -1
        return int64(0)
    if a == 1 or a == b:
        r = b if a == 1 else a
        S.slit[i] = r
        S.skey0[i] = -1
        S.skey1[i] = -1
        return r
    for j in range(i):
        if S.skey0[j] == a and S.skey1[j] == b:
            S.slit[i] = S.slit[j]
            S.skey0[i] = a
            S.skey1[i] = b
            return S.slit[j]
    S.skey0[i] = a
    S.skey1[i] = b
    while True:
        bkt = _bucket(G, a, b)
        st = _stripe_of(G, bkt)
        lock_acquire(G.slock, st)
        h = _chain_find(G, a, b, bkt)
        if h >= 0:
            _flag_hit(G, S, h, epoch, hitflag)
            lock_release(G.slock, st)
            S.slit[i] = 2 * h
            return int64(2 * h)
        lock_release(G.slock, st)
        s = _claim_slot(G, S)
        if s < 0:
            return int64(-E_CAPACITY)
        G.f0[s] = a
        G.f1[s] = b
        la = G.lvl[a >> 1]
        lb = G.lvl[b >> 1]
        G.lvl[s] = (la if la >= lb else lb) + 1
        G.kind[s] = KIND_AND
        G.dead[s] = 0
        G.reused[s] = 0
        G.fresh[s] = epoch
        G.snap[s] = G.lvl[s]
        # operand counts are taken before publication so that, if the
        # insert loses a race and the slot is orphaned, its edges are
        # still fully counted and the deletion cascade stays consistent
        _ref_acquire(G, S, a >> 1, epoch)
        _ref_acquire(G, S, b >> 1, epoch)
        lock_acquire(G.slock, st)
        h2 = _chain_find(G, a, b, bkt)
        if h2 >= 0:
            lock_release(G.slock, st)
            continue  # retry: the next probe takes the hit path
        _chain_insert(G, s, bkt)
        lock_release(G.slock, st)
        S.slit[i] = 2 * s
        return int64(2 * s)


@njit(cache=True, nogil=True)
def k_apply(G, S, root, P):
    """Rewrite ``root`` to the accepted candidate.

    The output either absorbs into the root slot (root is re-keyed in place
    under its new fanins) or the root becomes an unhashed forward buffer
    AND(out, 1), recorded for inlining at the group boundary.  The old root
    fanins are released last.
    """
    sm = S.smeta
    epoch = P[P_EPOCH]
    hitflag = P[P_MEMBERS]
    of0 = G.f0[root]
    of1 = G.f1[root]
    nst = sm[SM_NSTEPS]
    absorb = sm[SM_ABSORB] != 0
    _apply_prologue(G, S)
    lim = nst - 1 if absorb else nst
    for i in range(lim):
        r = _materialize_step(G, S, i, epoch, hitflag)
        if r < 0:
            sm[SM_ERROR] = -r
            return r
        if sm[SM_ERROR] != 0:
            return int64(-sm[SM_ERROR])
    noop = False
    mode = 0  # 0 undecided, 1 absorbed, 2 buffered
    rl = int64(-2)
    if absorb:
        i = nst - 1
        rx = _resolve(S, S.sa[i])
        ry = _resolve(S, S.sb[i])
        if rx < 0 or ry < 0:
            sm[SM_ERROR] = E_INTEGRITY
            return int64(-E_INTEGRITY)
        a = rx if rx <= ry else ry
        b = ry if rx <= ry else rx
        if a == 0 or (a ^ 1) == b:
            rl = int64(0)
        elif a == 1:
            rl = b
        elif a == b:
            rl = a
        else:
            for j in range(i):
                if S.skey0[j] == a and S.skey1[j] == b:
                    rl = S.slit[j]
                    break
        if rl == -2:
            bkt = _bucket(G, a, b)
            st = _stripe_of(G, bkt)
            lock_acquire(G.slock, st)
            h = _chain_find(G, a, b, bkt)
            if h >= 0:
                # the key exists; fall through to the buffer path on it
                _flag_hit(G, S, h, epoch, hitflag)
                lock_release(G.slock, st)
                rl = 2 * h
                S.slit[i] = rl
            elif a == of0 and b == of1:
                # alias: the new key equals the old one; restore the entry
                # the prologue pulled.  The old fanin edges stand in for
                # the new ones count-for-count, so nothing is released.
                _chain_insert(G, root, bkt)
                lock_release(G.slock, st)
                G.fresh[root] = epoch
                S.slit[i] = 2 * root
                noop = True
                mode = 1
            else:
                G.f0[root] = a
                G.f1[root] = b
                _chain_insert(G, root, bkt)
                lock_release(G.slock, st)
                la = G.lvl[a >> 1]
                lb = G.lvl[b >> 1]
                G.lvl[root] = (la if la >= lb else lb) + 1
                G.fresh[root] = epoch
                G.snap[root] = P[P_LEVEL]
                _ref_acquire(G, S, a >> 1, epoch)
                _ref_acquire(G, S, b >> 1, epoch)
                S.slit[i] = 2 * root
                mode = 1
                sm[SM_ABS_CNT] += 1
    if mode == 0:
        if rl == -2:
            rl = _resolve(S, sm[SM_OUT])
        if rl < 0 or (rl >> 1) == root:
            sm[SM_ERROR] = E_INTEGRITY
            return int64(-E_INTEGRITY)
        G.f0[root] = rl
        G.f1[root] = 1
        G.lvl[root] = G.lvl[rl >> 1]
        G.fresh[root] = epoch
        _ref_acquire(G, S, rl >> 1, epoch)
        atomic_add(G.ref, 0, 1)
        na = sm[SM_NAPP]
        if na >= len(S.approot):
            sm[SM_ERROR] = E_SCRATCH
            return int64(-E_SCRATCH)
        S.approot[na] = root
        S.apout[na] = rl
        sm[SM_NAPP] = na + 1
        sm[SM_BUF_CNT] += 1
        mode = 2
    if not noop:
        _dec_release(G, S, of0 >> 1)
        _dec_release(G, S, of1 >> 1)
    sm[SM_OUTLIT] = 2 * root if mode == 1 else rl
    sm[SM_ACCEPTED] += 1
    sm[SM_GAINSUM] += sm[SM_GAIN]
    if sm[SM_ERROR] != 0:
        return int64(-sm[SM_ERROR])
    return int64(1)


# ---------------------------------------------------------------------------
# per-node driver


@njit(cache=True, nogil=True)
def k_refactor_one(G, S, P, tmask, root, csr_off, csr_edges):
    """Full cut / cone / cover / evaluate / apply pipeline for one root.

    Returns 1 if a rewrite was applied, 0 if skipped or rejected, negative
    on an abort-class error (capacity or scratch exhaustion).
    """
    sm = S.smeta
    if (root >= G.meta[M_NNODES] or G.dead[root] != 0
            or G.kind[root] != KIND_AND or G.f1[root] == 1
            or G.ref[root] == 0):
        return int64(0)
    sm[SM_VISITED] += 1
    sm[SM_TAG] += 1
    cut_k = P[P_K]
    w_words = P[P_W]
    k_cut(G, S, root, cut_k)
    if sm[SM_NLEAVES] < 2:
        sm[SM_SKIPPED] += 1
        return int64(0)
    rc = k_cone(G, S, root)
    if rc < 0:
        sm[SM_ERROR] = -rc
        return rc
    k_tt(G, S, cut_k, w_words, tmask)
    rc = k_isop(S, cut_k, w_words, tmask)
    if rc == -E_SCRATCH:
        sm[SM_SKIPPED] += 1
        return int64(0)
    if rc < 0:
        sm[SM_ERROR] = -rc
        return rc
    if P[P_MEMBERS] != 0:
        sz = k_members(G, S, root, csr_off, csr_edges)
    else:
        supp = int64(0)
        for c in range(sm[SM_NCUBES]):
            supp |= S.cpos[c] | S.cneg[c]
        sz = k_members_walk(G, S, root, supp)
        if sz == -E_SCRATCH:
            sm[SM_SKIPPED] += 1
            return int64(0)
    if sz <= 0:
        sm[SM_ERROR] = E_INTEGRITY
        return int64(-E_INTEGRITY)
    sm[SM_EVALUATED] += 1
    acc = k_eval(G, S, root, P, csr_off, csr_edges)
    if acc == 0 or P[P_APPLY] == 0:
        return int64(0)
    return k_apply(G, S, root, P)


@njit(cache=True, nogil=True)
def k_process_range(G, S, P, tmask, ids, lo, hi, csr_off, csr_edges):
    for i in range(lo, hi):
        r = k_refactor_one(G, S, P, tmask, ids[i], csr_off, csr_edges)
        if r < 0:
            return r
        if S.smeta[SM_ERROR] != 0:
            return int64(-S.smeta[SM_ERROR])
    return int64(0)


# ---------------------------------------------------------------------------
# post-processing (single-threaded between level groups)


@njit(cache=True, nogil=True)
def _p_acquire(G, PS, n):
    old = atomic_add(G.ref, n, 1)
    if old == 0:
        G.reused[n] = 1
        nf = PS.pc[PC_NF]
        if nf < len(PS.flag):
            PS.flag[nf] = n
            PS.pc[PC_NF] = nf + 1


@njit(cache=True, nogil=True)
def _p_patch_edge(G, PS, v, which, val, expect):
    """Repoint v's fanin edge off ``expect`` onto literal ``val``.

    Rewrites v under its new key; if the new key is trivial or collides
    with an existing entry, v is left unhashed with valid edges and queued
    for merge substitution.
    """
    cur = G.f0[v] if which == 0 else G.f1[v]
    c = cur & 1
    nl = val ^ c
    if G.f1[v] == 1:
        # forward buffer: retarget only, never hashed or normalized
        G.f0[v] = nl
        _p_acquire(G, PS, nl >> 1)
        atomic_add(G.ref, expect, -1)
        return
    other = G.f1[v] if which == 0 else G.f0[v]
    a = nl if nl <= other else other
    b = other if nl <= other else nl
    strash_remove(G, v)
    G.f0[v] = a
    G.f1[v] = b
    la = G.lvl[a >> 1]
    lb = G.lvl[b >> 1]
    G.lvl[v] = (la if la >= lb else lb) + 1
    _p_acquire(G, PS, nl >> 1)
    atomic_add(G.ref, expect, -1)
    if a <= 1 or (a >> 1) == (b >> 1):
        if a == 0 or (a ^ 1) == b:
            tv = int64(0)
        elif a == 1:
            tv = b
        else:
            tv = a
        wn = PS.pc[PC_WL]
        PS.wl[wn] = v
        PS.wl[wn + 1] = tv
        PS.pc[PC_WL] = wn + 2
        PS.pc[PC_TRIVIAL] += 1
        return
    bkt = _bucket(G, a, b)
    h = _chain_find(G, a, b, bkt)
    if h >= 0:
        wn = PS.pc[PC_WL]
        PS.wl[wn] = v
        PS.wl[wn + 1] = 2 * h
        PS.pc[PC_WL] = wn + 2
        PS.pc[PC_MERGED] += 1
        return
    _chain_insert(G, v, bkt)


@njit(cache=True, nogil=True)
def _p_merge_drain(G, PS, po_lits):
    """Substitute queued duplicate nodes into their key holders.

    Queued nodes are already unhashed with valid (possibly degenerate)
    edges.  Consumers are found by a full scan: these merges only arise
    from racy parallel interleavings, where fanout snapshots can be stale.
    Each drained node must end at count zero and is then deleted.
    """
    while PS.pc[PC_WL] > 0:
        wn = PS.pc[PC_WL] - 2
        g = PS.wl[wn]
        val = PS.wl[wn + 1]
        PS.pc[PC_WL] = wn
        if G.dead[g] != 0:
            continue
        if (val >> 1) == g:
            PS.pc[PC_ERRNODE] = g
            return int64(-E_INTEGRITY)
        nn = G.meta[M_NNODES]
        for v in range(1, nn):
            if G.dead[v] != 0 or G.kind[v] != KIND_AND or v == g:
                continue
            if (G.f0[v] >> 1) == g:
                _p_patch_edge(G, PS, v, 0, val, g)
            if G.f1[v] != 1 and (G.f1[v] >> 1) == g:
                _p_patch_edge(G, PS, v, 1, val, g)
        for j in range(len(po_lits)):
            if (po_lits[j] >> 1) == g:
                po_lits[j] = val ^ (po_lits[j] & 1)
                _p_acquire(G, PS, val >> 1)
                atomic_add(G.ref, g, -1)
        if G.ref[g] != 0:
            PS.pc[PC_ERRNODE] = g
            return int64(-E_INTEGRITY)
        r = delete_dereferenced(G, g, PS.dsink, 0, PS.dwork)
        if r < 0:
            PS.pc[PC_ERRNODE] = g
            return r
        PS.pc[PC_DELETED] += r
    return int64(0)


@njit(cache=True, nogil=True)
def k_drain(G, PS, queue, nq, deferred, nd, epoch):
    """Run deletion cascades for one worker's queue, in queue order.

    Entries that were revived keep living; revived entries back at count
    zero are deferred to the end-of-pass sweep; a non-reused entry with a
    nonzero count is counted as a warning and retained.  A referenced entry
    created this pass is skipped silently: a queued slot can be recycled
    into (or revived as) live new logic, leaving its queue entry stale.
    """
    for t in range(nq):
        v = queue[t]
        if G.dead[v] != 0 or G.kind[v] != KIND_AND:
            continue
        if G.ref[v] != 0:
            if G.reused[v] == 0 and G.fresh[v] != epoch:
                PS.pc[PC_WARN] += 1
            continue
        if G.reused[v] != 0:
            if nd < len(deferred):
                deferred[nd] = v
                nd += 1
                PS.pc[PC_DEFERRED] += 1
            continue
        r = delete_dereferenced(G, v, PS.dsink, 0, PS.dwork)
        if r < 0:
            PS.pc[PC_ERRNODE] = v
            return int64(-E_DOUBLE_DELETE)
        PS.pc[PC_DELETED] += r
    return int64(nd)


@njit(cache=True, nogil=True)
def k_inline(G, PS, roots, outs, napp, csr_off, csr_edges, po_off, po_idx,
             po_lits, strict):
    """Inline buffered roots: patch fanout edges and PO entries, then delete.

    Fanout edges come from the pass-start snapshot; edges are verified by
    value before patching.  With ``strict`` (the sequential path) every
    buffer must drain to count zero and no merge may occur.
    """
    for t in range(napp):
        r = roots[t]
        if G.dead[r] != 0 or G.f1[r] != 1:
            PS.pc[PC_ERRNODE] = r
            return int64(-E_INTEGRITY)
        rl = G.f0[r]  # authoritative: an earlier merge scan may have retargeted it
        if G.dead[rl >> 1] != 0:
            PS.pc[PC_ERRNODE] = r
            return int64(-E_INTEGRITY)
        for e in range(csr_off[r], csr_off[r + 1]):
            g = csr_edges[e] >> 1
            if G.dead[g] != 0 or g == r:
                continue
            if (G.f0[g] >> 1) == r:
                _p_patch_edge(G, PS, g, 0, rl, r)
            if G.f1[g] != 1 and (G.f1[g] >> 1) == r:
                _p_patch_edge(G, PS, g, 1, rl, r)
        for jj in range(po_off[r], po_off[r + 1]):
            j = po_idx[jj]
            cur = po_lits[j]
            if (cur >> 1) == r:
                po_lits[j] = rl ^ (cur & 1)
                _p_acquire(G, PS, rl >> 1)
                atomic_add(G.ref, r, -1)
        rc = _p_merge_drain(G, PS, po_lits)
        if rc < 0:
            return rc
        if G.ref[r] != 0:
            if strict != 0:
                PS.pc[PC_ERRNODE] = r
                return int64(-E_INTEGRITY)
            # stale fanout snapshot: substitute through a full scan
            PS.pc[PC_RETAINED] += 1
            wn = PS.pc[PC_WL]
            PS.wl[wn] = r
            PS.wl[wn + 1] = rl
            PS.pc[PC_WL] = wn + 2
            rc = _p_merge_drain(G, PS, po_lits)
            if rc < 0:
                return rc
        else:
            rc = delete_dereferenced(G, r, PS.dsink, 0, PS.dwork)
            if rc < 0:
                PS.pc[PC_ERRNODE] = r
                return rc
            PS.pc[PC_DELETED] += rc
        if strict != 0 and PS.pc[PC_MERGED] + PS.pc[PC_TRIVIAL] > 0:
            PS.pc[PC_ERRNODE] = r
            return int64(-E_INTEGRITY)
    return int64(0)


@njit(cache=True, nogil=True)
def k_clear_flags(G, arr, n):
    for i in range(n):
        G.reused[arr[i]] = 0


@njit(cache=True, nogil=True)
def k_sweep(G, PS, candidates, n):
    """End-of-pass sweep: delete still-dead candidates (deferred zombies)."""
    for i in range(n):
        v = candidates[i]
        if (G.dead[v] == 0 and G.kind[v] == KIND_AND and G.ref[v] == 0
                and G.reused[v] == 0):
            r = delete_dereferenced(G, v, PS.dsink, 0, PS.dwork)
            if r < 0:
                PS.pc[PC_ERRNODE] = v
                return r
            PS.pc[PC_DELETED] += r
    return int64(0)


@njit(cache=True, nogil=True)
def k_collect_zero_ref(G, out):
    """List live AND nodes with count zero (sweep candidates)."""
    n = 0
    nn = G.meta[M_NNODES]
    for v in range(1, nn):
        if G.dead[v] == 0 and G.kind[v] == KIND_AND and G.ref[v] == 0:
            out[n] = v
            n += 1
    return int64(n)


@njit(cache=True, nogil=True)
def k_seq_range(G, S, P, tmask, ids, lo, hi, csr_off, csr_edges,
                PS, po_off, po_idx, po_lits, deferred, nd):
    """Single-worker driver: refactor each root, then clean up immediately.

    Draining the deletion queue after every accepted rewrite keeps counts
    exact for the next root's membership walk, so each death is charged to
    exactly one accepted gain and the pass ledger closes without slack.
    """
    epoch = P[P_EPOCH]
    for i in range(lo, hi):
        r = k_refactor_one(G, S, P, tmask, ids[i], csr_off, csr_edges)
        if r < 0:
            return r
        if S.smeta[SM_ERROR] != 0:
            return int64(-S.smeta[SM_ERROR])
        if r == 0:
            continue
        nq = S.smeta[SM_NQ]
        if nq > 0:
            nd2 = k_drain(G, PS, S.queue, nq, deferred, nd, epoch)
            if nd2 < 0:
                return nd2
            nd = nd2
            S.smeta[SM_NQ] = 0
        napp = S.smeta[SM_NAPP]
        if napp > 0:
            rc = k_inline(G, PS, S.approot, S.apout, napp, csr_off,
                          csr_edges, po_off, po_idx, po_lits, P[P_STRICT])
            if rc < 0:
                return rc
            S.smeta[SM_NAPP] = 0
        nf = S.smeta[SM_NF]
        if nf > 0:
            k_clear_flags(G, S.flagged, nf)
            S.smeta[SM_NF] = 0
        pf = PS.pc[PC_NF]
        if pf > 0:
            k_clear_flags(G, PS.flag, pf)
            PS.pc[PC_NF] = 0
    return int64(nd)
