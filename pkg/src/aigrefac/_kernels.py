"""Compiled graph kernels shared by construction, I/O, audits, and the engine.

The AIG lives in a structure-of-arrays bundle (the ``Graph`` namedtuple).
Node 0 is the constant-false node; literals are ``2 * node_id + complement``.
All kernels here are single-writer unless stated otherwise; the ones used
concurrently by the engine only touch reference counts through atomics.
"""

from collections import namedtuple

import numpy as np
from numba import int64, njit, uint64

from ._atomics import atomic_add

KIND_CONST = 0
KIND_PI = 1
KIND_AND = 2

# meta slots
M_NNODES = 0
M_NANDS = 1
M_CAP = 2
M_ALLOC_LOCK = 3
M_ERROR = 4
M_WARN = 5
M_EPOCH = 6         # pass counter; marks nodes created in the current pass

# kernel error codes (returned negated)
E_CAPACITY = 1
E_CYCLE = 2
E_DOUBLE_DELETE = 3
E_DEAD_OPERAND = 4
E_SCRATCH = 5
E_INTEGRITY = 6

Graph = namedtuple(
    "Graph",
    ["f0", "f1", "lvl", "ref", "kind", "dead", "reused", "fresh",
     "shead", "snext", "slock", "meta", "snap"],
)

# truth-table word patterns for variables 0..5
_VAR_MASKS = np.array(
    [0xAAAAAAAAAAAAAAAA, 0xCCCCCCCCCCCCCCCC, 0xF0F0F0F0F0F0F0F0,
     0xFF00FF00FF00FF00, 0xFFFF0000FFFF0000, 0xFFFFFFFF00000000],
    dtype=np.uint64,
)


@njit(cache=True, nogil=True, inline="always")
def hash_key(l0, l1, mask):
    h = uint64(l0) * uint64(0x9E3779B97F4A7C15)
    h ^= uint64(l1) * uint64(0xC2B2AE3D27D4EB4F)
    h ^= h >> uint64(33)
    h *= uint64(0xFF51AFD7ED558CCD)
    h ^= h >> uint64(29)
    return int64(h & uint64(mask))


@njit(cache=True, nogil=True)
def strash_find(G, l0, l1):
    b = hash_key(l0, l1, len(G.shead) - 1)
    n = G.shead[b]
    while n != -1:
        if G.f0[n] == l0 and G.f1[n] == l1:
            return n
        n = G.snext[n]
    return int64(-1)


@njit(cache=True, nogil=True)
def strash_insert(G, n):
    b = hash_key(G.f0[n], G.f1[n], len(G.shead) - 1)
    G.snext[n] = G.shead[b]
    G.shead[b] = n


@njit(cache=True, nogil=True)
def strash_remove(G, n):
    b = hash_key(G.f0[n], G.f1[n], len(G.shead) - 1)
    prev = int64(-1)
    cur = G.shead[b]
    while cur != -1:
        if cur == n:
            if prev == -1:
                G.shead[b] = G.snext[cur]
            else:
                G.snext[prev] = G.snext[cur]
            G.snext[cur] = -1
            return 0
        prev = cur
        cur = G.snext[cur]
    return -1


@njit(cache=True, nogil=True)
def strash_rebuild(G):
    for b in range(len(G.shead)):
        G.shead[b] = -1
    n = G.meta[M_NNODES]
    for i in range(n):
        if G.dead[i] == 0 and G.kind[i] == KIND_AND and G.f1[i] != 1:
            strash_insert(G, i)


@njit(cache=True, nogil=True)
def add_and(G, a, b):
    """Single-writer structural-hash AND; returns a literal or a negated error.

    A table hit does not touch reference counts (caller's contract).  A miss
    allocates the next slot, increments both fanin counts, and sets level to
    1 + max of the fanin levels.
    """
    if a > b:
        a, b = b, a
    if G.dead[a >> 1] != 0 or G.dead[b >> 1] != 0:
        return int64(-E_DEAD_OPERAND)
    if a == 0:
        return int64(0)
    if a == 1:
        return b
    if a == b:
        return a
    if (a ^ 1) == b:
        return int64(0)
    h = strash_find(G, a, b)
    if h != -1:
        return 2 * h
    n = G.meta[M_NNODES]
    if n >= G.meta[M_CAP]:
        return int64(-E_CAPACITY)
    G.meta[M_NNODES] = n + 1
    G.meta[M_NANDS] += 1
    G.f0[n] = a
    G.f1[n] = b
    na = a >> 1
    nb = b >> 1
    la = G.lvl[na]
    lb = G.lvl[nb]
    G.lvl[n] = (la if la >= lb else lb) + 1
    G.kind[n] = KIND_AND
    G.dead[n] = 0
    G.reused[n] = 0
    G.fresh[n] = 0
    G.ref[n] = 0
    G.ref[na] += 1
    G.ref[nb] += 1
    strash_insert(G, n)
    return 2 * n


@njit(cache=True, nogil=True)
def build_ands(G, rhs0, rhs1, litmap, base):
    """Bulk add_and over parsed (rhs0, rhs1) pairs.

    ``litmap`` maps source variable index to current literal; entries
    ``base..base+len-1`` are filled with the resulting literals.  Returns 0
    or a negated error code with the failing index encoded in meta[M_ERROR].
    """
    for i in range(len(rhs0)):
        r0 = rhs0[i]
        r1 = rhs1[i]
        ma = litmap[r0 >> 1]
        mb = litmap[r1 >> 1]
        if ma < 0 or mb < 0:
            G.meta[M_ERROR] = i
            return int64(-E_INTEGRITY)
        a = ma ^ (r0 & 1)
        b = mb ^ (r1 & 1)
        r = add_and(G, a, b)
        if r < 0:
            G.meta[M_ERROR] = i
            return r
        litmap[base + i] = r
    return int64(0)


@njit(cache=True, nogil=True)
def copy_shifted(G, src_f0, src_f1, n_src_nodes, n_src_pis, node_base, pi_base):
    """Append a disjoint structural copy of a boundary-form source graph.

    Source node i (an And) becomes node ``node_base + (i - 1 - n_src_pis)``
    offset into this graph; source PIs 1..n_src_pis map to
    ``pi_base..pi_base+n_src_pis-1``.  Levels and ref counts are copied by the
    caller.  No strash maintenance: caller rebuilds if needed.
    """
    shift_and = node_base - (1 + n_src_pis)
    for i in range(1 + n_src_pis, n_src_nodes):
        a = src_f0[i]
        b = src_f1[i]
        an = a >> 1
        bn = b >> 1
        if an > n_src_pis:
            an += shift_and
        elif an >= 1:
            an += pi_base - 1
        if bn > n_src_pis:
            bn += shift_and
        elif bn >= 1:
            bn += pi_base - 1
        j = i + shift_and
        G.f0[j] = (an << 1) | (a & 1)
        G.f1[j] = (bn << 1) | (b & 1)
        G.kind[j] = KIND_AND
        G.dead[j] = 0
        G.reused[j] = 0
        G.fresh[j] = 0


@njit(cache=True, nogil=True)
def levelize(G, out_lvl, stack, state):
    """Recompute levels for all live nodes; returns 0 or -E_CYCLE."""
    n = G.meta[M_NNODES]
    for i in range(n):
        state[i] = 0
        out_lvl[i] = 0 if G.kind[i] != KIND_AND else -1
    for s in range(n):
        if G.dead[s] != 0 or out_lvl[s] >= 0:
            continue
        sp = 0
        stack[sp] = s
        sp += 1
        state[s] = 1
        while sp > 0:
            v = stack[sp - 1]
            if out_lvl[v] >= 0:
                sp -= 1
                continue
            c0 = G.f0[v] >> 1
            c1 = G.f1[v] >> 1
            if out_lvl[c0] < 0:
                if state[c0] == 1:
                    return int64(-E_CYCLE)
                stack[sp] = c0
                sp += 1
                state[c0] = 1
            elif out_lvl[c1] < 0:
                if state[c1] == 1:
                    return int64(-E_CYCLE)
                stack[sp] = c1
                sp += 1
                state[c1] = 1
            else:
                a = out_lvl[c0]
                b = out_lvl[c1]
                out_lvl[v] = (a if a >= b else b) + 1
                state[v] = 0
                sp -= 1
    return int64(0)


@njit(cache=True, nogil=True)
def mffc_collect(G, root, anchors, n_anchors, members, flag_aware):
    """Deref/re-ref MFFC walk; fills ``members`` (root first), returns size.

    ``anchors`` are node ids temporarily referenced during the walk (the cut
    leaves in engine use; none for the plain operator).  Counts are restored
    bit-identically.  Returns -E_SCRATCH on member overflow.
    """
    if G.kind[root] != KIND_AND or G.dead[root] != 0:
        return int64(0)
    for i in range(n_anchors):
        atomic_add(G.ref, anchors[i], 1)
    cnt = 1
    members[0] = root
    head = 0
    ovf = False
    while head < cnt:
        if cnt + 2 > len(members):
            ovf = True
            break
        v = members[head]
        head += 1
        for e in range(2):
            f = G.f0[v] if e == 0 else G.f1[v]
            fn = f >> 1
            old = atomic_add(G.ref, fn, -1)
            if (old == 1 and G.kind[fn] == KIND_AND and G.dead[fn] == 0
                    and not (flag_aware != 0 and G.reused[fn] != 0)):
                members[cnt] = fn
                cnt += 1
    for i in range(head):
        v = members[i]
        atomic_add(G.ref, G.f0[v] >> 1, 1)
        atomic_add(G.ref, G.f1[v] >> 1, 1)
    for i in range(n_anchors):
        atomic_add(G.ref, anchors[i], -1)
    if ovf:
        return int64(-E_SCRATCH)
    return int64(cnt)


@njit(cache=True, nogil=True)
def delete_dereferenced(G, root, sink, sink_n, work):
    """Tombstone ``root`` and cascade through fanins whose count reaches zero.

    Reuse-flagged nodes are skipped (left alive).  Deleted ids are appended to
    ``sink``; returns the new sink length or -E_DOUBLE_DELETE.
    """
    if G.dead[root] != 0 or G.kind[root] != KIND_AND:
        return int64(-E_DOUBLE_DELETE)
    sp = 0
    work[sp] = root
    sp += 1
    while sp > 0:
        sp -= 1
        v = work[sp]
        if G.f1[v] != 1:
            strash_remove(G, v)
        G.dead[v] = 1
        G.meta[M_NANDS] -= 1
        a = G.f0[v]
        b = G.f1[v]
        G.f0[v] = 0
        G.f1[v] = 0
        sink[sink_n] = v
        sink_n += 1
        for e in range(2):
            fn = (a if e == 0 else b) >> 1
            old = atomic_add(G.ref, fn, -1)
            if (old == 1 and G.kind[fn] == KIND_AND and G.dead[fn] == 0
                    and G.reused[fn] == 0):
                work[sp] = fn
                sp += 1
    return sink_n


@njit(cache=True, nogil=True)
def recount_refs(G, po_nodes, tmp):
    """Audit: recount refs from live fanin edges plus POs; -1 ok else node id."""
    n = G.meta[M_NNODES]
    for i in range(n):
        tmp[i] = 0
    for i in range(n):
        if G.dead[i] == 0 and G.kind[i] == KIND_AND:
            tmp[G.f0[i] >> 1] += 1
            tmp[G.f1[i] >> 1] += 1
    for j in range(len(po_nodes)):
        tmp[po_nodes[j]] += 1
    for i in range(n):
        if G.dead[i] == 0 and tmp[i] != G.ref[i]:
            return int64(i)
    return int64(-1)


@njit(cache=True, nogil=True)
def audit_strash(G):
    """Audit: canonical form and exact table membership; -1 ok else node id.

    Live non-buffer Ands must each be found under their own key (catching
    duplicates and missing entries), and the table must contain exactly them.
    """
    n = G.meta[M_NNODES]
    cnt = 0
    for i in range(n):
        if G.dead[i] != 0 or G.kind[i] != KIND_AND:
            continue
        if G.f1[i] == 1:
            return int64(i)  # buffers must not survive to a boundary
        if G.f0[i] > G.f1[i] or G.f0[i] <= 1:
            return int64(i)
        if (G.f0[i] >> 1) == (G.f1[i] >> 1):
            return int64(i)
        if strash_find(G, G.f0[i], G.f1[i]) != i:
            return int64(i)
        cnt += 1
    tot = 0
    for b in range(len(G.shead)):
        x = G.shead[b]
        while x != -1:
            if G.dead[x] != 0:
                return int64(x)
            tot += 1
            x = G.snext[x]
    if tot != cnt:
        return int64(-2)
    return int64(-1)


@njit(cache=True, nogil=True)
def audit_topo_ids(G):
    """Audit: fanin ids strictly below node id for live Ands; -1 ok."""
    n = G.meta[M_NNODES]
    for i in range(n):
        if G.dead[i] == 0 and G.kind[i] == KIND_AND:
            if (G.f0[i] >> 1) >= i or (G.f1[i] >> 1) >= i:
                return int64(i)
    return int64(-1)


@njit(cache=True, nogil=True)
def count_fanouts(G, cnt):
    n = G.meta[M_NNODES]
    for i in range(n + 1):
        cnt[i] = 0
    for v in range(n):
        if G.dead[v] == 0 and G.kind[v] == KIND_AND:
            cnt[(G.f0[v] >> 1) + 1] += 1
            cnt[(G.f1[v] >> 1) + 1] += 1


@njit(cache=True, nogil=True)
def fill_fanouts(G, off, cur, edges):
    # edges hold (fanout_node << 1) | which_fanin
    n = G.meta[M_NNODES]
    for i in range(n):
        cur[i] = off[i]
    for v in range(n):
        if G.dead[v] == 0 and G.kind[v] == KIND_AND:
            e0 = G.f0[v] >> 1
            edges[cur[e0]] = v << 1
            cur[e0] += 1
            e1 = G.f1[v] >> 1
            edges[cur[e1]] = (v << 1) | 1
            cur[e1] += 1


@njit(cache=True, nogil=True)
def simulate_words(G, pi_nodes, pi_words, node_words, po_lits, po_words):
    """Bit-parallel simulation of a boundary-form (id-topological) graph."""
    n = G.meta[M_NNODES]
    W = pi_words.shape[1]
    for w in range(W):
        node_words[0, w] = uint64(0)
    for i in range(len(pi_nodes)):
        r = pi_nodes[i]
        for w in range(W):
            node_words[r, w] = pi_words[i, w]
    for v in range(n):
        if G.kind[v] != KIND_AND or G.dead[v] != 0:
            continue
        a = G.f0[v]
        b = G.f1[v]
        an = a >> 1
        bn = b >> 1
        if a & 1:
            if b & 1:
                for w in range(W):
                    node_words[v, w] = ~node_words[an, w] & ~node_words[bn, w]
            else:
                for w in range(W):
                    node_words[v, w] = ~node_words[an, w] & node_words[bn, w]
        else:
            if b & 1:
                for w in range(W):
                    node_words[v, w] = node_words[an, w] & ~node_words[bn, w]
            else:
                for w in range(W):
                    node_words[v, w] = node_words[an, w] & node_words[bn, w]
    for j in range(len(po_lits)):
        ln = po_lits[j] >> 1
        if po_lits[j] & 1:
            for w in range(W):
                po_words[j, w] = ~node_words[ln, w]
        else:
            for w in range(W):
                po_words[j, w] = node_words[ln, w]


@njit(cache=True, nogil=True)
def fill_exhaustive(pi_words, base_pattern):
    """Fill PI words with minterm enumeration starting at pattern index 0.

    Word w covers minterms [base + 64*w, base + 64*w + 63]; PI i is bit i of
    the minterm index.
    """
    npi = pi_words.shape[0]
    W = pi_words.shape[1]
    for i in range(npi):
        if i < 6:
            m = _VAR_MASKS[i]
            for w in range(W):
                pi_words[i, w] = m
        else:
            for w in range(W):
                idx = uint64(base_pattern // 64 + w)
                if (idx >> uint64(i - 6)) & uint64(1):
                    pi_words[i, w] = uint64(0xFFFFFFFFFFFFFFFF)
                else:
                    pi_words[i, w] = uint64(0)


@njit(cache=True, nogil=True, inline="always")
def splitmix64(x):
    z = uint64(x) + uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)
    return z ^ (z >> uint64(31))


@njit(cache=True, nogil=True)
def fill_random(pi_words, seed):
    npi = pi_words.shape[0]
    W = pi_words.shape[1]
    s = splitmix64(seed)
    for i in range(npi):
        for w in range(W):
            s = s + uint64(0x9E3779B97F4A7C15)
            pi_words[i, w] = splitmix64(s)


@njit(cache=True, nogil=True)
def decode_varints(buf, pos, count, out):
    """AIGER 7-bit little-endian varints; returns end offset or -(1+offset)."""
    for i in range(count):
        x = uint64(0)
        sh = 0
        while True:
            if pos >= len(buf):
                return -(1 + pos)
            c = buf[pos]
            pos += 1
            x |= uint64(c & 0x7F) << uint64(sh)
            if (c & 0x80) == 0:
                break
            sh += 7
            if sh > 63:
                return -(1 + pos)
        out[i] = int64(x)
    return pos


@njit(cache=True, nogil=True)
def encode_varints(vals, out):
    p = 0
    for i in range(len(vals)):
        x = uint64(vals[i])
        while True:
            c = x & uint64(0x7F)
            x >>= uint64(7)
            if x != uint64(0):
                out[p] = c | uint64(0x80)
                p += 1
            else:
                out[p] = c
                p += 1
                break
    return p
