"""And-Inverter Graph container: tombstoned node arena plus structural hashing.

Node 0 is the constant-false node.  A literal is (node_id, complemented),
integer-encoded as ``2 * node_id + complemented``; literal 0 is constant
false and literal 1 constant true.  And nodes keep their fanins normalized
as ``fanin0 <= fanin1`` in literal order, with trivial pairs simplified away
before table lookup, so one boolean function of a fanin pair has exactly one
live node.  Deleted slots are tombstoned in place; ids of live nodes form a
topological order after construction and after every engine pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from . import _kernels as K
from ._kernels import Graph


class IntegrityError(RuntimeError):
    """A structural invariant does not hold (audit failure, cycle, misuse)."""


class Literal(NamedTuple):
    node_id: int
    complemented: bool = False

    @property
    def index(self) -> int:
        return 2 * self.node_id + int(self.complemented)

    @staticmethod
    def from_index(i: int) -> "Literal":
        if i < 0:
            raise ValueError("literal index must be non-negative")
        return Literal(i >> 1, bool(i & 1))

    def __invert__(self) -> "Literal":
        return Literal(self.node_id, not self.complemented)


FALSE = Literal(0, False)
TRUE = Literal(0, True)

LitLike = Union[Literal, int]


def lit_index(lit: LitLike) -> int:
    return lit.index if isinstance(lit, Literal) else int(lit)


@dataclass(frozen=True)
class AigNode:
    id: int
    kind: str  # "const" | "pi" | "and"
    fanin0: Optional[Literal]
    fanin1: Optional[Literal]
    level: int
    ref_count: int
    deleted: bool
    reused: bool


@dataclass(frozen=True)
class Mffc:
    root: int
    members: Tuple[int, ...]
    size: int


_KIND_NAMES = {K.KIND_CONST: "const", K.KIND_PI: "pi", K.KIND_AND: "and"}

_N_STRIPES = 4096


def _next_pow2(x: int) -> int:
    n = 1
    while n < x:
        n <<= 1
    return n


class StrashTable:
    """Read-side view of the structural hash table (chained buckets)."""

    def __init__(self, aig: "Aig"):
        self._aig = aig

    def find(self, f0: LitLike, f1: LitLike) -> Optional[int]:
        a, b = lit_index(f0), lit_index(f1)
        if a > b:
            a, b = b, a
        n = K.strash_find(self._aig.graph(), a, b)
        return None if n < 0 else int(n)

    def __len__(self) -> int:
        g = self._aig.graph()
        heads = np.asarray(g.shead)
        total = 0
        for b in np.nonzero(heads >= 0)[0]:
            x = int(heads[b])
            while x != -1:
                total += 1
                x = int(g.snext[x])
        return total


class Aig:
    """Mutable AIG with PIs, POs, and canonical structural hashing."""

    def __init__(self, capacity: int = 1024):
        capacity = max(int(capacity), 16)
        self._alloc(capacity)
        # node 0: constant false
        self.kind[0] = K.KIND_CONST
        self.meta[K.M_NNODES] = 1
        self.pis: List[int] = []
        self.pos: List[int] = []  # PO literal indices
        self.strash = StrashTable(self)
        self.trailer: bytes = b""
        self._strash_dirty = False

    def _alloc(self, capacity: int) -> None:
        self.f0 = np.zeros(capacity, dtype=np.int64)
        self.f1 = np.zeros(capacity, dtype=np.int64)
        self.lvl = np.zeros(capacity, dtype=np.int64)
        self.ref = np.zeros(capacity, dtype=np.int64)
        self.kind = np.zeros(capacity, dtype=np.uint8)
        self.dead = np.zeros(capacity, dtype=np.uint8)
        self.reused = np.zeros(capacity, dtype=np.uint8)
        self.fresh = np.zeros(capacity, dtype=np.int64)
        nb = _next_pow2(max(1024, capacity))
        self.shead = np.full(nb, -1, dtype=np.int64)
        self.snext = np.full(capacity, -1, dtype=np.int64)
        self.slock = np.zeros(_N_STRIPES, dtype=np.int64)
        self.meta = np.zeros(16, dtype=np.int64)
        self.meta[K.M_CAP] = capacity
        self.snap = np.zeros(0, dtype=np.int64)

    def graph(self) -> Graph:
        return Graph(self.f0, self.f1, self.lvl, self.ref, self.kind,
                     self.dead, self.reused, self.fresh, self.shead,
                     self.snext, self.slock, self.meta, self.snap)

    # -- basic queries ---------------------------------------------------

    @property
    def num_nodes(self) -> int:
        return int(self.meta[K.M_NNODES])

    @property
    def num_ands(self) -> int:
        return int(self.meta[K.M_NANDS])

    @property
    def capacity(self) -> int:
        return int(self.meta[K.M_CAP])

    def node(self, i: int) -> AigNode:
        if not 0 <= i < self.num_nodes:
            raise IndexError(f"node id {i} out of range")
        is_and = self.kind[i] == K.KIND_AND
        return AigNode(
            id=i,
            kind=_KIND_NAMES[int(self.kind[i])],
            fanin0=Literal.from_index(int(self.f0[i])) if is_and else None,
            fanin1=Literal.from_index(int(self.f1[i])) if is_and else None,
            level=int(self.lvl[i]),
            ref_count=int(self.ref[i]),
            deleted=bool(self.dead[i]),
            reused=bool(self.reused[i]),
        )

    def is_dead(self, i: int) -> bool:
        return bool(self.dead[i])

    def area(self) -> int:
        return self.num_ands

    def depth(self) -> int:
        if not self.pos:
            return 0
        return max(int(self.lvl[p >> 1]) for p in self.pos)

    # -- construction ----------------------------------------------------

    def grow(self, need: int) -> None:
        cap = self.capacity
        new_cap = cap
        while new_cap < need:
            new_cap *= 2
        if new_cap == cap:
            return
        for name in ("f0", "f1", "lvl", "ref", "fresh"):
            arr = getattr(self, name)
            nxt = np.zeros(new_cap, dtype=arr.dtype)
            nxt[:cap] = arr
            setattr(self, name, nxt)
        for name in ("kind", "dead", "reused"):
            arr = getattr(self, name)
            nxt = np.zeros(new_cap, dtype=arr.dtype)
            nxt[:cap] = arr
            setattr(self, name, nxt)
        self.snext = np.full(new_cap, -1, dtype=np.int64)
        nb = _next_pow2(max(1024, new_cap))
        if nb != len(self.shead):
            self.shead = np.full(nb, -1, dtype=np.int64)
        else:
            self.shead.fill(-1)
        self.meta[K.M_CAP] = new_cap
        K.strash_rebuild(self.graph())

    def add_pi(self) -> Literal:
        n = self.num_nodes
        if n >= self.capacity:
            self.grow(n + 1)
        self.meta[K.M_NNODES] = n + 1
        self.kind[n] = K.KIND_PI
        self.lvl[n] = 0
        self.pis.append(n)
        return Literal(n, False)

    def ensure_strash(self) -> None:
        """Rebuild the hash table if bulk construction left it stale."""
        if self._strash_dirty:
            K.strash_rebuild(self.graph())
            self._strash_dirty = False

    def add_and(self, a: LitLike, b: LitLike) -> Literal:
        self.ensure_strash()
        r = K.add_and(self.graph(), lit_index(a), lit_index(b))
        if r == -K.E_CAPACITY:
            self.grow(self.num_nodes + 1)
            r = K.add_and(self.graph(), lit_index(a), lit_index(b))
        if r < 0:
            raise IntegrityError(f"add_and failed with code {-int(r)}")
        return Literal.from_index(int(r))

    def add_po(self, lit: LitLike) -> int:
        li = lit_index(lit)
        n = li >> 1
        if n >= self.num_nodes or self.dead[n]:
            raise IntegrityError(f"PO references invalid node {n}")
        self.ref[n] += 1
        self.pos.append(li)
        return len(self.pos) - 1

    def po_literals(self) -> List[Literal]:
        return [Literal.from_index(p) for p in self.pos]

    # -- core operations -------------------------------------------------

    def levelize(self) -> Tuple[np.ndarray, int]:
        """Recompute levels in place; returns (levels, max PO level)."""
        n = self.num_nodes
        out = np.zeros(n, dtype=np.int64)
        stack = np.zeros(n, dtype=np.int64)
        state = np.zeros(n, dtype=np.uint8)
        r = K.levelize(self.graph(), out, stack, state)
        if r < 0:
            raise IntegrityError("cycle detected during levelize")
        self.lvl[:n] = out
        depth = max((int(out[p >> 1]) for p in self.pos), default=0)
        return out, depth

    def mffc_collect(self, root: int,
                     anchors: Optional[Sequence[int]] = None) -> Mffc:
        """Maximum fanout-free cone of ``root`` via a deref/re-ref walk.

        With ``anchors`` (node ids held alive during the walk) the cone is
        confined to nodes that die only when the anchors survive.  PI and
        constant roots yield a size-0 MFFC.
        """
        n = self.num_nodes
        if not 0 <= root < n:
            raise IndexError(f"node id {root} out of range")
        before = self.ref[:n].copy()
        anc = np.asarray(anchors if anchors else [], dtype=np.int64)
        members = np.zeros(n + 1, dtype=np.int64)
        size = K.mffc_collect(self.graph(), root, anc, len(anc), members, 0)
        if size < 0:
            raise IntegrityError("MFFC member overflow")
        if not np.array_equal(before, self.ref[:n]):
            raise IntegrityError("MFFC walk did not restore reference counts")
        return Mffc(root=root, members=tuple(int(m) for m in members[:size]),
                    size=int(size))

    def delete_dereferenced(self, root: int) -> List[int]:
        """Tombstone ``root`` and cascade; returns the deleted ids in order."""
        n = self.num_nodes
        sink = np.zeros(n, dtype=np.int64)
        work = np.zeros(n, dtype=np.int64)
        r = K.delete_dereferenced(self.graph(), root, sink, 0, work)
        if r < 0:
            raise IntegrityError(f"delete of node {root}: already deleted")
        return [int(x) for x in sink[:r]]

    # -- audits ----------------------------------------------------------

    def po_nodes(self) -> np.ndarray:
        return np.asarray([p >> 1 for p in self.pos], dtype=np.int64)

    def audit_refs(self) -> None:
        tmp = np.zeros(self.num_nodes, dtype=np.int64)
        bad = K.recount_refs(self.graph(), self.po_nodes(), tmp)
        if bad >= 0:
            raise IntegrityError(
                f"ref count mismatch at node {int(bad)}: "
                f"stored {int(self.ref[bad])}, recounted {int(tmp[bad])}")

    def audit_strash(self) -> None:
        self.ensure_strash()   # bulk construction defers the table build
        bad = K.audit_strash(self.graph())
        if bad != -1:
            raise IntegrityError(f"strash canonicity violated (node {int(bad)})")

    def audit_acyclic(self) -> None:
        n = self.num_nodes
        out = np.zeros(n, dtype=np.int64)
        stack = np.zeros(n, dtype=np.int64)
        state = np.zeros(n, dtype=np.uint8)
        if K.levelize(self.graph(), out, stack, state) < 0:
            raise IntegrityError("cycle among live nodes")

    def audit_topo_ids(self) -> None:
        bad = K.audit_topo_ids(self.graph())
        if bad >= 0:
            raise IntegrityError(f"id order not topological at node {int(bad)}")

    def audit(self) -> None:
        self.audit_strash()
        self.audit_refs()
        self.audit_acyclic()

    # -- snapshot / compaction -------------------------------------------

    def state_snapshot(self) -> dict:
        n = self.num_nodes
        return {
            "f0": self.f0[:n].copy(), "f1": self.f1[:n].copy(),
            "lvl": self.lvl[:n].copy(), "ref": self.ref[:n].copy(),
            "kind": self.kind[:n].copy(), "dead": self.dead[:n].copy(),
            "meta": self.meta.copy(), "pis": list(self.pis),
            "pos": list(self.pos),
        }

    def state_restore(self, snap: dict) -> None:
        n = len(snap["f0"])
        if n > self.capacity:
            self.grow(n)
        self.f0[:n] = snap["f0"]
        self.f1[:n] = snap["f1"]
        self.lvl[:n] = snap["lvl"]
        self.ref[:n] = snap["ref"]
        self.kind[:n] = snap["kind"]
        self.dead[:n] = snap["dead"]
        self.reused[:n] = 0
        self.fresh[:n] = 0
        self.meta[:] = snap["meta"]
        self.meta[K.M_CAP] = self.capacity
        self.pis = list(snap["pis"])
        self.pos = list(snap["pos"])
        K.strash_rebuild(self.graph())

    def compact(self) -> np.ndarray:
        """Drop tombstones and renumber: PIs first, then Ands by (level, id).

        Restores the id-topological invariant after a pass.  Returns the old
        id -> new id permutation (dead slots map to -1).
        """
        n = self.num_nodes
        self.levelize()
        live_and = np.nonzero(
            (self.dead[:n] == 0) & (self.kind[:n] == K.KIND_AND))[0]
        order = live_and[np.lexsort((live_and, self.lvl[live_and]))]
        perm = np.full(n, -1, dtype=np.int64)
        perm[0] = 0
        for i, p in enumerate(self.pis):
            perm[p] = 1 + i
        base = 1 + len(self.pis)
        perm[order] = base + np.arange(len(order), dtype=np.int64)
        new_n = base + len(order)

        def remap_lits(lits: np.ndarray) -> np.ndarray:
            return (perm[lits >> 1] << 1) | (lits & 1)

        f0 = np.zeros(self.capacity, dtype=np.int64)
        f1 = np.zeros(self.capacity, dtype=np.int64)
        lvl = np.zeros(self.capacity, dtype=np.int64)
        ref = np.zeros(self.capacity, dtype=np.int64)
        kind = np.zeros(self.capacity, dtype=np.uint8)
        src = np.nonzero(perm >= 0)[0]
        dst = perm[src]
        f0[dst] = remap_lits(self.f0[src])
        f1[dst] = remap_lits(self.f1[src])
        lvl[dst] = self.lvl[src]
        ref[dst] = self.ref[src]
        kind[dst] = self.kind[src]
        # PIs and const carry no fanins
        f0[:base] = 0
        f1[:base] = 0
        # renumbering can flip literal order; restore the f0 <= f1 canon
        a, b = f0[base:new_n], f1[base:new_n]
        sw = a > b
        a[sw], b[sw] = b[sw], a[sw]
        self.f0, self.f1, self.lvl, self.ref, self.kind = f0, f1, lvl, ref, kind
        self.dead = np.zeros(self.capacity, dtype=np.uint8)
        self.reused = np.zeros(self.capacity, dtype=np.uint8)
        self.fresh = np.zeros(self.capacity, dtype=np.int64)
        self.meta[K.M_NNODES] = new_n
        self.pis = list(range(1, base))
        if self.pos:
            self.pos = [int(x) for x in
                        remap_lits(np.asarray(self.pos, dtype=np.int64))]
        self.snext.fill(-1)
        K.strash_rebuild(self.graph())
        return perm

    # -- copies ----------------------------------------------------------

    def copy(self) -> "Aig":
        other = Aig(self.capacity)
        n = self.num_nodes
        other.f0[:n] = self.f0[:n]
        other.f1[:n] = self.f1[:n]
        other.lvl[:n] = self.lvl[:n]
        other.ref[:n] = self.ref[:n]
        other.kind[:n] = self.kind[:n]
        other.dead[:n] = self.dead[:n]
        other.meta[:] = self.meta
        other.meta[K.M_CAP] = other.capacity
        other.pis = list(self.pis)
        other.pos = list(self.pos)
        other.trailer = getattr(self, "trailer", b"")
        K.strash_rebuild(other.graph())
        return other


def double(aig: Aig, times: int = 1) -> Aig:
    """Disjoint union of 2^times copies of ``aig``, each with fresh PIs.

    The input must be in boundary form (id-topological, no tombstones).
    Structural hashing is not consulted: copies share only the constant node,
    and distinct PI ids keep every key distinct.
    """
    cur = aig
    for _ in range(int(times)):
        n = cur.num_nodes
        n_pi = len(cur.pis)
        n_and = cur.num_ands
        if n != 1 + n_pi + n_and:
            raise IntegrityError("double() requires compacted boundary form")
        out = Aig(1 + 2 * (n_pi + n_and))
        out.meta[K.M_NNODES] = 1 + 2 * n_pi + 2 * n_and
        out.meta[K.M_NANDS] = 2 * n_and
        out.pis = list(range(1, 1 + 2 * n_pi))
        out.kind[1:1 + 2 * n_pi] = K.KIND_PI
        g = out.graph()
        # copy 0: ands occupy [1+2*n_pi, 1+2*n_pi+n_and)
        K.copy_shifted(g, cur.f0, cur.f1, n, n_pi, 1 + 2 * n_pi, 1)
        # copy 1 appended after copy 0
        K.copy_shifted(g, cur.f0, cur.f1, n, n_pi,
                       1 + 2 * n_pi + n_and, 1 + n_pi)
        and_lvls = cur.lvl[1 + n_pi:n]
        out.lvl[1 + 2 * n_pi:1 + 2 * n_pi + n_and] = and_lvls
        out.lvl[1 + 2 * n_pi + n_and:1 + 2 * n_pi + 2 * n_and] = and_lvls
        for copy in range(2):
            shift_and = (1 + 2 * n_pi + copy * n_and) - (1 + n_pi)
            pi_shift = copy * n_pi
            for p in cur.pos:
                node = p >> 1
                if node > n_pi:
                    node += shift_and
                elif node >= 1:
                    node += pi_shift
                out.pos.append((node << 1) | (p & 1))
        refs = np.bincount(
            np.concatenate([out.f0[1 + 2 * n_pi:out.num_nodes] >> 1,
                            out.f1[1 + 2 * n_pi:out.num_nodes] >> 1,
                            out.po_nodes()]),
            minlength=out.num_nodes)
        out.ref[:out.num_nodes] = refs
        out.snext.fill(-1)
        out.shead.fill(-1)
        out._strash_dirty = True
        out.trailer = getattr(cur, "trailer", b"")
        cur = out
    if cur is aig:
        cur = aig.copy()
    return cur
