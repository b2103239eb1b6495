"""Cone resynthesis primitives: cuts, truth tables, covers, candidates.

This is the readable reference implementation of the per-node rewriting
math: grow a reconvergence-capturing cut, collect its cone, evaluate the
cone's truth table, extract an irredundant sum-of-products cover, and cost
a replacement subgraph against the live structural hash table.  Nothing
here mutates the AIG.  The engine runs compiled equivalents of the same
algorithms; tests cross-check the two step for step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Set, Tuple

from . import _kernels as K
from .core import Aig, IntegrityError, Literal

K_DEFAULT = 10
K_MAX = 16
# Interior-node budget per cut; mirrors the engine's scratch sizing.
CONE_CAP = 768


def _check_root(aig: Aig, root: int) -> None:
    if not 0 <= root < aig.num_nodes:
        raise IndexError(f"node id {root} out of range")
    if aig.kind[root] != K.KIND_AND or aig.dead[root]:
        raise ValueError(f"node {root} is not a live And node")


@dataclass(frozen=True)
class Cut:
    """A leaf frontier for ``root`` plus the interior cone above it.

    ``leaves`` is sorted ascending and every PI-to-root path crosses it;
    ``cone`` lists the interior nodes (root included, last) in a topological
    order where each node's non-leaf fanins appear earlier.
    """

    root: int
    leaves: Tuple[int, ...]
    cone: Tuple[int, ...] = ()

    @property
    def k(self) -> int:
        return len(self.leaves)


@dataclass(frozen=True)
class TruthTable:
    """Function of ``k`` leaf variables; bit m of ``bits`` is f at minterm m.

    Leaf i contributes bit i of the minterm index, so leaf 0 is the fastest
    toggling column.
    """

    k: int
    bits: int

    @property
    def n_minterms(self) -> int:
        return 1 << self.k

    @property
    def mask(self) -> int:
        return (1 << (1 << self.k)) - 1

    def minterm(self, m: int) -> bool:
        return bool((self.bits >> m) & 1)


@dataclass(frozen=True)
class Cube:
    """Product term as positive/negative variable masks (absent = neither)."""

    pos: int
    neg: int

    def covers(self, m: int) -> bool:
        return (m & self.pos) == self.pos and (m & self.neg) == 0

    @property
    def first_minterm(self) -> int:
        return self.pos


@dataclass(frozen=True)
class Sop:
    """Irredundant cover: removing any cube uncovers some minterm."""

    k: int
    cubes: Tuple[Cube, ...]


@dataclass(frozen=True)
class Step:
    """One AND step; ``a``/``b`` are operand codes (see CandidateGraph)."""

    a: int
    b: int
    key: Tuple[int, int]
    hit: Optional[int] = None


@dataclass(frozen=True)
class CandidateGraph:
    """Replacement subgraph for a cut root, costed but not materialized.

    Operand codes: a code >= 0 is a literal over host node ids (leaf
    literals, or nodes earlier steps resolved to); a code < 0 references an
    earlier step, index ``(-code - 2) >> 1``, complemented if
    ``(-code - 2) & 1``.  ``output`` uses the same encoding.  ``cost``
    counts the steps that would create or retain a node: strash misses,
    hits inside the MFFC (the hit node and its member subtree all survive,
    each charged once), and hits on zero-count nodes (kept alive only by
    this candidate).  Hits on shared live logic cost 0.
    """

    steps: Tuple[Step, ...]
    output: int
    cost: int
    hits: Tuple[int, ...] = ()


@dataclass(frozen=True)
class Decision:
    accepted: bool
    gain: int

    def __bool__(self) -> bool:
        return self.accepted


# ---------------------------------------------------------------------------
# cut computation


def recon_cut(aig: Aig, root: int, k: int = K_DEFAULT) -> Cut:
    """Grow a cut of at most ``k`` leaves by cheapest-leaf expansion.

    Expansion cost of a leaf is the number of its fanins not already on the
    frontier (ties to the lowest node id); growth stops when the cheapest
    expansion would overflow ``k`` leaves or the cone budget.
    """
    _check_root(aig, root)
    if not 2 <= k <= K_MAX:
        raise ValueError(f"cut size {k} outside [2, {K_MAX}]")
    leaves = sorted({int(aig.f0[root]) >> 1, int(aig.f1[root]) >> 1})
    leaf_set = set(leaves)
    interior = 1
    while True:
        best = -1
        best_cost = 99
        for i, lf in enumerate(leaves):
            if aig.kind[lf] != K.KIND_AND:
                continue
            cost = sum(1 for f in (int(aig.f0[lf]), int(aig.f1[lf]))
                       if (f >> 1) not in leaf_set)
            if cost < best_cost:
                best_cost = cost
                best = i
        if best < 0:
            break
        if len(leaves) - 1 + best_cost > k:
            break
        if interior + 1 > CONE_CAP:
            break
        lf = leaves.pop(best)
        leaf_set.remove(lf)
        interior += 1
        for f in (int(aig.f0[lf]), int(aig.f1[lf])):
            fn = f >> 1
            if fn not in leaf_set:
                leaf_set.add(fn)
                leaves.append(fn)
        leaves.sort()
    cut = Cut(root=root, leaves=tuple(leaves))
    return collect_cone(aig, cut)


def collect_cone(aig: Aig, cut: Cut) -> Cut:
    """Fill ``cut.cone`` by post-order DFS from the root down to the leaves.

    Raises if the walk escapes through a non-And node that is not a leaf
    (the leaf set does not cover every PI-to-root path) or revisits a node
    still on the stack (a cycle).
    """
    _check_root(aig, cut.root)
    leaf_set = set(cut.leaves)
    if cut.root in leaf_set:
        raise ValueError("root cannot be one of its own leaves")
    emitted: Set[int] = set()
    on_stack: Set[int] = set()
    cone: List[int] = []
    stack = [cut.root]
    on_stack.add(cut.root)
    while stack:
        v = stack[-1]
        pend = -1
        for f in (int(aig.f0[v]), int(aig.f1[v])):
            fn = f >> 1
            if fn in leaf_set or fn in emitted:
                continue
            if fn in on_stack:
                raise IntegrityError(f"cycle through node {fn}")
            if aig.kind[fn] != K.KIND_AND:
                raise ValueError(
                    f"leaves do not cover node {fn}: not a valid cut")
            pend = fn
            break
        if pend >= 0:
            if len(cone) + len(stack) >= CONE_CAP:
                raise ValueError("cone exceeds the interior budget")
            stack.append(pend)
            on_stack.add(pend)
            continue
        stack.pop()
        on_stack.discard(v)
        emitted.add(v)
        cone.append(v)
    return Cut(root=cut.root, leaves=cut.leaves, cone=tuple(cone))


# ---------------------------------------------------------------------------
# truth tables


@lru_cache(maxsize=None)
def _var_pattern(v: int, k: int) -> int:
    """Column pattern of leaf v over 2^k minterms (bit m = bit v of m)."""
    block = 1 << v
    unit = ((1 << block) - 1) << block
    period = 2 * block
    reps = (1 << k) // period
    out = 0
    for i in range(reps):
        out |= unit << (i * period)
    return out


def compute_tt(aig: Aig, cut: Cut) -> TruthTable:
    """Evaluate the cone bottom-up, leaves as variables in ascending order."""
    kk = len(cut.leaves)
    if kk > K_MAX:
        raise ValueError(f"{kk} leaves exceed the {K_MAX}-variable limit")
    if not cut.cone:
        raise ValueError("cut has no collected cone")
    mask = (1 << (1 << kk)) - 1
    vals: Dict[int, int] = {lf: _var_pattern(i, kk)
                            for i, lf in enumerate(cut.leaves)}
    for v in cut.cone:
        f0, f1 = int(aig.f0[v]), int(aig.f1[v])
        t0 = vals[f0 >> 1] ^ (mask if (f0 & 1) else 0)
        t1 = vals[f1 >> 1] ^ (mask if (f1 & 1) else 0)
        vals[v] = t0 & t1
    return TruthTable(k=kk, bits=vals[cut.root] & mask)


# ---------------------------------------------------------------------------
# irredundant sum-of-products


def _cof(f: int, v: int, pol: int, k: int) -> int:
    mask = (1 << (1 << k)) - 1
    pat = _var_pattern(v, k)
    b = 1 << v
    if pol == 0:
        x = f & ~pat & mask
        return (x | (x << b)) & mask
    y = f & pat
    return (y | (y >> b)) & mask


def _has_var(f: int, v: int, k: int) -> bool:
    return _cof(f, v, 0, k) != _cof(f, v, 1, k)


def _isop_rec(L: int, U: int, k: int, mask: int,
              cubes: List[List[int]]) -> int:
    """Cover some function in [L, U]; returns its table, appends raw cubes."""
    if L == 0:
        return 0
    if U == mask:
        cubes.append([0, 0])
        return mask
    var = -1
    for v in range(k):
        if _has_var(L, v, k) or _has_var(U, v, k):
            var = v
            break
    if var < 0:
        raise IntegrityError("constant interval not caught by terminals")
    l0, l1 = _cof(L, var, 0, k), _cof(L, var, 1, k)
    u0, u1 = _cof(U, var, 0, k), _cof(U, var, 1, k)
    c0 = len(cubes)
    v0 = _isop_rec(l0 & ~u1 & mask, u0, k, mask, cubes)
    for j in range(c0, len(cubes)):
        cubes[j][1] |= 1 << var
    c1 = len(cubes)
    v1 = _isop_rec(l1 & ~u0 & mask, u1, k, mask, cubes)
    for j in range(c1, len(cubes)):
        cubes[j][0] |= 1 << var
    vs = _isop_rec(((l0 & ~v0) | (l1 & ~v1)) & mask, u0 & u1, k, mask, cubes)
    pat = _var_pattern(var, k)
    return (vs | (v0 & ~pat) | (v1 & pat)) & mask


def _cube_bits(pos: int, neg: int, k: int, mask: int) -> int:
    t = mask
    for v in range(k):
        if (pos >> v) & 1:
            t &= _var_pattern(v, k)
        elif (neg >> v) & 1:
            t &= ~_var_pattern(v, k)
    return t & mask


def isop(tt: TruthTable) -> Sop:
    """Exact cover of the on-set; every returned cube is essential.

    Cofactor recursion splitting on the lowest supported variable, with the
    lower and upper bounds equal (no don't-cares), followed by a backward
    sweep dropping any cube the rest of the cover makes redundant.  Cubes
    come out sorted by first covered minterm.
    """
    if tt.k > K_MAX:
        raise ValueError(f"{tt.k} variables exceed the {K_MAX} limit")
    mask = tt.mask
    f = tt.bits & mask
    raw: List[List[int]] = []
    got = _isop_rec(f, f, tt.k, mask, raw)
    if got != f:
        raise IntegrityError("cover does not match the on-set")
    keep = [True] * len(raw)
    for i in range(len(raw) - 1, -1, -1):
        rest = 0
        for j, (p, n) in enumerate(raw):
            if j != i and keep[j]:
                rest |= _cube_bits(p, n, tt.k, mask)
        if rest == f:
            keep[i] = False
    cubes = sorted((Cube(pos=p, neg=n) for (p, n), kp in zip(raw, keep)
                    if kp), key=lambda c: (c.pos, c.neg))
    return Sop(k=tt.k, cubes=tuple(cubes))


# ---------------------------------------------------------------------------
# candidate construction and costing


class _Builder:
    """Shared emit/memo state while turning a cover into AND steps."""

    def __init__(self, aig: Aig, members: Set[int]):
        self.aig = aig
        self.g = aig.graph()
        self.members = members
        self.kept: Set[int] = set()
        self.steps: List[Step] = []
        self.key_memo: Dict[Tuple[int, int], int] = {}
        self.pair_memo: Dict[Tuple[int, int], int] = {}
        self.resolved: List[int] = []  # per step: literal or -1
        self.hits: List[int] = []
        self.cost = 0

    def _resolve(self, code: int) -> int:
        if code >= 0:
            return code
        i = (-code - 2) >> 1
        c = (-code - 2) & 1
        r = self.resolved[i]
        return -1 if r < 0 else r ^ c

    def _charge_member_hit(self, h: int) -> None:
        """A hit inside the MFFC keeps its whole member subtree alive."""
        if h in self.kept:
            return
        work = [h]
        self.kept.add(h)
        self.cost += 1
        while work:
            v = work.pop()
            for f in (int(self.aig.f0[v]), int(self.aig.f1[v])):
                fn = f >> 1
                if fn in self.members and fn not in self.kept:
                    self.kept.add(fn)
                    self.cost += 1
                    work.append(fn)

    def emit(self, x: int, y: int) -> int:
        rx, ry = self._resolve(x), self._resolve(y)
        if rx >= 0 and ry >= 0:
            a, b = (rx, ry) if rx <= ry else (ry, rx)
            if a == 0:
                return 0
            if a == 1:
                return b
            if a == b:
                return a
            if (a ^ 1) == b:
                return 0
            j = self.key_memo.get((a, b))
            if j is not None:
                return -(2 * j) - 2
            h = K.strash_find(self.g, a, b)
            lit = -1
            if h >= 0:
                h = int(h)
                if h in self.members:
                    self._charge_member_hit(h)
                elif self.aig.ref[h] == 0:
                    self.cost += 1
                self.hits.append(h)
                lit = 2 * h
            else:
                self.cost += 1
            idx = len(self.steps)
            self.steps.append(Step(a=x, b=y, key=(a, b),
                                   hit=None if lit < 0 else lit >> 1))
            self.resolved.append(lit)
            self.key_memo[(a, b)] = idx
            return -(2 * idx) - 2
        pk = (x, y) if x <= y else (y, x)
        j = self.pair_memo.get(pk)
        if j is not None:
            return -(2 * j) - 2
        idx = len(self.steps)
        self.steps.append(Step(a=x, b=y, key=(-1, -1)))
        self.resolved.append(-1)
        self.pair_memo[pk] = idx
        self.cost += 1
        return -(2 * idx) - 2

    def reduce_and(self, codes: List[int]) -> int:
        if not codes:
            return 1
        while len(codes) > 1:
            nxt = [self.emit(codes[i], codes[i + 1])
                   for i in range(0, len(codes) - 1, 2)]
            if len(codes) % 2:
                nxt.append(codes[-1])
            codes = nxt
        return codes[0]


def _neg_code(code: int) -> int:
    if code >= 0:
        return code ^ 1
    i = (-code - 2) >> 1
    c = (-code - 2) & 1
    return -(2 * i + (c ^ 1)) - 2


def build_candidate(aig: Aig, cut: Cut, sop: Sop,
                    mffc_members: Sequence[int]) -> CandidateGraph:
    """Build balanced AND/OR trees for ``sop`` and cost them via strash.

    Per cube, literals in ascending variable order feed a balanced AND
    tree; multiple cubes combine through a complemented AND of their
    complements.  Each step first consults the hash table; see
    CandidateGraph for what a hit costs.  The AIG is not modified.
    """
    if not sop.cubes and compute_tt(aig, cut).bits != 0:
        raise IntegrityError("empty cover for a non-zero function")
    aig.ensure_strash()
    bld = _Builder(aig, set(int(m) for m in mffc_members))
    if not sop.cubes:
        out = 0
    elif len(sop.cubes) == 1 and sop.cubes[0].pos == 0 \
            and sop.cubes[0].neg == 0:
        out = 1
    else:
        couts = []
        for cube in sop.cubes:
            lits = []
            for v in range(sop.k):
                if (cube.pos >> v) & 1:
                    lits.append(2 * cut.leaves[v])
                elif (cube.neg >> v) & 1:
                    lits.append(2 * cut.leaves[v] + 1)
            couts.append(bld.reduce_and(lits))
        if len(couts) == 1:
            out = couts[0]
        else:
            out = _neg_code(bld.reduce_and([_neg_code(c) for c in couts]))
    return CandidateGraph(steps=tuple(bld.steps), output=out, cost=bld.cost,
                          hits=tuple(bld.hits))


def evaluate(mffc_size: int, candidate: CandidateGraph,
             zero_gain: bool = False) -> Decision:
    """Accept when the replacement deletes more nodes than it creates."""
    gain = int(mffc_size) - candidate.cost
    return Decision(accepted=gain > 0 or (gain == 0 and zero_gain), gain=gain)
