"""AIGER reader/writer for combinational AIGs (ascii ``aag`` and binary ``aig``).

Parsing structurally hashes every gate on load, so a parsed graph is always
canonical; constant propagation and duplicate gates from the file simply fold
away.  Writing renumbers nodes topologically (PIs first, then Ands by id) and
is byte-deterministic.  Any symbol table or comment section after the gate
definitions is preserved verbatim on the ``Aig.trailer`` attribute and
re-emitted by the writer.

Sequential elements (latches) are not supported.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .core import Aig, IntegrityError


class ParseError(ValueError):
    """Malformed AIGER input; ``offset`` is the byte position when known."""

    def __init__(self, message: str, offset: int = -1):
        super().__init__(message if offset < 0
                         else f"{message} (byte offset {offset})")
        self.offset = offset


class UnsupportedFeatureError(ParseError):
    """Well-formed AIGER that uses a feature outside this tool's scope."""


def _read_line(data: bytes, pos: int) -> tuple[bytes, int]:
    nl = data.find(b"\n", pos)
    if nl < 0:
        raise ParseError("unexpected end of file", pos)
    return data[pos:nl], nl + 1


def _parse_uints(line: bytes, pos: int, expect: int) -> list[int]:
    parts = line.split()
    if len(parts) != expect:
        raise ParseError(f"expected {expect} fields, got {len(parts)}", pos)
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ParseError("non-numeric field", pos) from None


def parse_bytes(data: bytes) -> Aig:
    line, pos = _read_line(data, 0)
    parts = line.split()
    if len(parts) != 6 or parts[0] not in (b"aag", b"aig"):
        raise ParseError("bad header", 0)
    try:
        m, n_in, n_latch, n_out, n_and = (int(p) for p in parts[1:])
    except ValueError:
        raise ParseError("bad header", 0) from None
    if n_latch != 0:
        raise UnsupportedFeatureError("latches are not supported", 0)
    if m < n_in + n_and:
        raise ParseError("header M smaller than I + A", 0)
    binary = parts[0] == b"aig"

    aig = Aig(2 + n_in + n_and + (n_and // 4))
    litmap = np.full(m + 1, -1, dtype=np.int64)
    litmap[0] = 0

    if binary:
        for i in range(n_in):
            litmap[1 + i] = aig.add_pi().index
        out_lits = []
        for _ in range(n_out):
            line, npos = _read_line(data, pos)
            out_lits.append(_parse_uints(line, pos, 1)[0])
            pos = npos
        deltas = np.zeros(2 * n_and, dtype=np.int64)
        end = K.decode_varints(
            np.frombuffer(data, dtype=np.uint8), pos, 2 * n_and, deltas)
        if end < 0:
            raise ParseError("truncated or oversized varint", -(end + 1))
        rhs0 = np.zeros(n_and, dtype=np.int64)
        rhs1 = np.zeros(n_and, dtype=np.int64)
        lhs = 2 * (n_in + 1 + np.arange(n_and, dtype=np.int64))
        rhs0 = lhs - deltas[0::2]
        rhs1 = rhs0 - deltas[1::2]
        if np.any(rhs0 < 0) or np.any(rhs1 < 0):
            raise ParseError("binary delta underflows literal 0", pos)
        pos = int(end)
    else:
        pi_vars = []
        for _ in range(n_in):
            line, npos = _read_line(data, pos)
            v = _parse_uints(line, pos, 1)[0]
            if v < 2 or v & 1 or v > 2 * m:
                raise ParseError(f"invalid input literal {v}", pos)
            pi_vars.append(v >> 1)
            pos = npos
        out_lits = []
        for _ in range(n_out):
            line, npos = _read_line(data, pos)
            out_lits.append(_parse_uints(line, pos, 1)[0])
            pos = npos
        lhs_list = []
        rhs0 = np.zeros(n_and, dtype=np.int64)
        rhs1 = np.zeros(n_and, dtype=np.int64)
        for i in range(n_and):
            line, npos = _read_line(data, pos)
            l, r0, r1 = _parse_uints(line, pos, 3)
            if l < 2 or l & 1 or l > 2 * m:
                raise ParseError(f"invalid AND literal {l}", pos)
            lhs_list.append(l >> 1)
            rhs0[i], rhs1[i] = r0, r1
            pos = npos
        for v in pi_vars:
            if litmap[v] != -1:
                raise ParseError(f"variable {v} defined twice", 0)
            litmap[v] = aig.add_pi().index

    if np.any(rhs0 > 2 * m + 1) or np.any(rhs1 > 2 * m + 1):
        raise ParseError("fanin literal exceeds header M", pos)

    if binary:
        base = n_in + 1
        done = 0
        r = K.build_ands(aig.graph(), rhs0, rhs1, litmap, base)
        while r == -K.E_CAPACITY:
            done += int(aig.meta[K.M_ERROR])
            aig.grow(aig.num_nodes + (n_and - done) + 16)
            r = K.build_ands(aig.graph(), rhs0[done:], rhs1[done:], litmap,
                             base + done)
        if r < 0:
            raise ParseError("AND references an undefined or deleted node", pos)
    else:
        for i in range(n_and):
            a_var, b_var = int(rhs0[i]) >> 1, int(rhs1[i]) >> 1
            if litmap[a_var] < 0 or litmap[b_var] < 0:
                raise ParseError(
                    f"gate {lhs_list[i]} uses a fanin defined later", pos)
            a = int(litmap[a_var]) ^ (int(rhs0[i]) & 1)
            b = int(litmap[b_var]) ^ (int(rhs1[i]) & 1)
            v = lhs_list[i]
            if litmap[v] != -1:
                raise ParseError(f"variable {v} defined twice", pos)
            litmap[v] = aig.add_and(a, b).index

    for lit in out_lits:
        v = lit >> 1
        if lit < 0 or v > m or litmap[v] < 0:
            raise ParseError(f"output references undefined literal {lit}", pos)
        aig.add_po(int(litmap[v]) ^ (lit & 1))

    aig.trailer = data[pos:]
    aig.levelize()
    return aig


def parse_file(path: str) -> Aig:
    with open(path, "rb") as fh:
        return parse_bytes(fh.read())


def _writer_order(aig: Aig) -> np.ndarray:
    """Old node id -> AIGER variable index (0 const, 1..I PIs, then Ands)."""
    n = aig.num_nodes
    var = np.full(n, -1, dtype=np.int64)
    var[0] = 0
    for i, p in enumerate(aig.pis):
        var[p] = 1 + i
    live_and = np.nonzero((aig.dead[:n] == 0)
                          & (aig.kind[:n] == K.KIND_AND))[0]
    var[live_and] = 1 + len(aig.pis) + np.arange(len(live_and), dtype=np.int64)
    bad0 = var[aig.f0[live_and] >> 1] >= var[live_and]
    bad1 = var[aig.f1[live_and] >> 1] >= var[live_and]
    if np.any(bad0) or np.any(bad1):
        raise IntegrityError("graph is not in id-topological order; compact first")
    return var


def write_bytes(aig: Aig, ascii_format: bool = False) -> bytes:
    n = aig.num_nodes
    var = _writer_order(aig)
    n_in = len(aig.pis)
    live_and = np.nonzero((aig.dead[:n] == 0)
                          & (aig.kind[:n] == K.KIND_AND))[0]
    n_and = len(live_and)
    m = n_in + n_and

    def map_lit(lits: np.ndarray) -> np.ndarray:
        return (var[lits >> 1] << 1) | (lits & 1)

    f0 = map_lit(aig.f0[live_and])
    f1 = map_lit(aig.f1[live_and])
    rhs0 = np.maximum(f0, f1)
    rhs1 = np.minimum(f0, f1)
    lhs = 2 * var[live_and]
    pos_arr = np.asarray(aig.pos, dtype=np.int64)
    outs = map_lit(pos_arr) if len(pos_arr) else pos_arr
    trailer = getattr(aig, "trailer", b"")

    chunks = []
    if ascii_format:
        chunks.append(f"aag {m} {n_in} 0 {len(outs)} {n_and}\n".encode())
        chunks.append("".join(f"{2 * (i + 1)}\n" for i in range(n_in)).encode())
        chunks.append("".join(f"{int(o)}\n" for o in outs).encode())
        chunks.append("".join(
            f"{int(lhs[i])} {int(rhs0[i])} {int(rhs1[i])}\n"
            for i in range(n_and)).encode())
    else:
        chunks.append(f"aig {m} {n_in} 0 {len(outs)} {n_and}\n".encode())
        chunks.append("".join(f"{int(o)}\n" for o in outs).encode())
        deltas = np.empty(2 * n_and, dtype=np.int64)
        deltas[0::2] = lhs - rhs0
        deltas[1::2] = rhs0 - rhs1
        buf = np.zeros(10 * n_and + 16, dtype=np.uint8)
        used = K.encode_varints(deltas, buf)
        chunks.append(buf[:used].tobytes())
    chunks.append(trailer)
    return b"".join(chunks)


def write_file(aig: Aig, path: str, ascii_format: bool | None = None) -> None:
    if ascii_format is None:
        ascii_format = str(path).endswith(".aag")
    with open(path, "wb") as fh:
        fh.write(write_bytes(aig, ascii_format=ascii_format))
