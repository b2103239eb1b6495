"""Command line front end: refactor, double, stats, equiv, bench.

Reports are JSON lines (one record per run) so external tooling can
consume them directly; ``--table`` renders the human-readable layouts.
Exit codes: 0 success or equivalent, 1 usage, 2 parse or input error,
3 verification failure, 4 internal integrity error.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from typing import Dict, List, Optional, Sequence

from .aiger import ParseError, parse_file, write_file
from .core import Aig, IntegrityError, double
from .engine import PassConfig, parallel_pass, sequential_pass
from .verify import VerificationError, equiv_check, stats

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_VERIFY = 3
EXIT_INTEGRITY = 4


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage failures exit with code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _emit(record: dict, report_path: Optional[str]) -> None:
    line = json.dumps(record, sort_keys=True)
    print(line)
    if report_path:
        with open(report_path, "a", encoding="ascii") as fh:
            fh.write(line + "\n")


def _load(path: str) -> Aig:
    try:
        return parse_file(path)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def _pass_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--threads", type=int, default=1,
                     help="worker count; 0 runs the sequential engine path")
    sub.add_argument("--cut-size", type=int, default=10)
    sub.add_argument("--zero-gain", action="store_true")
    sub.add_argument("--iterations", type=int, default=1)
    sub.add_argument("--seed", type=int, default=0)


def _run_pass(aig: Aig, args: argparse.Namespace, threads: int,
              verify_each_pass: bool = False):
    cfg = PassConfig(threads=max(1, threads), cut_size=args.cut_size,
                     zero_gain=args.zero_gain, iterations=args.iterations,
                     seed=args.seed, verify_each_pass=verify_each_pass)
    if threads == 0:
        return sequential_pass(aig, cfg)
    return parallel_pass(aig, cfg)


def cmd_refactor(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    aig = _load(args.input)
    pre = aig.copy() if args.verify else None
    st = _run_pass(aig, args, args.threads)
    verdict = "not_checked"
    witness = None
    if pre is not None:
        res = equiv_check(pre, aig, seed=args.seed)
        verdict = res.verdict
        if not res.equivalent:
            witness = {"po_index": res.po_index,
                       "assignment": [int(b) for b in res.assignment]}
    write_file(aig, args.output)
    wall = (time.perf_counter() - t0) if args.total_time else st.wall_time
    record = {
        "input": args.input,
        "threads": st.threads,
        "iterations": args.iterations,
        "wall_time": wall,
        "area_before": st.area_before,
        "area_after": st.area_after,
        "depth_before": st.depth_before,
        "depth_after": st.depth_after,
        "accepted": st.accepted,
        "gain_sum": st.gain_sum,
        "equivalence": verdict,
    }
    if witness is not None:
        record["witness"] = witness
    _emit(record, args.report)
    if witness is not None:
        print(f"verification failed: PO {witness['po_index']} differs under "
              f"assignment {witness['assignment']}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_double(args: argparse.Namespace) -> int:
    if args.times < 1:
        print("double: --times must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    aig = _load(args.input)
    out = double(aig, args.times)
    write_file(out, args.output)
    _emit({"input": args.input, "times": args.times, **stats(out)}, None)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    aig = _load(args.input)
    s = stats(aig)
    if args.table:
        print(f"{'circuit':<24} {'PIs':>8} {'POs':>8} {'Area':>12} {'Depth':>6}")
        print(f"{args.input:<24} {s['pis']:>8} {s['pos']:>8} "
              f"{s['area']:>12} {s['depth']:>6}")
    else:
        _emit({"input": args.input, **s}, None)
    return EXIT_OK


def cmd_equiv(args: argparse.Namespace) -> int:
    a = _load(args.a)
    b = _load(args.b)
    res = equiv_check(a, b, max_patterns=args.patterns, seed=args.seed)
    record: Dict[str, object] = {"a": args.a, "b": args.b,
                                 "verdict": res.verdict,
                                 "patterns": res.patterns}
    if not res.equivalent:
        record["po_index"] = res.po_index
        record["assignment"] = [int(x) for x in res.assignment]
    _emit(record, None)
    return EXIT_OK if res.equivalent else EXIT_VERIFY


def _bench_circuit(path: str, args: argparse.Namespace,
                   threads_list: List[int], repeats: int) -> List[dict]:
    """All runs for one circuit: repeats per thread count, one record each.

    Speedup and QoR ratios compare mean wall time and final area/depth
    against the threads=1 runs (or the first thread count when 1 is not
    benched).
    """
    base = _load(path)
    runs: Dict[int, List] = {}
    for threads in threads_list:
        for _ in range(repeats):
            g = base.copy()
            runs.setdefault(threads, []).append(_run_pass(g, args, threads))
    ref_t = 1 if 1 in runs else threads_list[0]
    ref_wall = statistics.mean(s.wall_time for s in runs[ref_t])
    ref = runs[ref_t][-1]
    records = []
    for threads in threads_list:
        mean_wall = statistics.mean(s.wall_time for s in runs[threads])
        for i, st in enumerate(runs[threads]):
            records.append({
                "input": path,
                "threads": st.threads,
                "iterations": args.iterations,
                "repeat": i,
                "wall_time": st.wall_time,
                "wall_time_mean": mean_wall,
                "speedup": ref_wall / mean_wall if mean_wall > 0 else 0.0,
                "area_before": st.area_before,
                "area_after": st.area_after,
                "depth_before": st.depth_before,
                "depth_after": st.depth_after,
                "area_ratio": (st.area_after / ref.area_after
                               if ref.area_after else 1.0),
                "depth_ratio": (st.depth_after / ref.depth_after
                                if ref.depth_after else 1.0),
                "accepted": st.accepted,
                "gain_sum": st.gain_sum,
            })
    return records


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        threads_list = [int(t) for t in args.threads_list.split(",") if t]
    except ValueError:
        print(f"bench: bad --threads-list {args.threads_list!r}",
              file=sys.stderr)
        return EXIT_USAGE
    if not threads_list or min(threads_list) < 1 or args.repeats < 1:
        print("bench: need --threads-list of counts >= 1 and --repeats >= 1",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        with open(args.manifest, encoding="ascii") as fh:
            paths = [ln.strip() for ln in fh
                     if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        print(f"bench: cannot read manifest: {exc}", file=sys.stderr)
        return EXIT_PARSE

    rows: List[dict] = []
    for path in paths:
        try:
            circuit_rows = _bench_circuit(path, args, threads_list,
                                          args.repeats)
        except Exception as exc:  # per-circuit failure; keep benching
            circuit_rows = [{"input": path,
                             "error": f"{type(exc).__name__}: {exc}"}]
        for rec in circuit_rows:
            _emit(rec, args.report)
        rows.extend(circuit_rows)
    if args.table:
        _bench_table(rows)
    return EXIT_OK


def _bench_table(rows: Sequence[dict]) -> None:
    print(f"\n{'circuit':<28} {'T':>3} {'wall(s)':>10} {'speedup':>8} "
          f"{'area':>10} {'area_r':>7} {'depth_r':>8}")
    for r in rows:
        if "error" in r:
            print(f"{r['input']:<28}   ? failed: {r['error']}")
            continue
        if r["repeat"] != 0:
            continue
        print(f"{r['input']:<28} {r['threads']:>3} "
              f"{r['wall_time_mean']:>10.3f} {r['speedup']:>8.2f} "
              f"{r['area_after']:>10} {r['area_ratio']:>7.3f} "
              f"{r['depth_ratio']:>8.3f}")


def _build_parser() -> _Parser:
    p = _Parser(prog="aigrefac",
                description="Parallel AIG refactoring engine")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("refactor", help="optimize an AIGER file")
    r.add_argument("input")
    r.add_argument("output")
    _pass_flags(r)
    r.add_argument("--verify", action="store_true",
                   help="equivalence-check the result against the input")
    r.add_argument("--report", default=None,
                   help="append the JSON run record to this file")
    r.add_argument("--total-time", action="store_true",
                   help="time parse+pass+write instead of the pass only")
    r.set_defaults(fn=cmd_refactor)

    d = sub.add_parser("double", help="disjoint-union duplication (2^times)")
    d.add_argument("input")
    d.add_argument("output")
    d.add_argument("--times", type=int, default=1)
    d.set_defaults(fn=cmd_double)

    s = sub.add_parser("stats", help="print size metrics")
    s.add_argument("input")
    s.add_argument("--table", action="store_true")
    s.set_defaults(fn=cmd_stats)

    e = sub.add_parser("equiv", help="random-simulation equivalence check")
    e.add_argument("a")
    e.add_argument("b")
    e.add_argument("--patterns", type=int, default=1 << 16)
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(fn=cmd_equiv)

    b = sub.add_parser("bench", help="benchmark a manifest of circuits")
    b.add_argument("manifest")
    b.add_argument("--threads-list", default="1,2,4")
    b.add_argument("--repeats", type=int, default=3)
    _pass_flags(b)
    b.add_argument("--report", default=None)
    b.add_argument("--table", action="store_true")
    b.set_defaults(fn=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except VerificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
