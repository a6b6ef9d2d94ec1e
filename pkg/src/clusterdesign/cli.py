"""Command-line front end.

Exit codes: 0 success / property holds, 1 property failure (or replay
mismatch), 2 usage error.
"""
from __future__ import annotations

import argparse
import contextlib
import hashlib
import io
import json
import logging
import sys
import tempfile
import warnings
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .automorphisms import orbit_partition
from .bounds import EXACT_PATH_LIMIT, bound_report, upper_bound
from .graph_core import OrientedGraph, to_dot
from .netsim import run_experiment
from .robustness import DEFAULT_SAMPLES, EXHAUSTIVE_BUDGET, robustness_report
from .synthesis import ClusterSpec, build_robust, build_sparse, check_path, global_bound_path

log = logging.getLogger("clusterdesign")

# namespace attributes holding output file paths, per subcommand
OUTPUT_FLAGS = {
    "synth": ("out", "dot"),
    "bounds": ("out",),
    "verify": ("out",),
    "orbits": ("out",),
    "simulate": ("csv", "summary"),
}
INPUT_FLAGS = {"verify": ("graph",), "orbits": ("graph",), "simulate": ("graph",)}


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    return sha256_bytes(Path(path).read_bytes())


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def emit(doc: dict, out: Optional[str]) -> None:
    text = dump_json(doc)
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def load_graph(path: str) -> OrientedGraph:
    return OrientedGraph.from_json(Path(path).read_text(encoding="utf-8"))


# --- argument types ------------------------------------------------------


def cluster_list(text: str) -> ClusterSpec:
    try:
        return ClusterSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def robustness_level(text: str) -> str | int:
    if text == "all":
        return text
    try:
        s = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--s takes a positive integer or 'all'") from None
    if s < 1:
        raise argparse.ArgumentTypeError("--s must be at least 1")
    return s


# --- subcommands ---------------------------------------------------------


def default_path(spec: ClusterSpec, limit: int) -> tuple[int, ...]:
    if spec.k <= limit:
        return upper_bound(spec, limit).path
    return global_bound_path(spec)


def cmd_synth(args: argparse.Namespace) -> int:
    spec: ClusterSpec = args.clusters
    path = check_path(spec, args.path) if args.path else default_path(spec, args.limit)
    g = build_robust(spec, path) if args.robust else build_sparse(spec, path)
    orbits = orbit_partition(g)
    if args.out:
        write_text(args.out, g.to_json())
    else:
        sys.stdout.write(g.to_json())
    if args.dot:
        write_text(args.dot, to_dot(g))
    print(
        f"{'robust' if args.robust else 'sparse'} graph: {g.node_count} nodes, {g.edge_count} edges, "
        f"path {'->'.join(map(str, path))}, orbit sizes {sorted(orbits.sizes)}",
        file=sys.stderr,
    )
    return 0


def cmd_bounds(args: argparse.Namespace) -> int:
    emit(bound_report(args.clusters, args.limit).to_dict(), args.out)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    spec: ClusterSpec = args.clusters
    if g.node_count != spec.n:
        print(f"error: graph has {g.node_count} nodes, clusters sum to {spec.n}", file=sys.stderr)
        return 2
    s = 0 if args.s is None else (g.node_count if args.s == "all" else args.s)
    report = robustness_report(
        g, spec, s, budget=args.budget, samples=args.samples, seed=args.seed
    )
    emit(report.to_dict(), args.out)
    return 0 if report.passed else 1


def cmd_orbits(args: argparse.Namespace) -> int:
    emit(orbit_partition(load_graph(args.graph)).to_dict(), args.out)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        exp = run_experiment(
            g,
            args.seed,
            expected=orbit_partition(g).partition if args.reseed else None,
            stride=args.stride,
            alpha=args.alpha,
            a1=args.a1,
            a2=args.a2,
            dt=args.dt,
            t_final=args.tf,
        )
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    summary = exp.summary()
    summary["warnings"] = sorted({str(w.message) for w in caught})
    if args.csv:
        write_text(args.csv, exp.trajectory.to_csv())
    emit(summary, args.summary)
    return 0


def _manifest_for(argv: list[str], args: argparse.Namespace, stdout: bytes) -> dict:
    cmd = args.command
    doc = {
        "command": cmd,
        "argv": argv,
        "tool_version": __version__,
        "spec": list(args.clusters.r) if getattr(args, "clusters", None) else None,
        "path": list(args.path) if getattr(args, "path", None) else None,
        "seed": getattr(args, "seed", None) if cmd == "simulate" else None,
        "inputs": {},
        "outputs": {},
        "stdout_sha256": sha256_bytes(stdout),
    }
    for flag in INPUT_FLAGS.get(cmd, ()):
        value = getattr(args, flag)
        doc["inputs"][flag] = {"path": value, "sha256": sha256_file(value)}
    for flag in OUTPUT_FLAGS.get(cmd, ()):
        value = getattr(args, flag)
        if value:
            doc["outputs"][flag] = {"path": value, "sha256": sha256_file(value)}
    return doc


def _run_captured(args: argparse.Namespace) -> tuple[int, bytes]:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = args.func(args)
    return code, buf.getvalue().encode("utf-8")


def cmd_repro(args: argparse.Namespace) -> int:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    parser = build_parser()
    replay = parser.parse_args(manifest["argv"])
    ok = True
    for flag, rec in manifest.get("inputs", {}).items():
        if sha256_file(rec["path"]) != rec["sha256"]:
            print(f"input {flag} ({rec['path']}) changed since the manifest was written", file=sys.stderr)
            ok = False
    with tempfile.TemporaryDirectory() as tmp:
        outdir = Path(args.outdir) if args.outdir else Path(tmp)
        outdir.mkdir(parents=True, exist_ok=True)
        for flag in OUTPUT_FLAGS.get(replay.command, ()):
            value = getattr(replay, flag)
            if value:
                setattr(replay, flag, str(outdir / f"{flag}__{Path(value).name}"))
        _, stdout = _run_captured(replay)
        lines = []
        if sha256_bytes(stdout) != manifest["stdout_sha256"]:
            ok = False
            lines.append("stdout: MISMATCH")
        else:
            lines.append("stdout: ok")
        for flag, rec in manifest.get("outputs", {}).items():
            digest = sha256_file(getattr(replay, flag))
            same = digest == rec["sha256"]
            ok &= same
            lines.append(f"{flag} ({rec['path']}): {'ok' if same else 'MISMATCH'}")
    print("\n".join(lines))
    return 0 if ok else 1


# --- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clusterdesign",
        description="Design, bound, verify and simulate orbit-structured cluster graphs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_manifest(p: argparse.ArgumentParser) -> None:
        p.add_argument("--manifest", help="write a replayable run manifest here")

    p = sub.add_parser("synth", help="build a sparse or totally robust graph")
    p.add_argument("--clusters", type=cluster_list, required=True, help="cluster sizes, e.g. 1,2,3,4")
    p.add_argument("--path", type=int_list, help="cluster order as a permutation of 1..k")
    p.add_argument("--robust", action="store_true", help="all-pairs blocks instead of modular edges")
    p.add_argument("--limit", type=int, default=EXACT_PATH_LIMIT, help="exact path search limit on k")
    p.add_argument("--out", help="graph JSON output (stdout if omitted)")
    p.add_argument("--dot", help="optional Graphviz output")
    with_manifest(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bounds", help="edge-count bounds for a cluster specification")
    p.add_argument("--clusters", type=cluster_list, required=True)
    p.add_argument("--limit", type=int, default=EXACT_PATH_LIMIT)
    p.add_argument("--out")
    with_manifest(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="check orbit structure and removal robustness")
    p.add_argument("--graph", required=True)
    p.add_argument("--clusters", type=cluster_list, required=True)
    p.add_argument("--s", type=robustness_level, help="removal level to verify: integer or 'all'")
    p.add_argument("--budget", type=int, default=EXHAUSTIVE_BUDGET)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=0, help="seed for sampled removal sets")
    p.add_argument("--out")
    with_manifest(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("orbits", help="orbit partition of a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--out")
    with_manifest(p)
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("simulate", help="simulate the coupled closed loop on a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dt", type=float)
    p.add_argument("--tf", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--a1", type=float)
    p.add_argument("--a2", type=float)
    p.add_argument("--stride", type=int, default=100, help="store every Nth step in the CSV")
    p.add_argument("--reseed", action="store_true", help="re-seed (up to 3 times) on merged clusters")
    p.add_argument("--csv")
    p.add_argument("--summary", help="summary JSON output (stdout if omitted)")
    with_manifest(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("repro", help="replay a manifest and compare output digests")
    p.add_argument("manifest")
    p.add_argument("--outdir", help="keep replayed outputs here")
    p.set_defaults(func=cmd_repro)
    return parser


def _strip_manifest(argv: list[str]) -> list[str]:
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
        elif tok == "--manifest":
            skip = True
        elif not tok.startswith("--manifest="):
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    manifest_path = getattr(args, "manifest", None) if args.command != "repro" else None
    try:
        if manifest_path:
            code, stdout = _run_captured(args)
            sys.stdout.write(stdout.decode("utf-8"))
            replay_argv = _strip_manifest(argv)
            write_text(manifest_path, dump_json(_manifest_for(replay_argv, args, stdout)))
            return code
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
