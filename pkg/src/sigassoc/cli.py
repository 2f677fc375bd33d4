"""Command-line front end.

Subcommands: mine, frequent, diff, predict, generate, stats.  Every run writes
a JSON manifest (input digests, parameters, seed, versions) next to its
primary output, and each output file starts with a ``# manifest: <file>``
comment line.  Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import platform
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .association import (
    Mark,
    SignificantAssociation,
    init,
    signature_names,
    significant_associations,
    transform,
)
from .frequent import ExactAssociation, enumerate_associations, frequent_associations, match_against
from .graph import GraphFormatError, density_of, load_graph, read_edges, write_graph
from .linkpred import MODES, roc, score_samples, snapshot_samples
from .significance import SignificanceParams
from .synthgen import DEFAULT_THETA, MagConfig, calibrate_scale, generate

logger = logging.getLogger("sigassoc")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2)
        raise UsageError(message)


# ---------------------------------------------------------------- manifest

def _sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _manifest_path(out: Path) -> Path:
    return out.with_name(_stem(out) + ".manifest.json")


def _stem(out: Path) -> str:
    name = out.name
    for suffix in (".jsonl", ".json", ".csv", ".tsv", ".txt"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return name


def _header(manifest: Path) -> str:
    return f"# manifest: {manifest.name}\n"


def _write_manifest(path: Path, command: str, args: argparse.Namespace, inputs: Sequence[str],
                    outputs: Sequence[Path], extra: dict | None = None) -> None:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command", "verbose")}
    manifest = {
        "command": command,
        "parameters": params,
        "seed": params.get("seed"),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": [p.name for p in outputs],
        "versions": {
            "sigassoc": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    }
    if extra:
        manifest.update(extra)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _open(path: Path, manifest: Path):
    fh = open(path, "w", encoding="utf-8", newline="\n")
    fh.write(_header(manifest))
    return fh


def _data_lines(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            yield line


# ---------------------------------------------------------------- helpers

def _params(args: argparse.Namespace) -> SignificanceParams:
    try:
        return SignificanceParams(args.alpha, args.size_support, getattr(args, "freq_support", 0.001))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _assoc_record(s: SignificantAssociation, names: Sequence[str]) -> dict:
    return {
        "sig_a": signature_names(s.sig_a, names),
        "sig_b": signature_names(s.sig_b, names),
        "strength": s.strength,
        "pvalue": s.pvalue,
        "log10_pvalue": s.log_pvalue / np.log(10),
        "cluster_sizes": [s.size_a, s.size_b],
        "clusters": [s.cluster_a, s.cluster_b],
    }


def _cell(value):
    if isinstance(value, list):
        return ";".join(str(x) for x in value)
    return value


def _write_records(path: Path, manifest: Path, records: list[dict], fmt: str, columns: Sequence[str]) -> None:
    with _open(path, manifest) as fh:
        if fmt == "json":
            for r in records:
                fh.write(json.dumps(r) + "\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in records:
                w.writerow([_cell(r[c]) for c in columns])


ASSOC_COLUMNS = ("sig_a", "sig_b", "strength", "pvalue", "log10_pvalue", "cluster_sizes", "clusters")


# ---------------------------------------------------------------- commands

def cmd_mine(args: argparse.Namespace) -> int:
    params = _params(args)
    g = load_graph(args.edges, args.attrs)
    out = Path(args.out)
    manifest = _manifest_path(out)
    stem = _stem(out)
    clusters_path = out.with_name(stem + ".clusters.csv")
    members_path = out.with_name(stem + ".members.tsv")
    ancestry_path = out.with_name(stem + ".ancestry.csv")
    log_path = out.with_name(stem + ".log.jsonl")

    ag = init(g, params, seed=args.seed, threads=args.threads)
    transform(ag)
    sig = significant_associations(ag)
    names = g.attribute_names
    _write_records(out, manifest, [_assoc_record(s, names) for s in sig], args.format, ASSOC_COLUMNS)

    with _open(clusters_path, manifest) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cluster_id", "size", "intra_edges", "signature"])
        for cid in sorted(ag.clusters):
            c = ag.clusters[cid]
            w.writerow([cid, c.size, c.intra_edges, ";".join(signature_names(ag.signature(cid), names))])
    with _open(members_path, manifest) as fh:
        fh.write("node\tindex\tcluster_id\n")
        for i, label in enumerate(g.node_labels):
            fh.write(f"{label}\t{i}\t{int(ag.assignment[i])}\n")
    with _open(ancestry_path, manifest) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["child_id", "parent_id"])
        for child in sorted(ag.parents):
            w.writerow([child, ag.parents[child]])
    with _open(log_path, manifest) as fh:
        for entry in ag.log:
            fh.write(json.dumps(entry) + "\n")

    outputs = [out, clusters_path, members_path, ancestry_path, log_path]
    _write_manifest(manifest, "mine", args, [args.edges, args.attrs], outputs, {
        "summary": {
            "nodes": g.node_count, "edges": g.edge_count, "density": g.density,
            "clusters": len(ag.clusters), "associations": len(ag.associations),
            "significant": len(sig), "iterations": ag.iterations,
        },
    })
    print(f"{len(sig)} significant associations among {len(ag.clusters)} clusters -> {out}")
    return EXIT_OK


def _exact_record(a: ExactAssociation, f: int, names: Sequence[str]) -> list:
    x, y = a.names(names)
    return [";".join(x), ";".join(y), f]


def cmd_frequent(args: argparse.Namespace) -> int:
    if not 0.0 < args.freq_support < 1.0:
        raise UsageError("--freq-support must lie in (0, 1)")
    g = load_graph(args.edges, args.attrs)
    freqs = enumerate_associations(g)
    top = frequent_associations(freqs, args.freq_support, g.edge_count, args.top_k)
    out = Path(args.out)
    manifest = _manifest_path(out)
    with _open(out, manifest) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["endpoint_a", "endpoint_b", "frequency"])
        for a, f in top:
            w.writerow(_exact_record(a, f, g.attribute_names))
    _write_manifest(manifest, "frequent", args, [args.edges, args.attrs], [out])
    print(f"{len(top)} frequent associations -> {out}")
    return EXIT_OK


def _read_significant(path: str) -> list[dict]:
    records = []
    for lineno, line in enumerate(_data_lines(path), start=1):
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"bad JSON record: {exc.msg}", path, lineno) from None
    return records


def _read_frequent(path: str) -> list[tuple[list[str], list[str], int]]:
    rows = list(csv.reader(_data_lines(path)))
    if not rows or rows[0][:3] != ["endpoint_a", "endpoint_b", "frequency"]:
        raise GraphFormatError("expected header endpoint_a,endpoint_b,frequency", path)
    out = []
    for row in rows[1:]:
        a = [x for x in row[0].split(";") if x]
        b = [x for x in row[1].split(";") if x]
        out.append((a, b, int(row[2])))
    return out


def _parse_sig(names: Sequence[str], universe: dict[str, int]) -> tuple[Mark, ...]:
    marks = [Mark.ABSENT] * len(universe)
    for name in names:
        if name.endswith("(*)"):
            marks[universe[name[:-3]]] = Mark.WILDCARD
        else:
            marks[universe[name]] = Mark.ONE
    return tuple(marks)


def cmd_diff(args: argparse.Namespace) -> int:
    sig_records = _read_significant(args.significant)
    frequent = _read_frequent(args.frequent)[: args.top_k]
    attr_names: set[str] = set()
    for r in sig_records:
        attr_names.update(n[:-3] if n.endswith("(*)") else n for n in r["sig_a"] + r["sig_b"])
    for a, b, _ in frequent:
        attr_names.update(a + b)
    universe = {name: i for i, name in enumerate(sorted(attr_names))}
    exact = [ExactAssociation.of([universe[x] for x in a], [universe[x] for x in b]) for a, b, _ in frequent]
    inv = sorted(universe, key=universe.get)

    records = []
    for r in sig_records:
        pair = (_parse_sig(r["sig_a"], universe), _parse_sig(r["sig_b"], universe))
        hit = match_against(pair, exact)
        rec = dict(r)
        rec["matched"] = hit is not None
        rec["matched_with"] = None if hit is None else [list(map(inv.__getitem__, hit.a)), list(map(inv.__getitem__, hit.b))]
        records.append(rec)
    out = Path(args.out)
    manifest = _manifest_path(out)
    if args.format == "json":
        _write_records(out, manifest, records, "json", ())
    else:
        flat = [dict(r, matched_with=";".join("|".join(side) for side in r["matched_with"]) if r["matched_with"] else "") for r in records]
        _write_records(out, manifest, flat, "csv", ASSOC_COLUMNS + ("matched", "matched_with"))
    _write_manifest(manifest, "diff", args, [args.significant, args.frequent], [out])
    unmatched = [r for r in records if not r["matched"]]
    print(f"{len(unmatched)} of {len(records)} significant associations match none of the top-{args.top_k} frequent")
    for i, r in enumerate(unmatched, start=1):
        print(f"{i:>3}  {{{', '.join(r['sig_a'])}}} -- {{{', '.join(r['sig_b'])}}}")
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    if not 0.0 <= args.tau <= 1.0:
        raise UsageError("--tau must lie in [0, 1]")
    if args.neg_ratio < 1:
        raise UsageError("--neg-ratio must be at least 1")
    params = _params(args)
    base = load_graph(args.base, args.attrs)
    future = read_edges(args.future, base.label_index())
    samples = snapshot_samples(base, future, seed=args.seed, ratio=args.neg_ratio)
    ag = freqs = None
    if args.mode == "significant":
        ag = transform(init(base, params, seed=args.seed, threads=args.threads))
    elif args.mode == "frequent":
        freqs = enumerate_associations(base)
    scores = score_samples(samples, base, args.mode, args.tau, ag=ag, freqs=freqs)
    curve = roc(scores, [s.label for s in samples])
    out = Path(args.out)
    manifest = _manifest_path(out)
    with _open(out, manifest) as fh:
        fh.write("fpr,tpr\n")
        for x, y in zip(curve.fpr.tolist(), curve.tpr.tolist()):
            fh.write(f"{x!r},{y!r}\n")
        fh.write(f"# auc,{curve.auc!r}\n")
    positives = sum(s.label for s in samples)
    _write_manifest(manifest, "predict", args, [args.base, args.future, args.attrs], [out], {
        "summary": {"positives": positives, "negatives": len(samples) - positives, "auc": curve.auc},
    })
    print(f"mode={args.mode} tau={args.tau} positives={positives} negatives={len(samples) - positives} AUC={curve.auc:.6f}")
    return EXIT_OK


def _parse_theta(text: str | None) -> tuple[tuple[float, float], tuple[float, float]]:
    if text is None:
        return DEFAULT_THETA
    vals = [float(x) for x in text.split(",")]
    if len(vals) != 4:
        raise UsageError("--theta takes four comma-separated values t00,t01,t10,t11")
    return ((vals[0], vals[1]), (vals[2], vals[3]))


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        theta = _parse_theta(args.theta)
        cfg = MagConfig.uniform(args.n, args.l, args.mu, theta, seed=args.seed)
        cfg.scale = calibrate_scale(cfg, args.density)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    g = generate(cfg)
    prefix = Path(args.out_prefix)
    edges_path = prefix.with_name(prefix.name + ".edges.tsv")
    attrs_path = prefix.with_name(prefix.name + ".attrs.tsv")
    config_path = prefix.with_name(prefix.name + ".config.json")
    manifest = prefix.with_name(prefix.name + ".manifest.json")
    write_graph(g, edges_path, attrs_path, header=_header(manifest))
    config = cfg.to_dict()
    config["target_density"] = args.density
    config["realized_density"] = g.density if g.node_count >= 2 else None
    config_path.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_manifest(manifest, "generate", args, [], [edges_path, attrs_path, config_path])
    print(f"n={g.node_count} edges={g.edge_count} density={g.density:.5f} -> {edges_path}, {attrs_path}")
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    g = load_graph(args.edges, args.attrs)
    row = {"dataset": args.name or Path(args.edges).stem, "nodes": g.node_count,
           "edges": g.edge_count, "density": density_of(g.node_count, g.edge_count)}
    if args.assoc:
        manifest = json.loads(_manifest_path(Path(args.assoc)).read_text(encoding="utf-8"))
        row["ag_nodes"] = manifest["summary"]["clusters"]
        row["ag_edges"] = manifest["summary"]["associations"]
    if args.format == "json":
        text = json.dumps(row) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["Dataset", "Nodes", "Edges", "Density"] + (["AG Nodes", "AG Edges"] if args.assoc else []))
        w.writerow([row["dataset"], f"{g.node_count:,}", f"{g.edge_count:,}", f"{row['density']:.5f}"]
                   + ([row["ag_nodes"], row["ag_edges"]] if args.assoc else []))
        text = buf.getvalue()
    if args.out:
        out = Path(args.out)
        manifest_path = _manifest_path(out)
        with _open(out, manifest_path) as fh:
            fh.write(text)
        _write_manifest(manifest_path, "stats", args, [args.edges, args.attrs], [out])
    sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_sig_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.01, help="significance level (default 0.01)")
    p.add_argument("--size-support", type=float, default=0.01, help="minimum cluster fraction lambda (default 0.01)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sigassoc", description="Mine statistically significant attribute associations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mine", help="build the association graph and report significant associations")
    p.add_argument("--edges", required=True)
    p.add_argument("--attrs", required=True)
    _add_sig_args(p)
    p.add_argument("--freq-support", type=float, default=0.001)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("frequent", help="frequent exact attribute associations")
    p.add_argument("--edges", required=True)
    p.add_argument("--attrs", required=True)
    p.add_argument("--freq-support", "--sigma", type=float, default=0.001)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_frequent)

    p = sub.add_parser("diff", help="significant associations not matched by the top-k frequent ones")
    p.add_argument("--significant", required=True)
    p.add_argument("--frequent", required=True)
    p.add_argument("--top-k", type=int, default=15)
    p.add_argument("--out", default="diff.jsonl")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("predict", help="link prediction between two snapshots")
    p.add_argument("--base", required=True)
    p.add_argument("--future", required=True)
    p.add_argument("--attrs", required=True)
    p.add_argument("--mode", choices=MODES, default="significant")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--neg-ratio", type=int, default=5)
    _add_sig_args(p)
    p.add_argument("--out", default="roc.csv")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("generate", help="synthetic MAG graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l", type=int, default=5)
    p.add_argument("--mu", type=float, default=0.6)
    p.add_argument("--density", type=float, default=0.010)
    p.add_argument("--theta", default=None, help="affinity matrix t00,t01,t10,t11 shared by all attributes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("stats", help="node/edge/density table")
    p.add_argument("--edges", required=True)
    p.add_argument("--attrs", required=True)
    p.add_argument("--assoc", default=None, help="mine output whose manifest supplies AG sizes")
    p.add_argument("--name", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_stats)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help / --version
            return int(exc.code or 0)
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be at least 1")
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"sigassoc: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphFormatError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"sigassoc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())
