"""Command line entry points: ``lodestar mine | replay | serve``.

Reports go to stdout as JSON; human-readable summaries go to stderr. Exit
code 2 signals an unusable input (empty corpus, bad graph file, busy port).
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from pathlib import Path

from .errors import EmptyCorpus, InsufficientBlocks, LodestarError, SchemaViolation
from .graph import GRAPH_FILE_SUFFIX, save_graph
from .harness import (
    load_mining_config,
    load_sequences_file,
    load_graph_file,
    replay,
    run_mine,
    write_report,
)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lodestar",
        description="Mine notebook corpora, evaluate recommendation graphs, serve sessions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mine = sub.add_parser("mine", help="mine a corpus directory into a graph")
    mine.add_argument("corpus_dir", help="directory of .ipynb files")
    mine.add_argument("--config", help="mining config JSON (libraries, k, seed, min_cells)")
    mine.add_argument("--k", type=int, help="number of clusters")
    mine.add_argument("--seed", type=int, help="clustering seed")
    mine.add_argument("--min-cells", type=int, help="minimum code cells per notebook")
    mine.add_argument("--advisor-id", default="crowd")
    mine.add_argument("--graph-out", help=f"graph file path (default <corpus>{GRAPH_FILE_SUFFIX})")
    mine.add_argument("--report-out", help="also write the report JSON here")
    mine.add_argument("--k-scan", help="comma-separated k values to report inertia for")
    mine.add_argument(
        "--holdout",
        type=float,
        default=0.0,
        help="fraction of notebooks to hold out for replay evaluation",
    )

    rep = sub.add_parser("replay", help="measure top-k hit rate on sequences")
    rep.add_argument("graph_file")
    rep.add_argument("sequences_file", help="mining report or {\"sequences\": [...]} JSON")
    rep.add_argument("--k", type=int, default=5)
    rep.add_argument(
        "--sequences-key",
        default="sequences",
        help="which key of the JSON document holds the sequences",
    )
    rep.add_argument(
        "--in-sample",
        action="store_true",
        help="the sequences are the training sequences themselves",
    )

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", help="serve config JSON")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int)
    serve.add_argument("--data-dir", help="directory for session snapshots and uploads")
    serve.add_argument("--kernel-cmd", help="sidecar command; omit for the mock executor")
    serve.add_argument("--ui-dir", help="directory with the built web UI")

    return parser


def _cmd_mine(args: argparse.Namespace) -> int:
    config = load_mining_config(
        args.config, k=args.k, seed=args.seed, min_cells=args.min_cells
    )
    k_scan = [int(v) for v in args.k_scan.split(",")] if args.k_scan else None
    try:
        outcome = run_mine(
            args.corpus_dir,
            config,
            advisor_id=args.advisor_id,
            k_scan=k_scan,
            holdout=args.holdout,
        )
    except (EmptyCorpus, InsufficientBlocks) as exc:
        print(f"mine failed: {exc}", file=sys.stderr)
        return 2

    graph_out = args.graph_out or f"{Path(args.corpus_dir).name}{GRAPH_FILE_SUFFIX}"
    save_graph(outcome.graph, graph_out)
    sys.stdout.buffer.write(write_report(outcome.report, args.report_out))
    stats = outcome.report["stats"]
    print(
        f"mined {stats['documents']} notebook(s) -> {stats['blocks']} block(s), "
        f"k={outcome.result.config.k}, inertia={stats['inertia']:.4f}; "
        f"graph written to {graph_out}",
        file=sys.stderr,
    )
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    try:
        graph = load_graph_file(args.graph_file)
        sequences = load_sequences_file(args.sequences_file, key=args.sequences_key)
    except (SchemaViolation, OSError, json.JSONDecodeError) as exc:
        print(f"replay failed: {exc}", file=sys.stderr)
        return 2
    report = replay(graph, sequences, k=args.k, in_sample=args.in_sample)
    sys.stdout.buffer.write(write_report(report, None))
    print(
        f"advisor {report['advisor_id']!r}: hit rate {report['hit_rate']:.3f} "
        f"over {report['pairs']} pair(s) at k={args.k} "
        f"(random baseline {report['random_baseline']:.3f}, "
        f"{report['unknown_state_pairs']} unknown-state pair(s))",
        file=sys.stderr,
    )
    return 0


def _port_free(host: str, port: int) -> bool:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
        try:
            probe.bind((host, port))
        except OSError:
            return False
    return True


def _cmd_serve(args: argparse.Namespace) -> int:
    import os

    import uvicorn

    from .catalog import load_catalog
    from .kernel import KernelManager
    from .seed import build_seed_advisors, cars_csv_bytes, load_seed_catalog
    from .service import DATA_DIR_ENV, PORT_ENV, create_app

    doc = {}
    if args.config:
        doc = json.loads(Path(args.config).read_text(encoding="utf-8"))

    try:
        if "catalog" in doc:
            catalog = load_catalog(doc["catalog"])
        else:
            catalog = load_seed_catalog()
        if "graphs" in doc:
            graphs = {}
            for path in doc["graphs"]:
                graph = load_graph_file(path)
                graphs[graph.advisor_id] = graph
        else:
            graphs = build_seed_advisors()
    except LodestarError as exc:
        print(f"serve failed: {exc}", file=sys.stderr)
        return 2

    datasets = {"cars": ("cars", cars_csv_bytes())}
    for dataset_id, path in (doc.get("datasets") or {}).items():
        datasets[dataset_id] = (dataset_id, Path(path).read_bytes())

    data_dir = args.data_dir or doc.get("data_dir") or os.environ.get(DATA_DIR_ENV)
    kernel_cmd = args.kernel_cmd or doc.get("kernel_cmd")
    port = args.port or doc.get("port") or int(os.environ.get(PORT_ENV, "8787"))
    ui_dir = args.ui_dir or doc.get("ui_dir")
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"

    try:
        app = create_app(
            catalog=catalog,
            graphs=graphs,
            kernels=KernelManager(cmd=kernel_cmd),
            data_dir=data_dir,
            datasets=datasets,
            ui_dir=ui_dir,
        )
    except LodestarError as exc:
        print(f"serve failed: {exc}", file=sys.stderr)
        return 2

    if not _port_free(args.host, port):
        print(f"serve failed: port {port} is already in use", file=sys.stderr)
        return 2
    print(f"serving on http://{args.host}:{port}", file=sys.stderr)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "mine":
        return _cmd_mine(args)
    if args.command == "replay":
        return _cmd_replay(args)
    if args.command == "serve":
        return _cmd_serve(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
