"""Command-line pipelines: gram, indep, test, synth, cluster, kpca, eval, graphdist.

Every output carries a provenance block (JSON outputs embed it, CSV
outputs get a ``<name>.provenance.json`` sidecar) recording the
subcommand, math-relevant configuration, seed, and library version.
Execution details (thread count, block size) are excluded so reruns are
byte-identical regardless of parallelism.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backend import BACKEND_NAME
from .clustering import (
    adjusted_rand_index,
    kernel_kmeans,
    select_k,
    silhouette_score,
    variance_ratio_criterion,
)
from .critical import CriticalScale
from .dataset import load_dataset, load_dataset_json
from .embedding import kpca_fit, kpca_transform
from .errors import DepconError
from .graphs import graph_distance, graph_from_json, representative
from .inference import independence_test, structure_difference_score
from .kernel import gram_matrix
from .synth import BenchmarkConfig, build_benchmark, model_descriptor

EXIT_FILE_NOT_FOUND = 2
EXIT_IO_ERROR = 3
EXIT_USAGE = 4


def _fmt(value: float) -> str:
    return repr(float(value))


def _provenance(command: str, config: dict) -> dict:
    clean = {
        key: value
        for key, value in config.items()
        if key not in ("threads", "block_rows", "func") and value is not None
    }
    return {
        "tool": "depcon",
        "version": __version__,
        "backend": BACKEND_NAME,
        "command": command,
        "config": clean,
    }


def _write_json(path, payload: dict):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text)


def _write_matrix_csv(path, matrix: np.ndarray, provenance: dict):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.atleast_2d(matrix):
        writer.writerow([_fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())
    _write_json(str(path) + ".provenance.json", provenance)


def _load_any_dataset(path):
    path = Path(path)
    if path.suffix.lower() == ".json":
        return load_dataset_json(path)
    return load_dataset(path, has_header=_sniff_header(path))


def _sniff_header(path) -> bool:
    with open(path, "r", newline="") as handle:
        first = handle.readline()
    for cell in first.strip().split(","):
        try:
            float(cell)
        except ValueError:
            return True
    return False


def _load_matrix(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() == ".json":
        payload = json.loads(path.read_text())
        return np.asarray(payload["values"], dtype=np.float64)
    rows = []
    with open(path, "r", newline="") as handle:
        for row in csv.reader(handle):
            if row:
                rows.append([float(cell) for cell in row])
    return np.asarray(rows, dtype=np.float64)


def _load_labels(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() == ".json":
        payload = json.loads(path.read_text())
        return np.asarray(payload["labels"], dtype=np.int64)
    values = []
    with open(path, "r", newline="") as handle:
        for row in csv.reader(handle):
            if not row or row[0].strip() == "":
                continue
            try:
                values.append(int(float(row[0])))
            except ValueError:
                continue  # header row
    return np.asarray(values, dtype=np.int64)


def _resolve_threads(args):
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("DEPCON_THREADS")
    return int(env) if env else None


def cmd_gram(args) -> int:
    data = _load_any_dataset(args.data)
    gram = gram_matrix(
        data,
        alpha=args.alpha,
        convention=args.convention,
        threads=_resolve_threads(args),
        block_rows=args.block_rows,
    )
    prov = _provenance("gram", vars(args))
    if args.format == "json":
        _write_json(args.output, {"values": gram.values.tolist(), "provenance": prov})
    else:
        _write_matrix_csv(args.output, gram.values, prov)
    return 0


def cmd_indep(args) -> int:
    data = _load_any_dataset(args.data)
    result = independence_test(
        data, alpha=args.alpha, convention=args.convention, threads=_resolve_threads(args)
    )
    payload = {
        "alpha": result.alpha,
        "convention": result.convention.value,
        "pairs": result.pairs(),
        "provenance": _provenance("indep", vars(args)),
    }
    _write_json(args.output, payload)
    return 0


def _comparison_payload(data_a, data_b, alpha, convention, threads):
    result = structure_difference_score(
        data_a, data_b, alpha=alpha, convention=convention, threads=threads
    )
    return {
        "score": result.score,
        "different_structure": result.different_structure,
        "witnesses": [{"i": j, "j": j2} for j, j2 in result.witnesses],
    }


def cmd_test(args) -> int:
    data_a = _load_any_dataset(args.data_a)
    data_b = _load_any_dataset(args.data_b)
    threads = _resolve_threads(args)
    if args.both_conventions:
        payload = {
            convention.value: _comparison_payload(
                data_a, data_b, args.alpha, convention, threads
            )
            for convention in CriticalScale
        }
    else:
        payload = _comparison_payload(data_a, data_b, args.alpha, args.convention, threads)
    payload["alpha"] = args.alpha
    payload["provenance"] = _provenance("test", vars(args))
    _write_json(args.output, payload)
    return 0


def cmd_synth(args) -> int:
    config = BenchmarkConfig(
        num_models=args.models,
        samples_per_model=args.samples,
        num_features=args.features,
        edge_probability=args.edge_prob,
        nonlinear=args.nonlinear,
        seed=args.seed,
        amplitude=args.amplitude,
        max_pairs=args.max_pairs,
    )
    bench = build_benchmark(config)
    prov = _provenance("synth", vars(args))
    _write_matrix_csv(args.output, bench.data.values, prov)
    sidecar = {
        "labels": bench.labels.tolist(),
        "models": [model_descriptor(model) for model in bench.models],
        "config": config.to_dict(),
        "seed": args.seed,
        "provenance": prov,
    }
    _write_json(Path(args.output).with_suffix(".json"), sidecar)
    return 0


def cmd_cluster(args) -> int:
    gram = _load_matrix(args.gram)
    if args.k is not None:
        assignment = kernel_kmeans(
            gram,
            args.k,
            init=args.init,
            max_iter=args.max_iter,
            restarts=args.restarts,
            seed=args.seed,
        )
        scores = {
            args.k: variance_ratio_criterion(gram, assignment.labels)
            if args.criterion == "vrc"
            else silhouette_score(gram, assignment.labels)
        }
        best_k = args.k
        assignments = {args.k: assignment}
    else:
        lo, hi = args.k_range
        result = select_k(
            gram,
            range(lo, hi + 1),
            args.criterion,
            init=args.init,
            max_iter=args.max_iter,
            restarts=args.restarts,
            seed=args.seed,
        )
        best_k, scores, assignments = result.best_k, result.scores, result.assignments
    chosen = assignments[best_k]
    Path(args.output).write_text("".join(f"{int(v)}\n" for v in chosen.labels))
    prov = _provenance("cluster", vars(args))
    report = {
        "best_k": best_k,
        "criterion": args.criterion,
        "criterion_space": "kernel",
        "scores": {str(k): scores[k] for k in sorted(scores)},
        "objective": chosen.objective,
        "objective_trace": list(chosen.objective_trace),
        "iterations": chosen.iterations,
        "converged": chosen.converged,
        "labels": chosen.labels.tolist(),
        "provenance": prov,
    }
    _write_json(args.report or str(args.output) + ".report.json", report)
    return 0


def cmd_kpca(args) -> int:
    gram = _load_matrix(args.gram)
    model = kpca_fit(gram, args.components)
    coords = kpca_transform(model)
    labels = _load_labels(args.labels) if args.labels else None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = [f"component_{i}" for i in range(coords.shape[1])]
    if labels is not None:
        header.append("label")
    writer.writerow(header)
    for idx, row in enumerate(coords):
        out = [_fmt(v) for v in row]
        if labels is not None:
            out.append(str(int(labels[idx])))
        writer.writerow(out)
    Path(args.output).write_text(buf.getvalue())
    _write_json(str(args.output) + ".provenance.json", _provenance("kpca", vars(args)))
    return 0


def cmd_eval(args) -> int:
    truth = _load_labels(args.truth)
    rows = []
    for pred_path in args.predictions:
        pred = _load_labels(pred_path)
        rows.append(
            {
                "name": Path(pred_path).name,
                "ari": adjusted_rand_index(truth, pred),
                "k": int(np.unique(pred).size),
            }
        )
    histogram = {}
    for row in rows:
        histogram[row["k"]] = histogram.get(row["k"], 0) + 1
    payload = {
        "per_input": rows,
        "mean_ari": float(np.mean([row["ari"] for row in rows])),
        "k_histogram": {str(k): histogram[k] for k in sorted(histogram)},
        "provenance": _provenance("eval", vars(args)),
    }
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "ari", "k"])
        for row in rows:
            writer.writerow([row["name"], _fmt(row["ari"]), row["k"]])
        Path(args.output).write_text(buf.getvalue())
        _write_json(str(args.output) + ".provenance.json", payload["provenance"])
    else:
        _write_json(args.output, payload)
    return 0


def cmd_graphdist(args) -> int:
    graph_a = graph_from_json(json.loads(Path(args.graph_a).read_text()))
    graph_b = graph_from_json(json.loads(Path(args.graph_b).read_text()))
    rep_a = representative(graph_a)
    rep_b = representative(graph_b)
    payload = {
        "vertices": graph_a.m,
        "distance": graph_distance(rep_a, rep_b),
        "connected_a": rep_a.connected.astype(int).tolist(),
        "connected_b": rep_b.connected.astype(int).tolist(),
        "provenance": _provenance("graphdist", vars(args)),
    }
    _write_json(args.output, payload)
    return 0


def _add_common(parser, threads=True):
    parser.add_argument("--alpha", type=float, default=0.1, help="significance level")
    parser.add_argument(
        "--convention",
        choices=[c.value for c in CriticalScale],
        default=CriticalScale.SZEKELY.value,
        help="critical-value scaling",
    )
    if threads:
        parser.add_argument("--threads", type=int, default=None,
                            help="worker threads (default: DEPCON_THREADS or 1)")
        parser.add_argument("--block-rows", type=int, default=None,
                            help="rows per feature block (memory budget control)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depcon",
        description="Dependence contribution kernel pipelines",
    )
    parser.add_argument("--version", action="version", version=f"depcon {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gram", help="kernel matrix of a dataset")
    p.add_argument("data")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    _add_common(p)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("indep", help="pairwise independence decisions")
    p.add_argument("data")
    p.add_argument("-o", "--output", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_indep)

    p = sub.add_parser("test", help="two-sample structure comparison")
    p.add_argument("data_a")
    p.add_argument("data_b")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--both-conventions", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("synth", help="generate a labeled benchmark")
    p.add_argument("-o", "--output", required=True, help="dataset CSV path")
    p.add_argument("--models", type=int, default=6)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--features", type=int, default=10)
    p.add_argument("--edge-prob", type=float, default=0.3)
    p.add_argument("--nonlinear", action="store_true")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--max-pairs", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("cluster", help="kernel k-means over a Gram file")
    p.add_argument("gram")
    p.add_argument("-o", "--output", required=True, help="labels CSV path")
    p.add_argument("--report", default=None, help="JSON report path")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("-k", type=int, default=None)
    group.add_argument("--k-range", type=int, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--criterion", choices=["vrc", "silhouette"], default="vrc")
    p.add_argument("--init", choices=["plusplus", "random"], default="plusplus")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("kpca", help="kernel PCA coordinates from a Gram file")
    p.add_argument("gram")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("-d", "--components", type=int, default=2)
    p.add_argument("--labels", default=None, help="optional labels file for a label column")
    p.set_defaults(func=cmd_kpca)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("predictions", nargs="+")
    p.add_argument("--truth", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("graphdist", help="distance between two mixed graphs")
    p.add_argument("graph_a")
    p.add_argument("graph_b")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_graphdist)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except DepconError as exc:
        print(f"depcon {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"depcon {args.command}: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_FILE_NOT_FOUND
    except OSError as exc:
        print(f"depcon {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
