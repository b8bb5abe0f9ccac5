"""Command-line pipeline driver.

Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
stderr; machine-readable output is TSV on stdout or in files.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path

from . import clusterinit, distances, ensemble, geometry, metrics, simgraph

DEFAULT_K_GRID = (32, 64, 128, 256, 512, 1024, 2000)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shapesim", description=__doc__)
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="sample a point cloud from an OBJ mesh")
    sp.add_argument("--mesh", required=True)
    sp.add_argument("--n", type=int, default=4096)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--raw", action="store_true", help="skip min-max normalization")

    ip = sub.add_parser("init", help="capacity-bounded initial clustering")
    ip.add_argument("--features", required=True)
    ip.add_argument("--k", type=int, default=2000)
    ip.add_argument("--capacity", type=int, default=12)
    ip.add_argument("--seed", type=int, required=True)
    ip.add_argument("--out", required=True)

    vp = sub.add_parser("serve", help="run the annotation service")
    vp.add_argument("--config", required=True)

    ep = sub.add_parser("evaluate", help="score a partition against references")
    ep.add_argument("--partition", required=True)
    ep.add_argument("--human", help="human edge-set TSV or edge-set manifest")
    ep.add_argument("--ensemble", help="method-partition manifest")
    ep.add_argument("--loo", action="store_true",
                    help="drop the evaluated partition from the method ensemble")
    ep.add_argument("--method", help="method name for output rows")
    ep.add_argument("--out", help="append score rows to this TSV")

    lp = sub.add_parser("silhouette", help="silhouette score over a distance matrix")
    lp.add_argument("--partition", required=True)
    lp.add_argument("--matrix", help="precomputed DMAT file")
    lp.add_argument("--shapes", help="directory of <model_id>.xyz clouds")
    lp.add_argument("--metric", choices=["chamfer", "jaccard"], default="chamfer")
    lp.add_argument("--resolution", type=int, default=32)
    lp.add_argument("--cache-dir", help="cache computed matrices here, keyed by digest")

    np_ = sub.add_parser("ensemble", help="summarize an ensemble manifest")
    np_.add_argument("--manifest", required=True)
    np_.add_argument("--kind", choices=["method", "human"], required=True)

    rp = sub.add_parser("report", help="rank methods from a score TSV")
    rp.add_argument("--scores", required=True)
    rp.add_argument("--index", default="balanced_accuracy")

    cp = sub.add_parser("consistency", help="agreement between two edge-set files")
    cp.add_argument("a")
    cp.add_argument("b")
    return p


def _data_error(message: str) -> "SystemExit":
    print(f"error: {message}", file=sys.stderr)
    return SystemExit(2)


def _cmd_sample(args) -> int:
    mesh = geometry.load_obj(Path(args.mesh).read_bytes())
    cloud = geometry.sample_surface(mesh, args.n, args.seed)
    if not args.raw:
        cloud = geometry.minmax_normalize(cloud)
    geometry.write_xyz(cloud, args.out)
    return 0


def _cmd_init(args) -> int:
    feats = clusterinit.read_features(args.features)
    coarse = clusterinit.kmeans(feats, args.k, args.seed)
    initial = clusterinit.capacity_split(feats, coarse, args.capacity, args.seed)
    simgraph.write_partition(initial.partition, args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig.load(args.config)
    uvicorn.run(create_app(config), host=config.host, port=config.port)
    return 0


def _canonical_labeling(p: simgraph.Partition) -> tuple:
    seen: dict[int, int] = {}
    out = []
    for m in sorted(p.assignment):
        c = p.assignment[m]
        out.append((m, seen.setdefault(c, len(seen))))
    return tuple(out)


def _cmd_evaluate(args) -> int:
    pred = simgraph.read_partition(args.partition)
    method = args.method or Path(args.partition).stem
    if not args.human and not args.ensemble:
        raise _data_error("evaluate needs --human and/or --ensemble")
    rows: list[tuple[str, int, str, float]] = []
    ba_ens = ba_hum = None

    if args.ensemble:
        ens = ensemble.read_partition_manifest(args.ensemble)
        parts = ens.partitions
        if args.loo:
            target = _canonical_labeling(pred)
            parts = tuple(
                q for q in parts if _canonical_labeling(q) != target
            ) or parts
        ens = ensemble.MethodEnsemble(parts)
        universe = simgraph.all_edges(pred.models)
        c = metrics.confusion(
            pred, lambda e: ensemble.method_ensemble_label(ens, e), universe
        )
        ba_ens = metrics.balanced_accuracy(c)
        rows.append((method, pred.k, "balanced_accuracy_vs_ensemble", ba_ens))
        rows.append((method, pred.k, "edge_accuracy_vs_ensemble", metrics.edge_accuracy(c)))

    if args.human:
        first = Path(args.human).read_text(encoding="utf-8").lstrip()
        if first.startswith("#manifest") or not "\t" in first.split("\n", 1)[0]:
            hum = ensemble.read_edge_set_manifest(args.human)
        else:
            hum = ensemble.HumanEnsemble((simgraph.read_edge_set(args.human),))
        support = sorted(hum.support())
        c = metrics.confusion(
            pred, lambda e: ensemble.human_ensemble_label(hum, e), support
        )
        ba_hum = metrics.balanced_accuracy(c)
        rows.append((method, pred.k, "balanced_accuracy_vs_human", ba_hum))
        rows.append((method, pred.k, "edge_accuracy_vs_human", metrics.edge_accuracy(c)))

    if ba_ens is not None and ba_hum is not None:
        rows.append(
            (method, pred.k, "ensemble_human",
             ensemble.ensemble_human_score(ba_ens, ba_hum))
        )
    for m, k, index, value in rows:
        print(f"{m}\t{k}\t{index}\t{value:.6f}")
    if args.out:
        with open(args.out, "a", encoding="utf-8", newline="\n") as f:
            for m, k, index, value in rows:
                f.write(f"{m}\t{k}\t{index}\t{value:.6f}\n")
    return 0


def _load_shapes(shapes_dir: str, metric: str, resolution: int):
    paths = sorted(Path(shapes_dir).glob("*.xyz"))
    if len(paths) < 2:
        raise _data_error(f"need at least two .xyz files in {shapes_dir}")
    shapes = []
    for path in paths:
        cloud = geometry.read_xyz(path)
        if metric == "jaccard":
            shape = geometry.voxelize(cloud, resolution)
        else:
            shape = cloud
        shapes.append((path.stem, shape))
    return shapes


def _cmd_silhouette(args, threads: int) -> int:
    p = simgraph.read_partition(args.partition)
    if args.matrix:
        d = distances.read_matrix(args.matrix)
    elif args.shapes:
        shapes = _load_shapes(args.shapes, args.metric, args.resolution)
        cache = None
        if args.cache_dir:
            digest = hashlib.sha256(
                "\n".join([args.metric, str(args.resolution)] + [m for m, _ in shapes]).encode()
            ).hexdigest()[:16]
            cache = Path(args.cache_dir) / f"{args.metric}-{digest}.dmat"
        if cache is not None and cache.exists():
            d = distances.read_matrix(cache)
        else:
            d = distances.distance_matrix(shapes, args.metric, threads=threads)
            if cache is not None:
                cache.parent.mkdir(parents=True, exist_ok=True)
                distances.write_matrix(d, cache)
    else:
        raise _data_error("silhouette needs --matrix or --shapes")
    result = metrics.silhouette(p, d)
    print(f"silhouette_mean\t{result.mean:.6f}")
    return 0


def _cmd_ensemble(args) -> int:
    if args.kind == "method":
        ens = ensemble.read_partition_manifest(args.manifest)
        models = sorted(ens.partitions[0].models)
        print(f"partitions\t{len(ens.partitions)}")
        print(f"models\t{len(models)}")
        print("k_values\t" + ",".join(str(p.k) for p in ens.partitions))
    else:
        hum = ensemble.read_edge_set_manifest(args.manifest)
        support = hum.support()
        pos = sum(
            1 for e in support
            if ensemble.human_ensemble_label(hum, e) == simgraph.POSITIVE
        )
        neg = sum(
            1 for e in support
            if ensemble.human_ensemble_label(hum, e) == simgraph.NEGATIVE
        )
        print(f"edge_sets\t{len(hum.edge_sets)}")
        print(f"support\t{len(support)}")
        print(f"positive\t{pos}")
        print(f"negative\t{neg}")
        print(f"ties\t{len(support) - pos - neg}")
    return 0


def _cmd_report(args) -> int:
    table = metrics.read_scores(args.scores)
    scores = {
        m: {k: v[args.index] for k, v in per_k.items() if args.index in v}
        for m, per_k in table.items()
    }
    scores = {m: s for m, s in scores.items() if s}
    if not scores:
        raise _data_error(f"no rows with index {args.index!r}")
    per_k, overall = metrics.ranking_report(scores)
    for k in sorted(per_k):
        print(f"rank@K={k}\t" + " > ".join(per_k[k]))
    print("rank@mean\t" + " > ".join(overall))
    return 0


def _cmd_consistency(args) -> int:
    a = simgraph.read_edge_set(args.a)
    b = simgraph.read_edge_set(args.b)
    c = simgraph.consistency(a, b)
    if c is None:
        raise _data_error("no common support between the two edge sets")
    print(f"{c:.6f}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "sample": lambda: _cmd_sample(args),
        "init": lambda: _cmd_init(args),
        "serve": lambda: _cmd_serve(args),
        "evaluate": lambda: _cmd_evaluate(args),
        "silhouette": lambda: _cmd_silhouette(args, args.threads),
        "ensemble": lambda: _cmd_ensemble(args),
        "report": lambda: _cmd_report(args),
        "consistency": lambda: _cmd_consistency(args),
    }
    try:
        return handlers[args.command]()
    except SystemExit:
        raise
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
