"""Command-line front end. Exit status 0 on success, 1 on usage errors and
2 on runtime failures."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Sequence

from pydantic import ValidationError

from . import service
from .schemas import (
    DetectionExactRequest,
    DetectionLimitRequest,
    EstimateRequest,
    ExperimentRequest,
    GeneratorSpecModel,
    GraphModel,
    LikelihoodRequest,
    SnapshotModel,
    SpreadRequest,
    UrnRequest,
    VaccineRequest,
)

EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_edges(path: str) -> GraphModel:
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].split()
            if not line:
                continue
            if len(line) != 2:
                raise ValueError(f"{path}: line {lineno}: expected two node ids")
            try:
                edges.append((int(line[0]), int(line[1])))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-integer node id") from None
    return GraphModel(edges=edges)


def _read_snapshot(path: str) -> SnapshotModel:
    with open(path, encoding="utf-8") as fh:
        return SnapshotModel(**json.load(fh))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _generator_args(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--family", required=required, help="graph family")
    for name in ("n", "d", "width", "height", "t", "k", "m"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--d-max", dest="d_max", type=int)
    p.add_argument("--connections", type=int, nargs="+", default=[])
    p.add_argument("--seed", type=int, default=0)


def _generator_model(args) -> GeneratorSpecModel:
    fields = {
        name: getattr(args, name)
        for name in ("family", "n", "d", "width", "height", "t", "k", "m", "d_max", "connections", "seed")
    }
    if fields["family"] == "broom" and fields["k"] is None:
        raise UsageError("broom needs --k")
    return GeneratorSpecModel(**fields)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_generate(args) -> None:
    graph = service.handle_generate(_generator_model(args))
    _emit("".join(f"{u} {v}\n" for u, v in graph.edges), args.out)


def cmd_spread(args) -> None:
    req = {
        "source": args.source,
        "target_size": args.target,
        "max_end_vertex_fraction": args.max_end_fraction,
        "seed": args.seed,
    }
    if args.graph:
        req["graph"] = _read_edges(args.graph)
    elif args.infinite_d is not None:
        req["infinite_degree"] = args.infinite_d
    elif args.family:
        req["generator"] = _generator_model(args)
    else:
        raise UsageError("spread needs --graph, --infinite-d or --family")
    snap = service.handle_spread(SpreadRequest(**req))
    _emit(_dump(snap.model_dump(exclude_none=True)), args.out)


def cmd_estimate(args) -> None:
    req = EstimateRequest(
        snapshot=_read_snapshot(args.snapshot), method=args.method, k=args.k, shared_tree=args.shared_tree
    )
    _emit(_dump(service.handle_estimate(req).model_dump()), args.out)


def cmd_likelihood(args) -> None:
    req = LikelihoodRequest(
        kind=args.kind,
        snapshot=_read_snapshot(args.snapshot) if args.snapshot else None,
        d=args.d,
        n=args.n,
        t=args.t,
        k_ends=args.k_ends,
    )
    res = service.handle_likelihood(req)
    if args.format == "json":
        _emit(_dump(res.model_dump()), args.out)
        return
    lines = ["node,numerator,denominator,posterior"]
    lines += [f"{r.node},{r.numerator},{r.denominator},{r.posterior:.6g}" for r in res.rows]
    _emit("\n".join(lines) + "\n", args.out)


def cmd_asymptotics(args) -> None:
    if args.table == "exact":
        if not args.n:
            raise UsageError("asymptotics exact needs --n")
        rows = service.handle_detection_exact(
            DetectionExactRequest(d=args.d, n=args.n, tie_weight=args.tie_weight)
        )
        lines = ["d,n,exact_prob,value"] + [f"{r.d},{r.n},{r.exact_prob},{r.value:.6f}" for r in rows]
        _emit("\n".join(lines) + "\n", args.out)
        return
    rows = service.handle_detection_limit(DetectionLimitRequest(d=args.d))
    if len(rows) == 1 and not args.csv:
        _emit(f"{rows[0].limit:.6f}\n", args.out)
    else:
        lines = ["d,limit"] + [f"{r.d},{r.limit:.6f}" for r in rows]
        _emit("\n".join(lines) + "\n", args.out)


def cmd_urn(args) -> None:
    req = UrnRequest(
        initial=args.initial,
        m=args.m,
        draws=args.draws,
        spreading_d=args.spreading_d,
        spreading_n=args.spreading_n,
        mode=args.mode,
        outcome=args.outcome,
        color=args.color,
        replicates=args.replicates,
        seed=args.seed,
    )
    _emit(_dump(service.handle_urn(req).model_dump()), args.out)


def cmd_vaccine(args) -> None:
    req = VaccineRequest(graph=_read_edges(args.graph), k=args.k, method=args.method, bfs_root=args.bfs_root)
    _emit(_dump(service.handle_vaccine(req).model_dump()), args.out)


def cmd_experiment(args) -> None:
    with open(args.config, encoding="utf-8") as fh:
        config = json.load(fh)
    overrides = {
        "trials": args.trials,
        "seed": args.seed,
        "out_dir": args.out_dir,
        "prefix": args.prefix,
        "workers": args.workers,
    }
    config.update({k: v for k, v in overrides.items() if v is not None})
    if args.timing:
        config["timing"] = True
    res = service.handle_experiment(ExperimentRequest(config=config))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(("method", "trials", "mean_error", "p_error_le_1", "detection_rate"))
    for method, agg in res.summary.items():
        writer.writerow((method, agg["trials"], agg["mean_error"], agg["p_error_le_1"], agg["detection_rate"]))
    for name, path in sorted(res.files.items()):
        print(f"# {name}: {path}")


def cmd_serve(args) -> None:
    import uvicorn

    uvicorn.run(service.create_app(), host=args.host, port=args.port)


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def build_parser() -> Parser:
    parser = Parser(prog="srcdetect", description="Contagion source detection toolkit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=Parser)
    sub.required = True

    p = sub.add_parser("generate", help="write a generated graph as an edge list")
    _generator_args(p, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("spread", help="simulate SI spreading and write a snapshot")
    p.add_argument("--graph", help="edge-list file of the underlying graph")
    p.add_argument("--infinite-d", dest="infinite_d", type=int, help="spread on an infinite d-regular tree")
    _generator_args(p, required=False)
    p.add_argument("--source", type=int, default=0)
    p.add_argument("--target", type=int, required=True, help="infected-set size")
    p.add_argument("--max-end-fraction", dest="max_end_fraction", default="1")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spread)

    p = sub.add_parser("estimate", help="estimate the source of a snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument(
        "--method",
        required=True,
        help="rumor_center, bfs_rc, multi_end_vertex, sdc, jordan, exact_ml or top_k",
    )
    p.add_argument("--k", type=int, help="suspect count for top_k")
    p.add_argument("--shared-tree", dest="shared_tree", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("likelihood", help="exact source likelihoods")
    p.add_argument("--kind", choices=("exact", "line", "broom", "pseudo_tree"), default="exact")
    p.add_argument("--snapshot")
    p.add_argument("--d", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--k-ends", dest="k_ends", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_likelihood)

    p = sub.add_parser("asymptotics", help="detection probability tables")
    p.add_argument("table", choices=("exact", "limit"))
    p.add_argument("--d", type=int, nargs="+", required=True)
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--tie-weight", dest="tie_weight", default="1")
    p.add_argument("--csv", action="store_true", help="always print CSV rows")
    p.add_argument("--out")
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("urn", help="Pólya urn probabilities and samples")
    p.add_argument("--initial", type=int, nargs="+")
    p.add_argument("--m", type=int)
    p.add_argument("--draws", type=int)
    p.add_argument("--spreading-d", dest="spreading_d", type=int)
    p.add_argument("--spreading-n", dest="spreading_n", type=int)
    p.add_argument("--mode", choices=("pmf", "marginal", "sample"), default="marginal")
    p.add_argument("--outcome", type=int, nargs="+")
    p.add_argument("--color", type=int, default=0)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_urn)

    p = sub.add_parser("vaccine", help="choose protection nodes")
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", choices=("vaccine", "brute_force", "degree"), default="vaccine")
    p.add_argument("--bfs-root", dest="bfs_root", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_vaccine)

    p = sub.add_parser("experiment", help="run a seeded batch experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--prefix")
    p.add_argument("--timing", action="store_true", help="record per-method wall time")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("serve", help="serve the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (UsageError, ValidationError) as exc:
        print(f"srcdetect: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, RecursionError) as exc:
        print(f"srcdetect: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
