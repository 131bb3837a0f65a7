"""Command-line interface.

Exit codes: 0 success, 2 usage or data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import read_csv, write_csv
from .errors import ArgumentError, BlindPCAError
from .knn import Metric, NeighborConfig
from .objective import EmpiricalScorer, PopulationScorer
from .pca import covariance, eigendecompose
from .search import SearchConfig, per_component, run_search
from .simgen import (
    MODELS,
    StudyConfig,
    example2_true_cov,
    model_groups,
    paper_table_config,
    run_study,
)


class UsageError(BlindPCAError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _int_or_auto(value: str):
    if value == "auto":
        return "auto"
    try:
        v = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {value!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _weights(value: str):
    if value in ("equal", "variance"):
        return value
    try:
        return [float(v) for v in value.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"weights must be equal, variance or w1,w2,...; got {value!r}") from None


def _add_method_flags(p: argparse.ArgumentParser, d_default="auto") -> None:
    p.add_argument("--d", type=_int_or_auto, default=d_default, help="subset size or 'auto' (angle rule)")
    p.add_argument("--q", type=int, default=2, help="number of leading components to explain")
    p.add_argument("--gamma", type=float, default=20.0, help="angle threshold in degrees for --d auto")
    p.add_argument("--d-max", type=int, default=None, help="largest d tried by --d auto")
    p.add_argument("--weights", type=_weights, default="variance", help="equal | variance | w1,w2,...")
    p.add_argument("--metric", choices=["euclidean", "mahalanobis"], default="euclidean")
    p.add_argument("--r", type=_int_or_auto, default="auto", help="neighbour count or 'auto' (GCV)")
    p.add_argument("--r-max", type=int, default=None, help="largest neighbour count in the GCV grid")
    p.add_argument("--shared-r", action="store_true", help="one GCV neighbour count for all blinded columns")
    p.add_argument("--estimator", choices=["mean", "median"], default="mean")
    p.add_argument("--search", choices=["exhaustive", "fb", "forward-backward", "genetic"], default="exhaustive")
    p.add_argument("--seed", type=int, default=0)


def _neighbor_config(args, n: int) -> NeighborConfig:
    grid = None
    if args.r_max is not None:
        top = min(max(2, args.r_max), n)
        grid = sorted(set(range(2, top + 1)) | {n})
    return NeighborConfig(r=args.r, r_grid=grid, estimator=args.estimator, shared_r=args.shared_r)


def _search_config(args) -> SearchConfig:
    return SearchConfig(strategy=args.search, d=args.d, gamma=args.gamma, d_max=args.d_max, seed=args.seed)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config_echo(args, skip=("func", "out", "scores", "timing")) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _scores_rows(X, scorer: EmpiricalScorer, subset, labels):
    """Original-PC and blinded-PC scores for every observation."""
    q = scorer.q
    Xc = X - X.mean(axis=0)
    orig = Xc @ scorer.original.vectors[:, :q]
    Y = scorer.blinded_sample(subset).values
    blinded_sys = eigendecompose(covariance(Y))
    blinded = (Y - Y.mean(axis=0)) @ blinded_sys.vectors[:, :q]
    header = ["row", *[f"pc{k + 1}" for k in range(q)], *[f"blinded_pc{k + 1}" for k in range(q)]]
    label_names = list(labels)
    header += label_names
    rows = []
    for j in range(X.shape[0]):
        rows.append([j, *orig[j].tolist(), *blinded[j].tolist(), *(labels[c][j] for c in label_names)])
    return header, rows


def cmd_select(args) -> int:
    table = read_csv(args.csv, exclude=args.exclude_cols, row_filter=args.filter)
    X, names = table.values, table.names
    if not 1 <= args.q <= X.shape[1]:
        raise ArgumentError(f"--q must be in [1, {X.shape[1]}]")
    started = time.perf_counter()
    scorer = EmpiricalScorer(X, args.q, args.weights, _neighbor_config(args, X.shape[0]), Metric(args.metric))
    cfg = _search_config(args)
    result = run_search(scorer, cfg)
    report = {
        "tool": "blindpca",
        "version": __version__,
        "input": {
            "path": table.source,
            "sha256": table.sha256,
            "n": int(X.shape[0]),
            "p": int(X.shape[1]),
            "columns": names,
            "excluded": list(args.exclude_cols),
            "filter": args.filter,
        },
        "config": _config_echo(args),
        "explained_ratio": [float(v) for v in scorer.original.explained_ratio()[: args.q]],
        "selection": {
            "subset": [int(i) for i in result.subset],
            "names": [names[i] for i in result.subset],
            "d": result.d,
            "evaluations": int(result.evaluations),
            "threshold_unmet": result.threshold_unmet,
            "report": result.report.to_dict(names),
            "d_path": [rep.to_dict(names) for rep in result.d_path],
        },
        "r_used": {names[i]: int(r) for i, r in sorted(result.report.r_used.items())},
        "r_mode": "shared" if args.shared_r else "per-column",
        "flags": {
            "degenerate": result.report.degenerate,
            "threshold_unmet": result.threshold_unmet,
            "unidentified_components": list(result.report.unidentified),
        },
    }
    if args.d == "auto":
        report["notes"] = [
            "best objective per d need not decrease monotonically when neighbour counts are re-selected per subset"
        ]
    if args.per_component:
        report["per_component"] = [
            {"component": k + 1, "subset": [names[i] for i in res.subset], "h_k": float(res.report.h_k[k]),
             "angle_deg": float(res.report.angles[k])}
            for k, res in enumerate(per_component(scorer, cfg))
        ]
    if args.timing:
        report["timing_seconds"] = time.perf_counter() - started
    if args.scores:
        header, rows = _scores_rows(X, scorer, result.subset, table.labels)
        write_csv(args.scores, header, rows)
    _emit(report, args.out)
    sel = report["selection"]
    print(f"selected,{';'.join(sel['names'])},h,{sel['report']['h']!r},max_angle_deg,{sel['report']['max_angle_deg']!r}",
          file=sys.stderr)
    return 0


def cmd_pca(args) -> int:
    table = read_csv(args.csv, exclude=args.exclude_cols, row_filter=args.filter)
    X, names = table.values, table.names
    p = X.shape[1]
    q = p if args.q is None else args.q
    if not 1 <= q <= p:
        raise ArgumentError(f"--q must be in [1, {p}]")
    system = eigendecompose(covariance(X))
    ratio = system.explained_ratio()
    report = {
        "input": {"path": table.source, "sha256": table.sha256, "n": int(X.shape[0]), "p": p, "columns": names},
        "q": q,
        "eigenvalues": [float(v) for v in system.values[:q]],
        "explained_ratio": [float(v) for v in ratio[:q]],
        "cumulative_ratio": [float(v) for v in np.cumsum(ratio)[:q]],
        "loadings": {names[i]: [float(v) for v in system.vectors[i, :q]] for i in range(p)},
        "degenerate": system.degenerate,
    }
    _emit(report, args.out)
    return 0
    return 0


def _group_representatives(groups: list[str], d: int) -> list[tuple[tuple[str, ...], tuple[int, ...]]]:
    from .simgen import group_rows

    members: dict[str, list[int]] = {}
    for i, g in enumerate(groups):
        members.setdefault(g, []).append(i)
    out = []
    for row in group_rows(groups, d):
        used: dict[str, int] = {}
        subset = []
        for g in row:
            subset.append(members[g][used.get(g, 0)])
            used[g] = used.get(g, 0) + 1
        out.append((row, tuple(sorted(subset))))
    return out


def theory_rows(d: int, q: int = 2, weights="equal") -> list[dict]:
    """Population objective for one representative subset per group combination."""
    model = example2_true_cov()
    scorer = PopulationScorer(model.cov, q, weights)
    groups = model_groups("example2-dim10")
    rows = []
    for labels, subset in _group_representatives(groups, d):
        rep = scorer(subset)
        rows.append({
            "groups": ",".join(labels),
            "subset": [int(i) for i in subset],
            "max_angle_deg": rep.max_angle,
            "h": rep.h,
            "angles_deg": [float(a) for a in rep.angles],
            "h_k": [float(v) for v in rep.h_k],
            "unidentified_components": list(rep.unidentified),
        })
    return rows


def cmd_theory(args) -> int:
    if args.model != "example2":
        raise ArgumentError("the population analysis is only available for --model example2")
    model = example2_true_cov()
    ratio = eigendecompose(model.cov).explained_ratio()
    rows = theory_rows(args.d, args.q, args.weights)
    payload = {
        "model": "example2-dim10",
        "d": args.d,
        "q": args.q,
        "weights": args.weights,
        "explained_ratio_cumulative": float(np.sum(ratio[: args.q])),
        "rows": rows,
        "best": min(rows, key=lambda r: (r["h"], r["groups"]))["groups"],
    }
    _emit(payload, args.out)
    print("groups,max_angle_deg,h", file=sys.stderr)
    for r in rows:
        print(f"{r['groups']},{r['max_angle_deg']:.3f},{r['h']:.6g}", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    neighbors = NeighborConfig(r=args.r, estimator=args.estimator, shared_r=args.shared_r)
    common = dict(weights=args.weights, metric=args.metric, strategy=args.search, neighbors=neighbors,
                  base_seed=args.seed, gamma=args.gamma, q=args.q)
    if args.replicates is not None:
        common["replicates"] = args.replicates
    if args.methods:
        common["methods"] = tuple(args.methods.split(","))
    if args.paper_table is not None:
        cfg = paper_table_config(args.paper_table, **common)
    else:
        if args.model is None:
            raise ArgumentError("--model is required without --paper-table")
        cfg = StudyConfig(model=args.model, n=args.n, d=args.d, **common)
    table = run_study(cfg, workers=args.workers)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.csv").write_text(table.to_csv())
    Path(f"{prefix}.json").write_text(table.to_json() + "\n")
    sys.stdout.write(table.to_csv())
    for k, v in sorted(table.summary.items()):
        print(f"{k},{v!r}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blindpca", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"blindpca {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("select", help="choose the variables that best explain the leading components")
    p.add_argument("csv")
    p.add_argument("--exclude-cols", type=lambda s: [c for c in s.split(",") if c], default=[])
    p.add_argument("--filter", default=None, help="keep rows where COLUMN=v1,v2 (COLUMN must be excluded)")
    _add_method_flags(p)
    p.add_argument("--per-component", action="store_true", help="also search one subset per component")
    p.add_argument("--scores", default=None, help="write original and blinded PC scores to this CSV")
    p.add_argument("--timing", action="store_true", help="record elapsed time in the report")
    p.add_argument("--out", default=None, help="JSON report path (stdout when omitted)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("pca", help="plain principal components report")
    p.add_argument("csv")
    p.add_argument("--exclude-cols", type=lambda s: [c for c in s.split(",") if c], default=[])
    p.add_argument("--filter", default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("theory", help="population analysis of the ten-variable Gaussian model")
    p.add_argument("--model", default="example2")
    p.add_argument("--d", type=int, choices=[1, 2], default=1)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--weights", type=_weights, default="equal")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("simulate", help="replicated selection study on a simulation model")
    p.add_argument("--model", choices=MODELS, default=None)
    p.add_argument("--paper-table", type=int, choices=[1, 2, 5], default=None)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--methods", default=None, help="comma list from blinding,b2,b4")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--gamma", type=float, default=20.0)
    p.add_argument("--weights", type=_weights, default="equal")
    p.add_argument("--metric", choices=["euclidean", "mahalanobis"], default="euclidean")
    p.add_argument("--r", type=_int_or_auto, default="auto")
    p.add_argument("--shared-r", action="store_true")
    p.add_argument("--estimator", choices=["mean", "median"], default="mean")
    p.add_argument("--search", choices=["exhaustive", "fb", "forward-backward", "genetic"], default="exhaustive")
    p.add_argument("--seed", type=int, default=0, help="base seed; replicate r uses seed + r")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="study", help="output prefix for .csv and .json")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if isinstance(getattr(args, "weights", None), list) and hasattr(args, "q"):
            if len(args.weights) != args.q:
                raise ArgumentError(f"--weights lists {len(args.weights)} values but --q is {args.q}")
        return args.func(args)
    except BlindPCAError as exc:
        print(f"blindpca: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"blindpca: numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
