"""Simulation models and the replication driver that tabulates selections.

Standard normals are drawn with the Box-Muller transform from uniforms of a
Philox counter-based generator keyed by the replicate seed, so a replicate's
data depend only on its own seed.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .baselines import b2, b4
from .blinding import GaussianModel
from .errors import ArgumentError
from .knn import Metric, NeighborConfig
from .objective import EmpiricalScorer
from .search import SearchConfig, run_search

MODELS = ("example1-dim4", "example1-dim23", "example2-dim10")

E1_SD_V1 = 1.25
E1_SD_V2 = 0.55
E1_SD_EPS = 0.01
E2_VAR_V1 = 290.0
E2_VAR_V2 = 300.0
E2_V3_COEF = (-0.3, 0.925)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1)))


def standard_normal(rng: np.random.Generator, size: tuple[int, ...]) -> np.ndarray:
    """Box-Muller standard normals (cosine branch for the first half, sine for the rest)."""
    total = int(np.prod(size))
    half = (total + 1) // 2
    u1 = 1.0 - rng.random(half)  # in (0, 1], keeps log finite
    u2 = rng.random(half)
    radius = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([radius * np.cos(2 * np.pi * u2), radius * np.sin(2 * np.pi * u2)])
    return z[:total].reshape(size)


def _example1_dim4(rng, n):
    z = standard_normal(rng, (n, 6))
    v1, v2 = E1_SD_V1 * z[:, 0], E1_SD_V2 * z[:, 1]
    eps = E1_SD_EPS * z[:, 2:]
    return np.column_stack([v1, np.abs(v1), v2, v1 * v2]) + eps


def _example1_dim23(rng, n):
    z = standard_normal(rng, (n, 25))
    v1, v2 = E1_SD_V1 * z[:, 0], E1_SD_V2 * z[:, 1]
    eps = E1_SD_EPS * z[:, 2:]
    signal = np.column_stack([v1] * 5 + [np.abs(v1)] * 5 + [v2] * 5 + [v1 * v2] * 5 + [np.zeros(n)] * 3)
    return signal + eps


def _example2_dim10(rng, n):
    z = standard_normal(rng, (n, 13))
    v1 = np.sqrt(E2_VAR_V1) * z[:, 0]
    v2 = np.sqrt(E2_VAR_V2) * z[:, 1]
    v3 = E2_V3_COEF[0] * v1 + E2_V3_COEF[1] * v2 + z[:, 2]
    signal = np.column_stack([v1] * 4 + [v2] * 4 + [v3] * 2)
    return signal + z[:, 3:]


_GENERATORS = {
    "example1-dim4": _example1_dim4,
    "example1-dim23": _example1_dim23,
    "example2-dim10": _example2_dim10,
}


def generate(kind: str, n: int, seed: int) -> np.ndarray:
    """Draw an n x p sample from one of :data:`MODELS`."""
    if kind not in _GENERATORS:
        raise ArgumentError(f"unknown model {kind!r}; choose from {', '.join(MODELS)}")
    if n < 2:
        raise ArgumentError(f"n must be >= 2, got {n}")
    return _GENERATORS[kind](rng_for(seed), int(n))


def example2_true_cov() -> GaussianModel:
    """Exact covariance of the ten-variable three-factor model."""
    a, b = E2_V3_COEF
    var_v3 = a * a * E2_VAR_V1 + b * b * E2_VAR_V2 + 1.0
    factor = np.array([
        [E2_VAR_V1, 0.0, a * E2_VAR_V1],
        [0.0, E2_VAR_V2, b * E2_VAR_V2],
        [a * E2_VAR_V1, b * E2_VAR_V2, var_v3],
    ])
    load = np.zeros((10, 3))
    load[0:4, 0] = 1.0
    load[4:8, 1] = 1.0
    load[8:10, 2] = 1.0
    cov = load @ factor @ load.T + np.eye(10)
    return GaussianModel(mean=np.zeros(10), cov=cov)


def model_groups(kind: str) -> list[str]:
    """Group label of every variable, used to tabulate selections."""
    if kind == "example1-dim4":
        return ["X1", "X2", "X3", "X4"]
    if kind == "example1-dim23":
        return ["A1"] * 5 + ["A2"] * 5 + ["A3"] * 5 + ["A4"] * 5 + ["A5"] * 3
    if kind == "example2-dim10":
        return ["A1"] * 4 + ["A2"] * 4 + ["A3"] * 2
    raise ArgumentError(f"unknown model {kind!r}")


def model_dim(kind: str) -> int:
    return len(model_groups(kind))


def group_rows(groups: Sequence[str], d: int) -> list[tuple[str, ...]]:
    """All multisets of d group labels that some d-subset of variables can realise."""
    labels = sorted(set(groups), key=lambda g: (groups.index(g), g))
    sizes = Counter(groups)
    rows = []
    for combo in itertools.combinations_with_replacement(labels, d):
        if all(Counter(combo)[g] <= sizes[g] for g in set(combo)):
            rows.append(combo)
    return rows


def label_subset(subset: Sequence[int], groups: Sequence[str]) -> tuple[str, ...]:
    order = {g: k for k, g in enumerate(dict.fromkeys(groups))}
    return tuple(sorted((groups[i] for i in subset), key=lambda g: order[g]))


@dataclass
class StudyConfig:
    model: str
    n: int
    replicates: int = 500
    methods: tuple[str, ...] = ("blinding", "b2", "b4")
    d: int = 2
    q: int = 2
    gamma: float = 20.0
    weights: object = "equal"
    metric: str = "euclidean"
    strategy: str = "exhaustive"
    neighbors: NeighborConfig = field(default_factory=NeighborConfig)
    base_seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ArgumentError(f"unknown model {self.model!r}")
        if self.replicates < 1:
            raise ArgumentError("replicates must be >= 1")
        if not self.methods:
            raise ArgumentError("at least one method is required")
        bad = set(self.methods) - {"blinding", "b2", "b4"}
        if bad:
            raise ArgumentError(f"unknown methods: {sorted(bad)}")

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "n": self.n,
            "replicates": self.replicates,
            "methods": list(self.methods),
            "d": self.d,
            "q": self.q,
            "gamma": self.gamma,
            "weights": self.weights if isinstance(self.weights, str) else [float(w) for w in self.weights],
            "metric": self.metric,
            "strategy": self.strategy,
            "r": self.neighbors.r,
            "estimator": self.neighbors.estimator,
            "base_seed": self.base_seed,
        }


@dataclass
class ProportionTable:
    rows: list[tuple[str, ...]]
    methods: list[str]
    counts: dict[str, dict[tuple[str, ...], int]]
    replicates: int
    summary: dict[str, float] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def proportion(self, method: str, row: Sequence[str]) -> float:
        return self.counts[method].get(tuple(row), 0) / self.replicates

    def mass(self, method: str, rows: Sequence[Sequence[str]]) -> float:
        return sum(self.proportion(method, r) for r in rows)

    def records(self) -> list[dict]:
        return [
            {"selection": ",".join(row), **{m: self.proportion(m, row) for m in self.methods}}
            for row in self.rows
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["selection", *self.methods])
        for rec in self.records():
            writer.writerow([rec["selection"], *(repr(float(rec[m])) for m in self.methods)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "replicates": self.replicates,
                "methods": self.methods,
                "rows": self.records(),
                "summary": self.summary,
                "config": self.config,
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_csv(cls, text: str, replicates: int) -> "ProportionTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        methods = header[1:]
        rows, counts = [], {m: {} for m in methods}
        for line in reader:
            row = tuple(line[0].split(","))
            rows.append(row)
            for m, val in zip(methods, line[1:]):
                counts[m][row] = int(round(float(val) * replicates))
        return cls(rows, methods, counts, replicates)


def run_replicate(cfg: StudyConfig, rep: int) -> dict:
    """Selections (and blinding angle diagnostics) for one replicate."""
    X = generate(cfg.model, cfg.n, cfg.base_seed + rep)
    out: dict = {}
    if "blinding" in cfg.methods:
        scorer = EmpiricalScorer(X, cfg.q, cfg.weights, cfg.neighbors, Metric(cfg.metric))
        scfg = SearchConfig(strategy=cfg.strategy, d=cfg.d, seed=cfg.base_seed + rep)
        res = run_search(scorer, scfg)
        out["blinding"] = res.subset
        out["max_angle"] = res.report.max_angle
        out["h"] = res.report.h
        # best largest angle at each smaller cardinality, for the angle rule
        out["smaller_d_max_angle"] = {
            dd: run_search(scorer, SearchConfig(strategy=cfg.strategy, d=dd, seed=cfg.base_seed + rep)).report.max_angle
            for dd in range(1, cfg.d)
        }
    if "b2" in cfg.methods:
        out["b2"] = b2(X, cfg.d)
    if "b4" in cfg.methods:
        out["b4"] = b4(X, cfg.d)
    return out


def run_study(cfg: StudyConfig, workers: int = 1, progress=None) -> ProportionTable:
    """Run every replicate and count how often each method picks each group combination.

    Replicate ``r`` uses seed ``base_seed + r``; counting is order-independent,
    so the table does not depend on ``workers``.
    """
    groups = model_groups(cfg.model)
    reps = range(cfg.replicates)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_replicate, [cfg] * cfg.replicates, reps))
    else:
        results = []
        for rep in reps:
            results.append(run_replicate(cfg, rep))
            if progress is not None:
                progress(rep + 1, cfg.replicates)

    rows = group_rows(groups, cfg.d)
    methods = list(cfg.methods)
    counts: dict[str, dict[tuple[str, ...], int]] = {m: Counter() for m in methods}
    for res in results:
        for m in methods:
            counts[m][label_subset(res[m], groups)] += 1
    summary: dict[str, float] = {}
    if "blinding" in methods:
        angles = np.array([res["max_angle"] for res in results])
        summary["blinding_max_angle_le_gamma"] = float(np.mean(angles <= cfg.gamma))
        summary["blinding_max_angle_gt_gamma"] = float(np.mean(angles > cfg.gamma))
        summary["blinding_mean_h"] = float(np.mean([res["h"] for res in results]))
        for dd in range(1, cfg.d):
            smaller = np.array([res["smaller_d_max_angle"][dd] for res in results])
            summary[f"blinding_d{dd}_rejected"] = float(np.mean(smaller > cfg.gamma))
    return ProportionTable(rows, methods, {m: dict(c) for m, c in counts.items()},
                           cfg.replicates, summary, cfg.to_dict())


PAPER_TABLES = {
    1: dict(model="example1-dim4", n=100, replicates=500, d=2, q=2),
    2: dict(model="example1-dim23", n=100, replicates=500, d=2, q=2),
    5: dict(model="example2-dim10", n=50, replicates=500, d=2, q=2),
}


def paper_table_config(table: int, **overrides) -> StudyConfig:
    """Preset configuration reproducing one of the published selection tables."""
    if table not in PAPER_TABLES:
        raise ArgumentError(f"no preset for table {table}; choose from {sorted(PAPER_TABLES)}")
    kwargs = dict(PAPER_TABLES[table], weights="equal", metric="euclidean", strategy="exhaustive")
    kwargs.update(overrides)
    return StudyConfig(**kwargs)
