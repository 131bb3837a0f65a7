"""Subset search over a scorer mapping an index subset to an ObjectiveReport."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ArgumentError
from .objective import ObjectiveReport

STRATEGIES = ("exhaustive", "forward-backward", "genetic")
_ALIASES = {"fb": "forward-backward", "ga": "genetic"}


@dataclass(frozen=True)
class SearchConfig:
    strategy: str = "exhaustive"
    d: int | str = "auto"
    gamma: float = 20.0
    d_max: int | None = None
    seed: int = 0
    max_subsets: int = 100_000
    component: int | None = None  # score h^k of one component instead of the weighted h
    population: int = 50
    generations: int = 40
    mutation_rate: float = 0.1
    elite: int = 2

    def __post_init__(self):
        object.__setattr__(self, "strategy", _ALIASES.get(self.strategy, self.strategy))
        if self.strategy not in STRATEGIES:
            raise ArgumentError(f"unknown search strategy {self.strategy!r}")
        if self.d != "auto" and (not isinstance(self.d, (int, np.integer)) or self.d < 1):
            raise ArgumentError(f"d must be a positive integer or 'auto', got {self.d!r}")
        if not 0 < self.gamma <= 90:
            raise ArgumentError(f"gamma must be in (0, 90], got {self.gamma}")


@dataclass
class SelectionResult:
    subset: tuple[int, ...]
    report: ObjectiveReport
    evaluations: int
    d_path: list[ObjectiveReport] = field(default_factory=list)
    threshold_unmet: bool = False
    swaps: int = 0

    @property
    def d(self) -> int:
        return len(self.subset)


def _key(cfg: SearchConfig) -> Callable[[ObjectiveReport], float]:
    if cfg.component is None:
        return lambda rep: rep.h
    k = cfg.component
    return lambda rep: float(rep.h_k[k])


def _check_d(d: int, p: int) -> None:
    if not 1 <= d <= p:
        raise ArgumentError(f"d must be in [1, {p}], got {d}")


def exhaustive(scorer, d: int, cfg: SearchConfig = SearchConfig()) -> SelectionResult:
    """Score every d-subset; the lexicographically first minimiser wins."""
    p = scorer.p
    _check_d(d, p)
    total = math.comb(p, d)
    if total > cfg.max_subsets:
        raise ArgumentError(
            f"{total} subsets of size {d} exceed the cap of {cfg.max_subsets}; "
            "use the forward-backward or genetic strategy"
        )
    key = _key(cfg)
    best, best_val = None, math.inf
    for subset in itertools.combinations(range(p), d):
        val = key(scorer(subset))
        if val < best_val:
            best, best_val = subset, val
    return SelectionResult(best, scorer(best), total)


def _best_swap(scorer, subset: tuple[int, ...], key) -> tuple[tuple[int, ...], float, int]:
    """Best single swap of a member for a non-member; (value, subset) order breaks ties."""
    outside = [j for j in range(scorer.p) if j not in subset]
    cands = [
        tuple(sorted(subset[:pos] + (j,) + subset[pos + 1:]))
        for pos in range(len(subset))
        for j in outside
    ]
    if not cands:
        return subset, key(scorer(subset)), 0
    val, best = min((key(scorer(c)), c) for c in cands)
    return best, val, len(cands)


def forward_backward(scorer, d: int, cfg: SearchConfig = SearchConfig(),
                     start: tuple[int, ...] | None = None) -> SelectionResult:
    """Greedy forward additions up to d variables, then best-swap passes until
    no swap strictly lowers the objective. ``start`` skips the forward phase."""
    p = scorer.p
    _check_d(d, p)
    key = _key(cfg)
    evals = 0
    if start is None:
        subset: tuple[int, ...] = ()
        while len(subset) < d:
            cands = [tuple(sorted(subset + (j,))) for j in range(p) if j not in subset]
            vals = [key(scorer(c)) for c in cands]
            evals += len(cands)
            subset = cands[int(np.argmin(vals))]
    else:
        subset = tuple(sorted(start))
        if len(subset) != d:
            raise ArgumentError(f"start subset has {len(subset)} variables, expected {d}")
    swaps = 0
    current = key(scorer(subset))
    while True:
        cand, val, tried = _best_swap(scorer, subset, key)
        evals += tried
        if val < current:
            subset, current = cand, val
            swaps += 1
        else:
            break
    return SelectionResult(subset, scorer(subset), max(evals, 1), swaps=swaps)


def _random_subset(rng: np.random.Generator, p: int, d: int) -> tuple[int, ...]:
    return tuple(sorted(int(i) for i in rng.choice(p, size=d, replace=False)))


def genetic(scorer, d: int, cfg: SearchConfig = SearchConfig(),
            initial: list[tuple[int, ...]] | None = None) -> SelectionResult:
    """Elitist genetic search over d-subsets followed by one best-swap pass.

    Parents come from binary tournaments. Crossover keeps the indices shared by
    both parents and fills the rest uniformly from their symmetric difference;
    mutation swaps one index for an outside one.
    """
    p = scorer.p
    _check_d(d, p)
    key = _key(cfg)
    rng = np.random.default_rng(cfg.seed)
    pop = [tuple(sorted(s)) for s in (initial or [])][: cfg.population]
    while len(pop) < cfg.population:
        pop.append(_random_subset(rng, p, d))
    seen = set()

    def fitness(s):
        seen.add(s)
        return key(scorer(s))

    for _ in range(cfg.generations):
        vals = np.array([fitness(s) for s in pop])
        order = sorted(range(len(pop)), key=lambda i: (vals[i], pop[i]))
        nxt = [pop[i] for i in order[: cfg.elite]]
        while len(nxt) < cfg.population:
            parents = []
            for _ in range(2):
                a, b = rng.integers(len(pop), size=2)
                parents.append(pop[a] if (vals[a], pop[a]) <= (vals[b], pop[b]) else pop[b])
            shared = set(parents[0]) & set(parents[1])
            pool = sorted((set(parents[0]) | set(parents[1])) - shared)
            fill = rng.choice(pool, size=d - len(shared), replace=False) if len(shared) < d else []
            child = set(shared) | {int(i) for i in fill}
            if rng.random() < cfg.mutation_rate:
                out = int(rng.choice(sorted(child)))
                choices = [j for j in range(p) if j not in child]
                if choices:
                    child.remove(out)
                    child.add(int(rng.choice(choices)))
            nxt.append(tuple(sorted(child)))
        pop = nxt
    vals = [fitness(s) for s in pop]
    best = min(zip(vals, pop))[1]
    cand, val, tried = _best_swap(scorer, best, key)
    swaps = 0
    if val < key(scorer(best)):
        best, swaps = cand, 1
    return SelectionResult(best, scorer(best), len(seen) + tried, swaps=swaps)


def search_fixed_d(scorer, d: int, cfg: SearchConfig = SearchConfig()) -> SelectionResult:
    if cfg.strategy == "exhaustive":
        return exhaustive(scorer, d, cfg)
    if cfg.strategy == "forward-backward":
        return forward_backward(scorer, d, cfg)
    return genetic(scorer, d, cfg)


def select_cardinality(scorer, cfg: SearchConfig = SearchConfig()) -> SelectionResult:
    """Smallest d whose best subset has all of its first q component angles <= gamma.

    The best objective value is not guaranteed to fall monotonically with d
    when neighbour counts are re-selected by GCV for every subset.
    """
    d_max = cfg.d_max or scorer.p
    _check_d(d_max, scorer.p)
    path: list[ObjectiveReport] = []
    evals = 0
    res = None
    for d in range(1, d_max + 1):
        res = search_fixed_d(scorer, d, cfg)
        path.append(res.report)
        evals += res.evaluations
        if res.report.max_angle <= cfg.gamma:
            return SelectionResult(res.subset, res.report, evals, path, False, res.swaps)
    return SelectionResult(res.subset, res.report, evals, path, True, res.swaps)


def run_search(scorer, cfg: SearchConfig) -> SelectionResult:
    if cfg.d == "auto":
        return select_cardinality(scorer, cfg)
    return search_fixed_d(scorer, int(cfg.d), cfg)


def per_component(scorer, cfg: SearchConfig) -> list[SelectionResult]:
    """A separate subset for each of the first q components (scored by h^k alone)."""
    out = []
    for k in range(scorer.q):
        kcfg = SearchConfig(**{**cfg.__dict__, "component": k})
        out.append(run_search(scorer, kcfg))
    return out
