"""Diversity vectors and the computations behind the experiment suite."""
from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core import Election, distance_matrix, distinct_votes
from domains import (
    Domain,
    cvc_enumerate,
    domain_size_formula,
    enumerate_euclidean,
    enumerate_sp,
    euclidean_box_rankings,
    identity,
    named_domain,
    random_embedding,
    reverse_extension,
    sample_cells,
)
from errors import BudgetError, InputError
from sampling import CultureSpec, sample_election, sc_gaps_domain, spawn_seeds
from solvers import KemenyResult, SolverConfig, solve, solve_exact

logger = logging.getLogger(__name__)

CULTURE_NAMES = ("IC", "Walsh", "Conitzer", "CVC", "1D-Box", "2D-Box", "3D-Box", "4D-Box", "5D-Box")
_BOX_NAME = re.compile(r"^([1-9])D-Box$")


@dataclass(frozen=True)
class DiversityVector:
    m: int
    values: Tuple[float, ...]  # kappa(k) / n for k = 1..len(values)
    method: str = "heuristic"
    restarts: Optional[int] = None
    seed: Optional[int] = None

    def __getitem__(self, k: int) -> float:
        """kappa(k)/n, 1-based."""
        return self.values[k - 1]


class Dominance(str, enum.Enum):
    A_DOMINATES = "a>b"
    B_DOMINATES = "b>a"
    INCOMPARABLE = "incomparable"
    EQUAL = "equal"


def diversity_vector(e: Election, solver: Optional[SolverConfig] = None, domain: Optional[Domain] = None,
                     max_k: Optional[int] = None) -> DiversityVector:
    """Normalized k-Kemeny scores for k = 1..max_k (default m), repaired to be nonincreasing."""
    solver = solver or SolverConfig()
    top = e.m if max_k is None else min(max_k, e.m)
    distinct = len(distinct_votes(e)[0])
    n = float(e.n)
    values: List[float] = []
    for k in range(1, top + 1):
        if k >= distinct:
            values.append(0.0)
            continue
        value = float(solve(e, k, solver, domain).score) / n
        # a larger k can always reuse the smaller-k centers
        values.append(min(value, values[-1]) if values else value)
    return DiversityVector(m=e.m, values=tuple(values), method=solver.method,
                           restarts=solver.restarts if solver.method == "heuristic" else None,
                           seed=solver.seed)


def dominance(a: DiversityVector, b: DiversityVector, tol: float = 1e-9) -> Dominance:
    if len(a.values) != len(b.values):
        raise InputError(f"diversity vectors of different lengths: {len(a.values)} vs {len(b.values)}")
    x = np.asarray(a.values)
    y = np.asarray(b.values)
    ge = bool(np.all(x >= y - tol))
    le = bool(np.all(x <= y + tol))
    if ge and le:
        return Dominance.EQUAL
    if ge:
        return Dominance.A_DOMINATES
    if le:
        return Dominance.B_DOMINATES
    return Dominance.INCOMPARABLE


def polarization(v: DiversityVector) -> float:
    if v.m < 2 or len(v.values) < 2:
        raise InputError("polarization needs kappa(1) and kappa(2)")
    return v.values[0] - v.values[1]


def distance_histogram(e: Election, result: KemenyResult) -> np.ndarray:
    """Weighted counts of vote-to-nearest-center distances, bins 0..C(m,2)."""
    d = distance_matrix(e.rankings, list(result.centers), e.m).min(axis=1)
    return np.bincount(d, weights=np.asarray(e.weights, dtype=np.float64), minlength=comb(e.m, 2) + 1)


def aggregate_vectors(vectors: Sequence[DiversityVector]) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """Per-coordinate mean and sample standard deviation."""
    if not vectors:
        raise InputError("nothing to aggregate")
    arr = np.asarray([v.values for v in vectors], dtype=np.float64)
    mean = arr.mean(axis=0)
    std = arr.std(axis=0, ddof=1) if len(arr) > 1 else np.zeros(arr.shape[1])
    return tuple(float(x) for x in mean), tuple(float(x) for x in std)


# ---------------------------------------------------------------- domain ranking

@dataclass
class DomainRanking:
    classes: List[List[str]]  # most diverse first
    dominates: List[Tuple[str, str]] = field(default_factory=list)


def domain_ranking(vectors: Dict[str, DiversityVector], tol: float = 1e-9) -> DomainRanking:
    """Dominance order over named vectors; names with no strict dominance between them share a class."""
    names = list(vectors)
    strict = {(a, b) for a in names for b in names
              if a != b and dominance(vectors[a], vectors[b], tol) == Dominance.A_DOMINATES}
    parent = {a: a for a in names}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in names:
        for b in names:
            if a < b and (a, b) not in strict and (b, a) not in strict:
                parent[find(a)] = find(b)
    groups: Dict[str, List[str]] = {}
    for a in names:
        groups.setdefault(find(a), []).append(a)
    classes = list(groups.values())
    total = {a: sum(vectors[a].values) for a in names}

    def beaten_by(c: List[str], other: List[str]) -> bool:
        return any((x, y) in strict for x in other for y in c)

    ordered: List[List[str]] = []
    remaining = classes[:]
    while remaining:
        ready = [c for c in remaining if not any(beaten_by(c, o) for o in remaining if o is not c)]
        if not ready:  # inconsistent tolerance-collapsed relation; fall back to mass order
            ready = remaining[:]
        pick = max(ready, key=lambda c: max(total[x] for x in c))
        ordered.append(sorted(pick, key=lambda x: -total[x]))
        remaining.remove(pick)
    return DomainRanking(classes=ordered, dominates=sorted(strict))


# ---------------------------------------------------------------- experiment cells

class GridCell(BaseModel):
    model_config = ConfigDict(extra="forbid")

    source: Literal["domain", "culture"]
    name: str
    m: int = Field(8, ge=1)
    n: int = Field(512, ge=1)  # culture cells only
    k_values: List[int] = Field(default_factory=lambda: [1, 2])
    reps: int = Field(10, ge=1)
    r: float = Field(1.0, gt=0)  # box cultures

    @property
    def label(self) -> str:
        label = f"{self.source}:{self.name}:m={self.m}"
        if _BOX_NAME.match(self.name) and self.r != 1.0:
            label += f":r={self.r:g}"
        return label


class ExperimentGrid(BaseModel):
    model_config = ConfigDict(extra="forbid")

    cells: List[GridCell]
    seed: int = 0
    restarts: int = Field(10, ge=1)
    extra_ic: int = Field(512, ge=0)

    def cell_seeds(self) -> List[int]:
        return spawn_seeds(self.seed, len(self.cells))


def cell_election(cell: GridCell, rng) -> Tuple[Election, Optional[Domain]]:
    """One repetition of a cell: the election and the domain feeding the search space."""
    if cell.source == "domain":
        dom = named_domain(cell.name, cell.m, rng)
        return dom.as_election(), dom
    axis = identity(cell.m)
    if cell.name == "IC":
        return sample_election(CultureSpec(kind="IC-full"), cell.m, cell.n, seed=rng), None
    if cell.name in ("Walsh", "Conitzer"):
        e = sample_election(CultureSpec(kind=cell.name), cell.m, cell.n, seed=rng)
        return e, enumerate_sp(axis)
    if cell.name == "CVC":
        return sample_election(CultureSpec(kind="CVC-random"), cell.m, cell.n, seed=rng), cvc_enumerate(axis)
    box = _BOX_NAME.match(cell.name)
    if box:
        d = int(box.group(1))
        emb = random_embedding(rng, cell.m, d)
        e = sample_election(CultureSpec(kind="rBox", d=d, r=cell.r), cell.m, cell.n, context=emb, seed=rng)
        return e, enumerate_euclidean(emb, seed=rng, batches=10)
    raise InputError(f"unknown culture {cell.name!r}; expected one of {', '.join(CULTURE_NAMES)}")


def cell_vectors(cell: GridCell, seed: int, solver: SolverConfig) -> List[DiversityVector]:
    """Diversity vectors for every repetition of a cell (top-level so process pools can pickle it)."""
    out = []
    for rep_seed in spawn_seeds(seed, cell.reps):
        rng = np.random.default_rng(rep_seed)
        e, dom = cell_election(cell, rng)
        rep_solver = solver.model_copy(update={"seed": rep_seed})
        out.append(diversity_vector(e, rep_solver, dom, max_k=max(cell.k_values)))
    return out


@dataclass(frozen=True)
class HeuristicRow:
    label: str
    k: int
    mean: Optional[float]  # None when every repetition was over budget
    std: Optional[float]
    reps: int
    skipped: int = 0
    budget: Optional[str] = None  # budget that forced the skips


def heuristic_ratio(heuristic: float, exact: float) -> float:
    if exact == 0:
        return 1.0 if heuristic == 0 else float("inf")
    return heuristic / exact


def evaluate_heuristic(grid: ExperimentGrid, skip_over_budget: bool = False) -> List[HeuristicRow]:
    """Mean and deviation of heuristic/exact score ratios per (cell, k).

    Repetitions whose exact score exceeds a budget raise BudgetError naming the
    cell, or with ``skip_over_budget`` are counted as skipped. Exact scores are
    computed once per distinct election, so fixed domains pay for them once.
    """
    rows = []
    for cell, seed in zip(grid.cells, grid.cell_seeds()):
        ratios: Dict[int, List[float]] = {k: [] for k in cell.k_values}
        skipped: Dict[int, int] = {k: 0 for k in cell.k_values}
        budgets: Dict[int, str] = {}
        exact_scores: Dict[Tuple, Optional[float]] = {}
        for rep_seed in spawn_seeds(seed, cell.reps):
            rng = np.random.default_rng(rep_seed)
            e, dom = cell_election(cell, rng)
            solver = SolverConfig(method="heuristic", restarts=grid.restarts, extra_ic=grid.extra_ic, seed=rep_seed)
            for k in cell.k_values:
                key = (e.votes, k)
                if key not in exact_scores:
                    try:
                        exact_scores[key] = float(solve_exact(e, k).score)
                    except BudgetError as exc:
                        if not skip_over_budget:
                            raise BudgetError(f"cell {cell.label} k={k}: {exc.budget}",
                                              exc.limit, exc.requested) from exc
                        exact_scores[key] = None
                        budgets[k] = exc.budget
                exact = exact_scores[key]
                if exact is None:
                    skipped[k] += 1
                    continue
                heur = solve(e, k, solver, dom).score
                ratios[k].append(heuristic_ratio(float(heur), exact))
        for k, values in ratios.items():
            mean = std = None
            if values:
                arr = np.asarray(values)
                mean = float(arr.mean())
                std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
            rows.append(HeuristicRow(label=cell.label, k=k, mean=mean, std=std, reps=len(values),
                                     skipped=skipped[k], budget=budgets.get(k)))
            if skipped[k]:
                logger.warning("Heuristic cell over budget", extra={"cell": cell.label, "k": k,
                                                                    "skipped": skipped[k], "budget": budgets[k]})
            else:
                logger.info("Heuristic cell evaluated", extra={"cell": cell.label, "k": k, "mean": mean})
    return rows


# ---------------------------------------------------------------- Euclidean boxes, extensions, SC gaps

@dataclass(frozen=True)
class BoxCount:
    r: float
    distinct_sampled: float
    max_in_box: float
    domain_size: float


def count_distinct_sampled(m: int, d: int, r_values: Sequence[float], reps: int, seed=None,
                           samples: Optional[int] = None, batches: int = 20) -> List[BoxCount]:
    """Mean distinct sampled votes, box-reachable cells and domain size per r.

    Samples default to ten times the domain size. For d >= 3 the cell counts are
    sampled lower bounds, so every ranking a voter was seen to cast is counted as
    a witnessed cell of its box and of the domain.
    """
    totals = {r: np.zeros(3) for r in r_values}
    for rep_seed in spawn_seeds(seed, reps):
        rng = np.random.default_rng(rep_seed)
        emb = random_embedding(rng, m, d)
        if d <= 2:
            cells = None
            size = domain_size_formula(f"{d}D", m) if m >= 2 else 1
        else:
            cells = set(sample_cells(emb, seed=rng, batches=batches))
            size = len(cells)
        n = samples or 10 * size
        counts = {}
        for r in r_values:
            e = sample_election(CultureSpec(kind="rBox", d=d, r=r), m, n, context=emb, seed=rng)
            seen = set(e.rankings)
            in_box = set(euclidean_box_rankings(emb, r, seed=rng, batches=batches))
            if cells is not None:
                in_box |= seen
                cells |= in_box
            counts[r] = (len(seen), len(in_box))
        if cells is not None:
            size = len(cells)
        for r in r_values:
            totals[r] += (*counts[r], size)
    return [BoxCount(r, *(totals[r] / reps)) for r in r_values]


def extension_ratios(names: Sequence[str], m_values: Sequence[int], reps: int = 1,
                     seed=None) -> Dict[Tuple[str, int], float]:
    """Mean |reverse extension| / |domain| per (domain name, m)."""
    out = {}
    for name, rep_seed in zip(names, spawn_seeds(seed, len(names))):
        for m, m_seed in zip(m_values, spawn_seeds(rep_seed, len(m_values))):
            ratios = []
            for s in spawn_seeds(m_seed, reps):
                _, ratio = reverse_extension(named_domain(name, m, np.random.default_rng(s), batches=10))
                ratios.append(ratio)
            out[(name, m)] = float(np.mean(ratios))
    return out


def sc_gaps_diversity(m: int, t: int, n: int, reps: int, seed=None,
                      partial_last_block: bool = False) -> Dict[str, Tuple[Tuple[float, ...], Tuple[float, ...]]]:
    """Diversity of SC-gaps elections under uniform and weight-proportional sampling."""
    solver = SolverConfig(method="sc")
    out = {}
    for mode, mode_seed in zip(("uniform", "weighted"), spawn_seeds(seed, 2)):
        vectors = []
        for rep_seed in spawn_seeds(mode_seed, reps):
            rng = np.random.default_rng(rep_seed)
            dom = sc_gaps_domain(m, t, rng, partial_last_block=partial_last_block)
            spec = CultureSpec(kind="SC-gaps", t=t, weighted=mode == "weighted")
            e = sample_election(spec, m, n, context=dom, seed=rng)
            vectors.append(diversity_vector(e, solver))
        out[mode] = aggregate_vectors(vectors)
    return out
