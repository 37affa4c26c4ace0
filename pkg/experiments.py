"""Experiment suite: each experiment writes CSV/SVG data files plus a manifest.json.

Outputs depend only on (experiment, config, seed); nothing time-dependent goes
into the output directory, so reruns from a manifest reproduce it byte for byte.
"""
from __future__ import annotations

import contextlib
import csv
import json
import logging
import platform
import uuid
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Literal, Optional, Sequence, get_args

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

import config
import db
from analysis import (
    CULTURE_NAMES,
    DiversityVector,
    ExperimentGrid,
    GridCell,
    aggregate_vectors,
    cell_vectors,
    count_distinct_sampled,
    distance_histogram,
    domain_ranking,
    evaluate_heuristic,
    extension_ratios,
    polarization,
    sc_gaps_diversity,
)
from core import as_rng
from domains import DOMAIN_NAMES, FORMULA_KINDS, domain_size_formula, named_domain
from errors import BudgetError, InputError
from microscope import microscope_svg, render_microscope, write_microscope_csv
from sampling import spawn_seeds
from solvers import SolverConfig, solve
from utils.svg import line_chart_svg

logger = logging.getLogger(__name__)

ExperimentName = Literal["domain-sizes", "diversity", "sp-cultures", "euclidean-box", "histograms",
                         "extension-ratio", "heuristic-eval", "microscopes", "sc-gaps", "scalability"]
EXPERIMENTS = get_args(ExperimentName)

SUITE = tuple(name for name in DOMAIN_NAMES if name != "Full")
DETERMINISTIC = ("SP", "SP/DF", "SPOC", "GS/bal", "GS/cat", "Full")
SC_SOLVABLE = ("SC", "1D")

_DEFAULT_M_VALUES = {
    "domain-sizes": list(range(2, 13)),
    "euclidean-box": list(range(3, 11)),
    "heuristic-eval": list(range(3, 9)),
    "extension-ratio": list(range(4, 11)),
    "scalability": [6, 8, 10, 12],
}

# experiment-specific defaults for fields the caller leaves unset
_EXPERIMENT_DEFAULTS = {
    "sc-gaps": {"m": 16, "t_values": (0, 4, 8, 12)},
}


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    experiment: ExperimentName
    seed: int = 0
    m: int = Field(8, ge=2)
    n: int = Field(512, ge=1)
    reps: int = Field(10, ge=1)
    restarts: int = Field(10, ge=1)
    extra_ic: int = Field(512, ge=0)
    m_values: Optional[List[int]] = None
    domains: Optional[List[str]] = None
    k_values: Optional[List[int]] = None
    r_values: List[float] = Field(default_factory=lambda: [0.5 + 0.25 * i for i in range(15)])
    dimensions: List[int] = Field(default_factory=lambda: [1, 2, 3, 4, 5])
    kappa_dimensions: List[int] = Field(default_factory=lambda: [2])
    t_values: List[int] = Field(default_factory=lambda: [0, 2, 4, 8])
    microscope_k: int = Field(4, ge=1)
    with_ic: int = Field(512, ge=0)
    extended: bool = False
    eval_voters: int = Field(10, ge=1)  # voters per sampled heuristic-eval election
    skip_over_budget: bool = True
    max_subsets: Optional[int] = Field(None, ge=1)
    max_voters: Optional[int] = Field(None, ge=1)
    max_candidates: Optional[int] = Field(None, ge=1)
    workers: int = Field(default_factory=lambda: config.WORKERS, ge=1)
    output_dir: str = Field(default_factory=lambda: config.OUTPUT_DIR)
    record: bool = True

    @model_validator(mode="before")
    @classmethod
    def experiment_defaults(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            for key, value in _EXPERIMENT_DEFAULTS.get(data.get("experiment"), {}).items():
                data.setdefault(key, value)
        return data

    def resolved_m_values(self) -> List[int]:
        if self.m_values is not None:
            return self.m_values
        return _DEFAULT_M_VALUES.get(self.experiment, [self.m])

    def solver(self, method: str = "heuristic") -> SolverConfig:
        return SolverConfig(method=method, restarts=self.restarts, extra_ic=self.extra_ic, seed=self.seed)

    def budgets(self) -> Dict[str, int]:
        names = {"max_subsets": "MAX_SUBSETS", "max_voters": "MAX_VOTERS", "max_candidates": "MAX_CANDIDATES"}
        return {attr: getattr(self, field) for field, attr in names.items() if getattr(self, field) is not None}


def _apply_budgets(budgets: Dict[str, int]) -> None:
    for attr, value in budgets.items():
        setattr(config, attr, value)


@contextlib.contextmanager
def budget_overrides(budgets: Dict[str, int]) -> Iterator[None]:
    saved = {attr: getattr(config, attr) for attr in budgets}
    _apply_budgets(budgets)
    try:
        yield
    finally:
        _apply_budgets(saved)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.10g}"
    return "" if value is None else str(value)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
    return path


def _slug(name: str) -> str:
    return name.replace("/", "-").replace(" ", "_")


def _in_cell(label: str, fn: Callable, *args):
    """Run one cell; budget overruns are re-raised with the cell named."""
    try:
        return fn(*args)
    except BudgetError as exc:
        logger.warning("Cell over budget", extra={"cell": label, "budget": exc.budget})
        raise BudgetError(f"cell {label}: {exc.budget}", exc.limit, exc.requested) from exc


def _supported(name: str, m: int) -> bool:
    if name == "SP/DF":
        return m >= 5
    if name == "SPOC":
        return m >= 3
    return m >= 1


def _formula_kind(name: str) -> Optional[str]:
    if name.startswith("GS/"):
        return "GS"
    return name if name in FORMULA_KINDS else None


def _cell_task(cell: GridCell, seed: int, solver: SolverConfig):
    return _in_cell(cell.label, cell_vectors, cell, seed, solver)


def _run_cells(cfg: RunConfig, cells: List[GridCell], solvers: List[SolverConfig]):
    """Diversity vectors per cell; a process pool keeps the input order regardless of scheduling."""
    seeds = ExperimentGrid(cells=cells, seed=cfg.seed).cell_seeds()
    if cfg.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers, initializer=_apply_budgets,
                                 initargs=(cfg.budgets(),)) as pool:
            results = list(pool.map(_cell_task, cells, seeds, solvers))
    else:
        results = [_cell_task(c, s, v) for c, s, v in zip(cells, seeds, solvers)]
    return list(zip(cells, seeds, results))


def _diversity_rows(runs) -> List[list]:
    rows = []
    for cell, seed, vectors in runs:
        mean, std = aggregate_vectors(vectors)
        for k, (mu, sigma) in enumerate(zip(mean, std), start=1):
            rows.append([cell.label, k, mu, sigma, len(vectors), seed])
    return rows


DIVERSITY_HEADER = ("cell", "k", "mean", "std", "reps", "seed")


def _diversity_chart(runs) -> str:
    series = {}
    for cell, _, vectors in runs:
        mean, _ = aggregate_vectors(vectors)
        series[cell.name] = [(k, v) for k, v in enumerate(mean, start=1)]
    return line_chart_svg(series, title="kappa(k) / n")


# ---------------------------------------------------------------- experiments

def exp_domain_sizes(cfg: RunConfig, out: Path) -> List[str]:
    """Enumerated size next to the closed form; Full is only counted by formula."""
    names = cfg.domains or list(SUITE)
    rng = as_rng(cfg.seed)
    rows, series = [], {}
    for name in names:
        for m in cfg.resolved_m_values():
            if not _supported(name, m):
                continue
            kind = _formula_kind(name)
            formula = domain_size_formula(kind, m) if kind else None
            size = None
            if name != "Full":
                size = len(_in_cell(f"{name}:m={m}", named_domain, name, m, rng))
            rows.append([name, m, size, formula])
            value = size if size is not None else formula
            series.setdefault(name, []).append((m, float(np.log2(value))))
    write_csv(out / "domain_sizes.csv", ("domain", "m", "enumerated", "formula"), rows)
    (out / "domain_sizes.svg").write_text(line_chart_svg(series, title="log2 domain size"))
    return ["domain_sizes.csv", "domain_sizes.svg"]


def exp_diversity(cfg: RunConfig, out: Path) -> List[str]:
    names = cfg.domains or list(SUITE)
    k_values = cfg.k_values or list(range(1, cfg.m + 1))
    cells = [GridCell(source="domain", name=name, m=cfg.m, k_values=k_values,
                      reps=1 if name in DETERMINISTIC else cfg.reps) for name in names]
    solvers = [cfg.solver("sc" if c.name in SC_SOLVABLE else "heuristic") for c in cells]
    runs = _run_cells(cfg, cells, solvers)
    write_csv(out / "diversity.csv", DIVERSITY_HEADER, _diversity_rows(runs))
    (out / "diversity.svg").write_text(_diversity_chart(runs))

    means = {}
    for cell, _, vectors in runs:
        mean, _ = aggregate_vectors(vectors)
        means[cell.name] = DiversityVector(m=cell.m, values=mean)
    ranking = domain_ranking(means, tol=1e-6)
    rows = [[rank, " ".join(cls)] for rank, cls in enumerate(ranking.classes, start=1)]
    write_csv(out / "ranking.csv", ("rank", "domains"), rows)
    return ["diversity.csv", "diversity.svg", "ranking.csv"]


def exp_sp_cultures(cfg: RunConfig, out: Path) -> List[str]:
    names = cfg.domains or ["Walsh", "Conitzer", "CVC", "IC"]
    k_values = cfg.k_values or list(range(1, cfg.m + 1))
    cells = [GridCell(source="culture", name=name, m=cfg.m, n=cfg.n, k_values=k_values, reps=cfg.reps)
             for name in names]
    runs = _run_cells(cfg, cells, [cfg.solver()] * len(cells))
    write_csv(out / "diversity.csv", DIVERSITY_HEADER, _diversity_rows(runs))
    (out / "diversity.svg").write_text(_diversity_chart(runs))
    rows = []
    for cell, seed, vectors in runs:
        values = np.asarray([polarization(v) for v in vectors])
        std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
        rows.append([cell.label, float(values.mean()), std, len(values), seed])
    write_csv(out / "polarization.csv", ("cell", "mean", "std", "reps", "seed"), rows)
    return ["diversity.csv", "diversity.svg", "polarization.csv"]


def exp_euclidean_box(cfg: RunConfig, out: Path) -> List[str]:
    """Distinct sampled votes against box-reachable cells: an r sweep per dimension,
    an m sweep at r = 1, and normalized k-Kemeny scores against r."""
    sweep_seed, m_seed = spawn_seeds(cfg.seed, 2)
    rows, series = [], {}
    for d, seed in zip(cfg.dimensions, spawn_seeds(sweep_seed, len(cfg.dimensions))):
        counts = _in_cell(f"{d}D-Box:m={cfg.m}", count_distinct_sampled, cfg.m, d, cfg.r_values, cfg.reps, seed)
        for c in counts:
            rows.append([d, c.r, c.distinct_sampled, c.max_in_box, c.domain_size])
        series[f"{d}D sampled"] = [(c.r, c.distinct_sampled) for c in counts]
        series[f"{d}D in box"] = [(c.r, c.max_in_box) for c in counts]
    write_csv(out / "euclidean_box.csv", ("d", "r", "distinct_sampled", "max_in_box", "domain_size"), rows)
    (out / "euclidean_box.svg").write_text(line_chart_svg(series, title="distinct votes vs r"))

    m_values = cfg.resolved_m_values()
    m_rows, m_series = [], {}
    for m, seed in zip(m_values, spawn_seeds(m_seed, len(m_values))):
        (c,) = _in_cell(f"2D-Box:m={m}", count_distinct_sampled, m, 2, [1.0], cfg.reps, seed)
        m_rows.append([2, m, c.distinct_sampled, c.max_in_box, c.domain_size])
        for key, value in (("sampled", c.distinct_sampled), ("in box", c.max_in_box), ("domain", c.domain_size)):
            m_series.setdefault(key, []).append((m, value))
    write_csv(out / "euclidean_box_m.csv", ("d", "m", "distinct_sampled", "max_in_box", "domain_size"), m_rows)
    (out / "euclidean_box_m.svg").write_text(line_chart_svg(m_series, title="distinct votes vs m (2D, r=1)"))

    k_values = cfg.k_values or [1, 2, 3]
    cells = [GridCell(source="culture", name=f"{d}D-Box", m=cfg.m, n=cfg.n, k_values=k_values,
                      reps=cfg.reps, r=r) for d in cfg.kappa_dimensions for r in cfg.r_values]
    runs = _run_cells(cfg, cells, [cfg.solver()] * len(cells))
    kappa_rows, kappa_series = [], {}
    for cell, seed, vectors in runs:
        mean, std = aggregate_vectors(vectors)
        for k in (k for k in k_values if k <= len(mean)):
            kappa_rows.append([int(cell.name[0]), cell.r, k, mean[k - 1], std[k - 1], len(vectors), seed])
            kappa_series.setdefault(f"{cell.name} k={k}", []).append((cell.r, mean[k - 1]))
    write_csv(out / "euclidean_box_kappa.csv", ("d", "r", "k", "mean", "std", "reps", "seed"), kappa_rows)
    (out / "euclidean_box_kappa.svg").write_text(line_chart_svg(kappa_series, title="kappa(k) / n vs r"))
    return ["euclidean_box.csv", "euclidean_box.svg", "euclidean_box_m.csv", "euclidean_box_m.svg",
            "euclidean_box_kappa.csv", "euclidean_box_kappa.svg"]


def exp_histograms(cfg: RunConfig, out: Path) -> List[str]:
    names = cfg.domains or list(SUITE)
    k_values = cfg.k_values or [1, 2]
    rows = []
    for name, seed in zip(names, spawn_seeds(cfg.seed, len(names))):
        dom = named_domain(name, cfg.m, as_rng(seed))
        e = dom.as_election()
        method = "sc" if name in SC_SOLVABLE else "heuristic"
        for k in k_values:
            result = _in_cell(f"{name}:k={k}", solve, e, k, cfg.solver(method), dom)
            for dist, count in enumerate(distance_histogram(e, result)):
                rows.append([name, k, dist, float(count)])
    write_csv(out / "histograms.csv", ("domain", "k", "distance", "count"), rows)
    return ["histograms.csv"]


def exp_extension_ratio(cfg: RunConfig, out: Path) -> List[str]:
    names = cfg.domains or [n for n in SUITE if n != "SC"]
    rows, series = [], {}
    for name, seed in zip(names, spawn_seeds(cfg.seed, len(names))):
        m_values = [m for m in cfg.resolved_m_values() if _supported(name, m)]
        reps = 1 if name in DETERMINISTIC else cfg.reps
        table = extension_ratios([name], m_values, reps=reps, seed=seed)
        for m in m_values:
            rows.append([name, m, table[(name, m)]])
        series[name] = [(m, table[(name, m)]) for m in m_values]
    write_csv(out / "extension_ratio.csv", ("domain", "m", "ratio"), rows)
    (out / "extension_ratio.svg").write_text(line_chart_svg(series, title="|rev-sym extension| / |domain|"))
    return ["extension_ratio.csv", "extension_ratio.svg"]


# rows of the heuristic-evaluation grid: name -> largest m evaluated per k
HEURISTIC_DOMAIN_ROWS = {
    name: {1: 8, 2: 8, 3: 8} if name in ("1D", "GS/cat", "GS/bal", "SP", "SC") else {1: 8, 2: 8}
    for name in ("1D", "GS/cat", "GS/bal", "SP", "SC", "SPOC", "2D", "3D", "SP/DF")
}
HEURISTIC_CULTURE_ROWS = {
    name: {1: 8, 2: 7, 3: 5} for name in ("IC", "3D-Box", "2D-Box", "1D-Box", "Walsh", "Conitzer")
}


def heuristic_eval_cells(cfg: RunConfig) -> List[GridCell]:
    """Cells for every (row, m) pair; each cell carries the k values evaluated at its m."""
    wanted = set(cfg.domains) if cfg.domains else None
    if wanted is not None:
        unknown = wanted - set(HEURISTIC_DOMAIN_ROWS) - set(HEURISTIC_CULTURE_ROWS)
        if unknown:
            raise InputError(f"no heuristic-eval row for {', '.join(sorted(unknown))}")
    k_filter = set(cfg.k_values) if cfg.k_values else None
    cells = []
    for source, table in (("domain", HEURISTIC_DOMAIN_ROWS), ("culture", HEURISTIC_CULTURE_ROWS)):
        for name, top_m in table.items():
            if wanted is not None and name not in wanted:
                continue
            for m in cfg.resolved_m_values():
                if source == "domain" and not _supported(name, m):
                    continue
                ks = [k for k, top in top_m.items() if m <= top and (k_filter is None or k in k_filter)]
                if ks:
                    cells.append(GridCell(source=source, name=name, m=m, n=cfg.eval_voters, k_values=ks,
                                          reps=cfg.reps))
    return cells


def exp_heuristic_eval(cfg: RunConfig, out: Path) -> List[str]:
    """Heuristic/exact score ratios; cells whose exact score is over budget are marked skipped."""
    grid = ExperimentGrid(cells=heuristic_eval_cells(cfg), seed=cfg.seed, restarts=cfg.restarts,
                          extra_ic=cfg.extra_ic)
    results = evaluate_heuristic(grid, skip_over_budget=cfg.skip_over_budget)
    rows = [[r.label, r.k, r.mean, r.std, r.reps, r.skipped, r.budget] for r in results]
    write_csv(out / "heuristic_eval.csv", ("cell", "k", "mean_ratio", "std", "reps", "skipped", "budget"), rows)
    return ["heuristic_eval.csv"]


def exp_microscopes(cfg: RunConfig, out: Path) -> List[str]:
    names = cfg.domains or list(SUITE)
    files = []
    for name, seed in zip(names, spawn_seeds(cfg.seed, len(names))):
        rng = as_rng(seed)
        dom = named_domain(name, cfg.m, rng)
        method = "sc" if name in SC_SOLVABLE and not cfg.extended else "heuristic"
        solver = SolverConfig(method=method, restarts=cfg.restarts, extra_ic=cfg.extra_ic, seed=seed)
        plot = _in_cell(name, render_microscope, dom, cfg.microscope_k, cfg.with_ic, solver, rng, cfg.extended)
        stem = f"microscope_{_slug(name)}"
        write_microscope_csv(plot, out / f"{stem}.csv")
        microscope_svg(plot, out / f"{stem}.svg", title=f"{name}, m={cfg.m}")
        files += [f"{stem}.csv", f"{stem}.svg"]
    return files


def exp_sc_gaps(cfg: RunConfig, out: Path) -> List[str]:
    rows = []
    for t, seed in zip(cfg.t_values, spawn_seeds(cfg.seed, len(cfg.t_values))):
        table = _in_cell(f"SC-gaps:t={t}", sc_gaps_diversity, cfg.m, t, cfg.n, cfg.reps, seed)
        for mode, (mean, std) in table.items():
            for k, (mu, sigma) in enumerate(zip(mean, std), start=1):
                rows.append([mode, t, k, mu, sigma, cfg.reps, seed])
    write_csv(out / "sc_gaps.csv", ("mode", "t", "k", "mean", "std", "reps", "seed"), rows)
    return ["sc_gaps.csv"]


def exp_scalability(cfg: RunConfig, out: Path) -> List[str]:
    """Low-k diversity of domains and sampled cultures as m grows."""
    names = cfg.domains or list(SUITE) + ["IC", "1D-Box", "2D-Box", "3D-Box", "Walsh", "Conitzer"]
    unknown = [name for name in names if name not in SUITE and name not in CULTURE_NAMES]
    if unknown:
        raise InputError(f"unknown domain or culture {', '.join(unknown)}")
    k_values = cfg.k_values or [1, 2]
    cells = []
    for m in cfg.resolved_m_values():
        for name in names:
            if name in CULTURE_NAMES:
                cells.append(GridCell(source="culture", name=name, m=m, n=cfg.n, k_values=k_values, reps=cfg.reps))
            elif _supported(name, m):
                cells.append(GridCell(source="domain", name=name, m=m, k_values=k_values,
                                      reps=1 if name in DETERMINISTIC else cfg.reps))
    solvers = [cfg.solver("sc" if c.source == "domain" and c.name in SC_SOLVABLE else "heuristic") for c in cells]
    runs = _run_cells(cfg, cells, solvers)
    write_csv(out / "scalability.csv", DIVERSITY_HEADER, _diversity_rows(runs))
    return ["scalability.csv"]


_RUNNERS: Dict[str, Callable[[RunConfig, Path], List[str]]] = {
    "domain-sizes": exp_domain_sizes,
    "diversity": exp_diversity,
    "sp-cultures": exp_sp_cultures,
    "euclidean-box": exp_euclidean_box,
    "histograms": exp_histograms,
    "extension-ratio": exp_extension_ratio,
    "heuristic-eval": exp_heuristic_eval,
    "microscopes": exp_microscopes,
    "sc-gaps": exp_sc_gaps,
    "scalability": exp_scalability,
}


# ---------------------------------------------------------------- orchestration

def _versions() -> Dict[str, str]:
    out = {"python": platform.python_version()}
    for pkg in ("numpy", "scipy", "pydantic"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:  # pragma: no cover
            out[pkg] = "unknown"
    return out


def run_dir(cfg: RunConfig) -> Path:
    return Path(cfg.output_dir) / f"{cfg.experiment}-seed{cfg.seed}"


def run_experiment(cfg: RunConfig) -> Path:
    """Run one experiment and return the path of its manifest."""
    out = run_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    run_id = f"{cfg.experiment}-{cfg.seed}-{uuid.uuid4().hex[:8]}"
    if cfg.record:
        db.record_run_started(run_id, cfg.experiment, cfg.seed, cfg.model_dump_json(), str(out))
    logger.info("Experiment started", extra={"experiment": cfg.experiment, "seed": cfg.seed, "output": str(out)})
    try:
        with budget_overrides(cfg.budgets()):
            files = _RUNNERS[cfg.experiment](cfg, out)
    except Exception:
        if cfg.record:
            db.record_run_finished(run_id, None, failed=True)
        raise
    manifest = {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "config": cfg.model_dump(exclude={"output_dir", "workers", "record"}),
        "versions": _versions(),
        "files": files,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if cfg.record:
        db.record_run_finished(run_id, str(path))
    logger.info("Experiment finished", extra={"experiment": cfg.experiment, "files": len(files)})
    return path


def config_from_manifest(path, **overrides) -> RunConfig:
    """RunConfig that reproduces the run recorded in a manifest.json."""
    try:
        data = json.loads(Path(path).read_text())
        fields = dict(data["config"])
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"cannot read manifest {path}: {exc}") from exc
    fields.update(overrides)
    return RunConfig(**fields)
