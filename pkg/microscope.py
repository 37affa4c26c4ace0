"""Microscopes: 2D stress-majorization (SMACOF) embeddings of vote sets under swap distance."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.spatial import distance

from core import Election, Ranking, as_rng, distance_matrix, distinct_votes, reverse
from domains import Domain, reverse_extension
from errors import InputError, InvariantError
from solvers import SolverConfig, solve
from utils.svg import scatter_svg

logger = logging.getLogger(__name__)

MAX_ITER = 300
REL_TOL = 1e-6
CSV_COLUMNS = ("vote_id", "x", "y", "color", "is_center", "is_ic")


@dataclass(frozen=True)
class MDSResult:
    coords: np.ndarray = field(repr=False)
    stress: float  # raw stress / sum of squared dissimilarities
    history: Tuple[float, ...] = field(repr=False)
    iterations: int = 0


def _stress(D: np.ndarray, X: np.ndarray) -> float:
    Dx = distance.cdist(X, X)
    return float(np.triu((D - Dx) ** 2, 1).sum())


def _guttman_transform(D: np.ndarray, X: np.ndarray) -> np.ndarray:
    Dx = distance.cdist(X, X)
    with np.errstate(divide="ignore", invalid="ignore"):
        B = np.where(Dx > 0, -D / Dx, 0.0)
    np.fill_diagonal(B, 0.0)
    B[np.diag_indices(B.shape[0])] = -B.sum(axis=1)
    return B @ X / D.shape[0]


def embed_mds(dist, seed=None, max_iter: int = MAX_ITER, eps: float = REL_TOL) -> MDSResult:
    """SMACOF from a seeded random start; raises InvariantError if stress ever increases."""
    D = np.asarray(dist, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise InputError("distance matrix must be square")
    if not np.allclose(D, D.T) or np.any(np.abs(np.diag(D)) > 0):
        raise InputError("distance matrix must be symmetric with a zero diagonal")
    n = D.shape[0]
    norm = float(np.triu(D ** 2, 1).sum())
    if n < 2 or norm == 0:
        return MDSResult(coords=np.zeros((n, 2)), stress=0.0, history=(0.0,), iterations=0)
    rng = as_rng(seed)
    X = rng.standard_normal((n, 2)) * (np.sqrt(norm / n) / n + 1e-3)
    prev = _stress(D, X)
    history = [prev / norm]
    itr = 0
    for itr in range(1, max_iter + 1):
        X = _guttman_transform(D, X)
        cur = _stress(D, X)
        if cur > prev * (1 + 1e-9) + 1e-12:
            logger.error("Stress increased", extra={"iteration": itr, "before": prev, "after": cur})
            raise InvariantError(f"SMACOF stress increased at iteration {itr}: {prev} -> {cur}")
        history.append(cur / norm)
        if cur < 1e-12 * norm or (prev - cur) < eps * prev:
            prev = cur
            break
        prev = cur
    X = X - X.mean(axis=0)
    return MDSResult(coords=X, stress=prev / norm, history=tuple(history), iterations=itr)


@dataclass
class MicroscopePlot:
    votes: List[Ranking]
    points: np.ndarray = field(repr=False)
    colors: List[int]  # nearest center index; -1 for IC votes
    is_center: List[bool]
    is_ic: List[bool]
    centers: List[Ranking]
    stress: float

    @property
    def stars(self) -> List[Tuple[float, float, int]]:
        index = {v: i for i, v in enumerate(self.votes)}
        return [(float(self.points[index[c], 0]), float(self.points[index[c], 1]), j)
                for j, c in enumerate(self.centers)]

    def svg(self, title: Optional[str] = None) -> str:
        pts = [(float(x), float(y)) for x, y in self.points]
        return scatter_svg(pts, self.colors, self.stars, title=title)


def render_microscope(source: Union[Domain, Election], k: int = 4, with_ic: int = 512,
                      solver: Optional[SolverConfig] = None, seed=None,
                      extended: bool = False) -> MicroscopePlot:
    """Embed the votes (plus IC votes and the k-Kemeny centers) and color by nearest center."""
    solver = solver or SolverConfig(seed=seed if isinstance(seed, int) else None)
    rng = as_rng(seed)
    domain = source if isinstance(source, Domain) else None
    if domain is not None:
        if extended:
            domain, _ = reverse_extension(domain)
        election = domain.as_election()
        base = list(domain.votes)
    else:
        election = source
        base = distinct_votes(source)[0]
        if extended:
            base = list(dict.fromkeys(base + [reverse(v) for v in base]))
            election = Election.from_rankings(base, m=source.m, validate=False)
    result = solve(election, k, solver, domain)
    centers = list(result.centers)

    known = set(base)
    ic: List[Ranking] = []
    if with_ic:
        sampled = np.argsort(rng.random((with_ic, election.m)), axis=1)
        for row in sampled.tolist():
            r = tuple(row)
            if r not in known:
                known.add(r)
                ic.append(r)
    extra = [c for c in dict.fromkeys(centers) if c not in known]
    votes = base + ic + extra

    nearest = distance_matrix(base, centers, election.m).argmin(axis=1) if base else []
    colors = [int(c) for c in nearest] + [-1] * len(ic) + [centers.index(c) for c in extra]
    center_set = set(centers)
    is_center = [v in center_set for v in votes]
    is_ic = [False] * len(base) + [True] * len(ic) + [False] * len(extra)
    for i, v in enumerate(votes):
        if is_center[i]:
            colors[i] = centers.index(v)

    mds = embed_mds(distance_matrix(votes, votes, election.m), seed=rng)
    logger.info("Rendered microscope", extra={"votes": len(votes), "k": k, "stress": mds.stress})
    return MicroscopePlot(votes=votes, points=mds.coords, colors=colors, is_center=is_center,
                          is_ic=is_ic, centers=centers, stress=mds.stress)


def write_microscope_csv(plot: MicroscopePlot, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for i, (x, y) in enumerate(plot.points):
            writer.writerow([i, f"{x:.6f}", f"{y:.6f}", plot.colors[i],
                             int(plot.is_center[i]), int(plot.is_ic[i])])
    return path


def microscope_svg(plot: MicroscopePlot, path: Union[str, Path], title: Optional[str] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(plot.svg(title))
    return path
