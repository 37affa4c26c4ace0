"""Structured preference domains: enumeration, membership checks and size formulas.

Every enumerator returns a :class:`Domain` whose votes are deduplicated and
sorted lexicographically. Euclidean enumeration works on the arrangement of
bisector hyperplanes of the candidate points; d <= 2 is exact, d >= 3 is a
sampled lower bound.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import combinations, permutations, product
from math import comb, factorial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from core import (
    Certificate,
    Election,
    Ranking,
    as_rng,
    pair_orders,
    positions,
    reverse,
    spawn_rngs,
    validate_ranking,
)
from errors import BudgetError, DegenerateEmbeddingError, InputError

logger = logging.getLogger(__name__)

GSTree = Union[int, Tuple["GSTree", ...]]
Adjacency = Tuple[Tuple[int, ...], ...]

FULL_DOMAIN_MAX_M = 10
FAR_RADIUS_FACTOR = 1e3
DOMAIN_NAMES = ("1D", "2D", "3D", "SC", "SP", "SP/DF", "SPOC", "GS/bal", "GS/cat", "Full")
_ALIASES = {"1D-Interval": "1D", "2D-Square": "2D", "3D-Cube": "3D"}
FORMULA_KINDS = ("SP", "GS", "SP/DF", "SPOC", "SC", "1D", "2D", "Full")


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class Embedding:
    """Candidate points in R^d; ``points[c]`` is the position of candidate c."""

    points: Tuple[Tuple[float, ...], ...]
    general_position: bool = field(default=False, compare=False)

    @classmethod
    def from_array(cls, arr, general_position: bool = False) -> "Embedding":
        arr = np.atleast_2d(np.asarray(arr, dtype=np.float64))
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InputError("an embedding needs at least one candidate and dimension >= 1")
        return cls(points=tuple(tuple(float(x) for x in row) for row in arr),
                   general_position=general_position)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=np.float64)

    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def d(self) -> int:
        return len(self.points[0])

    def rank(self, x: Sequence[float]) -> Ranking:
        return tuple(int(c) for c in rank_points(self.array, np.atleast_2d(np.asarray(x, float)))[0])


@dataclass(frozen=True)
class DomainDescriptor:
    kind: str  # SP, GS, SPOC, SPTree, SC, Euclid, Full, Custom
    axis: Optional[Ranking] = None
    tree: Optional[GSTree] = None
    cycle: Optional[Ranking] = None
    graph: Optional[Adjacency] = None
    embedding: Optional[Embedding] = None
    chain: Optional[Tuple[Ranking, ...]] = None  # single-crossing order of the votes
    lower_bound: bool = False
    source: Optional[str] = None


@dataclass(frozen=True)
class Domain:
    m: int
    votes: Tuple[Ranking, ...]
    descriptor: DomainDescriptor
    weights: Optional[Tuple[float, ...]] = None
    witnesses: Optional[Tuple[Tuple[float, ...], ...]] = field(default=None, repr=False)

    def __post_init__(self):
        if len(set(self.votes)) != len(self.votes):
            raise InputError("domain votes must be distinct")
        if self.weights is not None:
            if len(self.weights) != len(self.votes):
                raise InputError("domain weights must align with votes")
            if any(not w > 0 for w in self.weights):
                raise InputError("domain weights must be positive")

    def __len__(self) -> int:
        return len(self.votes)

    @property
    def size(self) -> int:
        return len(self.votes)

    @property
    def kind(self) -> str:
        return self.descriptor.kind

    @property
    def is_condorcet(self) -> bool:
        desc = self.descriptor
        if desc.kind in ("SP", "GS", "SPTree", "SC"):
            return True
        return desc.kind == "Euclid" and desc.embedding is not None and desc.embedding.d == 1

    def certificate(self) -> Certificate:
        desc = self.descriptor
        sc_order = None
        if desc.chain is not None:
            index = {v: i for i, v in enumerate(self.votes)}
            sc_order = tuple(index[v] for v in desc.chain)
        return Certificate(
            sp_axis=desc.axis,
            gs_tree=desc.tree if desc.kind == "GS" else None,
            sc_order=sc_order,
            sp_tree=desc.graph if desc.kind == "SPTree" else None,
            cycle=desc.cycle,
            embedding=desc.embedding,
        )

    def as_election(self) -> Election:
        """The domain viewed as an election: one voter per vote (or per weight)."""
        weights = self.weights if self.weights is not None else [1] * len(self.votes)
        return Election.from_rankings(self.votes, weights, m=self.m,
                                      certificate=self.certificate(), validate=False)


def _make_domain(m: int, votes: Iterable[Ranking], descriptor: DomainDescriptor,
                 weights: Optional[Dict[Ranking, float]] = None,
                 witnesses: Optional[Dict[Ranking, Sequence[float]]] = None) -> Domain:
    ordered = sorted(set(votes))
    domain = Domain(
        m=m,
        votes=tuple(ordered),
        descriptor=descriptor,
        weights=tuple(weights[v] for v in ordered) if weights is not None else None,
        witnesses=tuple(tuple(float(x) for x in witnesses[v]) for v in ordered) if witnesses else None,
    )
    logger.info("Enumerated domain", extra={"kind": descriptor.kind, "m": m, "size": len(ordered)})
    return domain


# ---------------------------------------------------------------- trees and graphs

def identity(m: int) -> Ranking:
    return tuple(range(m))


def caterpillar_tree(axis: Ranking) -> GSTree:
    """(c1, (c2, (..., (c_{m-1}, c_m))))."""
    axis = validate_ranking(axis)
    if len(axis) == 1:
        return axis[0]
    node: GSTree = (axis[-2], axis[-1])
    for c in reversed(axis[:-2]):
        node = (c, node)
    return node


def balanced_tree(axis: Ranking) -> GSTree:
    axis = validate_ranking(axis)

    def build(part: Tuple[int, ...]) -> GSTree:
        if len(part) == 1:
            return part[0]
        half = (len(part) + 1) // 2
        return (build(part[:half]), build(part[half:]))

    return build(axis)


def tree_leaves(tree: GSTree) -> List[int]:
    if isinstance(tree, int):
        return [tree]
    out: List[int] = []
    for child in tree:
        out.extend(tree_leaves(child))
    return out


def validate_gs_tree(tree: GSTree, m: Optional[int] = None) -> int:
    """Check leaf labels and arities; return the number of candidates."""

    def walk(node) -> None:
        if isinstance(node, int) and not isinstance(node, bool):
            return
        if not isinstance(node, tuple):
            raise InputError(f"tree nodes must be ints or tuples, got {node!r}")
        if len(node) < 2:
            raise InputError("every internal node of a group-separable tree needs >= 2 children")
        for child in node:
            walk(child)

    walk(tree)
    leaves = tree_leaves(tree)
    size = len(leaves) if m is None else m
    if sorted(leaves) != list(range(size)):
        raise InputError(f"tree leaves must be a permutation of 0..{size - 1}")
    return size


def path_graph(order: Ranking) -> Adjacency:
    order = validate_ranking(order)
    adj: List[List[int]] = [[] for _ in order]
    for a, b in zip(order, order[1:]):
        adj[a].append(b)
        adj[b].append(a)
    return tuple(tuple(sorted(x)) for x in adj)


def cycle_graph(order: Ranking) -> Adjacency:
    order = validate_ranking(order)
    if len(order) < 3:
        raise InputError("a cycle needs at least 3 candidates")
    adj = [set(x) for x in path_graph(order)]
    adj[order[0]].add(order[-1])
    adj[order[-1]].add(order[0])
    return tuple(tuple(sorted(x)) for x in adj)


def double_fork_tree(m: int) -> Adjacency:
    """c1 and c2 hang off c3, c3..c_{m-2} is a path, c_{m-1} and c_m hang off c_{m-2}."""
    if m < 5:
        raise InputError("the double-fork tree needs m >= 5")
    adj: List[set] = [set() for _ in range(m)]

    def link(a, b):
        adj[a].add(b)
        adj[b].add(a)

    link(0, 2)
    link(1, 2)
    for c in range(2, m - 3):
        link(c, c + 1)
    link(m - 3, m - 2)
    link(m - 3, m - 1)
    return tuple(tuple(sorted(x)) for x in adj)


def validate_tree_graph(adj: Sequence[Sequence[int]]) -> Adjacency:
    m = len(adj)
    if m < 1:
        raise InputError("a graph needs at least one vertex")
    rows, cols = [], []
    for a, nbrs in enumerate(adj):
        for b in nbrs:
            if not 0 <= b < m or b == a:
                raise InputError(f"invalid edge {a}-{b}")
            if a not in adj[b]:
                raise InputError(f"adjacency is not symmetric at {a}-{b}")
            rows.append(a)
            cols.append(b)
    if len(rows) // 2 != m - 1:
        raise InputError("graph is not a tree (needs exactly m-1 edges)")
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m))
    n_parts, _ = connected_components(graph, directed=False)
    if n_parts != 1:
        raise InputError("graph is disconnected")
    return tuple(tuple(sorted(int(b) for b in nbrs)) for nbrs in adj)


# ---------------------------------------------------------------- membership checks

def is_single_peaked(r: Ranking, axis: Ranking) -> bool:
    pos = positions(axis)
    lo = hi = pos[r[0]]
    for c in r[1:]:
        p = pos[c]
        if p == lo - 1:
            lo = p
        elif p == hi + 1:
            hi = p
        else:
            return False
    return True


def is_single_peaked_on_graph(r: Ranking, adj: Sequence[Sequence[int]]) -> bool:
    """Every prefix of r induces a connected subgraph."""
    seen = {r[0]}
    for c in r[1:]:
        if not any(b in seen for b in adj[c]):
            return False
        seen.add(c)
    return True


def is_gs_consistent(r: Ranking, tree: GSTree) -> bool:
    """r is a frontier reading of tree after reversing the children of some nodes."""
    pos = positions(r)

    def span(node) -> Optional[Tuple[int, int]]:
        if isinstance(node, int):
            return pos[node], pos[node]
        spans = []
        for child in node:
            s = span(child)
            if s is None:
                return None
            spans.append(s)
        lo = min(s[0] for s in spans)
        hi = max(s[1] for s in spans)
        if hi - lo + 1 != sum(s[1] - s[0] + 1 for s in spans):
            return None
        starts = [s[0] for s in spans]
        if starts != sorted(starts) and starts != sorted(starts, reverse=True):
            return None
        return lo, hi

    return span(tree) is not None


def is_single_crossing(rankings: Sequence[Ranking]) -> Optional[Tuple[int, int]]:
    """None if the order is single-crossing, else the first candidate pair that flips twice."""
    if len(rankings) < 3:
        return None
    m = len(rankings[0])
    flips = np.abs(np.diff(pair_orders(rankings, m), axis=0)).sum(axis=0)
    bad = np.flatnonzero(flips > 1)
    if bad.size == 0:
        return None
    upper_a, upper_b = np.triu_indices(m, 1)
    return int(upper_a[bad[0]]), int(upper_b[bad[0]])


def cvc_vote(axis: Ranking, decisions: Sequence[bool]) -> Ranking:
    """Place axis candidates one by one on the highest (True) or lowest (False) free slot."""
    m = len(axis)
    if len(decisions) != max(m - 1, 0):
        raise InputError(f"expected {m - 1} decisions, got {len(decisions)}")
    slots = [0] * m
    top, bottom = 0, m - 1
    for c, high in zip(axis, decisions):
        if high:
            slots[top] = c
            top += 1
        else:
            slots[bottom] = c
            bottom -= 1
    slots[top] = axis[-1]
    return tuple(slots)


def cvc_decisions(axis: Ranking, r: Ranking) -> Optional[Tuple[bool, ...]]:
    """Inverse of :func:`cvc_vote`; None if r is not caterpillar group-separable on axis."""
    pos = positions(r)
    top, bottom = 0, len(axis) - 1
    out = []
    for c in axis[:-1]:
        p = pos[c]
        if p == top:
            out.append(True)
            top += 1
        elif p == bottom:
            out.append(False)
            bottom -= 1
        else:
            return None
    return tuple(out)


# ---------------------------------------------------------------- combinatorial enumerators

def full_domain(m: int) -> Domain:
    if m > FULL_DOMAIN_MAX_M:
        raise BudgetError("full domain candidates", FULL_DOMAIN_MAX_M, m)
    return _make_domain(m, permutations(range(m)), DomainDescriptor(kind="Full"))


def _connected_orders(adj: Adjacency) -> List[Ranking]:
    # DFS over frontier extensions; distinct decision sequences give distinct votes
    m = len(adj)
    out: List[Ranking] = []
    order: List[int] = []
    taken = [False] * m

    def extend() -> None:
        if len(order) == m:
            out.append(tuple(order))
            return
        if order:
            frontier = sorted({b for c in order for b in adj[c] if not taken[b]})
        else:
            frontier = range(m)
        for c in frontier:
            taken[c] = True
            order.append(c)
            extend()
            order.pop()
            taken[c] = False

    extend()
    return out


def enumerate_sp(axis: Ranking) -> Domain:
    axis = validate_ranking(axis)
    votes = _connected_orders(path_graph(axis))
    return _make_domain(len(axis), votes, DomainDescriptor(kind="SP", axis=axis))


def enumerate_spoc(cycle: Ranking) -> Domain:
    cycle = validate_ranking(cycle)
    votes = _connected_orders(cycle_graph(cycle))
    return _make_domain(len(cycle), votes, DomainDescriptor(kind="SPOC", cycle=cycle))


def enumerate_sp_tree(adj: Sequence[Sequence[int]]) -> Domain:
    graph = validate_tree_graph(adj)
    votes = _connected_orders(graph)
    return _make_domain(len(graph), votes, DomainDescriptor(kind="SPTree", graph=graph))


def _readings(node: GSTree) -> set:
    if isinstance(node, int):
        return {(node,)}
    out = set()
    for combo in product(*(_readings(child) for child in node)):
        out.add(sum(combo, ()))
        out.add(sum(reversed(combo), ()))
    return out


def enumerate_gs(tree: GSTree) -> Domain:
    m = validate_gs_tree(tree)
    return _make_domain(m, _readings(tree), DomainDescriptor(kind="GS", tree=tree))


def cvc_enumerate(axis: Ranking) -> Domain:
    axis = validate_ranking(axis)
    votes = [cvc_vote(axis, bits) for bits in product((True, False), repeat=len(axis) - 1)]
    return _make_domain(len(axis), votes, DomainDescriptor(kind="GS", tree=caterpillar_tree(axis)))


def generate_sc_chain(rng, m: int) -> Domain:
    """Random maximal single-crossing chain from the identity to its reverse.

    Each step swaps a uniformly chosen adjacent pair that is still in its
    original relative order, so every pair flips exactly once.
    """
    if m < 1:
        raise InputError("m must be >= 1")
    rng = as_rng(rng)
    current = list(range(m))
    chain = [tuple(current)]
    for _ in range(comb(m, 2)):
        candidates = [i for i in range(m - 1) if current[i] < current[i + 1]]
        i = candidates[int(rng.integers(len(candidates)))]
        current[i], current[i + 1] = current[i + 1], current[i]
        chain.append(tuple(current))
    return _make_domain(m, chain, DomainDescriptor(kind="SC", chain=tuple(chain)))


# ---------------------------------------------------------------- Euclidean geometry

def rank_points(points: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Rank candidates by distance from each row of xs (closest first)."""
    # |x-p|^2 - |x|^2, avoids cancellation for far-away voters
    key = np.sum(points ** 2, axis=1)[None, :] - 2.0 * xs @ points.T
    return np.argsort(key, axis=1, kind="stable")


def _bisectors(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, List[Tuple[int, int]]]:
    pairs = list(combinations(range(len(points)), 2))
    a = np.array([p[0] for p in pairs], dtype=np.int64)
    b = np.array([p[1] for p in pairs], dtype=np.int64)
    normals = points[b] - points[a]
    offsets = (np.sum(points[b] ** 2, axis=1) - np.sum(points[a] ** 2, axis=1)) / 2.0
    return normals, offsets, pairs


def _scale(points: np.ndarray) -> float:
    return max(1.0, float(np.max(np.linalg.norm(points, axis=1))))


def _line_vertices(normals: np.ndarray, offsets: np.ndarray, tol: float) -> np.ndarray:
    i, j = np.triu_indices(len(normals), 1)
    det = normals[i, 0] * normals[j, 1] - normals[i, 1] * normals[j, 0]
    lengths = np.linalg.norm(normals, axis=1)
    if np.any(np.abs(det) <= tol * lengths[i] * lengths[j]):
        raise DegenerateEmbeddingError("parallel bisectors")
    x = (offsets[i] * normals[j, 1] - offsets[j] * normals[i, 1]) / det
    y = (normals[i, 0] * offsets[j] - normals[j, 0] * offsets[i]) / det
    return np.column_stack([x, y])


def _merge_close(vertices: np.ndarray, tol: float) -> np.ndarray:
    if len(vertices) == 0:
        return vertices
    pairs = cKDTree(vertices).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return vertices
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(vertices),) * 2)
    _, labels = connected_components(graph, directed=False)
    _, first = np.unique(labels, return_index=True)
    return vertices[np.sort(first)]


def check_general_position(points, tol: float = 1e-9) -> None:
    """Raise DegenerateEmbeddingError unless the bisector arrangement is generic."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    m, d = pts.shape
    scale = _scale(pts)
    if m >= 2 and np.min(pdist(pts)) <= tol * scale:
        raise DegenerateEmbeddingError("coincident candidate points")
    if m < 3:
        return
    if d == 1:
        mids = (pts[:, 0][:, None] + pts[:, 0][None, :])[np.triu_indices(m, 1)] / 2.0
        if np.min(pdist(mids[:, None])) <= tol * scale:
            raise DegenerateEmbeddingError("coincident bisector points")
    elif d == 2:
        normals, offsets, _ = _bisectors(pts)
        vertices = _merge_close(_line_vertices(normals, offsets, tol), 1e-7 * scale)
        expected = comb(m, 3) + 3 * comb(m, 4)
        if len(vertices) != expected:
            raise DegenerateEmbeddingError(
                f"{len(vertices)} arrangement vertices, expected {expected}")
    else:
        normals, _, _ = _bisectors(pts)
        unit = normals / np.linalg.norm(normals, axis=1)[:, None]
        cos = np.abs(unit @ unit.T)[np.triu_indices(len(unit), 1)]
        if np.any(cos >= 1.0 - tol):
            raise DegenerateEmbeddingError("parallel bisectors")


def random_embedding(rng, m: int, d: int, low: float = -1.0, high: float = 1.0,
                     max_tries: int = 100) -> Embedding:
    """Candidates uniform in [low, high]^d, resampled until in general position."""
    if d < 1 or m < 1:
        raise InputError("need m >= 1 and d >= 1")
    rng = as_rng(rng)
    for attempt in range(max_tries):
        pts = rng.uniform(low, high, size=(m, d))
        try:
            check_general_position(pts)
        except DegenerateEmbeddingError:
            logger.warning("Resampling degenerate embedding", extra={"attempt": attempt, "m": m, "d": d})
            continue
        return Embedding.from_array(pts, general_position=True)
    raise DegenerateEmbeddingError(f"no generic embedding after {max_tries} draws")


def _sector_points(vertex: np.ndarray, normals: np.ndarray, offsets: np.ndarray,
                   lengths: np.ndarray, limit: float = np.inf) -> np.ndarray:
    """One point inside each sector around vertex cut by the lines through it."""
    dist = np.abs(normals @ vertex - offsets) / lengths
    scale = max(1.0, float(np.linalg.norm(vertex)))
    through = dist <= 1e-7 * scale
    others = dist[~through]
    radius = 0.5 * min(float(others.min()) if others.size else 1.0, limit)
    if not np.any(through):
        return vertex[None, :]
    dirs = np.arctan2(normals[through, 0], -normals[through, 1])
    angles = np.sort(np.concatenate([dirs, dirs + np.pi]) % (2 * np.pi))
    mids = (angles + np.diff(np.append(angles, angles[0] + 2 * np.pi)) / 2.0)
    return vertex[None, :] + radius * np.column_stack([np.cos(mids), np.sin(mids)])


def _far_circle_points(normals: np.ndarray, offsets: np.ndarray, lengths: np.ndarray,
                       radius: float) -> np.ndarray:
    unit = normals / lengths[:, None]
    h = offsets / lengths
    foot = unit * h[:, None]
    half = np.sqrt(np.maximum(radius ** 2 - h ** 2, 0.0))
    tangent = np.column_stack([-unit[:, 1], unit[:, 0]])
    hits = np.concatenate([foot + tangent * half[:, None], foot - tangent * half[:, None]])
    angles = np.sort(np.arctan2(hits[:, 1], hits[:, 0]))
    mids = angles + np.diff(np.append(angles, angles[0] + 2 * np.pi)) / 2.0
    return radius * np.column_stack([np.cos(mids), np.sin(mids)])


def _collect(points: np.ndarray, reps: np.ndarray) -> Dict[Ranking, np.ndarray]:
    ranks = rank_points(points, reps)
    uniq, first = np.unique(ranks, axis=0, return_index=True)
    return {tuple(int(c) for c in row): reps[i] for row, i in zip(uniq, first)}


def _enumerate_2d(points: np.ndarray, radius_factor: float) -> Dict[Ranking, np.ndarray]:
    m = len(points)
    if m == 1:
        return {(0,): np.zeros(2)}
    normals, offsets, _ = _bisectors(points)
    lengths = np.linalg.norm(normals, axis=1)
    scale = _scale(points)
    vertices = np.zeros((0, 2))
    if len(normals) > 1:
        vertices = _merge_close(_line_vertices(normals, offsets, 1e-9), 1e-7 * scale)
    reps = [_sector_points(v, normals, offsets, lengths) for v in vertices]
    if len(vertices):
        scale = max(scale, float(np.max(np.linalg.norm(vertices, axis=1))))
    far = radius_factor * scale
    reps.append(_far_circle_points(normals, offsets, lengths, far))
    return _collect(points, np.concatenate(reps))


def _enumerate_1d(points: np.ndarray) -> Tuple[Dict[Ranking, np.ndarray], List[Ranking]]:
    xs = points[:, 0]
    m = len(xs)
    mids = np.sort((xs[:, None] + xs[None, :])[np.triu_indices(m, 1)] / 2.0)
    if mids.size == 0:
        sweep = np.array([0.0])
    else:
        sweep = np.concatenate([[mids[0] - 1.0], (mids[:-1] + mids[1:]) / 2.0, [mids[-1] + 1.0]])
    reps = sweep[:, None]
    ranks = rank_points(points, reps)
    chain: List[Ranking] = []
    for row in ranks:
        r = tuple(int(c) for c in row)
        if not chain or chain[-1] != r:
            chain.append(r)
    found = {}
    for row, x in zip(ranks, reps):
        found.setdefault(tuple(int(c) for c in row), x)
    return found, chain


def _hyperplane_batch(rng: np.random.Generator, normals: np.ndarray, offsets: np.ndarray,
                      size: int, span: float, jitter: float) -> np.ndarray:
    d = normals.shape[1]
    half = size // 2
    picks = rng.integers(len(normals), size=(half, d))
    mats = normals[picks]
    ok = np.abs(np.linalg.det(mats)) > 1e-12
    if not np.any(ok):  # bisectors span fewer than d dimensions when m <= d
        return rng.uniform(-span, span, size=(size, d))
    corners = np.linalg.solve(mats[ok], offsets[picks][ok][..., None])[..., 0]
    direction = rng.normal(size=corners.shape)
    direction /= np.linalg.norm(direction, axis=1)[:, None]
    near = corners + jitter * direction
    spread = rng.uniform(-span, span, size=(size - half, d))
    return np.concatenate([near, spread])


def sample_cells(emb: Embedding, seed=None, batches: int = 50, batch_size: int = 10_000,
                 patience: int = 5, box: Optional[float] = None) -> Dict[Ranking, np.ndarray]:
    """Sampled lower bound on the cells of the arrangement (optionally within [-box, box]^d).

    Batches draw from per-batch child generators; sampling stops once the number
    of distinct rankings has not grown for ``patience`` batches.
    """
    pts = emb.array
    if emb.m == 1:
        return {(0,): np.zeros(emb.d)}
    normals, offsets, _ = _bisectors(pts)
    scale = _scale(pts)
    found: Dict[Ranking, np.ndarray] = {}
    stable = 0
    for batch_no, child in enumerate(spawn_rngs(seed, batches)):
        if box is None:
            reps = _hyperplane_batch(child, normals, offsets, batch_size, 3.0 * scale, 1e-3 * scale)
        else:
            reps = child.uniform(-box, box, size=(batch_size, emb.d))
        before = len(found)
        for r, x in _collect(pts, reps).items():
            found.setdefault(r, x)
        stable = stable + 1 if len(found) == before else 0
        if stable >= patience:
            logger.debug("Cell sampling converged", extra={"batches": batch_no + 1, "cells": len(found)})
            break
    return found


def enumerate_euclidean(emb: Embedding, seed=None, batches: int = 50, batch_size: int = 10_000,
                        patience: int = 5, radius_factor: float = FAR_RADIUS_FACTOR) -> Domain:
    """All rankings realizable by a voter point; exact for d <= 2, a lower bound above."""
    pts = emb.array
    m, d = pts.shape
    check_general_position(pts)
    emb = replace(emb, general_position=True)
    if d == 1:
        found, chain = _enumerate_1d(pts)
        axis = tuple(int(c) for c in np.argsort(pts[:, 0]))
        desc = DomainDescriptor(kind="Euclid", embedding=emb, chain=tuple(chain), axis=axis)
        return _make_domain(m, found.keys(), desc, witnesses=found)
    if d == 2:
        found = _enumerate_2d(pts, radius_factor)
        expected = domain_size_formula("2D", m) if m >= 2 else 1
        if len(found) != expected:
            logger.warning("Arrangement count mismatch", extra={"found": len(found), "expected": expected})
            raise DegenerateEmbeddingError(f"found {len(found)} cells, expected {expected}")
        return _make_domain(m, found.keys(), DomainDescriptor(kind="Euclid", embedding=emb), witnesses=found)
    found = sample_cells(emb, seed=seed, batches=batches, batch_size=batch_size, patience=patience)
    desc = DomainDescriptor(kind="Euclid", embedding=emb, lower_bound=True)
    return _make_domain(m, found.keys(), desc, witnesses=found)


def _box_points_2d(points: np.ndarray, r: float) -> np.ndarray:
    normals, offsets, _ = _bisectors(points)
    lengths = np.linalg.norm(normals, axis=1)
    scale = _scale(points)
    reps = []
    if len(normals) > 1:
        vertices = _merge_close(_line_vertices(normals, offsets, 1e-9), 1e-7 * scale)
        inside = vertices[np.all(np.abs(vertices) < r, axis=1)]
        for v in inside:
            reps.append(_sector_points(v, normals, offsets, lengths, limit=float(r - np.max(np.abs(v)))))
    corners = np.array([[sx * r, sy * r] for sx in (-1, 1) for sy in (-1, 1)])
    for c in corners:
        rho = float(np.min(np.abs(normals @ c - offsets) / lengths))
        reps.append((c - 0.5 * min(rho, r) * np.sign(c) / np.sqrt(2))[None, :])
    # crossings of every bisector with the four box edges
    for axis in (0, 1):
        other = 1 - axis
        for side in (-r, r):
            ok = np.abs(normals[:, other]) > 1e-12
            t = (offsets[ok] - normals[ok, axis] * side) / normals[ok, other]
            hit = np.abs(t) < r
            for li, tv in zip(np.flatnonzero(ok)[hit], t[hit]):
                q = np.zeros(2)
                q[axis], q[other] = side, tv
                dist = np.abs(normals @ q - offsets) / lengths
                dist[li] = np.inf
                s = 0.5 * min(float(dist.min()), r - abs(tv))
                sin = abs(normals[li, other]) / lengths[li]
                inward = -np.sign(side) * 0.5 * s * sin
                for sign in (-1.0, 1.0):
                    p = q.copy()
                    p[other] += sign * s
                    p[axis] += inward
                    reps.append(p[None, :])
    return np.concatenate(reps)


def euclidean_box_rankings(emb: Embedding, r: float, seed=None, batches: int = 50,
                           batch_size: int = 10_000, patience: int = 5) -> Dict[Ranking, np.ndarray]:
    """Rankings of the arrangement cells meeting (-r, r)^d, each with a witness point inside the box.

    Exact for d <= 2; for d >= 3 a sampled lower bound.
    """
    if r <= 0:
        raise InputError("box radius must be positive")
    pts = emb.array
    m, d = pts.shape
    if m == 1:
        return {(0,): np.zeros(d)}
    if d == 1:
        mids = (pts[:, 0][:, None] + pts[:, 0][None, :])[np.triu_indices(m, 1)] / 2.0
        cuts = np.concatenate([[-r], np.sort(mids[np.abs(mids) < r]), [r]])
        return _collect(pts, ((cuts[:-1] + cuts[1:]) / 2.0)[:, None])
    if d == 2:
        return _collect(pts, _box_points_2d(pts, r))
    return sample_cells(emb, seed=seed, batches=batches, batch_size=batch_size,
                        patience=patience, box=r)


def euclidean_box_cells(emb: Embedding, r: float, seed=None, batches: int = 50,
                        batch_size: int = 10_000, patience: int = 5) -> int:
    """Number of arrangement cells meeting (-r, r)^d (sampled lower bound for d >= 3)."""
    return len(euclidean_box_rankings(emb, r, seed=seed, batches=batches,
                                      batch_size=batch_size, patience=patience))


# ---------------------------------------------------------------- formulas and extensions

@lru_cache(maxsize=None)
def stirling_first(n: int, k: int) -> int:
    """Unsigned Stirling numbers of the first kind."""
    if n < 0 or k < 0 or k > n:
        return 0
    if n == 0:
        return 1 if k == 0 else 0
    return (n - 1) * stirling_first(n - 1, k) + stirling_first(n - 1, k - 1)


def domain_size_formula(kind: str, m: int) -> int:
    kind = _ALIASES.get(kind, kind)
    if kind not in FORMULA_KINDS:
        raise InputError(f"no size formula for domain kind {kind!r}")
    if kind == "Full" and m >= 1:
        return factorial(m)
    if m < 2:
        raise InputError("size formulas need m >= 2")
    if kind in ("SP", "GS"):
        return 2 ** (m - 1)
    if kind == "SPOC":
        return m * 2 ** (m - 2)
    if kind == "SP/DF":
        if m < 5:
            raise InputError("the SP/DF formula needs m >= 5")
        return 16 * (2 ** (m - 3) - 1)
    if kind in ("SC", "1D"):
        return comb(m, 2) + 1
    return stirling_first(m, m) + stirling_first(m, m - 1) + stirling_first(m, m - 2)


def reverse_extension(domain: Domain) -> Tuple[Domain, float]:
    """Add the reverse of every vote; returns the extension and |extension| / |domain|."""
    weights = None
    if domain.weights is not None:
        weights = dict(zip(domain.votes, domain.weights))
        for v, w in zip(domain.votes, domain.weights):
            weights.setdefault(reverse(v), w)
    votes = set(domain.votes) | {reverse(v) for v in domain.votes}
    desc = DomainDescriptor(kind="Custom", source=domain.kind)
    extended = _make_domain(domain.m, votes, desc, weights=weights)
    return extended, len(extended) / len(domain)


def named_domain(name: str, m: int, rng=None, **euclid_options) -> Domain:
    """Domains of the experiment suite by their short names (see DOMAIN_NAMES)."""
    name = _ALIASES.get(name, name)
    rng = as_rng(rng)
    axis = identity(m)
    if name in ("1D", "2D", "3D"):
        d = int(name[0])
        for _ in range(20):
            try:
                return enumerate_euclidean(random_embedding(rng, m, d), seed=rng, **euclid_options)
            except DegenerateEmbeddingError:
                logger.warning("Degenerate arrangement, resampling", extra={"name": name, "m": m})
        raise DegenerateEmbeddingError(f"no generic {name} embedding for m={m}")
    if name == "SC":
        return generate_sc_chain(rng, m)
    if name == "SP":
        return enumerate_sp(axis)
    if name == "SP/DF":
        return enumerate_sp_tree(double_fork_tree(m))
    if name == "SPOC":
        return enumerate_spoc(axis)
    if name == "GS/bal":
        return enumerate_gs(balanced_tree(axis))
    if name == "GS/cat":
        return enumerate_gs(caterpillar_tree(axis))
    if name == "Full":
        return full_domain(m)
    raise InputError(f"unknown domain {name!r}; expected one of {', '.join(DOMAIN_NAMES)}")
