"""Rankings, elections, swap distance and pairwise-majority machinery.

Candidates are dense indices ``0..m-1``; a ranking is a tuple listing them from
most to least preferred. External candidate names only exist in the file layer.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import TYPE_CHECKING, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import InputError

if TYPE_CHECKING:  # pragma: no cover
    from domains import Embedding, GSTree

logger = logging.getLogger(__name__)

Ranking = Tuple[int, ...]
Weight = Union[int, float]


def validate_ranking(seq: Iterable[int], m: Optional[int] = None) -> Ranking:
    """Return ``seq`` as a Ranking, raising InputError unless it is a permutation of [0, m)."""
    r = tuple(int(c) for c in seq)
    if m is None:
        m = len(r)
    if m < 1:
        raise InputError("a ranking needs at least one candidate")
    if len(r) != m or sorted(r) != list(range(m)):
        raise InputError(f"{r!r} is not a permutation of 0..{m - 1}")
    return r


def reverse(r: Ranking) -> Ranking:
    return tuple(reversed(r))


def positions(r: Ranking) -> List[int]:
    pos = [0] * len(r)
    for i, c in enumerate(r):
        pos[c] = i
    return pos


def _count_inversions(seq: List[int]) -> int:
    # bottom-up merge sort, O(m log m)
    n = len(seq)
    src = list(seq)
    dst = [0] * n
    inversions = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if src[i] <= src[j]:
                    dst[k] = src[i]
                    i += 1
                else:
                    dst[k] = src[j]
                    inversions += mid - i
                    j += 1
                k += 1
            dst[k:k + mid - i] = src[i:mid]
            k += mid - i
            dst[k:k + hi - j] = src[j:hi]
        src, dst = dst, src
        width *= 2
    return inversions


def swap_distance(u: Ranking, v: Ranking) -> int:
    """Number of candidate pairs ordered differently by u and v."""
    if len(u) != len(v):
        raise InputError(f"rankings of different lengths: {len(u)} vs {len(v)}")
    pos_v = positions(v)
    return _count_inversions([pos_v[c] for c in u])


def pair_orders(rankings: Sequence[Ranking], m: int) -> np.ndarray:
    """Rows of 0/1 flags, one column per candidate pair a < b, set when a is above b."""
    if len(rankings) == 0:
        return np.zeros((0, m * (m - 1) // 2))
    arr = np.asarray(rankings, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != m:
        raise InputError(f"expected rankings of length {m}")
    pos = np.argsort(arr, axis=1)
    upper_a, upper_b = np.triu_indices(m, 1)
    return (pos[:, upper_a] < pos[:, upper_b]).astype(np.float64)


def distance_matrix(us: Sequence[Ranking], vs: Sequence[Ranking], m: Optional[int] = None) -> np.ndarray:
    """Swap distances between every u in ``us`` and every v in ``vs`` (int64 matrix)."""
    if m is None:
        m = len(us[0]) if len(us) else len(vs[0])
    ou = pair_orders(us, m)
    ov = pair_orders(vs, m)
    d = ou @ (1.0 - ov).T + (1.0 - ou) @ ov.T
    return np.rint(d).astype(np.int64)


def _number(x: float, integral: bool) -> Weight:
    return int(round(x)) if integral else float(x)


@dataclass(frozen=True)
class Certificate:
    """Domain metadata an election may carry; any subset of fields can be set."""

    sp_axis: Optional[Ranking] = None
    gs_tree: Optional["GSTree"] = None
    sc_order: Optional[Tuple[int, ...]] = None  # permutation of vote indices
    sp_tree: Optional[Tuple[Tuple[int, ...], ...]] = None  # adjacency lists of a tree
    cycle: Optional[Ranking] = None
    embedding: Optional["Embedding"] = None

    @property
    def is_condorcet(self) -> bool:
        return any(x is not None for x in (self.sp_axis, self.gs_tree, self.sc_order, self.sp_tree))


@dataclass(frozen=True)
class Election:
    m: int
    votes: Tuple[Tuple[Ranking, Weight], ...]
    certificate: Optional[Certificate] = None

    def __post_init__(self):
        if self.m < 1:
            raise InputError("an election needs at least one candidate")
        if not self.votes:
            raise InputError("an election needs at least one vote")
        for r, w in self.votes:
            if len(r) != self.m:
                raise InputError(f"vote {r!r} has length {len(r)}, expected {self.m}")
            if not w > 0:
                raise InputError(f"vote weight must be positive, got {w!r}")
        if self.certificate is not None and self.certificate.sp_axis is not None:
            validate_ranking(self.certificate.sp_axis, self.m)
        if self.certificate is not None and self.certificate.sc_order is not None:
            if sorted(self.certificate.sc_order) != list(range(len(self.votes))):
                raise InputError("sc_order must be a permutation of the vote indices")

    @classmethod
    def from_rankings(
        cls,
        rankings: Iterable[Sequence[int]],
        weights: Optional[Iterable[Weight]] = None,
        m: Optional[int] = None,
        certificate: Optional[Certificate] = None,
        validate: bool = True,
    ) -> "Election":
        rs = [tuple(r) for r in rankings]
        if not rs:
            raise InputError("an election needs at least one vote")
        if m is None:
            m = len(rs[0])
        if validate:
            rs = [validate_ranking(r, m) for r in rs]
        ws = list(weights) if weights is not None else [1] * len(rs)
        if len(ws) != len(rs):
            raise InputError("weights must align with votes")
        return cls(m=m, votes=tuple(zip(rs, ws)), certificate=certificate)

    @property
    def rankings(self) -> Tuple[Ranking, ...]:
        return tuple(r for r, _ in self.votes)

    @property
    def weights(self) -> Tuple[Weight, ...]:
        return tuple(w for _, w in self.votes)

    @property
    def is_weighted(self) -> bool:
        return any(not float(w).is_integer() for w in self.weights)

    @property
    def n(self) -> Weight:
        return sum(self.weights)

    def subset(self, indices: Sequence[int]) -> "Election":
        """Sub-election on the given vote indices (certificate dropped, except domain-wide ones)."""
        cert = self.certificate
        if cert is not None:
            cert = Certificate(sp_axis=cert.sp_axis, gs_tree=cert.gs_tree, sp_tree=cert.sp_tree,
                               cycle=cert.cycle, embedding=cert.embedding)
        return Election(m=self.m, votes=tuple(self.votes[i] for i in indices), certificate=cert)


def as_rng(seed=None) -> np.random.Generator:
    """PCG64 generator from an int seed, a SeedSequence, or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rngs(seed, count: int) -> List[np.random.Generator]:
    """``count`` independent child generators; same seed, same children, in order."""
    if isinstance(seed, np.random.Generator):
        seq = np.random.SeedSequence(int(seed.integers(2**63)))
    elif isinstance(seed, np.random.SeedSequence):
        seq = seed
    else:
        seq = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(s)) for s in seq.spawn(count)]


def distinct_votes(e: Election) -> Tuple[List[Ranking], np.ndarray]:
    """Distinct rankings in first-appearance order with their summed weights."""
    index = {}
    rankings: List[Ranking] = []
    weights: List[float] = []
    for r, w in e.votes:
        i = index.get(r)
        if i is None:
            index[r] = len(rankings)
            rankings.append(r)
            weights.append(float(w))
        else:
            weights[i] += float(w)
    return rankings, np.asarray(weights, dtype=np.float64)


def kemeny_score(e: Election, r: Ranking) -> Weight:
    if len(r) != e.m:
        raise InputError(f"ranking of length {len(r)} for an election over {e.m} candidates")
    total = sum(w * swap_distance(v, r) for v, w in e.votes)
    return _number(total, not e.is_weighted)


def k_kemeny_score(e: Election, centers: Sequence[Ranking]) -> Tuple[Weight, Tuple[int, ...]]:
    """Score of ``centers`` and, per vote, the index of its nearest center (ties: lowest index)."""
    if len(centers) == 0:
        raise InputError("k-Kemeny needs at least one center")
    for c in centers:
        if len(c) != e.m:
            raise InputError(f"center of length {len(c)} for an election over {e.m} candidates")
    d = distance_matrix(e.rankings, list(centers), e.m)
    nearest = np.argmin(d, axis=1)
    w = np.asarray(e.weights, dtype=np.float64)
    score = float(np.dot(w, d[np.arange(len(nearest)), nearest]))
    return _number(score, not e.is_weighted), tuple(int(i) for i in nearest)


@dataclass(frozen=True, eq=False)
class WeightedTournament:
    """``w[a, b]`` is the (weighted) number of voters preferring a to b."""

    m: int
    w: np.ndarray = field(repr=False)

    def prefers(self, a: int, b: int) -> Weight:
        return self.w[a, b]


def tournament(e: Election) -> WeightedTournament:
    arr = np.asarray(e.rankings, dtype=np.int64)
    pos = np.argsort(arr, axis=1)
    above = (pos[:, :, None] < pos[:, None, :]).astype(np.float64)
    w = np.einsum("v,vab->ab", np.asarray(e.weights, dtype=np.float64), above)
    if not e.is_weighted:
        w = np.rint(w).astype(np.int64)
    return WeightedTournament(m=e.m, w=w)


def condorcet_from_tournament(t: WeightedTournament) -> Optional[Ranking]:
    w = t.w
    m = t.m
    indegree = [0] * m
    beats: List[List[int]] = [[] for _ in range(m)]
    for a, b in combinations(range(m), 2):
        if w[a, b] > w[b, a]:
            beats[a].append(b)
            indegree[b] += 1
        elif w[b, a] > w[a, b]:
            beats[b].append(a)
            indegree[a] += 1
    ready = [c for c in range(m) if indegree[c] == 0]
    heapq.heapify(ready)
    order: List[int] = []
    while ready:
        c = heapq.heappop(ready)
        order.append(c)
        for d in beats[c]:
            indegree[d] -= 1
            if indegree[d] == 0:
                heapq.heappush(ready, d)
    if len(order) < m:
        return None  # strict majority cycle
    for i in range(m):
        for j in range(i + 1, m):
            if w[order[i], order[j]] < w[order[j], order[i]]:
                return None
    return tuple(order)


def condorcet_ranking(e: Election) -> Optional[Ranking]:
    """A ranking agreeing with every weak pairwise majority, or None if there is none."""
    return condorcet_from_tournament(tournament(e))
