"""k-Kemeny solvers: exact oracles, the voter-partition DP, the single-crossing
interval DP, brute force over embeddable domains, and local search."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations, islice
from math import comb, factorial
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

import config
from core import (
    Election,
    Ranking,
    Weight,
    WeightedTournament,
    as_rng,
    condorcet_from_tournament,
    distance_matrix,
    distinct_votes,
    k_kemeny_score,
    spawn_rngs,
    swap_distance,
    tournament,
)
from domains import FULL_DOMAIN_MAX_M, Domain, Embedding, enumerate_euclidean, full_domain, is_single_crossing
from errors import BudgetError, CertificateError, InputError, InvariantError

logger = logging.getLogger(__name__)

SolverMethod = Literal["exact", "fpt", "sc", "heuristic", "embeddable"]


@dataclass(frozen=True)
class KemenyResult:
    centers: Tuple[Ranking, ...]
    score: Weight
    assignment: Tuple[int, ...]  # vote index -> center index
    method: str
    exact: bool

    @property
    def k(self) -> int:
        return len(self.centers)

    def cluster_sizes(self, e: Election) -> List[Weight]:
        sizes = [0] * len(self.centers)
        for (_, w), c in zip(e.votes, self.assignment):
            sizes[c] += w
        return sizes


class SolverConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    method: SolverMethod = "heuristic"
    restarts: int = Field(10, ge=1)
    extra_ic: int = Field(512, ge=0)
    seed: Optional[int] = None


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))


def _result(e: Election, centers: Sequence[Ranking], method: str, exact: bool,
            expected: Optional[float] = None) -> KemenyResult:
    score, assignment = k_kemeny_score(e, centers)
    if expected is not None and not _close(float(score), float(expected)):
        logger.error("Solver score mismatch", extra={"method": method, "score": score, "expected": expected})
        raise InvariantError(f"{method}: recomputed score {score} != solver value {expected}")
    return KemenyResult(centers=tuple(centers), score=score, assignment=assignment,
                        method=method, exact=exact)


# ---------------------------------------------------------------- k = 1

def ranking_cost(w: np.ndarray, r: Ranking) -> float:
    """Kemeny score of r against the tournament w."""
    sub = w[np.ix_(r, r)]
    return float(np.tril(sub, -1).sum())


def _popcount_layers(m: int) -> List[np.ndarray]:
    n = 1 << m
    pc = np.zeros(n, dtype=np.int64)
    for j in range(m):
        pc[1 << j:1 << (j + 1)] = pc[:1 << j] + 1
    order = np.argsort(pc, kind="stable")
    bounds = np.searchsorted(pc[order], np.arange(m + 2))
    return [order[bounds[p]:bounds[p + 1]] for p in range(1, m + 1)]


def kemeny_dp(w: np.ndarray) -> Tuple[float, Ranking]:
    """Optimal ranking for tournament w by DP over the set of top-placed candidates.

    best(S) = min over c in S of best(S - c) + sum_{d not in S} w[d, c], where c is
    the candidate placed last among S; the argmin over c breaks ties toward the
    lowest candidate index.
    """
    m = w.shape[0]
    w = np.asarray(w, dtype=np.float64)
    colsum = w.sum(axis=0)
    best = np.zeros(1 << m)
    choice = np.zeros(1 << m, dtype=np.int8)
    shifts = np.arange(m)
    for layer in _popcount_layers(m):
        bits = ((layer[:, None] >> shifts) & 1).astype(bool)
        inside = bits.astype(np.float64) @ w
        prev = best[layer[:, None] ^ (1 << shifts)]
        cand = np.where(bits, prev + colsum[None, :] - inside, np.inf)
        pick = np.argmin(cand, axis=1)
        best[layer] = cand[np.arange(len(layer)), pick]
        choice[layer] = pick
    mask = (1 << m) - 1
    bottom_up = []
    while mask:
        c = int(choice[mask])
        bottom_up.append(c)
        mask ^= 1 << c
    return float(best[(1 << m) - 1]), tuple(reversed(bottom_up))


def _checked_kemeny(t: WeightedTournament) -> Tuple[float, Ranking]:
    score, ranking = kemeny_dp(t.w)
    cond = condorcet_from_tournament(t)
    if cond is not None and not _close(ranking_cost(t.w, cond), score):
        raise InvariantError(f"Condorcet ranking {cond} scores {ranking_cost(t.w, cond)}, DP found {score}")
    return score, ranking


def exact_kemeny(e: Election, max_candidates: int = None) -> KemenyResult:
    limit = config.MAX_CANDIDATES if max_candidates is None else max_candidates
    if e.m > limit:
        logger.warning("Kemeny DP over budget", extra={"m": e.m, "limit": limit})
        raise BudgetError("Kemeny DP candidates", limit, e.m)
    score, ranking = _checked_kemeny(tournament(e))
    return _result(e, [ranking], "exact", True, expected=score)


# ---------------------------------------------------------------- partition DP

def _submasks(mask: int) -> np.ndarray:
    subs = np.zeros(1, dtype=np.int64)
    while mask:
        low = mask & -mask
        subs = np.concatenate([subs, subs | low])
        mask ^= low
    return subs


def _single_group_table(rankings: List[Ranking], weights: np.ndarray, m: int,
                        max_candidates: int) -> Tuple[np.ndarray, List[Optional[Ranking]]]:
    n = len(rankings)
    arr = np.asarray(rankings, dtype=np.int64)
    pos = np.argsort(arr, axis=1)
    above = (pos[:, :, None] < pos[:, None, :]).reshape(n, m * m).astype(np.float64)
    f1 = np.zeros(1 << n)
    centers: List[Optional[Ranking]] = [None] * (1 << n)
    dp_calls = 0
    for mask in range(1, 1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        w = (weights[members] @ above[members]).reshape(m, m)
        cond = condorcet_from_tournament(WeightedTournament(m=m, w=w))
        if cond is not None:
            f1[mask], centers[mask] = ranking_cost(w, cond), cond
            continue
        if m > max_candidates:
            raise BudgetError("Kemeny DP candidates", max_candidates, m)
        f1[mask], centers[mask] = kemeny_dp(w)
        dp_calls += 1
    logger.debug("Single-group table built", extra={"groups": (1 << n) - 1, "dp_calls": dp_calls})
    return f1, centers


def solve_partition_dp(e: Election, k: int, max_voters: int = None,
                       max_candidates: int = None) -> KemenyResult:
    """Exact k-Kemeny over partitions of the distinct votes, O*(3^n).

    f(S, t) = min over W subset of S containing the lowest member of S of
    f(W, 1) + f(S - W, t - 1), with f(empty, t) = 0.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    voters_limit = config.MAX_VOTERS if max_voters is None else max_voters
    cand_limit = config.MAX_CANDIDATES if max_candidates is None else max_candidates
    rankings, weights = distinct_votes(e)
    n = len(rankings)
    if k >= n:
        return _result(e, rankings, "fpt", True, expected=0.0)
    if n > voters_limit:
        logger.warning("Partition DP over budget", extra={"distinct_votes": n, "limit": voters_limit})
        raise BudgetError("partition DP distinct votes", voters_limit, n)
    f1, centers = _single_group_table(rankings, weights, e.m, cand_limit)
    full = (1 << n) - 1
    prev = f1
    choices = []
    for _ in range(2, k + 1):
        cur = np.zeros(1 << n)
        pick = np.zeros(1 << n, dtype=np.int64)
        for mask in range(1, 1 << n):
            low = mask & -mask
            groups = _submasks(mask ^ low) | low
            cand = f1[groups] + prev[mask ^ groups]
            j = int(np.argmin(cand))
            cur[mask], pick[mask] = cand[j], groups[j]
        choices.append(pick)
        prev = cur
    mask = full
    chosen = []
    for pick in reversed(choices):
        group = int(pick[mask])
        chosen.append(centers[group])
        mask ^= group
        if not mask:
            break
    if mask:
        chosen.append(centers[mask])
    return _result(e, chosen, "fpt", True, expected=float(prev[full]))


# ---------------------------------------------------------------- single-crossing

def solve_single_crossing(e: Election, k: int) -> KemenyResult:
    """Exact k-Kemeny for an election with a single-crossing voter order.

    Along the order, swap distances are additive, so every cluster is an
    interval of voters whose best center is its weighted-median vote.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    cert = e.certificate
    if cert is None or cert.sc_order is None:
        raise CertificateError("election carries no single-crossing voter order")
    ordered = [e.votes[i] for i in cert.sc_order]
    pair = is_single_crossing([r for r, _ in ordered])
    if pair is not None:
        raise CertificateError(f"candidates {pair[0]} and {pair[1]} flip more than once along the voter order",
                               pair=pair)
    groups: List[Ranking] = []
    gw: List[float] = []
    for r, w in ordered:
        if groups and groups[-1] == r:
            gw[-1] += float(w)
        else:
            groups.append(r)
            gw.append(float(w))
    n = len(groups)
    if k >= n:
        return _result(e, groups, "sc", True, expected=0.0)
    dist = np.zeros(n)
    for i in range(1, n):
        dist[i] = dist[i - 1] + swap_distance(groups[i - 1], groups[i])
    w = np.asarray(gw)
    cw = np.concatenate([[0.0], np.cumsum(w)])
    cwd = np.concatenate([[0.0], np.cumsum(w * dist)])

    # cost[s, i]: interval of groups s..i-1 around its weighted median
    cost = np.full((n + 1, n + 1), np.inf)
    median = np.zeros((n + 1, n + 1), dtype=np.int64)
    for s in range(n):
        ends = np.arange(s + 1, n + 1)
        half = (cw[ends] - cw[s]) / 2.0
        med = np.searchsorted(cw[1:], cw[s] + half - 1e-12, side="left")
        med = np.clip(med, s, ends - 1)
        left_w = cw[med + 1] - cw[s]
        left_wd = cwd[med + 1] - cwd[s]
        right_w = cw[ends] - cw[med + 1]
        right_wd = cwd[ends] - cwd[med + 1]
        cost[s, ends] = dist[med] * left_w - left_wd + right_wd - dist[med] * right_w
        median[s, ends] = med

    g = cost[0].copy()  # one cluster over the first i groups
    splits = []
    for _ in range(2, k + 1):
        cand = g[:, None] + cost
        split = np.argmin(cand, axis=0)
        g = np.minimum(g, cand[split, np.arange(n + 1)])
        splits.append(np.where(cand[split, np.arange(n + 1)] < g + 1e-12, split, -1))
    # walk back: the last layer that actually split the prefix
    end = n
    centers = []
    for split in reversed(splits):
        s = int(split[end])
        if s < 0 or s >= end:
            continue
        centers.append(groups[median[s, end]])
        end = s
        if end == 0:
            break
    if end > 0:
        centers.append(groups[median[0, end]])
    centers.reverse()
    return _result(e, centers, "sc", True, expected=float(g[n]))


# ---------------------------------------------------------------- brute force

def _best_subset(e: Election, candidates: Sequence[Ranking], k: int, max_subsets: int,
                 budget: str) -> Tuple[List[Ranking], float]:
    rankings, weights = distinct_votes(e)
    total = comb(len(candidates), k)
    if total > max_subsets:
        logger.warning("Subset brute force over budget", extra={"subsets": total, "limit": max_subsets})
        raise BudgetError(budget, max_subsets, total)
    d = distance_matrix(rankings, list(candidates), e.m).astype(np.float64)
    best_score, best_combo = np.inf, None
    chunk = max(1, 2_000_000 // max(1, len(rankings) * k))
    combos = combinations(range(len(candidates)), k)
    while True:
        block = np.array(list(islice(combos, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        scores = weights @ d[:, block].min(axis=2)
        j = int(np.argmin(scores))
        if scores[j] < best_score - 1e-12:
            best_score, best_combo = float(scores[j]), block[j]
    return [candidates[i] for i in best_combo], best_score


def solve_embeddable(e: Election, k: int, emb: Optional[Embedding] = None,
                     domain: Optional[Domain] = None, max_subsets: int = None) -> KemenyResult:
    """Brute force over k-subsets of the Euclidean domain of the embedding."""
    if k < 1:
        raise InputError("k must be >= 1")
    limit = config.MAX_SUBSETS if max_subsets is None else max_subsets
    if domain is None:
        if emb is None:
            emb = e.certificate.embedding if e.certificate is not None else None
        if emb is None:
            raise InputError("embeddable solver needs an embedding (certificate or argument)")
        domain = enumerate_euclidean(emb)
    if k >= len(domain):
        return _result(e, domain.votes, "embeddable", not domain.descriptor.lower_bound)
    centers, score = _best_subset(e, domain.votes, k, limit, "embeddable k-subsets")
    return _result(e, centers, "embeddable", not domain.descriptor.lower_bound, expected=score)


def solve_exact(e: Election, k: int, max_voters: int = None, max_subsets: int = None,
                max_candidates: int = None) -> KemenyResult:
    """Cheapest exact method that applies to e and fits the budgets."""
    if k < 1:
        raise InputError("k must be >= 1")
    voters_limit = config.MAX_VOTERS if max_voters is None else max_voters
    subsets_limit = config.MAX_SUBSETS if max_subsets is None else max_subsets
    if k == 1:
        return exact_kemeny(e, max_candidates=max_candidates)
    if e.certificate is not None and e.certificate.sc_order is not None:
        return solve_single_crossing(e, k)
    rankings, _ = distinct_votes(e)
    if k >= len(rankings) or len(rankings) <= voters_limit:
        return solve_partition_dp(e, k, max_voters=voters_limit, max_candidates=max_candidates)
    if e.m <= FULL_DOMAIN_MAX_M and comb(factorial(e.m), k) <= subsets_limit:
        centers, score = _best_subset(e, full_domain(e.m).votes, k, subsets_limit, "full-domain k-subsets")
        return _result(e, centers, "exact", True, expected=score)
    raise BudgetError("exact k-Kemeny distinct votes", voters_limit, len(rankings))


# ---------------------------------------------------------------- heuristic

def build_search_space(e: Election, domain: Optional[Domain] = None, extra_ic: int = 512,
                       seed=None) -> List[Ranking]:
    """Candidate centers: a Condorcet domain alone, otherwise domain or votes plus IC samples."""
    if domain is not None and domain.is_condorcet:
        return list(domain.votes)
    base = list(domain.votes) if domain is not None else distinct_votes(e)[0]
    if extra_ic:
        rng = as_rng(seed)
        sampled = np.argsort(rng.random((extra_ic, e.m)), axis=1)
        base.extend(tuple(row) for row in sampled.tolist())
    return list(dict.fromkeys(base))


def local_search(e: Election, k: int, search_space: Sequence[Ranking], restarts: int = 10,
                 seed=None) -> KemenyResult:
    """Steepest-descent single-center replacement from random starts.

    Equal-score moves are resolved toward the lexicographically smallest new
    center, then the lowest replaced slot.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    space = sorted(set(tuple(r) for r in search_space))
    if not space:
        raise InputError("search space is empty")
    if k >= len(space):
        return _result(e, space, "heuristic", False)
    rankings, weights = distinct_votes(e)
    d = distance_matrix(rankings, space, e.m).astype(np.float64)
    best_idx, best_score = None, np.inf
    for run, rng in enumerate(spawn_rngs(seed, restarts)):
        idx = np.sort(rng.choice(len(space), size=k, replace=False))
        score = float(weights @ d[:, idx].min(axis=1))
        steps = 0
        while True:
            cur = d[:, idx]
            if k == 1:
                others = np.full((1, len(rankings)), np.inf)
            else:
                order = np.argsort(cur, axis=1, kind="stable")
                first = cur[np.arange(len(cur)), order[:, 0]]
                second = cur[np.arange(len(cur)), order[:, 1]]
                others = np.where(order[:, 0][None, :] == np.arange(k)[:, None], second[None, :], first[None, :])
            # moves[s, j]: score after replacing center j by space[s]
            moves = np.stack([weights @ np.minimum(others[j][:, None], d) for j in range(k)], axis=1)
            s, j = np.unravel_index(int(np.argmin(moves)), moves.shape)
            if moves[s, j] >= score - 1e-9:
                break
            idx[j] = s
            idx = np.sort(idx)
            score = float(moves[s, j])
            steps += 1
        logger.debug("Local search restart finished", extra={"restart": run, "score": score, "steps": steps})
        if score < best_score - 1e-9:
            best_idx, best_score = idx.copy(), score
    return _result(e, [space[i] for i in best_idx], "heuristic", False, expected=best_score)


def solve(e: Election, k: int, solver: Optional[SolverConfig] = None,
          domain: Optional[Domain] = None) -> KemenyResult:
    """Run the configured solver; ``domain`` feeds the heuristic search space and the embeddable solver."""
    solver = solver or SolverConfig()
    if solver.method == "exact":
        return solve_exact(e, k)
    if solver.method == "fpt":
        return solve_partition_dp(e, k)
    if solver.method == "sc":
        return solve_single_crossing(e, k)
    if solver.method == "embeddable":
        euclid = domain if domain is not None and domain.kind == "Euclid" else None
        return solve_embeddable(e, k, domain=euclid)
    space_rng, search_rng = spawn_rngs(solver.seed, 2)
    space = build_search_space(e, domain, extra_ic=solver.extra_ic, seed=space_rng)
    return local_search(e, k, space, restarts=solver.restarts, seed=search_rng)
