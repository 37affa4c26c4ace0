"""Hypercube 2-segmentation (H2S) and its encodings as 2-Kemeny instances.

Used as correctness fixtures: a reduced instance has a 2-Kemeny solution of
score <= q exactly when the strings split into two groups of total Hamming
score <= t.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

import config
from core import Certificate, Election, Ranking
from domains import GSTree, balanced_tree, caterpillar_tree
from errors import BudgetError, InputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class H2SInstance:
    strings: Tuple[str, ...]
    t: int

    def __post_init__(self):
        if not self.strings:
            raise InputError("an H2S instance needs at least one string")
        width = len(self.strings[0])
        if width == 0:
            raise InputError("H2S strings must be nonempty")
        for s in self.strings:
            if len(s) != width:
                raise InputError("H2S strings must all have the same length")
            if set(s) - {"0", "1"}:
                raise InputError(f"H2S strings are binary, got {s!r}")
        if self.t < 0:
            raise InputError("t must be >= 0")

    @property
    def n(self) -> int:
        return len(self.strings)

    @property
    def m(self) -> int:
        return len(self.strings[0])


@dataclass(frozen=True)
class H2SSolution:
    feasible: bool
    groups: Tuple[Tuple[int, ...], Tuple[int, ...]]
    score: int


@dataclass(frozen=True)
class KemenyInstance:
    election: Election
    k: int
    q: int
    axis: Ranking
    tree: Optional[GSTree] = None


def _matrix(strings: Sequence[str]) -> np.ndarray:
    return np.array([[ch == "1" for ch in s] for s in strings], dtype=np.int64)


def hamming_score(group: Sequence[str]) -> int:
    """Sum over positions of the minority count; the cost of the best central string."""
    if len(group) == 0:
        raise InputError("hamming score of an empty group is undefined")
    ones = _matrix(group).sum(axis=0)
    return int(np.minimum(ones, len(group) - ones).sum())


def solve_h2s_bruteforce(inst: H2SInstance, max_strings: int = None) -> H2SSolution:
    """Try all 2^(n-1) bipartitions (string 0 stays in the first group; the second may be empty)."""
    limit = config.MAX_H2S_STRINGS if max_strings is None else max_strings
    if inst.n > limit:
        raise BudgetError("H2S strings", limit, inst.n)
    best, best_mask = None, 0
    for mask in range(1 << (inst.n - 1)):
        second = [i for i in range(1, inst.n) if mask >> (i - 1) & 1]
        first = [i for i in range(inst.n) if i not in second]
        score = hamming_score([inst.strings[i] for i in first])
        if second:
            score += hamming_score([inst.strings[i] for i in second])
        if best is None or score < best:
            best, best_mask = score, mask
    second = tuple(i for i in range(1, inst.n) if best_mask >> (i - 1) & 1)
    first = tuple(i for i in range(inst.n) if i not in second)
    return H2SSolution(feasible=best <= inst.t, groups=(first, second), score=best)


def pad_power_of_two(strings: Sequence[str]) -> Tuple[str, ...]:
    """Append '0' columns until the length is a power of two; scores are unchanged."""
    width = len(strings[0])
    target = 1
    while target < width:
        target *= 2
    return tuple(s + "0" * (target - width) for s in strings)


def _a(j: int) -> int:
    return 2 * j


def _b(j: int) -> int:
    return 2 * j + 1


def aligned_vote(s: str) -> Ranking:
    """{a1,b1} > {a2,b2} > ... with a_j above b_j exactly when s[j] == '1'."""
    vote = []
    for j, ch in enumerate(s):
        vote.extend((_a(j), _b(j)) if ch == "1" else (_b(j), _a(j)))
    return tuple(vote)


def reduce_sp_gsbal(inst: H2SInstance) -> KemenyInstance:
    """Encode H2S as 2-Kemeny over aligned votes; single-peaked and balanced group-separable."""
    strings = pad_power_of_two(inst.strings)
    m = len(strings[0])
    votes = [aligned_vote(s) for s in strings]
    axis = tuple(_a(j) for j in reversed(range(m))) + tuple(_b(j) for j in range(m))
    tree = balanced_tree(tuple(c for j in range(m) for c in (_a(j), _b(j))))
    election = Election.from_rankings(votes, m=2 * m, certificate=Certificate(sp_axis=axis, gs_tree=tree))
    logger.info("Built aligned-vote reduction", extra={"strings": inst.n, "candidates": 2 * m, "q": inst.t})
    return KemenyInstance(election=election, k=2, q=inst.t, axis=axis, tree=tree)


def gscat_vote(s: str, dummies: int) -> Ranking:
    """c(1) > ... > c(m) > x_1 > ... > x_M > complement(m) > ... > complement(1)."""
    m = len(s)
    chosen = [_a(j) if ch == "1" else _b(j) for j, ch in enumerate(s)]
    other = [_b(j) if ch == "1" else _a(j) for j, ch in enumerate(s)]
    return tuple(chosen) + tuple(range(2 * m, 2 * m + dummies)) + tuple(reversed(other))


def minimal_dummies(n: int, m: int) -> int:
    """Smallest sound dummy count: a wrong bit costs 2M, slack is 2nm^2, so M > nm^2."""
    return n * m * m + 1


def reduce_gscat(inst: H2SInstance, M_override: Optional[int] = None,
                 max_candidates: int = None) -> KemenyInstance:
    """Encode H2S as 2-Kemeny over caterpillar group-separable votes with M dummies."""
    n, m = inst.n, inst.m
    limit = config.MAX_GS_CANDIDATES if max_candidates is None else max_candidates
    if M_override is None:
        dummies = m ** 10 * n ** 10
        if 2 * m + dummies > limit:
            raise BudgetError("caterpillar reduction candidates (pass M_override)", limit, 2 * m + dummies)
    else:
        dummies = M_override
        if dummies <= n * m * m:
            raise InputError(
                f"M_override={dummies} is unsound: need M > n*m^2 = {n * m * m} so that one "
                f"mismatched bit (2M swaps) outweighs the 2nm^2 arrangement slack")
        if 2 * m + dummies > limit:
            raise BudgetError("caterpillar reduction candidates", limit, 2 * m + dummies)
    votes = [gscat_vote(s, dummies) for s in inst.strings]
    axis = tuple(c for j in range(m) for c in (_a(j), _b(j))) + tuple(range(2 * m, 2 * m + dummies))
    tree = caterpillar_tree(axis)
    q = 2 * dummies * inst.t + 2 * n * m * m
    election = Election.from_rankings(votes, m=2 * m + dummies, certificate=Certificate(gs_tree=tree))
    logger.info("Built caterpillar reduction", extra={"strings": n, "dummies": dummies, "q": q})
    return KemenyInstance(election=election, k=2, q=q, axis=axis, tree=tree)
