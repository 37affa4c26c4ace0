"""Statistical cultures for sampling elections.

All samplers draw from numpy ``Generator(PCG64)`` streams. Parallel work gets
its own child stream through :func:`spawn_seeds`, so results do not depend on
how the work is scheduled.
"""
from __future__ import annotations

import logging
from typing import List, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core import Certificate, Election, Ranking, as_rng
from domains import (
    Domain,
    DomainDescriptor,
    Embedding,
    _make_domain,
    caterpillar_tree,
    cvc_vote,
    generate_sc_chain,
    identity,
    random_embedding,
    rank_points,
)
from errors import InputError

logger = logging.getLogger(__name__)

CultureKind = Literal["IC-full", "IC-over-domain", "Walsh", "Conitzer", "CVC-random", "rBox", "SC-gaps"]


class CultureSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: CultureKind
    d: int = Field(1, ge=1)  # rBox dimension
    r: float = 1.0  # rBox half-width
    t: int = 0  # SC-gaps gap length
    weighted: bool = False  # sample proportionally to domain weights
    seed: Optional[int] = None

    @field_validator("r")
    @classmethod
    def validate_r(cls, v: float):
        if not v > 0:
            raise ValueError("r must be positive")
        return v

    @field_validator("t")
    @classmethod
    def validate_t(cls, v: int):
        if v < 0:
            raise ValueError("t must be >= 0")
        return v


def spawn_seeds(seed, count: int) -> List[int]:
    """Deterministic integer seeds for ``count`` independent child streams of ``seed``."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(s.generate_state(1, np.uint64)[0]) for s in children]


def _as_votes(arr: np.ndarray) -> List[Ranking]:
    return [tuple(row) for row in np.asarray(arr, dtype=np.int64).tolist()]


def _walsh(rng: np.random.Generator, axis: Ranking, n: int) -> List[Ranking]:
    # fill from the bottom: the last-ranked candidate is an end of the remaining interval
    m = len(axis)
    votes = []
    for _ in range(n):
        lo, hi = 0, m - 1
        bottom_up = []
        coins = rng.integers(2, size=max(m - 1, 0))
        for coin in coins:
            if coin:
                bottom_up.append(axis[hi])
                hi -= 1
            else:
                bottom_up.append(axis[lo])
                lo += 1
        bottom_up.append(axis[lo])
        votes.append(tuple(reversed(bottom_up)))
    return votes


def _conitzer(rng: np.random.Generator, axis: Ranking, n: int) -> List[Ranking]:
    m = len(axis)
    votes = []
    for _ in range(n):
        peak = int(rng.integers(m))
        lo = hi = peak
        vote = [axis[peak]]
        while len(vote) < m:
            if lo == 0:
                go_right = True
            elif hi == m - 1:
                go_right = False
            else:
                go_right = bool(rng.integers(2))
            if go_right:
                hi += 1
                vote.append(axis[hi])
            else:
                lo -= 1
                vote.append(axis[lo])
        votes.append(tuple(vote))
    return votes


def _r_box(rng: np.random.Generator, emb: Embedding, r: float, n: int):
    pts = emb.array
    xs = rng.uniform(-r, r, size=(n, emb.d))
    while True:
        key = np.sum(pts ** 2, axis=1)[None, :] - 2.0 * xs @ pts.T
        ordered = np.sort(key, axis=1)
        tied = np.any(np.diff(ordered, axis=1) == 0.0, axis=1)
        if not np.any(tied):
            break
        # measure-zero event: a voter sits on a bisector
        logger.debug("Resampling voters on a bisector", extra={"count": int(tied.sum())})
        xs[tied] = rng.uniform(-r, r, size=(int(tied.sum()), emb.d))
    return _as_votes(rank_points(pts, xs)), xs


def _chain_order(chain: Sequence[Ranking], votes: Sequence[Ranking]) -> tuple:
    where = {v: i for i, v in enumerate(chain)}
    return tuple(sorted(range(len(votes)), key=lambda i: (where[votes[i]], i)))


def _from_domain(rng: np.random.Generator, domain: Domain, n: int, weighted: bool) -> Election:
    p = None
    if weighted and domain.weights is not None:
        w = np.asarray(domain.weights, dtype=np.float64)
        p = w / w.sum()
    idx = rng.choice(len(domain), size=n, p=p)
    votes = [domain.votes[i] for i in idx]
    base = domain.certificate()
    sc_order = _chain_order(domain.descriptor.chain, votes) if domain.descriptor.chain else None
    cert = Certificate(sp_axis=base.sp_axis, gs_tree=base.gs_tree, sc_order=sc_order,
                       sp_tree=base.sp_tree, cycle=base.cycle, embedding=base.embedding)
    return Election.from_rankings(votes, m=domain.m, certificate=cert, validate=False)


def sc_gaps_domain(m: int, t: int, seed=None, partial_last_block: bool = False) -> Domain:
    """Weighted sub-chain of a random maximal single-crossing chain.

    Takes blocks of 1, 2, 4, ... consecutive chain votes separated by gaps of t
    votes; block b gets weight 2^(1-b). A block that does not fit is dropped, or
    truncated when ``partial_last_block`` is set.
    """
    if t < 0:
        raise InputError("t must be >= 0")
    chain = generate_sc_chain(as_rng(seed), m).descriptor.chain
    taken: List[Ranking] = []
    weights = {}
    start, block = 0, 1
    while start < len(chain):
        size = 2 ** (block - 1)
        if start + size > len(chain) and not partial_last_block:
            break
        for v in chain[start:start + size]:
            taken.append(v)
            weights[v] = 2.0 ** (1 - block)
        start += size + t
        block += 1
    logger.info("Built SC-gaps domain", extra={"m": m, "t": t, "blocks": block - 1, "votes": len(taken)})
    desc = DomainDescriptor(kind="SC", chain=tuple(taken))
    return _make_domain(m, taken, desc, weights=weights)


def sample_election(spec: CultureSpec, m: int, n: int,
                    context: Optional[Union[Domain, Embedding, Ranking]] = None,
                    seed=None) -> Election:
    """Draw n votes over m candidates from the culture described by ``spec``.

    ``context`` is the domain for IC-over-domain (and optionally SC-gaps), the
    candidate embedding for rBox (drawn from [-1, 1]^d when absent) or an axis
    for Walsh/Conitzer/CVC-random (identity when absent).
    """
    if m < 1 or n < 1:
        raise InputError("need m >= 1 and n >= 1")
    rng = as_rng(seed if seed is not None else spec.seed)
    kind = spec.kind
    axis = tuple(context) if isinstance(context, tuple) else identity(m)

    if kind == "IC-full":
        votes = _as_votes(np.argsort(rng.random((n, m)), axis=1))
        return Election.from_rankings(votes, m=m, validate=False)
    if kind == "IC-over-domain":
        if not isinstance(context, Domain):
            raise InputError("IC-over-domain needs a domain as context")
        return _from_domain(rng, context, n, spec.weighted)
    if kind == "SC-gaps":
        domain = context if isinstance(context, Domain) else sc_gaps_domain(m, spec.t, rng)
        return _from_domain(rng, domain, n, spec.weighted)
    if kind == "Walsh":
        return Election.from_rankings(_walsh(rng, axis, n), m=m, validate=False,
                                      certificate=Certificate(sp_axis=axis))
    if kind == "Conitzer":
        return Election.from_rankings(_conitzer(rng, axis, n), m=m, validate=False,
                                      certificate=Certificate(sp_axis=axis))
    if kind == "CVC-random":
        flips = rng.integers(2, size=(n, max(m - 1, 0))).astype(bool)
        votes = [cvc_vote(axis, row) for row in flips]
        return Election.from_rankings(votes, m=m, validate=False,
                                      certificate=Certificate(gs_tree=caterpillar_tree(axis)))
    if kind == "rBox":
        emb = context if isinstance(context, Embedding) else random_embedding(rng, m, spec.d)
        if emb.m != m or emb.d != spec.d:
            raise InputError(f"embedding is {emb.m} points in R^{emb.d}, expected {m} in R^{spec.d}")
        votes, xs = _r_box(rng, emb, spec.r, n)
        cert = Certificate(embedding=emb)
        if emb.d == 1:
            cand_axis = tuple(int(c) for c in np.argsort(emb.array[:, 0]))
            cert = Certificate(embedding=emb, sp_axis=cand_axis,
                               sc_order=tuple(int(i) for i in np.argsort(xs[:, 0], kind="stable")))
        return Election.from_rankings(votes, m=m, certificate=cert, validate=False)
    raise InputError(f"unknown culture {kind!r}")  # pragma: no cover
