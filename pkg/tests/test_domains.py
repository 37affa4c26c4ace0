from itertools import permutations
from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core import reverse, swap_distance
from domains import (
    Embedding,
    balanced_tree,
    caterpillar_tree,
    check_general_position,
    cvc_decisions,
    cvc_enumerate,
    cvc_vote,
    cycle_graph,
    domain_size_formula,
    double_fork_tree,
    enumerate_euclidean,
    enumerate_gs,
    enumerate_sp,
    enumerate_sp_tree,
    enumerate_spoc,
    euclidean_box_cells,
    euclidean_box_rankings,
    full_domain,
    generate_sc_chain,
    identity,
    is_gs_consistent,
    is_single_crossing,
    is_single_peaked,
    is_single_peaked_on_graph,
    named_domain,
    path_graph,
    random_embedding,
    rank_points,
    reverse_extension,
    stirling_first,
    validate_gs_tree,
    validate_tree_graph,
)
from errors import BudgetError, DegenerateEmbeddingError, InputError


@pytest.mark.parametrize("m", range(2, 10))
def test_sp_size(m):
    dom = enumerate_sp(identity(m))
    assert len(dom) == 2 ** (m - 1) == domain_size_formula("SP", m)
    assert all(is_single_peaked(v, identity(m)) for v in dom.votes)


@pytest.mark.parametrize("m", range(3, 9))
def test_spoc_size(m):
    dom = enumerate_spoc(identity(m))
    assert len(dom) == m * 2 ** (m - 2) == domain_size_formula("SPOC", m)


@pytest.mark.parametrize("m,size", [(5, 48), (6, 112), (8, 496)])
def test_sp_double_fork_size(m, size):
    dom = enumerate_sp_tree(double_fork_tree(m))
    assert len(dom) == size == domain_size_formula("SP/DF", m)
    graph = double_fork_tree(m)
    assert all(is_single_peaked_on_graph(v, graph) for v in dom.votes)


@pytest.mark.parametrize("m", range(2, 9))
def test_gs_sizes(m):
    bal = enumerate_gs(balanced_tree(identity(m)))
    cat = enumerate_gs(caterpillar_tree(identity(m)))
    assert len(bal) == len(cat) == 2 ** (m - 1)
    assert set(cat.votes) == set(cvc_enumerate(identity(m)).votes)
    tree = balanced_tree(identity(m))
    assert all(is_gs_consistent(v, tree) for v in bal.votes)


def test_gs_membership_rejects_split_groups():
    tree = ((0, 1), (2, 3))
    assert is_gs_consistent((1, 0, 3, 2), tree)
    assert not is_gs_consistent((0, 2, 1, 3), tree)


def test_full_domain_and_budget():
    assert len(full_domain(4)) == 24
    with pytest.raises(BudgetError):
        full_domain(11)


def test_sc_chain():
    dom = generate_sc_chain(np.random.default_rng(0), 8)
    chain = dom.descriptor.chain
    assert len(dom) == len(chain) == 29
    assert chain[0] == identity(8) and chain[-1] == reverse(identity(8))
    assert is_single_crossing(list(chain)) is None
    cert = dom.certificate()
    assert [dom.votes[i] for i in cert.sc_order] == list(chain)


def test_single_crossing_violation_reports_pair():
    assert is_single_crossing([(0, 1, 2), (1, 0, 2), (0, 1, 2)]) == (0, 1)
    assert is_single_crossing([(0, 1, 2), (1, 0, 2)]) is None


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=2, max_value=8).flatmap(
    lambda m: st.lists(st.booleans(), min_size=m - 1, max_size=m - 1)))
def test_cvc_round_trip(decisions):
    axis = identity(len(decisions) + 1)
    vote = cvc_vote(axis, decisions)
    assert sorted(vote) == list(axis)
    assert cvc_decisions(axis, vote) == tuple(decisions)
    assert is_gs_consistent(vote, caterpillar_tree(axis))


def test_cvc_decisions_rejects_non_caterpillar_vote():
    assert cvc_decisions((0, 1, 2, 3), (1, 0, 2, 3)) is None
    with pytest.raises(InputError):
        cvc_vote((0, 1, 2), [True])


def test_tree_and_graph_validation():
    assert validate_gs_tree(((1, 0), 2)) == 3
    with pytest.raises(InputError):
        validate_gs_tree(((0, 0), 1))
    with pytest.raises(InputError):
        validate_gs_tree(((0,), 1))
    with pytest.raises(InputError):
        double_fork_tree(4)
    with pytest.raises(InputError):
        cycle_graph((0, 1))
    with pytest.raises(InputError):
        validate_tree_graph(((1,), (0,), ()))
    assert validate_tree_graph(path_graph((2, 0, 1))) == ((1, 2), (0,), (0,))


def test_euclidean_1d_is_single_crossing():
    dom = named_domain("1D", 8, 3)
    assert len(dom) == comb(8, 2) + 1
    assert dom.is_condorcet
    assert dom.certificate().sc_order is not None
    assert is_single_crossing(list(dom.descriptor.chain)) is None


@pytest.mark.parametrize("m,size", [(3, 6), (4, 18), (8, 351)])
def test_euclidean_2d_size(m, size):
    assert domain_size_formula("2D", m) == size
    dom = named_domain("2D", m, 11)
    assert len(dom) == size
    assert not dom.descriptor.lower_bound


def test_euclidean_3d_is_a_lower_bound():
    dom = named_domain("3D", 4, 2, batches=5, batch_size=2000)
    assert dom.descriptor.lower_bound
    assert 0 < len(dom) <= factorial(4)


def test_embedding_ranks_by_distance():
    emb = Embedding.from_array([[0.0], [1.0], [3.0]])
    assert emb.m == 3 and emb.d == 1
    assert emb.rank([0.9]) == (1, 0, 2)
    assert euclidean_box_cells(emb, 1.0) == 2
    assert euclidean_box_cells(emb, 10.0) == 4


def test_box_cells_grow_with_radius():
    emb = named_domain("2D", 5, 4).descriptor.embedding
    counts = [euclidean_box_cells(emb, r) for r in (0.25, 1.0, 1000.0)]
    assert counts == sorted(counts)
    assert counts[-1] == domain_size_formula("2D", 5)


def test_coincident_points_are_degenerate():
    with pytest.raises(DegenerateEmbeddingError):
        check_general_position([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]])


def test_stirling_numbers():
    assert stirling_first(4, 2) == 11
    assert stirling_first(5, 3) == 35
    assert stirling_first(3, 5) == 0
    assert sum(stirling_first(6, k) for k in range(7)) == factorial(6)


def test_reverse_extension_ratios():
    assert reverse_extension(enumerate_spoc(identity(6)))[1] == 1.0
    assert reverse_extension(enumerate_gs(caterpillar_tree(identity(6))))[1] == 1.0
    assert reverse_extension(enumerate_gs(balanced_tree(identity(6))))[1] == 1.0
    assert reverse_extension(enumerate_sp_tree(double_fork_tree(6)))[1] == 2.0
    ext, ratio = reverse_extension(enumerate_sp(identity(6)))
    assert 1.0 < ratio <= 2.0
    assert all(reverse(v) in set(ext.votes) for v in ext.votes)


def test_named_domain_rejects_unknown_name():
    with pytest.raises(InputError):
        named_domain("Tree", 5)
    with pytest.raises(InputError):
        domain_size_formula("3D", 5)


def test_domain_size_formula_full():
    assert domain_size_formula("Full", 5) == 120
    assert len(set(permutations(range(5)))) == 120


def test_small_sp_and_gs_domains():
    assert set(enumerate_sp((0, 1, 2)).votes) == {(0, 1, 2), (1, 0, 2), (1, 2, 0), (2, 1, 0)}
    assert enumerate_sp((0,)).votes == ((0,),)
    assert set(enumerate_gs((0, 1)).votes) == {(0, 1), (1, 0)}
    assert set(enumerate_spoc(identity(3)).votes) == set(full_domain(3).votes)


def test_sp_on_trees():
    assert set(enumerate_sp_tree(path_graph((0, 1, 2, 3, 4))).votes) == set(enumerate_sp(identity(5)).votes)
    star = ((1, 2, 3), (0,), (0,), (0,))
    dom = enumerate_sp_tree(star)
    assert all(0 in v[:2] for v in dom.votes)
    assert len(dom) == len([v for v in permutations(range(4)) if 0 in v[:2]])


def test_sc_chain_distances_are_additive():
    chain = generate_sc_chain(np.random.default_rng(5), 6).descriptor.chain
    for i in range(len(chain)):
        for j in range(i, len(chain)):
            assert swap_distance(chain[i], chain[j]) == j - i


def _dense_box_rankings(emb, r, samples=200_000, seed=0):
    xs = np.random.default_rng(seed).uniform(-r, r, size=(samples, emb.d))
    return {tuple(int(c) for c in row) for row in np.unique(rank_points(emb.array, xs), axis=0)}


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_box_rankings_cover_dense_samples_in_2d(r):
    emb = random_embedding(np.random.default_rng(11), 5, 2)
    computed = euclidean_box_rankings(emb, r)
    seen = _dense_box_rankings(emb, r)
    assert seen <= set(computed)
    assert len(computed) <= domain_size_formula("2D", 5)
    for ranking, witness in computed.items():
        assert np.all(np.abs(witness) <= r)
        assert emb.rank(witness) == ranking


@pytest.mark.parametrize("r", [0.25, 0.75, 1.5])
def test_box_rankings_in_1d_match_midpoints(r):
    emb = random_embedding(np.random.default_rng(5), 6, 1)
    xs = emb.array[:, 0]
    mids = (xs[:, None] + xs[None, :])[np.triu_indices(6, 1)] / 2.0
    computed = euclidean_box_rankings(emb, r)
    assert len(computed) == int(np.sum(np.abs(mids) < r)) + 1
    assert _dense_box_rankings(emb, r, samples=50_000) <= set(computed)
