from itertools import combinations_with_replacement, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domains import is_gs_consistent, is_single_peaked
from errors import BudgetError, InputError
from reductions import (
    H2SInstance,
    aligned_vote,
    gscat_vote,
    hamming_score,
    minimal_dummies,
    pad_power_of_two,
    reduce_gscat,
    reduce_sp_gsbal,
    solve_h2s_bruteforce,
)
from solvers import solve_partition_dp

h2s_strings = st.integers(min_value=1, max_value=4).flatmap(
    lambda width: st.lists(st.text(alphabet="01", min_size=width, max_size=width), min_size=1, max_size=6)
)


def test_hamming_score():
    assert hamming_score(["00", "11"]) == 2
    assert hamming_score(["01", "01", "11"]) == 1
    with pytest.raises(InputError):
        hamming_score([])


def test_bruteforce_h2s():
    sol = solve_h2s_bruteforce(H2SInstance(strings=("01", "10", "11"), t=1))
    assert sol.feasible and sol.score == 1
    assert 0 in sol.groups[0]
    assert not solve_h2s_bruteforce(H2SInstance(strings=("01", "10", "11"), t=0)).feasible
    assert solve_h2s_bruteforce(H2SInstance(strings=("01", "10"), t=0)).feasible


def test_instance_validation():
    with pytest.raises(InputError):
        H2SInstance(strings=(), t=1)
    with pytest.raises(InputError):
        H2SInstance(strings=("01", "1"), t=1)
    with pytest.raises(InputError):
        H2SInstance(strings=("02",), t=1)
    with pytest.raises(InputError):
        H2SInstance(strings=("01",), t=-1)
    with pytest.raises(BudgetError):
        solve_h2s_bruteforce(H2SInstance(strings=("0", "1", "0"), t=0), max_strings=2)


def test_padding_keeps_scores():
    assert pad_power_of_two(["101"]) == ("1010",)
    assert pad_power_of_two(["1", "0"]) == ("1", "0")
    assert hamming_score(pad_power_of_two(["101", "011"])) == hamming_score(["101", "011"])


def test_aligned_vote():
    assert aligned_vote("10") == (0, 1, 3, 2)


@settings(max_examples=150, deadline=None)
@given(h2s_strings)
def test_aligned_reduction_preserves_the_optimum(strings):
    inst = H2SInstance(strings=tuple(strings), t=0)
    reduced = reduce_sp_gsbal(inst)
    assert reduced.k == 2
    for v in reduced.election.rankings:
        assert is_single_peaked(v, reduced.axis)
        assert is_gs_consistent(v, reduced.tree)
    assert solve_partition_dp(reduced.election, 2).score == solve_h2s_bruteforce(inst).score


def test_minimal_dummies():
    assert minimal_dummies(3, 2) == 13


def test_gscat_votes_follow_the_caterpillar():
    vote = gscat_vote("10", 2)
    assert vote == (0, 3, 4, 5, 2, 1)
    reduced = reduce_gscat(H2SInstance(strings=("01", "10", "11"), t=1), M_override=13)
    assert reduced.election.m == 17
    assert all(is_gs_consistent(v, reduced.tree) for v in reduced.election.rankings)


@pytest.mark.parametrize("strings,t", [
    (("01", "10", "11"), 1),
    (("01", "10", "11"), 0),
    (("00", "11", "01"), 1),
    (("0", "1", "1"), 0),
])
def test_gscat_reduction_decides_h2s(strings, t):
    inst = H2SInstance(strings=strings, t=t)
    reduced = reduce_gscat(inst, M_override=minimal_dummies(inst.n, inst.m))
    score = solve_partition_dp(reduced.election, 2).score
    assert (score <= reduced.q) == solve_h2s_bruteforce(inst).feasible


def test_gscat_dummy_guards():
    inst = H2SInstance(strings=("01", "10", "11"), t=1)
    with pytest.raises(InputError):
        reduce_gscat(inst, M_override=12)
    with pytest.raises(BudgetError):
        reduce_gscat(inst)
    with pytest.raises(BudgetError):
        reduce_gscat(inst, M_override=13, max_candidates=10)


def small_h2s_instances(max_width=3, max_strings=4):
    for width in range(1, max_width + 1):
        alphabet = ["".join(bits) for bits in product("01", repeat=width)]
        for n in range(1, max_strings + 1):
            yield from combinations_with_replacement(alphabet, n)


def test_gscat_reduction_decides_every_small_instance():
    checked = 0
    for strings in small_h2s_instances():
        opt = solve_h2s_bruteforce(H2SInstance(strings=strings, t=0)).score
        for t in {opt, max(opt - 1, 0)}:
            inst = H2SInstance(strings=strings, t=t)
            reduced = reduce_gscat(inst, M_override=minimal_dummies(inst.n, inst.m))
            score = solve_partition_dp(reduced.election, 2).score
            assert (score <= reduced.q) == (opt <= t), (strings, t)
            checked += 1
    assert checked > 800
