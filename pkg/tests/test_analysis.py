import math
from math import comb

import numpy as np
import pytest

import config
from analysis import (
    BoxCount,
    DiversityVector,
    Dominance,
    ExperimentGrid,
    GridCell,
    aggregate_vectors,
    cell_election,
    cell_vectors,
    count_distinct_sampled,
    distance_histogram,
    diversity_vector,
    dominance,
    domain_ranking,
    evaluate_heuristic,
    extension_ratios,
    heuristic_ratio,
    polarization,
    sc_gaps_diversity,
)
from core import Election
from domains import domain_size_formula, full_domain, generate_sc_chain, named_domain
from errors import BudgetError, InputError
from solvers import SolverConfig, solve, solve_exact

EXACT = SolverConfig(method="exact")


def vec(*values):
    return DiversityVector(m=len(values), values=tuple(values))


def test_identical_votes_have_no_diversity():
    e = Election.from_rankings([(0, 1, 2)] * 5)
    assert diversity_vector(e, EXACT).values == (0.0, 0.0, 0.0)


def test_full_domain_kappa_one():
    v = diversity_vector(full_domain(4).as_election(), EXACT, max_k=1)
    assert v.values == (3.0,)
    assert v[1] == 3.0 and v.method == "exact" and v.restarts is None


def test_single_crossing_chain():
    e = generate_sc_chain(np.random.default_rng(0), 8).as_election()
    v = diversity_vector(e, SolverConfig(method="sc"), max_k=2)
    assert v[1] == pytest.approx(210 / 29)
    assert v[2] < v[1]


def test_two_camps_polarization(two_camps):
    v = diversity_vector(two_camps, EXACT)
    assert v.values == (14.0,) + (0.0,) * 7
    assert polarization(v) == 14.0
    with pytest.raises(InputError):
        polarization(vec(1.0))


def test_vector_is_nonincreasing():
    e = named_domain("SP", 5).as_election()
    v = diversity_vector(e, SolverConfig(seed=1, restarts=2, extra_ic=8))
    assert list(v.values) == sorted(v.values, reverse=True)
    assert v.restarts == 2 and v.seed == 1


def test_dominance():
    assert dominance(vec(3.0, 1.0), vec(2.0, 1.0)) == Dominance.A_DOMINATES
    assert dominance(vec(2.0, 1.0), vec(3.0, 1.0)) == Dominance.B_DOMINATES
    assert dominance(vec(3.0, 0.0), vec(2.0, 1.0)) == Dominance.INCOMPARABLE
    assert dominance(vec(2.0, 1.0), vec(2.0, 1.0 + 1e-12)) == Dominance.EQUAL
    with pytest.raises(InputError):
        dominance(vec(1.0), vec(1.0, 0.0))


def test_domain_ranking_groups_incomparable_names():
    ranking = domain_ranking({"a": vec(3.0, 2.0), "b": vec(2.0, 1.0), "c": vec(2.0, 1.0)})
    assert ranking.classes == [["a"], ["b", "c"]]
    assert ranking.dominates == [("a", "b"), ("a", "c")]
    crossing = domain_ranking({"x": vec(3.0, 0.0), "y": vec(2.0, 1.0)})
    assert crossing.classes == [["x", "y"]]


def test_distance_histogram(two_camps):
    hist = distance_histogram(two_camps, solve_exact(two_camps, 2))
    assert len(hist) == 29
    assert hist[0] == 8 and hist.sum() == 8


def test_group_separable_histogram_reaches_the_reverse():
    dom = named_domain("GS/cat", 6)
    e = dom.as_election()
    result = solve(e, 1, SolverConfig(seed=0, restarts=2, extra_ic=0), dom)
    hist = distance_histogram(e, result)
    assert hist[0] == 1
    assert hist[15] >= 1
    assert hist.sum() == len(dom)


def test_aggregate_vectors():
    mean, std = aggregate_vectors([vec(1.0, 0.0), vec(3.0, 0.0)])
    assert mean == (2.0, 0.0)
    assert std[0] == pytest.approx(math.sqrt(2))
    assert aggregate_vectors([vec(1.0)]) == ((1.0,), (0.0,))
    with pytest.raises(InputError):
        aggregate_vectors([])


def test_heuristic_ratio():
    assert heuristic_ratio(0, 0) == 1.0
    assert heuristic_ratio(1, 0) == math.inf
    assert heuristic_ratio(3, 2) == 1.5


def test_evaluate_heuristic():
    grid = ExperimentGrid(
        cells=[GridCell(source="domain", name="SC", m=6, k_values=[1], reps=2),
               GridCell(source="culture", name="IC", m=5, n=20, k_values=[1], reps=2)],
        seed=1, restarts=3, extra_ic=32,
    )
    rows = evaluate_heuristic(grid)
    assert [(r.label, r.k) for r in rows] == [("domain:SC:m=6", 1), ("culture:IC:m=5", 1)]
    assert rows[0].mean == pytest.approx(1.0)
    assert rows[1].mean >= 1.0 - 1e-9
    assert all(r.reps == 2 for r in rows)


def test_cell_vectors_are_deterministic():
    cell = GridCell(source="culture", name="Walsh", m=5, n=30, k_values=[1, 2], reps=2)
    solver = SolverConfig(extra_ic=16, restarts=2)
    a = cell_vectors(cell, 3, solver)
    assert a == cell_vectors(cell, 3, solver)
    assert len(a) == 2 and all(len(v.values) == 2 for v in a)


def test_cell_election_sources():
    rng = np.random.default_rng(0)
    e, dom = cell_election(GridCell(source="culture", name="CVC", m=5, n=10), rng)
    assert len(e.votes) == 10 and len(dom) == 16
    e, dom = cell_election(GridCell(source="culture", name="1D-Box", m=4, n=10), rng)
    assert dom.is_condorcet
    with pytest.raises(InputError):
        cell_election(GridCell(source="culture", name="Mallows", m=4), rng)


def test_box_counts_are_bounded():
    counts = count_distinct_sampled(4, 2, [0.5, 2.0], reps=2, seed=0)
    assert [c.r for c in counts] == [0.5, 2.0]
    for c in counts:
        assert isinstance(c, BoxCount)
        assert c.distinct_sampled <= c.max_in_box <= c.domain_size == 18


def test_extension_ratios():
    ratios = extension_ratios(["SPOC", "SP/DF"], [6], seed=0)
    assert ratios == {("SPOC", 6): 1.0, ("SP/DF", 6): 2.0}


def test_sc_gaps_diversity():
    out = sc_gaps_diversity(6, 1, 40, reps=2, seed=0)
    assert set(out) == {"uniform", "weighted"}
    for mean, std in out.values():
        assert len(mean) == len(std) == 6
        assert list(mean) == sorted(mean, reverse=True)


def test_evaluate_heuristic_skips_cells_over_budget(monkeypatch):
    monkeypatch.setattr(config, "MAX_SUBSETS", 10)
    monkeypatch.setattr(config, "MAX_VOTERS", 3)
    grid = ExperimentGrid(cells=[GridCell(source="domain", name="SP", m=5, k_values=[1, 2], reps=2)],
                          seed=0, restarts=2, extra_ic=8)
    with pytest.raises(BudgetError, match="cell domain:SP:m=5 k=2"):
        evaluate_heuristic(grid)
    one, two = evaluate_heuristic(grid, skip_over_budget=True)
    assert (one.k, one.mean, one.reps, one.skipped, one.budget) == (1, 1.0, 2, 0, None)
    assert (two.k, two.mean, two.std, two.reps, two.skipped) == (2, None, None, 0, 2)
    assert two.budget == "exact k-Kemeny distinct votes"


def test_box_cells_in_any_dimension():
    assert GridCell(source="culture", name="2D-Box", m=5).label == "culture:2D-Box:m=5"
    assert GridCell(source="culture", name="2D-Box", m=5, r=2.5).label == "culture:2D-Box:m=5:r=2.5"
    assert GridCell(source="culture", name="IC", m=5, r=2.5).label == "culture:IC:m=5"
    e, dom = cell_election(GridCell(source="culture", name="5D-Box", m=4, n=12), np.random.default_rng(3))
    assert e.certificate.embedding.d == 5
    assert dom.descriptor.lower_bound
    assert 0 < len(dom) <= 24


def test_box_counts_in_three_dimensions_are_bounded():
    for c in count_distinct_sampled(4, 3, [0.5, 1.0], reps=2, seed=1, batches=5):
        assert c.distinct_sampled <= c.max_in_box <= c.domain_size <= 24


def test_unit_box_samples_the_most_distinct_votes():
    counts = {c.r: c for c in count_distinct_sampled(8, 2, [0.5, 1.0, 2.0, 4.0], reps=10, seed=0)}
    assert max(counts.values(), key=lambda c: c.distinct_sampled).r == 1.0
    in_box = [counts[r].max_in_box for r in (0.5, 1.0, 2.0, 4.0)]
    assert in_box == sorted(in_box)
    assert all(c.domain_size == domain_size_formula("2D", 8) for c in counts.values())


def test_unit_box_misses_votes_as_candidates_grow():
    sizes = []
    for m in (4, 6, 8):
        (c,) = count_distinct_sampled(m, 2, [1.0], reps=3, seed=m)
        assert c.distinct_sampled <= c.max_in_box <= c.domain_size
        sizes.append(c.domain_size)
    assert sizes == sorted(sizes)
    assert c.distinct_sampled < c.domain_size


@pytest.mark.parametrize("name", ["GS/cat", "SPOC", "GS/bal"])
def test_reverse_closed_domains_reach_the_far_tail(name):
    dom = named_domain(name, 8)
    e = dom.as_election()
    result = solve_exact(e, 1)
    assert result.centers[0] in set(dom.votes)
    hist = distance_histogram(e, result)
    assert hist[28] > 0


def test_deterministic_domain_chain():
    rng = np.random.default_rng(0)
    vectors = {}
    for name in ("GS/cat", "SP/DF", "GS/bal", "SP", "SC", "1D"):
        dom = named_domain(name, 8, rng)
        method = "sc" if name in ("SC", "1D") else "heuristic"
        vectors[name] = diversity_vector(dom.as_election(), SolverConfig(method=method, restarts=10, seed=0), dom)
    tol = 0.05
    assert vectors["SC"].values == vectors["1D"].values
    for other in ("SP/DF", "GS/bal", "SP", "SC", "1D"):
        assert dominance(vectors["GS/cat"], vectors[other], tol) == Dominance.A_DOMINATES
    for upper in ("SP/DF", "GS/bal"):
        assert dominance(vectors[upper], vectors["SP"], tol) == Dominance.A_DOMINATES
    for lower in ("SC", "1D"):
        assert dominance(vectors["SP"], vectors[lower], tol) == Dominance.A_DOMINATES
    ranking = domain_ranking(vectors, tol=tol)
    assert ranking.classes[0] == ["GS/cat"]
    assert set(ranking.classes[-1]) == {"SC", "1D"}


def test_extension_ratio_trends():
    exact = extension_ratios(["SP", "1D"], list(range(4, 11)), seed=0)
    for m in range(4, 11):
        assert exact[("SP", m)] == pytest.approx(2 - 2 ** (2 - m))
        assert exact[("1D", m)] == pytest.approx(2 - 2 / (comb(m, 2) + 1))
    plane = extension_ratios(["2D"], [4, 8], reps=3, seed=0)
    assert 1.0 < plane[("2D", 4)] < plane[("2D", 8)] <= 2.0
    space = extension_ratios(["3D"], [5, 6], seed=0)
    assert all(1.0 < ratio <= 2.0 for ratio in space.values())
