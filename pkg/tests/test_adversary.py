from itertools import combinations

import numpy as np
import pytest

from lemoncdo.adversary import (
    _greedy,
    empirical_errors,
    profile_is_monotone,
    search_worst,
    theoretical_bounds,
    valuediff_bound,
)
from lemoncdo.cdo_model import (
    AssetModel,
    DiscreteDist,
    TrancheSpec,
    ValueProfile,
    tv_vector,
    value_profile,
)
from lemoncdo.exceptions import GuardExceeded
from lemoncdo.expander import BipartiteGraph, NeighborCounts, biregularize, neighbor_counts

from conftest import random_model

T4 = TrancheSpec((0, 1, 2, 3, 4))


@pytest.fixture(scope="module")
def toy_profile():
    M = AssetModel.single(DiscreteDist.bernoulli(0.5), DiscreteDist.point(0.0))
    return value_profile(M, T4, 4)


def brute(G, profile, ell):
    """Every placement's tranche vector, evaluated one at a time."""
    return {L: tv_vector(G, profile, L).totals for L in combinations(range(G.n), ell)}


def random_biregular(rng, n, d, r):
    m = n * d // r
    m0 = max(d, m * (d - 1) // d)
    G0 = BipartiteGraph(n, m0, tuple((int(rng.integers(m0)),) for _ in range(n)))
    return biregularize(G0, m, d, r)


# -- search_worst --------------------------------------------------------

def test_complete_bipartite_gap_zero(k22, k22_profile):
    res = search_worst(k22, k22_profile, TrancheSpec((0, 1, 2)), 1)
    assert res.gap_per_tranche.tolist() == [0.0, 0.0]
    assert res.gap_l1 == 0.0
    assert res.tv_min.tolist() == [1.0, 0.0]
    assert res.L_min == [(0,), (0,)]


def test_toy_ell2_matches_brute_force(toy_graph, toy_profile):
    res = search_worst(toy_graph, toy_profile, T4, 2)
    tv = brute(toy_graph, toy_profile, 2)
    V = np.asarray(list(tv.values()))
    np.testing.assert_array_equal(res.tv_min, V.min(axis=0))
    np.testing.assert_array_equal(res.tv_max, V.max(axis=0))
    assert res.placements_examined == 120 and res.exhaustive_flag
    assert np.all(res.gap_per_tranche <= 2.0)
    assert res.gap_per_tranche.max() == pytest.approx(0.0625)
    assert res.gap_l1 == pytest.approx(0.25)


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_exact_l1_matches_all_pairs(toy_graph, toy_profile, ell):
    res = search_worst(toy_graph, toy_profile, T4, ell)
    V = np.asarray(list(brute(toy_graph, toy_profile, ell).values()))
    want = np.abs(V[:, None, :] - V[None, :, :]).sum(axis=2).max()
    assert res.l1_exact
    assert res.gap_l1 == pytest.approx(want, abs=1e-12)
    a, b = res.l1_pair
    got = np.abs(tv_vector(toy_graph, toy_profile, a).totals
                 - tv_vector(toy_graph, toy_profile, b).totals).sum()
    assert got == pytest.approx(res.gap_l1, abs=1e-12)


def test_lexicographic_tie_break(toy_graph, toy_profile):
    res = search_worst(toy_graph, toy_profile, T4, 2)
    tv = brute(toy_graph, toy_profile, 2)
    for i in range(T4.s):
        lows = [L for L, v in tv.items() if v[i] == res.tv_min[i]]
        assert res.L_min[i] == min(lows)


def test_eps_normalization(toy_graph, toy_profile):
    res = search_worst(toy_graph, toy_profile, T4, 2)
    np.testing.assert_allclose(res.eps_per_tranche, res.gap_per_tranche / 16)
    assert res.eps_l1 == pytest.approx(res.gap_l1 / 64)


def test_threads_and_chunks_do_not_change_result(toy_graph, toy_profile):
    base = search_worst(toy_graph, toy_profile, T4, 3).to_dict()
    for threads, chunk in ((4, 7), (2, 1), (8, 4096)):
        assert search_worst(toy_graph, toy_profile, T4, 3, threads=threads, chunk=chunk).to_dict() == base


def test_heuristics_never_exceed_exhaustive(toy_graph, toy_profile):
    for ell in (1, 2, 3, 4):
        full = search_worst(toy_graph, toy_profile, T4, ell)
        for mode in ("greedy", "random"):
            res = search_worst(toy_graph, toy_profile, T4, ell, mode=mode, budget=50, seed=ell)
            assert not res.exhaustive_flag and not res.l1_exact
            assert np.all(res.gap_per_tranche <= full.gap_per_tranche + 1e-12)
            assert res.gap_l1 <= full.gap_l1 + 1e-12


def test_greedy_placements(toy_graph, toy_profile):
    res = search_worst(toy_graph, toy_profile, T4, 2, mode="greedy")
    assert res.placements_examined == 2
    dense, spread = _greedy(toy_graph, 2, dense=True), _greedy(toy_graph, 2, dense=False)
    assert neighbor_counts(toy_graph, dense).t[2] == 1
    assert neighbor_counts(toy_graph, spread).t[2] == 0
    # ties go to the lowest index
    assert dense == (0, 4) and spread == (0, 1)


def test_random_mode_seeded(toy_graph, toy_profile):
    a = search_worst(toy_graph, toy_profile, T4, 3, mode="random", budget=40, seed=7)
    b = search_worst(toy_graph, toy_profile, T4, 3, mode="random", budget=40, seed=7)
    assert a.to_dict() == b.to_dict()


def test_budget_guard(toy_graph, toy_profile):
    with pytest.raises(GuardExceeded):
        search_worst(toy_graph, toy_profile, T4, 8, budget=1000)


@pytest.mark.parametrize("kwargs", [{"ell": 17}, {"ell": -1}, {"ell": 2, "mode": "bogus"}])
def test_bad_arguments(toy_graph, toy_profile, kwargs):
    with pytest.raises(ValueError):
        search_worst(toy_graph, toy_profile, T4, **kwargs)


def test_profile_r_mismatch(toy_graph, k22_profile):
    with pytest.raises(ValueError):
        search_worst(toy_graph, k22_profile, TrancheSpec((0, 1, 2)), 1)


def test_ell_zero_single_placement(toy_graph, toy_profile):
    res = search_worst(toy_graph, toy_profile, T4, 0)
    assert res.placements_examined == 1
    assert res.gap_l1 == 0 and not res.gap_per_tranche.any()


# -- bounds --------------------------------------------------------------

def test_bound_formulas_example():
    rep = theoretical_bounds(d=4, r=4, delta_exp=1, Delta=1, ell=2, mu=0.5, delta=0.5, m=16,
                             T=T4, dominated=True, k_max=2)
    assert (rep.trivial_tranche, rep.unique_tranche, rep.unique_l1) == (4.0, 2.0, 3.0)
    norm = rep.normalized()
    assert norm["trivial_tranche"].tolist() == [0.25] * 4
    assert norm["unique_tranche"].tolist() == [0.125] * 4
    assert norm["unique_l1"] == 3 / 64
    assert all(rep.applicability.values()) or not rep.applicability["valuediff_refined"]


def test_bounds_zero_lemons():
    rep = theoretical_bounds(4, 4, 1, 1, 0, 0.5, 0.5, 16, T4, True, 2)
    for key, val in rep.to_dict()["absolute"].items():
        assert val == 0.0, key


def test_general_bound_example():
    rep = theoretical_bounds(4, 4, 1, 1, 2, 0.5, 0.1, 16, T4, dominated=False, k_max=2)
    assert rep.general_tranche == 2.0
    assert rep.normalized()["general_tranche"].tolist() == [0.125] * 4
    app = rep.applicability
    assert app["general"] and not app["trivial"] and not app["unique"] and not app["explicit"]


def test_applicability_flags():
    rep = theoretical_bounds(4, 4, 1, 1, 3, 0.5, 0.5, 16, T4, True, k_max=2)
    assert rep.applicability["trivial"] and not rep.applicability["unique"]
    rep = theoretical_bounds(4, 4, 1, 1, 1, 0.5, 0.5, 16, T4, True, k_max=2, vacuous=True)
    assert not rep.applicability["unique"] and not rep.applicability["explicit"]


def test_normalized_capped_at_one():
    rep = theoretical_bounds(4, 4, 3, 3, 2, 0.5, 0.5, 2, T4, True, 2)
    for val in rep.normalized().values():
        assert np.all(np.asarray(val) <= 1.0)


def test_valuediff_toy_example():
    profile = ValueProfile(2, np.array([[0.0], [0.5], [0.75]]))
    counts = NeighborCounts((0, 0, 1))
    assert valuediff_bound(counts, profile, 1, 2, 0) == pytest.approx(1.25)


def test_valuediff_isolated_lemons(toy_profile):
    col = toy_profile.values[:, 1]
    counts = NeighborCounts((16 - 8, 8, 0, 0, 0))
    assert valuediff_bound(counts, toy_profile, 1, 2, 1) == pytest.approx(2 * (col[4] - col[3]))
    assert valuediff_bound(counts, toy_profile, 1, 0, 1) == 0.0


def test_bound_chain_on_toy(toy_graph, toy_profile):
    for ell in (1, 2):
        res = search_worst(toy_graph, toy_profile, T4, ell)
        for i in range(T4.s):
            vb = valuediff_bound(NeighborCounts(res.counts_min[i]), toy_profile, 1, ell, i)
            assert res.gap_per_tranche[i] <= vb + 1e-12
            assert vb <= 2 * 1 * ell * 0.5 + 1e-12
        assert res.gap_l1 <= 1.5 * ell + 1e-12


def test_trivial_bound_random_graphs():
    rng = np.random.default_rng(21)
    for n, d, r in ((4, 2, 2), (8, 2, 2), (8, 2, 4), (9, 2, 3), (12, 3, 4), (10, 3, 3)):
        G = random_biregular(rng, n, d, r)
        assert G.is_biregular(d, r)
        M = random_model(rng, dominated=True)
        T = TrancheSpec(tuple(range(r + 1)))
        P = value_profile(M, T, r)
        for ell in (1, 2):
            res = search_worst(G, P, T, ell)
            assert np.all(res.gap_per_tranche <= d * ell * M.delta + 1e-9)


def test_profile_is_monotone(toy_profile):
    assert profile_is_monotone(toy_profile)
    M = AssetModel.single(DiscreteDist.point(0.5), DiscreteDist.bernoulli(0.4))
    assert not profile_is_monotone(value_profile(M, TrancheSpec((0, 1, 2)), 2))


# -- empirical errors ----------------------------------------------------

def test_empirical_errors_example():
    eps, l1 = empirical_errors((1.5, 0.5), (1.0, 0.0), TrancheSpec((0, 1, 2)), 2, 2)
    assert eps.tolist() == [0.25, 0.25] and l1 == 0.25


def test_empirical_errors_equal_and_shifted():
    T = TrancheSpec((0, 1, 2))
    eps, l1 = empirical_errors((0.3, 0.7), (0.3, 0.7), T, 4, 2)
    assert not eps.any() and l1 == 0
    a, b = np.array([1.5, 0.5]), np.array([1.0, 0.25])
    shift = np.array([0.125, -0.25])
    e1, l1a = empirical_errors(a, b, T, 2, 2)
    e2, l1b = empirical_errors(a + shift, b + shift, T, 2, 2)
    np.testing.assert_allclose(e1, e2)
    assert l1a == pytest.approx(l1b)


def test_empirical_errors_dimension_mismatch():
    with pytest.raises(ValueError):
        empirical_errors((1.0,), (1.0, 0.0), TrancheSpec((0, 1, 2)), 2, 2)
