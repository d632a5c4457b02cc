from bisect import bisect_left, insort

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mopsoplus.core import NDSet, constrained_dominates, update_nd_set
from mopsoplus.localsearch import (
    LSConfig,
    VisitedTrie,
    ls_due,
    neighbors,
    repeated_local_search,
    trie_contains,
    trie_insert,
    unit_local_search,
)
from mopsoplus.problems import EvalCounter, KitaProblem, WDSProblem


class Recorder:
    """Problem wrapper remembering every evaluated decision."""

    def __init__(self, problem):
        self.problem = problem
        self.upper = problem.upper
        self.n_vars = problem.n_vars
        self.seen = []

    def evaluate_many(self, decisions):
        self.seen += [tuple(map(int, d)) for d in decisions]
        return self.problem.evaluate_many(decisions)


# -- schedule ---------------------------------------------------------------

def test_ls_due_examples():
    cfg = LSConfig(start=1000, switch=5000, period_early=100, period_late=1000)
    assert ls_due(1100, cfg)
    assert ls_due(1000, cfg) and ls_due(5000, cfg)
    assert not ls_due(999, cfg)
    assert ls_due(6000, cfg)
    assert not ls_due(5500, cfg)
    assert not ls_due(1050, cfg)
    assert not ls_due(1100, LSConfig(enabled=False))


def test_ls_config_validation():
    with pytest.raises(ValueError):
        LSConfig(start=10, switch=5)
    with pytest.raises(ValueError):
        LSConfig(period_early=0)
    with pytest.raises(ValueError):
        LSConfig(max_repeats=0)
    with pytest.raises(ValueError):
        LSConfig(max_explored=0)


# -- neighbourhood ------------------------------------------------------------

def test_neighbor_examples():
    assert set(neighbors([3, 1], [4, 4])) == {(2, 1), (4, 1), (3, 2)}
    assert len(neighbors([1] * 8, [14] * 8)) == 8
    assert len(neighbors([5] * 23, [14] * 23)) == 46


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=12))
def test_neighbors_differ_by_one_step(d):
    upper = [6] * len(d)
    nbs = neighbors(d, upper)
    assert len(set(nbs)) == len(nbs)
    for nb in nbs:
        diff = [abs(a - b) for a, b in zip(nb, d)]
        assert sorted(diff)[-1] == 1 and sum(diff) == 1
        assert all(1 <= v <= 6 for v in nb)
    interior = sum((v > 1) + (v < 6) for v in d)
    assert len(nbs) == interior


# -- trie -------------------------------------------------------------------

def test_trie_examples():
    t = VisitedTrie()
    assert trie_insert(t, [3, 1, 2])
    assert trie_contains(t, [3, 1, 2])
    assert not trie_contains(t, [3, 1, 3])
    assert not trie_insert(t, [3, 1, 2])
    assert len(t) == 1
    assert t.insert([3, 1, 3]) and len(t) == 2
    assert [3, 1, 2] in t and [3, 1, 3] in t and [3, 2, 2] not in t


def test_trie_rejects_mixed_lengths():
    t = VisitedTrie()
    t.insert([1, 2])
    with pytest.raises(ValueError):
        t.insert([1, 2, 3])
    assert [1, 2, 3] not in t


def test_trie_matches_sorted_list_reference():
    rng = np.random.default_rng(7)
    t = VisitedTrie()
    ref: list[tuple[int, ...]] = []

    def ref_contains(key):
        i = bisect_left(ref, key)
        return i < len(ref) and ref[i] == key

    for row in rng.integers(1, 5, size=(100_000, 7)):
        key = tuple(int(v) for v in row)
        if rng.random() < 0.5:
            assert t.insert(key) == (not ref_contains(key))
            if not ref_contains(key):
                insort(ref, key)
        else:
            assert (key in t) == ref_contains(key)
    assert len(t) == len(ref)


def test_trie_clear():
    t = VisitedTrie()
    t.insert([1, 2])
    t.clear()
    assert len(t) == 0 and [1, 2] not in t
    t.insert([1, 2, 3])


# -- unit local search ------------------------------------------------------

KITA_START = [(44, 34), (30, 7), (5, 18)]


def test_kita_three_points_become_four_better_ones():
    k = KitaProblem(101)
    start = NDSet(k.evaluate_many(np.array(KITA_START)))
    assert len(start) == 3
    new, rep = unit_local_search(start, k, VisitedTrie())
    assert len(new) == 4
    assert {s.decision for s in new} == {(44, 35), (43, 34), (30, 8), (5, 19)}
    for old in start:
        assert any(constrained_dominates(s, old) for s in new)
    assert rep == (4, 8, 12, 4)


def _interleaved_uls(ndset, problem):
    """Explores members one at a time, updating the set in between."""
    current = ndset.copy()
    for s in ndset.solutions():
        if s not in current:
            continue
        current.update(problem.evaluate_many(np.array(neighbors(s.decision, problem.upper))))
    return current


def test_all_neighbourhoods_collected_before_update():
    # a neighbour of A dominates B; B's own neighbourhood still contributes
    k = KitaProblem(101)
    a, b = k.evaluate_many(np.array([(31, 27), (29, 20)]))
    start = NDSet([a, b])
    nb_a = k.evaluate_many(np.array(neighbors(a.decision, k.upper)))
    assert any(constrained_dominates(x, b) for x in nb_a)
    new, _ = unit_local_search(start, k, VisitedTrie())
    assert (28, 20) in {s.decision for s in new}
    assert (28, 20) not in {s.decision for s in _interleaved_uls(start, k)}
    nb_all = k.evaluate_many(np.array(neighbors(a.decision, k.upper) + neighbors(b.decision, k.upper)))
    assert new.objective_set() == update_nd_set(start, nb_all).objective_set()


def test_locally_optimal_set_unchanged(tln4, tln4_front):
    members = tln4_front.solutions()
    every_nb = sorted({nb for s in members for nb in neighbors(s.decision, tln4.upper)})
    evaluated = tln4.evaluate_many(np.array(every_nb))
    # oracle: no neighbour enters the front
    assert update_nd_set(tln4_front, evaluated).objective_set() == tln4_front.objective_set()
    new, rep = unit_local_search(tln4_front, tln4, VisitedTrie())
    assert rep.n_accepted == 0
    assert new.objective_set() == tln4_front.objective_set()


def test_second_call_with_same_trie_evaluates_nothing(tln4):
    start = NDSet(tln4.evaluate_many(np.array([[2, 2, 2, 2, 2, 2, 2, 2]])))
    trie = VisitedTrie()
    unit_local_search(start, tln4, trie)
    _, rep = unit_local_search(start, tln4, trie)
    assert rep.n_evaluated == 0


def test_report_counts_add_up(tln4, rng):
    trie = VisitedTrie()
    nd = NDSet(tln4.evaluate_many(rng.integers(1, 5, size=(10, 8))))
    for _ in range(5):
        nd, rep = unit_local_search(nd, tln4, trie)
        assert rep.n_accepted + rep.n_rejected == rep.n_evaluated
        assert rep.pf_size_after == len(nd)


def test_output_never_worse_than_input(tln4, rng):
    for _ in range(20):
        nd = NDSet(tln4.evaluate_many(rng.integers(1, 5, size=(int(rng.integers(1, 15)), 8))))
        new, _ = unit_local_search(nd, tln4, VisitedTrie())
        for s in new:
            assert not any(constrained_dominates(o, s) for o in nd)
        for o in nd:
            assert o in new or any(constrained_dominates(s, o) for s in new)


def test_partial_uls_explores_only_cap_members(tln4, rng):
    nd = NDSet(tln4.evaluate_many(rng.integers(1, 5, size=(300, 8))))
    assert len(nd) > 3
    rec = Recorder(tln4)
    _, rep = unit_local_search(nd, rec, VisitedTrie(), cap=3, rng=np.random.default_rng(0))
    assert 0 < rep.n_evaluated <= 3 * 2 * 8
    with pytest.raises(ValueError):
        unit_local_search(nd, rec, VisitedTrie(), cap=2)


def test_partial_subset_is_uniform(tln4, rng):
    nd = NDSet(tln4.evaluate_many(rng.integers(1, 5, size=(300, 8))))
    members = nd.solutions()
    own = {s.decision for s in members}
    expected = {
        frozenset(set(neighbors(s.decision, tln4.upper)) - own): i for i, s in enumerate(members)
    }
    assert len(expected) == len(members)
    hits = np.zeros(len(members), dtype=int)
    n = 3000
    pick_rng = np.random.default_rng(5)
    for _ in range(n):
        rec = Recorder(tln4)
        unit_local_search(nd, rec, VisitedTrie(), cap=1, rng=pick_rng)
        hits[expected[frozenset(rec.seen)]] += 1
    p = 1 / len(members)
    sigma = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(hits - n * p) < 4 * sigma)


def test_empty_set_rejected(tln4):
    with pytest.raises(ValueError):
        unit_local_search(NDSet(), tln4, VisitedTrie())


# -- repeated local search ---------------------------------------------------

def test_single_repeat_gives_one_report(tln4):
    nd = NDSet(tln4.evaluate_many(np.array([[1] * 8])))
    _, reports = repeated_local_search(nd, tln4, VisitedTrie(), LSConfig(max_repeats=1))
    assert len(reports) == 1


def test_repeats_stop_at_first_barren_pass_and_never_reevaluate(tln4):
    rec = Recorder(tln4)
    nd = NDSet(tln4.evaluate_many(np.array([[1] * 8])))
    out, reports = repeated_local_search(nd, rec, VisitedTrie(), LSConfig(max_repeats=50))
    assert reports[-1].n_accepted == 0
    assert all(r.n_accepted > 0 for r in reports[:-1])
    assert len(reports) <= 50
    assert len(rec.seen) == len(set(rec.seen))
    assert sum(r.n_evaluated for r in reports) == len(rec.seen)


def test_partial_mode_runs_once(tln4, rng):
    nd = NDSet(tln4.evaluate_many(rng.integers(1, 5, size=(300, 8))))
    _, reports = repeated_local_search(nd, tln4, VisitedTrie(), LSConfig(max_explored=2),
                                       np.random.default_rng(1))
    assert len(reports) == 1


def test_disabled_config_rejected(tln4):
    nd = NDSet(tln4.evaluate_many(np.array([[1] * 8])))
    with pytest.raises(ValueError):
        repeated_local_search(nd, tln4, VisitedTrie(), LSConfig(enabled=False))


def test_fe_savings_from_trie(tln4):
    counter = EvalCounter(tln4)
    nd = NDSet(tln4.evaluate_many(np.array([[2] * 8, [3] * 8])))
    trie = VisitedTrie()
    sizes = []
    cur = nd
    for _ in range(4):
        sizes.append(sum(len(neighbors(s.decision, tln4.upper)) for s in cur))
        cur, _ = unit_local_search(cur, counter, trie)
    assert counter.n_fe < sum(sizes)
