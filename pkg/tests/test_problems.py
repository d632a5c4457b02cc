import math
import threading

import numpy as np
import pytest

from mopsoplus import problems as problems_mod
from mopsoplus import hydraulics
from mopsoplus.core import constrained_dominates
from mopsoplus.hydraulics import Network
from mopsoplus.problems import (
    BENCHMARKS,
    DEFICIT_SENTINEL,
    KITA_CONSTRAINTS,
    EvalCounter,
    KitaProblem,
    SearchSpaceTooLarge,
    WDSProblem,
    enumerate_bruteforce,
    evaluate_kita,
    kita_objectives,
    load_network,
    nodal_uniformity,
    resilience_index,
    smallest_feasible_diameters,
)


def single_pipe_net(table, head=100.0, elev=50.0, demand=0.05, min_head=20.0, length=1000.0, c=120.0):
    return Network([("J", elev, demand, min_head)], [("R", head)],
                   [("P", "R", "J", length, c)], table)


def hand_head(head, length, c, d_m, q):
    return head - 10.667 * length * c ** -1.852 * d_m ** -4.871 * q ** 1.852


# -- cost -------------------------------------------------------------------

def test_all_minimum_tln_cost_is_hand_sum(tln):
    p = WDSProblem(tln)
    hand = sum(tln.diameter_table[0].unit_cost * pipe.length for pipe in tln.pipes)
    assert p.cost([1] * 8)[0] == hand * 1e-6
    assert hand == 16_000.0


def test_enlarging_a_pipe_increases_cost(tln, rng):
    p = WDSProblem(tln)
    for _ in range(50):
        a = rng.integers(1, 14, size=8)
        b = a.copy()
        k = rng.integers(8)
        b[k] += 1
        assert p.cost(b)[0] > p.cost(a)[0]


def test_published_tln_design_cost(tln):
    p = WDSProblem(tln)
    table = [d.diameter_mm for d in tln.diameter_table]
    d = [table.index(x) + 1 for x in (457.2, 254.0, 406.4, 101.6, 406.4, 254.0, 254.0, 25.4)]
    assert p.cost(d)[0] == pytest.approx(0.419, abs=1e-12)
    assert p.solution(d).feasible


# -- resilience -------------------------------------------------------------

def test_resilience_single_junction_hand_value():
    net = single_pipe_net([(150.0, 1.0), (200.0, 2.0)])
    p = WDSProblem(net)
    h = hand_head(100.0, 1000.0, 120.0, 0.2, 0.05)
    expected = (h - 70.0) / (100.0 - 70.0)
    obj, feas = p.evaluate([2])
    assert obj.resilience == pytest.approx(expected, rel=1e-9)
    assert feas.feasible


def test_resilience_zero_when_heads_at_requirement():
    probe = WDSProblem(single_pipe_net([(200.0, 1.0)]))
    h = probe.solve([1]).junction_heads[0]
    net = single_pipe_net([(200.0, 1.0)], min_head=h - 50.0)
    p = WDSProblem(net)
    assert resilience_index(net, p.solve([1])) == pytest.approx(0.0, abs=1e-9)


def test_resilience_undefined_without_surplus_power():
    net = single_pipe_net([(200.0, 1.0)], head=60.0, min_head=20.0)
    p = WDSProblem(net)
    with pytest.raises(ValueError):
        resilience_index(net, p.solve([1]))
    sol = p.solution([1])
    assert not sol.feasible and sol.deficit == DEFICIT_SENTINEL


def test_nodal_uniformity_hand_values(tln):
    dia = np.array([0.5, 0.25, 0.4, 0.1, 0.4, 0.25, 0.25, 0.025])
    c = nodal_uniformity(tln, dia)
    # junction 2 joins pipes 1, 2, 3; junction 7 joins pipes 6 and 8
    assert c[0] == pytest.approx((0.5 + 0.25 + 0.4) / (3 * 0.5))
    assert c[5] == pytest.approx((0.25 + 0.025) / (2 * 0.25))


def test_uniformity_flag_gives_plain_surplus_index(tln):
    d = [11, 10, 10, 4, 10, 9, 9, 1]
    plain = WDSProblem(tln, uniformity=False)
    st = plain.solve(d)
    a = tln.arrays
    h_req = a.elevation + a.min_head
    num = np.sum(a.demand * (st.junction_heads - h_req))
    den = a.demand.sum() * 210.0 - np.sum(a.demand * h_req)
    assert plain.evaluate(d)[0].resilience == pytest.approx(num / den, rel=1e-12)
    assert WDSProblem(tln).evaluate(d)[0].resilience < plain.evaluate(d)[0].resilience


def test_deficit_sums_pressure_shortfalls(tln):
    p = WDSProblem(tln)
    d = [5] * 8
    st = p.solve(d)
    a = tln.arrays
    expected = np.maximum(a.elevation + a.min_head - st.junction_heads, 0).sum()
    sol = p.solution(d)
    assert not sol.feasible
    assert sol.deficit == pytest.approx(expected, rel=1e-12)


def test_nonconvergence_gives_sentinel(monkeypatch, tln):
    monkeypatch.setattr(problems_mod, "solve_batch",
                        lambda net, dia: hydraulics.solve_batch(net, dia, max_iter=1))
    sol = WDSProblem(tln).solution([7] * 8)
    assert not sol.feasible
    assert sol.deficit == DEFICIT_SENTINEL
    assert sol.objectives.resilience == 0.0


def test_evaluation_is_deterministic(han, rng):
    p = WDSProblem(han)
    d = rng.integers(1, 7, size=(30, han.n_pipes))
    a, b = p.evaluate_many(d), p.evaluate_many(d[::-1])
    assert [s.objectives for s in a] == [s.objectives for s in b[::-1]]


def test_decision_validation(tln):
    p = WDSProblem(tln)
    with pytest.raises(ValueError):
        p.evaluate([1] * 7)
    with pytest.raises(ValueError):
        p.evaluate([0] + [1] * 7)
    with pytest.raises(ValueError):
        p.evaluate([15] + [1] * 7)


# -- Kita -------------------------------------------------------------------

def test_kita_objective_examples():
    assert kita_objectives(0.0, 0.0) == (0.0, 1.0)
    assert kita_objectives(1.0, 1.0) == (0.0, 2.5)
    for x1, x2 in [(0.3, 2.0), (1.7, 0.4)]:
        assert kita_objectives(-x1, x2)[0] == kita_objectives(x1, x2)[0]


def test_kita_mapping_and_constraints():
    obj, feas = evaluate_kita((1.0, 1.0))
    assert obj == (0.0, -2.5) and feas.feasible
    # 5 x1 + x2 <= 30 is violated by 1.0 at (6, 1)
    obj, feas = evaluate_kita((6.0, 1.0))
    assert not feas.feasible and feas.deficit == pytest.approx(1.0)
    assert len(KITA_CONSTRAINTS) == 3


def test_kita_grid():
    k = KitaProblem()
    np.testing.assert_allclose(k.to_x([1, 101]), [0.0, 7.0])
    np.testing.assert_allclose(k.step, [0.07, 0.07])
    s = k.solution([11, 21])
    assert s.objectives.resilience == pytest.approx(-0.49 + 1.4)


# -- counting and enumeration ---------------------------------------------

def test_eval_counter_counts_every_vector(tln):
    c = EvalCounter(WDSProblem(tln))
    c.evaluate_many(np.ones((5, 8), dtype=int))
    c.evaluate([2] * 8)
    assert c.n_fe == 6
    assert c.network is c.problem.network


def test_eval_counter_thread_safe():
    c = EvalCounter(KitaProblem(11))
    d = np.ones((3, 2), dtype=int)

    def work():
        for _ in range(200):
            c.evaluate_many(d)

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert c.n_fe == 4 * 200 * 3


def test_single_pipe_toy_front_by_hand():
    # smallest diameter misses the pressure target; the other two trade off
    table = [(100.0, 1.0), (150.0, 2.0), (200.0, 3.0)]
    net = single_pipe_net(table, demand=0.02)
    heads = [hand_head(100.0, 1000.0, 120.0, d / 1000, 0.02) for d, _ in table]
    assert heads[0] < 70.0 < heads[1] < heads[2]
    front = enumerate_bruteforce(WDSProblem(net))
    assert [s.decision for s in front] == [(2,), (3,)]
    assert [s.objectives.cost for s in front] == [2000.0 * 1e-6, 3000.0 * 1e-6]


def test_enumeration_limit():
    with pytest.raises(SearchSpaceTooLarge):
        enumerate_bruteforce(KitaProblem(101), limit=10_000)


def test_reduced_tln_restriction(tln, tln4):
    assert smallest_feasible_diameters(tln, 4) == [11, 12, 13, 14]
    assert [d.diameter_mm for d in tln4.network.diameter_table] == [457.2, 508.0, 558.8, 609.6]
    assert tln4.search_space_size == 65_536


def test_reduced_tln_front_is_exact(tln4, tln4_front, rng):
    members = tln4_front.solutions()
    assert len(members) == 33 and tln4_front.has_feasible
    for a in members:
        assert not any(constrained_dominates(b, a) for b in members)
    sample = tln4.evaluate_many(rng.integers(1, 5, size=(3000, 8)))
    for s in sample:
        assert any(constrained_dominates(m, s) or m.objectives == s.objectives for m in members)
    again = tln4.evaluate_many(np.array([m.decision for m in members]))
    assert [s.objectives for s in again] == [m.objectives for m in members]


# -- benchmark table -------------------------------------------------------

@pytest.mark.parametrize("name", sorted(BENCHMARKS))
def test_search_space_sizes(name):
    info = BENCHMARKS[name]
    size = float(info.n_dia) ** info.n_pipes
    assert size == pytest.approx(info.search_space, rel=5e-3)


def test_bundled_networks_match_table(tln, han):
    for net in (tln, han):
        info = BENCHMARKS[net.name]
        assert (net.n_pipes, net.n_dia) == (info.n_pipes, info.n_dia)
    assert len(han.junctions) == 31 and len(han.reservoirs) == 1


def test_unbundled_network_reports_missing_file():
    with pytest.raises(FileNotFoundError):
        load_network("BLA")
