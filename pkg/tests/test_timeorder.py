import random

import pytest

from spacebound import terms as T
from spacebound.errors import (
    CycleDetected,
    NotAChain,
    NotOrdered,
    UnknownTimePoint,
    UnresolvedEventRelative,
)
from spacebound.timeorder import At, Between, TimeOrder, Tristate, shared_time_points

from conftest import random_dag


def chain3():
    return TimeOrder.chain_of(("1", "2", "3"))


def test_time_leq_on_a_chain():
    order = chain3()
    assert order.time_leq("1", "3") is Tristate.YES
    assert order.time_leq("3", "1") is Tristate.NO
    assert order.time_leq("2", "2") is Tristate.YES


def test_time_leq_incomparable_on_fork():
    order = TimeOrder(("1", "2", "3"), (("1", "2"), ("1", "3")))
    assert order.time_leq("2", "3") is Tristate.INCOMPARABLE


def test_time_leq_unknown_point():
    with pytest.raises(UnknownTimePoint):
        chain3().time_leq("1", "9")


def test_expand_interval_on_chain():
    order = TimeOrder.chain_of(("1", "2", "3", "4"))
    assert order.expand_interval("1", "3") == {"1", "2", "3"}
    assert order.expand_interval("2", "2") == {"2"}


def test_expand_interval_diamond():
    order = TimeOrder(("1", "2", "3", "4"), (("1", "2"), ("2", "4"), ("1", "3"), ("3", "4")))
    assert order.expand_interval("1", "4") == {"1", "2", "3", "4"}


def test_expand_interval_requires_order():
    with pytest.raises(NotOrdered):
        chain3().expand_interval("3", "1")


def test_construction_rejects_cycles_and_unknowns():
    with pytest.raises(CycleDetected):
        TimeOrder(("a", "b"), (("a", "b"), ("b", "a")))
    with pytest.raises(UnknownTimePoint):
        TimeOrder(("a",), (("a", "b"),))
    with pytest.raises(ValueError):
        TimeOrder(("a", "a"))


def test_partial_order_laws_against_reachability_oracle():
    rng = random.Random(99)
    for _ in range(25):
        order = random_dag(rng, rng.randint(2, 50))
        pts = list(order.points)
        # independent closure: Floyd-Warshall over the edge relation
        reach = {p: {q: p == q for q in pts} for p in pts}
        for a, b in order.edges:
            reach[a][b] = True
        for k in pts:
            for i in pts:
                if reach[i][k]:
                    for j in pts:
                        if reach[k][j]:
                            reach[i][j] = True
        sample = rng.sample(pts, min(12, len(pts)))
        for a in sample:
            assert order.time_leq(a, a) is Tristate.YES  # reflexive
            for b in sample:
                expected = (
                    Tristate.YES
                    if reach[a][b]
                    else (Tristate.NO if reach[b][a] else Tristate.INCOMPARABLE)
                )
                assert order.time_leq(a, b) is expected
                # antisymmetry of the closure
                if reach[a][b] and reach[b][a]:
                    assert a == b


def test_expand_is_monotone_in_its_endpoints():
    rng = random.Random(5)
    for _ in range(20):
        order = random_dag(rng, 15, edge_prob=0.3)
        pts = list(order.points)
        for _ in range(20):
            a, b = rng.choice(pts), rng.choice(pts)
            if order.time_leq(a, b) is not Tristate.YES:
                continue
            inner = order.expand_interval(a, b)
            for a2 in pts:
                for b2 in pts:
                    if (
                        order.time_leq(a2, a) is Tristate.YES
                        and order.time_leq(b, b2) is Tristate.YES
                    ):
                        assert inner <= order.expand_interval(a2, b2)


def _mentions(*points, intervals=()):
    atoms = [T.Implies(T.TimePoint(p), T.OccupyBox2D(0, 0, 1, 1)) for p in points]
    atoms += [
        T.Implies(T.TimeInterval(a, b), T.OccupyBox2D(0, 0, 1, 1)) for a, b in intervals
    ]
    return T.BigAnd(tuple(atoms)) if atoms else T.TRUE


def test_shared_time_points_intersects_mentions():
    order = TimeOrder.chain_of(("1", "2", "3", "4"))
    a = _mentions("1", "2", "3")
    b = _mentions("2", "3", "4")
    assert shared_time_points(a, b, order) == {"2", "3"}


def test_shared_time_points_expands_intervals():
    order = TimeOrder.chain_of(("1", "2", "3"))
    a = _mentions(intervals=(("1", "3"),))
    b = _mentions("2")
    assert shared_time_points(a, b, order) == {"2"}


def test_shared_time_points_disjoint_and_symmetric():
    order = TimeOrder.chain_of(("1", "2", "3", "4"))
    a = _mentions("1")
    b = _mentions("4")
    assert shared_time_points(a, b, order) == frozenset()
    assert shared_time_points(b, a, order) == shared_time_points(a, b, order)


def test_shared_time_points_rejects_unknown_and_unresolved():
    order = chain3()
    with pytest.raises(UnknownTimePoint):
        shared_time_points(_mentions("1"), _mentions("9"), order)
    unresolved = T.Implies(
        T.TimePoint(T.EventRelative("e", 1)), T.OccupyBox2D(0, 0, 1, 1)
    )
    with pytest.raises(UnresolvedEventRelative):
        shared_time_points(unresolved, _mentions("1"), order)


def test_as_chain():
    assert TimeOrder.chain(4).as_chain() == ["t0", "t1", "t2", "t3"]
    fork = TimeOrder(("a", "b", "c"), (("a", "b"), ("a", "c")))
    with pytest.raises(NotAChain):
        fork.as_chain()


def test_sorted_points_uses_topological_position():
    order = TimeOrder.chain(12)
    shuffled = ["t10", "t2", "t0", "t11"]
    assert order.sorted_points(shuffled) == ["t0", "t2", "t10", "t11"]


def test_index_points():
    order = TimeOrder.chain_of(("a", "b", "c"))
    assert order.index_points(At("b")) == {"b"}
    assert order.index_points(Between("a", "c")) == {"a", "b", "c"}
