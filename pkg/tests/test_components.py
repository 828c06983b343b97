import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from endslab.coarse import BoundedRegion
from endslab.components import (chain_between, chain_violations, classify_counts,
                                component_threads, end_profile, find_chain, k_components,
                                local_class)
from endslab.errors import EmptyDomainError, InputError
from endslab.spaces import (BranchingTree, CombTree, FreeGroup, IntegerGrid, IntegerLine,
                            WordTree, ball)


def _partition(part):
    return {frozenset(c): bool(part.live[k]) for k, c in enumerate(part.classes)}


def test_line_splits_in_two():
    w = ball(IntegerLine(), 0, 5)
    part = k_components(w, BoundedRegion(0, 2), 1)
    assert _partition(part) == {frozenset({3, 4, 5}): True, frozenset({-5, -4, -3}): True}
    assert part.ids == ("-3", "3")


def test_grid_annulus_is_connected():
    w = ball(IntegerGrid(2), None, 6)
    assert k_components(w, BoundedRegion((0, 0), 2), 1).live_count == 1


def test_free_group_outside_unit_ball():
    # closed ball: the 4*3 = 12 words of length 2 each root a separate branch
    w = ball(FreeGroup(2), "", 6)
    part = k_components(w, BoundedRegion("", 1), 1)
    pts = list(w.points)
    D = oracles.distance_table(pts, oracles.free_distance)
    expected = oracles.components(pts, [len(p) for p in pts], D, 1, 1, 6)
    assert _partition(part) == expected
    assert part.live_count == 12


def test_forbidden_centre_must_be_window_origin():
    w = ball(IntegerLine(), 0, 5)
    with pytest.raises(InputError):
        k_components(w, BoundedRegion(1, 2), 1)
    with pytest.raises(EmptyDomainError):
        k_components(w, BoundedRegion(0, 5), 1)


@pytest.mark.parametrize("space, r_max, expected", [
    (IntegerLine(), 32, [2] * 32),
    (IntegerGrid(2), 12, [1] * 12),
    (CombTree(), 32, [r + 2 for r in range(1, 33)]),
    (WordTree("ab"), 10, [2 ** (r + 1) for r in range(1, 11)]),
])
def test_end_profiles(space, r_max, expected):
    prof = end_profile(space, 1, r_max)
    assert list(prof.counts) == expected


def test_profile_classes():
    assert end_profile(IntegerLine(), 1, 32).classification == "finite(2)"
    assert end_profile(CombTree(), 1, 32).classification == "countable-growth"
    assert end_profile(WordTree("ab"), 1, 10).classification == "uncountable-growth"


def test_classify_counts():
    assert classify_counts([1, 1, 1]) == "finite(1)"
    assert classify_counts([3, 4, 5, 6]) == "countable-growth"
    assert classify_counts([4, 8, 16, 32]) == "uncountable-growth"
    assert classify_counts([5, 3, 6, 2]) == "inconclusive"
    assert classify_counts([]) == "inconclusive"


def test_profile_csv():
    text = end_profile(IntegerLine(), 1, 3).to_csv()
    assert text.splitlines() == ["r,count,classification", "1,2,finite(2)", "2,2,finite(2)",
                                 "3,2,finite(2)"]


def test_threads():
    assert len(component_threads(IntegerLine(), 1, 8)) == 2
    assert len(component_threads(CombTree(), 1, 16)) == 18


def test_free_group_threads_radius_five():
    # one thread per reduced word of length 6: 4 * 3**5
    ts = component_threads(FreeGroup(2), 1, 5, horizon_margin=2)
    assert len(ts) == 4 * 3 ** 5 == 972


def test_thread_parents_refine():
    ts = component_threads(CombTree(), 1, 6)
    for thread in ts.threads:
        assert len(thread) == 7
    assert len(set(t[-1] for t in ts.threads)) == len(ts)
    doc = ts.to_json()
    assert doc["threads"] == [list(t) for t in ts.threads]
    assert ts.to_dot().startswith("digraph threads {")


def test_chain_between_line():
    w = ball(IntegerLine(), 0, 10)
    ch = chain_between(w, 4, 7, 1, BoundedRegion(0, 2))
    assert list(ch.points) == [4, 5, 6, 7]
    assert chain_between(w, 4, -4, 1, BoundedRegion(0, 2)) is None


def test_chain_between_grid_goes_around():
    w = ball(IntegerGrid(2), None, 8)
    ch = chain_between(w, (3, 0), (-3, 0), 1, BoundedRegion((0, 0), 2))
    assert ch is not None and len(ch.points) <= 14
    assert chain_violations(IntegerGrid(2), ch.points, 1, 2, (3, 0), (-3, 0)) == []


def test_chain_violations_report():
    msgs = chain_violations(IntegerLine(), [4, 2, 1], 1, 1, 4, 1)
    assert any("enters" in m or "inside" in m for m in msgs)
    assert any("step" in m or "length" in m for m in msgs)


def test_lazy_route_matches_window():
    F = FreeGroup(2)
    w = ball(F, "", 8)
    part = k_components(w, BoundedRegion("", 2), 1)
    for x in ["aab", "Bab", "bbb", "abAB"]:
        cid, live = local_class(F, x, 1, 2, 8)
        assert cid == part.class_id(x)
        assert live
    assert find_chain(F, "aab", "aabAb", 1, 2, 8) is not None
    # siblings below "aa" only meet through the forbidden ball
    assert find_chain(F, "aab", "aaB", 1, 2, 8) is None


# -- partition soundness and monotonicity -------------------------------------

_WINDOWS = [ball(IntegerGrid(2), None, 7), ball(CombTree(), None, 10), ball(FreeGroup(2), "", 4),
            ball(BranchingTree([2, 1, 3]), None, 6)]


@pytest.mark.parametrize("w", _WINDOWS, ids=["grid", "comb", "F2", "branching"])
def test_partition_soundness(w):
    part = k_components(w, BoundedRegion(w.origin, 2), 1)
    forb = BoundedRegion(w.origin, 2)
    rng = np.random.default_rng(0)
    outside = [p for p, d in zip(w.points, w.radius) if d > 2]
    for _ in range(150):
        x, y = (outside[k] for k in rng.choice(len(outside), 2))
        same = part.class_of(x) == part.class_of(y)
        ch = chain_between(w, x, y, 1, forb)
        assert (ch is not None) == same


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(range(len(_WINDOWS))), st.integers(0, 3), st.integers(1, 3), st.integers(1, 3))
def test_monotone_in_K(wi, r, K1, dK):
    w = _WINDOWS[wi]
    if r >= w.horizon:
        return
    fine = k_components(w, BoundedRegion(w.origin, r), K1)
    coarse = k_components(w, BoundedRegion(w.origin, r), K1 + dK)
    for cls in fine.classes:
        assert len({coarse.class_of(p) for p in cls}) == 1


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(range(len(_WINDOWS))), st.integers(0, 3), st.integers(1, 3))
def test_monotone_in_r(wi, r, K):
    w = _WINDOWS[wi]
    if r + 1 >= w.horizon:
        return
    outer = k_components(w, BoundedRegion(w.origin, r + 1), K)
    inner = k_components(w, BoundedRegion(w.origin, r), K)
    for k, cls in enumerate(outer.classes):
        parents = {inner.class_of(p) for p in cls}
        assert len(parents) == 1
        if outer.live[k]:
            assert inner.live[parents.pop()]


@pytest.mark.parametrize("rule", [2, [3, 1, 2], {"default": 2, "by_path": {"0": 0, "1.1": 0}}])
def test_threads_biject_with_surviving_nodes(rule):
    T = BranchingTree(rule)
    r_max, margin = 4, 6
    ts = component_threads(T, 1, r_max, margin)
    nodes = ball(T, None, r_max + margin).points
    deep = {p[:r_max + 1] for p in nodes if len(p) == r_max + margin}
    assert len(ts) == len(deep)


def test_stability():
    assert set(end_profile(IntegerLine(), 1, 20).counts) == {2}
    assert set(end_profile(IntegerGrid(2), 1, 12).counts) == {1}
    assert set(end_profile(IntegerGrid(3), 1, 5).counts) == {1}


def test_targeted_search_follows_geodesics():
    # best-first search walks straight down a^N -> a^2N instead of flooding 3^N points
    F = FreeGroup(2)
    ch = find_chain(F, "a" * 20, "a" * 40, 1, 19, 46, limit=1000)
    assert len(ch.points) == 21


def test_targeted_search_is_shortest_on_grid():
    Z2 = IntegerGrid(2)
    for K in (1, 2, 3):
        ch = find_chain(Z2, (5, 0), (-5, 0), K, 3, 12)
        # the chain is as short as the hop count along the detour around B(3)
        assert len(ch.points) - 1 == min_hops(Z2, (5, 0), (-5, 0), K, 3, 12)


def min_hops(space, x, y, K, outside, within):
    pts = [p for p in oracles.lattice_ball(2, within) if sum(map(abs, p)) > outside]
    D = oracles.distance_table(pts, oracles.l1)
    A = D <= K
    i, j = pts.index(x), pts.index(y)
    frontier, seen, n = {i}, {i}, 0
    while j not in frontier:
        frontier = {b for a in frontier for b in np.flatnonzero(A[a]).tolist()} - seen
        seen |= frontier
        n += 1
    return n
