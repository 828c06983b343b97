import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from endslab.errors import InputError
from endslab.sequences import (CoarseSequence, compose_embeddings, escape_indices,
                               is_subsequence, validate_coarse)
from endslab.spaces import BranchingTree, CombTree, FreeGroup, IntegerGrid, IntegerLine, WordTree

Z = IntegerLine()


def test_unit_ray():
    rep = validate_coarse(CoarseSequence.affine(Z, 1), 100, 50)
    assert rep.bornologous_ok and rep.max_step == 1
    assert rep.proper_ok
    assert all(rep.escape[r] == r + 1 for r in range(50))


def test_bounded_sequence_is_not_proper():
    # every term has norm <= 9, so no tail leaves B(9)
    s = CoarseSequence.from_callable(Z, lambda i: i % 10, 1)
    rep = validate_coarse(s, 100, 16)
    assert not rep.proper_ok and rep.failed_radius == 9
    assert rep.prefix_scale_only


def test_squares_break_step_bound():
    s = CoarseSequence.from_callable(Z, lambda i: i * i, 5)
    rep = validate_coarse(s, 100, 16)
    assert rep.first_violation == 3 and not rep.bornologous_ok


def test_escape_indices():
    assert escape_indices([0, 1, 2, 1, 3, 4], [0, 1, 2, 4]) == {0: 1, 1: 4, 2: 4, 4: None}


def test_even_subsequence():
    assert is_subsequence(CoarseSequence.affine(Z, 2), CoarseSequence.affine(Z, 1), 20) == \
        [2 * i for i in range(20)]
    assert is_subsequence(CoarseSequence.affine(Z, 1), CoarseSequence.affine(Z, 2), 20) is None


def test_every_third_point_of_a_walk():
    rng = np.random.default_rng(7)
    # a monotone staircase never revisits a point, so the least match is the only one
    walk = [(0, 0)]
    for step in rng.integers(0, 2, 300):
        x, y = walk[-1]
        walk.append((x + 1, y) if step else (x, y + 1))
    sub = walk[::3]
    assert is_subsequence(sub, walk, 100) == [3 * i for i in range(100)]


@pytest.mark.parametrize("s", [
    CoarseSequence.affine(Z, 1), CoarseSequence.affine(Z, -2, 5),
    CoarseSequence.affine(IntegerGrid(2), [1, 1]),
    CoarseSequence.word_ray(FreeGroup(2), "ab"),
    CoarseSequence.word_ray(CombTree(), "b", head="aa"),
    CoarseSequence.explicit(Z, ["0", "1", "0"], period=["5"], step_bound=5),
])
def test_subsequence_of_itself(s):
    assert is_subsequence(s, s, 30) == list(range(30))


def test_transitivity_of_embeddings():
    s4, s2, s1 = (CoarseSequence.affine(Z, a) for a in (4, 2, 1))
    phi = is_subsequence(s4, s2, 20)
    psi = is_subsequence(s2, s1, 40)
    chi = compose_embeddings(phi, psi)
    assert all(s4(i) == s1(k) for i, k in enumerate(chi))
    assert chi == is_subsequence(s4, s1, 20)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 5))
def test_subsequence_of_rays(a, b, c):
    # t(i) = i runs through every non-negative integer
    s = CoarseSequence.affine(Z, a, c)
    t = CoarseSequence.affine(Z, 1)
    phi = is_subsequence(s, t, 15)
    assert phi == [a * i + c for i in range(15)]
    u = CoarseSequence.affine(Z, a * b, c)
    psi = is_subsequence(u, s, 10, search_len=10 * b + 1)
    assert psi == [b * i for i in range(10)]


@pytest.mark.parametrize("s", [
    CoarseSequence.affine(Z, 1), CoarseSequence.affine(Z, -1),
    CoarseSequence.affine(IntegerGrid(2), [1, 0]), CoarseSequence.affine(IntegerGrid(2), [0, -1]),
    CoarseSequence.word_ray(FreeGroup(2), "a"), CoarseSequence.word_ray(FreeGroup(2), "bA"),
    CoarseSequence.word_ray(CombTree(), "a"), CoarseSequence.word_ray(CombTree(), "b", head="aaa"),
    CoarseSequence.word_ray(WordTree("ab"), "ab"),
    CoarseSequence.word_ray(BranchingTree(3), "1"),
])
def test_bundled_rays_validate(s):
    assert validate_coarse(s, 100, 16).ok


def test_word_ray_values():
    F = FreeGroup(2)
    s = CoarseSequence.word_ray(F, "a", head="bA")
    assert s(0) == "bA" and s(1) == "b" and s(3) == "baa"
    T = BranchingTree(3)
    s = CoarseSequence.word_ray(T, "0.2")
    assert s(2) == (0, 2, 0, 2) and s.step_bound == 2


def test_json_round_trip():
    s = CoarseSequence.explicit(Z, [0, 1, 2], period=[3, 4], step_bound=1)
    back = CoarseSequence.from_json(s.dumps(), Z)
    assert back.prefix(9) == s.prefix(9) == [0, 1, 2, 3, 4, 3, 4, 3, 4]


def test_rule_is_copied():
    rule = {"kind": "affine", "a": 1}
    CoarseSequence(Z, rule)
    assert rule == {"kind": "affine", "a": 1}


@pytest.mark.parametrize("rule", [
    {"kind": "affine", "a": [1, 0]}, {"kind": "spiral"}, {"kind": "explicit", "prefix": [1]},
    {"kind": "word_ray", "period": "a"}, {"kind": "affine", "a": 1, "c": 2}, "affine",
])
def test_bad_rules(rule):
    with pytest.raises(InputError):
        CoarseSequence(Z, rule)


def test_finite_explicit_sequence_runs_out():
    s = CoarseSequence.explicit(Z, [0, 1])
    assert not s.closed_form
    with pytest.raises(InputError):
        s(5)
