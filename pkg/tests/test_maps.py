import pytest

from endslab.components import component_threads
from endslab.epsilon import EpsCertificate, epsilon_equivalent
from endslab.errors import InconclusiveError, InputError
from endslab.maps import (CoarseMap, are_close, check_coarse, compose_end_maps, end_map,
                          identity, induced_end_map, is_bijection, map_sequence)
from endslab.sequences import CoarseSequence
from endslab.spaces import FreeGroup, IntegerGrid, IntegerLine, Subdivision, parse_descriptor

Z = IntegerLine()
G = Subdivision(Z)
EVEN = parse_descriptor({"kind": "custom", "dim": 1,
                         "adjacency_rule": {"kind": "offsets", "offsets": [[2], [-2]]}})


def affine(a, b=0, src=Z, tgt=Z):
    return CoarseMap(src, tgt, {"kind": "affine", "a": a, "b": b})


def test_doubling_is_coarse():
    rep = check_coarse(affine(2), 16, 1)
    assert rep.bornologous_sups[-1] == 2 and rep.ok
    # preimage of B(0; r) sits inside B(0; ceil(r/2)); exactly B(0; r // 2)
    for r, vals in rep.preimage_radii.items():
        assert vals[-1] == r // 2 <= -(-r // 2)


def test_squaring_is_not_bornologous():
    rep = check_coarse(CoarseMap(Z, Z, lambda x: x * x), 16, 1)
    assert not rep.bornologous_ok
    assert rep.bornologous_sups == (7.0, 15.0, 31.0)


def test_constant_map_is_not_proper():
    rep = check_coarse(CoarseMap(Z, Z, {"kind": "constant", "value": "0"}), 16, 1)
    assert rep.bornologous_sups[-1] == 0 and rep.bornologous_ok
    assert not rep.proper_ok


def test_closeness():
    assert are_close(identity(Z), affine(1, 5), 16) == (True, 5)
    assert are_close(identity(Z), affine(2), 16) == (False, 16)
    assert are_close(identity(Z), identity(Z), 16) == (True, 0)


def test_closeness_needs_matching_spaces():
    with pytest.raises(InputError):
        are_close(identity(Z), identity(IntegerGrid(2)))


def test_induced_maps_on_line():
    src = component_threads(Z, 1, 8)
    tgt = component_threads(Z, 1, 8, horizon_margin=12)
    assert induced_end_map(identity(Z), src, tgt) == {"-10": "-10", "10": "10"}
    assert induced_end_map(CoarseMap(Z, Z, {"kind": "abs"}), src, tgt) == {"-10": "10", "10": "10"}


def test_even_integers_biject():
    _, tgt, m = end_map(CoarseMap(EVEN, Z, {"kind": "inclusion"}))
    assert is_bijection(m, tgt.thread_ids)


def test_straddle_raises():
    # the one end of Z^2 projects onto both ends of Z
    Z2 = IntegerGrid(2)
    src = component_threads(Z2, 1, 4)
    tgt = component_threads(Z, 1, 4, horizon_margin=8)
    proj = CoarseMap(Z2, Z, lambda p: p[0])
    with pytest.raises(InconclusiveError):
        induced_end_map(proj, src, tgt)


def test_functoriality():
    f = affine(2)
    g = CoarseMap(Z, Z, {"kind": "abs"})
    gf = f.then(g)
    s0 = component_threads(Z, 1, 6)
    s1 = component_threads(Z, 1, 6, horizon_margin=20)
    s2 = component_threads(Z, 1, 6, horizon_margin=20)
    mf = induced_end_map(f, s0, s1)
    mg = induced_end_map(g, s1, s2)
    assert induced_end_map(gf, s0, s2) == compose_end_maps(mf, mg)


def test_compose_rule():
    rule = {"kind": "compose", "maps": [{"kind": "affine", "a": 2}, {"kind": "abs"}],
            "via": [{"kind": "integer_line"}]}
    h = CoarseMap(Z, Z, rule)
    assert [h(x) for x in (-3, 0, 4)] == [6, 0, 8]


def test_substitution_on_free_group():
    F = FreeGroup(2)
    f = CoarseMap(F, F, {"kind": "substitution", "map": {"a": "ab", "b": "b"}})
    assert f("a") == "ab" and f("A") == "BA"
    assert f("ab") == "abb"
    assert check_coarse(f, 4, 1).bornologous_sups[-1] == 2


def test_retraction_composites_are_close_to_identities():
    inc = CoarseMap(Z, G, {"kind": "inclusion"})
    ret = CoarseMap(G, Z, {"kind": "retraction"})
    assert are_close(inc.then(ret), identity(Z), 8)[0]
    close, sup = are_close(ret.then(inc), identity(G), 8)
    assert close and sup == 1


def test_closeness_invariance():
    f, g = identity(Z), affine(1, 5)
    src = component_threads(Z, 1, 8)
    tgt = component_threads(Z, 1, 8, horizon_margin=16)
    assert are_close(f, g)[0]
    assert induced_end_map(f, src, tgt) == induced_end_map(g, src, tgt)


@pytest.mark.parametrize("fmap", [
    CoarseMap(EVEN, Z, {"kind": "inclusion"}),
    CoarseMap(Z, G, {"kind": "inclusion"}),
    CoarseMap(G, Z, {"kind": "retraction"}),
], ids=["2Z->Z", "V->G", "G->V"])
def test_equivalences_biject_on_threads(fmap):
    _, tgt, m = end_map(fmap)
    assert is_bijection(m, tgt.thread_ids)


@pytest.mark.parametrize("a, b, c, d", [(1, 0, 1, 3), (1, 0, -1, 0), (-1, 2, -2, 0), (2, 0, 1, 1)])
def test_eps_verdicts_transport(a, b, c, d):
    s = CoarseSequence.affine(Z, a, b)
    t = CoarseSequence.affine(Z, c, d)
    before = isinstance(epsilon_equivalent(s, t, 2, 8), EpsCertificate)
    inc = CoarseMap(Z, G, {"kind": "inclusion"})
    fs, ft = map_sequence(inc, s), map_sequence(inc, t)
    # distances double in the subdivision, so K doubles too
    after = isinstance(epsilon_equivalent(fs, ft, 4, 8), EpsCertificate)
    assert before == after


def test_map_json_round_trip():
    f = CoarseMap(EVEN, Z, {"kind": "inclusion"})
    back = CoarseMap.from_json(f.to_json())
    assert back.source == EVEN and back(4) == 4
    with pytest.raises(InputError):
        CoarseMap.from_json('{"source": {"kind": "integer_line"}}')
    with pytest.raises(InputError):
        CoarseMap(Z, Z, {"kind": "rotate"})


def test_based_flag():
    CoarseMap(Z, Z, {"kind": "abs"}, based=True)
    with pytest.raises(InputError):
        CoarseMap(Z, Z, {"kind": "affine", "a": 1, "b": 5}, based=True)
