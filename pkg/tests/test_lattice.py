import json

import pytest

from conftest import brute_force_subspaces
from fountainkit.gf2 import span_basis
from fountainkit.lattice import (
    LatticeCapError,
    SubspaceLattice,
    build_refinement,
    enumerate_subspaces,
)

GALOIS = {1: 2, 2: 5, 3: 16, 4: 67, 5: 374}


@pytest.mark.parametrize("k,expected_j", [(1, [1, 1]), (2, [1, 3, 1]), (3, [1, 7, 7, 1])])
def test_counts_small(k, expected_j):
    lat = enumerate_subspaces(k)
    assert lat.J == expected_j
    assert lat.K == sum(expected_j)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_counts_match_brute_force(k):
    oracle = brute_force_subspaces(k)
    lat = enumerate_subspaces(k)
    assert lat.K == len(oracle)
    assert {s.member_set for s in lat.subspaces} == set(oracle)
    # per-dimension counts
    from collections import Counter

    by_dim = Counter(len(s).bit_length() - 1 for s in oracle)
    assert lat.J == [by_dim[r] for r in range(k + 1)]


@pytest.mark.parametrize("k", [4, 5])
def test_counts_match_galois_numbers(k):
    assert enumerate_subspaces(k).K == GALOIS[k]


def test_kcounts():
    lat = enumerate_subspaces(3)
    assert lat.Kcounts == [16, 15, 8, 1]


def test_covers_k2():
    lat = enumerate_subspaces(2)
    zero = lat.subspaces[0]
    assert zero.key == ()
    lines = lat.covers_of(zero)
    assert sorted(s.key for s in lines) == [(1,), (2,), (3,)]
    line = lat.subspaces[lat.index[(1,)]]
    assert [s.dim for s in lat.covers_of(line)] == [2]
    full = lat.subspaces[-1]
    assert lat.covers_of(full) == []


def test_covers_unknown_key():
    lat = enumerate_subspaces(2)
    other = enumerate_subspaces(3).subspaces[5]
    with pytest.raises(KeyError):
        lat.covers_of(other)


def test_refinement_order():
    lat = enumerate_subspaces(2)
    phi, phi_r = build_refinement(lat)
    assert phi(()) == 1
    assert sorted(phi(s.key) for s in lat.stratum(1)) == [2, 3, 4]
    assert phi(lat.subspaces[-1].key) == 5
    for s in lat.subspaces:
        i = phi_r(s.key)
        assert lat.stratum(s.dim)[i - 1].key == s.key


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_linear_extension(k):
    lat = enumerate_subspaces(k)
    for a in lat.subspaces:
        for b in lat.subspaces:
            if a.member_set < b.member_set:
                assert lat.phi(a.key) < lat.phi(b.key)


@pytest.mark.parametrize("refinement", ["key_asc", "key_desc"])
def test_linear_extension_both_refinements(refinement):
    lat = enumerate_subspaces(3, refinement=refinement)
    for a in lat.subspaces:
        for b in lat.subspaces:
            if a.member_set < b.member_set:
                assert lat.phi(a.key) < lat.phi(b.key)


@pytest.mark.parametrize("k", [2, 3])
def test_unique_cover_containing_vector(k):
    lat = enumerate_subspaces(k)
    for s in lat.subspaces:
        covers = lat.covers_of(s)
        for v in range(1 << k):
            if v in s.member_set:
                continue
            hits = [c for c in covers if v in c.member_set]
            assert len(hits) == 1
            assert hits[0].key == span_basis(s.key + (v,))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_modularity(k):
    lat = enumerate_subspaces(k)
    for a in lat.subspaces:
        for b in lat.subspaces:
            meet = lat.meet(a, b)
            join = lat.join(a, b)
            assert a.dim + b.dim == meet.dim + join.dim


def test_cover_relation_is_graded():
    lat = enumerate_subspaces(4)
    for i, s in enumerate(lat.subspaces):
        for j in lat.covers[i]:
            assert lat.subspaces[j].dim == s.dim + 1
            assert s.member_set < lat.subspaces[j].member_set


def test_cap_error():
    with pytest.raises(LatticeCapError):
        enumerate_subspaces(8)
    with pytest.raises(LatticeCapError):
        SubspaceLattice(5, cap=4)
    with pytest.raises(ValueError):
        enumerate_subspaces(0)
    with pytest.raises(ValueError):
        enumerate_subspaces(3, refinement="sideways")


def test_json_export():
    lat = enumerate_subspaces(2)
    doc = json.loads(json.dumps(lat.to_json_dict()))
    assert doc["k"] == 2
    assert doc["subspace_count"] == 5
    assert doc["J"] == [1, 3, 1]
    assert doc["subspaces"][0] == {"phi": 1, "dim": 0, "basis": [], "covers": [2, 3, 4]}
    dims = [s["dim"] for s in doc["subspaces"]]
    assert dims == sorted(dims)


def test_members_closed_and_sized():
    lat = enumerate_subspaces(4)
    for s in lat.subspaces:
        assert len(s.members) == 1 << s.dim
        ms = s.member_set
        assert all((a ^ b) in ms for a in s.members for b in s.members)
