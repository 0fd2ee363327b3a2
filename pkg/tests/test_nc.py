import pytest

from freecomp.errors import InvalidInputError
from freecomp.nc import (
    NCPartition,
    catalan,
    enumerate_nc,
    enumerate_nc_pairings,
    is_crossing,
    kreweras_complement,
    nc_mobius,
    parse_partition,
)

import oracles


def blocks(parts):
    return sorted(p.blocks for p in parts)


# --- enumeration -----------------------------------------------------------


def test_enumerate_three_labels_matches_all_set_partitions():
    got = enumerate_nc([1, 2, 3])
    assert len(got) == 5
    assert blocks(got) == oracles.brute_nc([1, 2, 3])


def test_empty_ground_has_one_partition():
    got = enumerate_nc([])
    assert len(got) == 1 and got[0].blocks == ()


def test_four_labels_drop_only_the_crossing_partition():
    got = blocks(enumerate_nc([1, 2, 3, 4]))
    assert len(got) == 14
    assert ((1, 3), (2, 4)) not in got
    assert got == oracles.brute_nc([1, 2, 3, 4])


@pytest.mark.parametrize("n", range(0, 8))
def test_nc_counts_agree_with_brute_force(n):
    labels = list(range(10, 10 + 3 * n, 3))
    assert blocks(enumerate_nc(labels)) == oracles.brute_nc(labels)
    assert len(enumerate_nc(labels)) == catalan(n) == oracles.catalan_recurrence(n)


def test_duplicate_labels_rejected():
    with pytest.raises(InvalidInputError, match="duplicate"):
        enumerate_nc([1, 2, 2])


def test_enumeration_order_is_deterministic_and_sorted():
    a = [str(p) for p in enumerate_nc(range(1, 6))]
    b = [str(p) for p in enumerate_nc(range(1, 6))]
    assert a == b
    keys = [p.blocks for p in enumerate_nc(range(1, 6))]
    assert keys == sorted(keys)


def test_pairings_on_four_even_labels():
    got = [str(p) for p in enumerate_nc_pairings([2, 4, 6, 8])]
    assert got == ["{2,4}{6,8}", "{2,8}{4,6}"]


def test_single_pair():
    assert [str(p) for p in enumerate_nc_pairings([2, 4])] == ["{2,4}"]


def test_twelve_labels_give_132_pairings():
    labels = list(range(2, 25, 2))
    assert len(enumerate_nc_pairings(labels)) == 132


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_pairings_agree_with_brute_force(n):
    labels = list(range(2, 2 * n + 1, 2))
    assert blocks(enumerate_nc_pairings(labels)) == oracles.brute_ncp(labels)


def test_odd_ground_has_no_pairings():
    assert enumerate_nc_pairings([1, 2, 3]) == []


# --- partitions ------------------------------------------------------------


def test_crossing_partition_rejected():
    with pytest.raises(InvalidInputError, match="crossing"):
        NCPartition([1, 2, 3, 4], [[1, 3], [2, 4]])


def test_blocks_must_cover_ground():
    with pytest.raises(InvalidInputError):
        NCPartition([1, 2, 3], [[1, 2]])


@pytest.mark.parametrize("n", range(1, 7))
def test_crossing_predicate_matches_quadruple_scan(n):
    for p in oracles.set_partitions(range(1, n + 1)):
        assert is_crossing([tuple(sorted(b)) for b in p]) == oracles.crosses(p)


def test_text_form_roundtrip():
    p = NCPartition([1, 3, 5], [[5, 1], [3]])
    assert str(p) == "{1,5}{3}"
    assert parse_partition(str(p)) == p


def test_refinement_and_block_lookup():
    fine = parse_partition("{1}{2}{3,4}")
    coarse = parse_partition("{1,2}{3,4}")
    assert fine.refines(coarse) and not coarse.refines(fine)
    assert fine.block_of(4) == (3, 4)


# --- Kreweras complement ---------------------------------------------------


def test_complement_of_single_pair():
    assert str(kreweras_complement(parse_partition("{2,4}"))) == "{1,5}{3}"


def test_complement_of_singletons_is_full_block():
    pi = parse_partition("{2}{4}{6}{8}")
    assert str(kreweras_complement(pi)) == "{1,3,5,7,9}"


def test_complement_of_two_adjacent_pairs():
    assert str(kreweras_complement(parse_partition("{2,4}{6,8}"))) == "{1,5,9}{3}{7}"


@pytest.mark.parametrize("n", range(1, 7))
def test_greedy_complement_matches_exhaustive_maximum(n):
    evens = list(range(2, 2 * n + 1, 2))
    odds = list(range(1, 2 * n + 2, 2))
    for pi in enumerate_nc(evens):
        expected = oracles.brute_kreweras(pi.blocks, odds)
        assert kreweras_complement(pi).blocks == expected


@pytest.mark.parametrize("n", range(0, 9))
def test_block_count_identity(n):
    for pi in enumerate_nc(range(2, 2 * n + 1, 2)):
        comp = kreweras_complement(pi)
        assert len(pi) + len(comp) == n + 1
        assert not is_crossing(pi.blocks + comp.blocks)


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10, 12])
def test_pairing_complements_have_half_plus_one_blocks(n):
    for pi in enumerate_nc_pairings(range(2, 2 * n + 1, 2)):
        assert len(kreweras_complement(pi)) == n // 2 + 1


def test_complement_with_explicit_outer_labels():
    pi = NCPartition([10, 20], [[10, 20]])
    assert str(kreweras_complement(pi, outer=[5, 15, 25])) == "{5,25}{15}"


def test_complement_needs_interleaving_outer_labels():
    pi = NCPartition([10, 20], [[10, 20]])
    with pytest.raises(InvalidInputError, match="interleave"):
        kreweras_complement(pi, outer=[5, 25, 30])
    with pytest.raises(InvalidInputError):
        kreweras_complement(pi)


def test_complement_of_crossing_input_rejected():
    bogus = NCPartition._trusted((2, 4, 6, 8), ((2, 6), (4, 8)))
    with pytest.raises(InvalidInputError, match="crossing"):
        kreweras_complement(bogus)


# --- Moebius function ------------------------------------------------------


def test_mobius_reflexive():
    p = parse_partition("{1,3}{2}")
    assert nc_mobius(p, p) == 1


def test_mobius_bottom_to_top_nc3():
    assert nc_mobius(parse_partition("{1}{2}{3}"), parse_partition("{1,2,3}")) == 2


def test_mobius_bottom_to_top_nc4():
    assert nc_mobius(parse_partition("{1}{2}{3}{4}"), parse_partition("{1,2,3,4}")) == -5


@pytest.mark.parametrize("n", range(1, 6))
def test_mobius_matches_interval_recursion(n):
    labels = list(range(1, n + 1))
    universe = oracles.brute_nc(labels)
    parts = {b: NCPartition(labels, b) for b in universe}
    for a in universe:
        for b in universe:
            if oracles.refines(a, b):
                assert nc_mobius(parts[a], parts[b]) == oracles.brute_mobius(a, b, universe)


@pytest.mark.parametrize("n", range(1, 6))
def test_mobius_sums_to_delta(n):
    parts = enumerate_nc(range(1, n + 1))
    for a in parts:
        for b in parts:
            if a.refines(b):
                total = sum(nc_mobius(a, r) for r in parts if a.refines(r) and r.refines(b))
                assert total == (1 if a == b else 0)


def test_mobius_requires_refinement():
    with pytest.raises(InvalidInputError, match="not below"):
        nc_mobius(parse_partition("{1,2}{3}"), parse_partition("{1}{2,3}"))
