import pytest

from curalg.liealg import CartanError, adjacent_pairs, cartan, from_label


def test_rank_one():
    cd = cartan("A", 1)
    assert cd.a == ((2,),)
    assert cd.b_entry(1, 1) == 1


def test_sl3():
    cd = cartan("A", 2)
    assert cd.a == ((2, -1), (-1, 2))
    assert all(2 * cd.b_entry(i, j) == cd.a_entry(i, j) for i in (1, 2) for j in (1, 2))


def test_d4_matches_textbook_table():
    # Constructed from the Dynkin adjacency; the expected matrix is the
    # standard D4 table with the fork at node 2 (= r - 2).
    cd = cartan("D", 4)
    expected = (
        (2, -1, 0, 0),
        (-1, 2, -1, -1),
        (0, -1, 2, 0),
        (0, -1, 0, 2),
    )
    assert cd.a == expected
    assert cd.a == tuple(tuple(row) for row in zip(*cd.a))  # symmetry


def test_adjacent_pairs():
    assert adjacent_pairs(cartan("A", 1)) == []
    assert sorted(adjacent_pairs(cartan("A", 2))) == [(1, 2), (2, 1)]
    d4 = adjacent_pairs(cartan("D", 4))
    assert len(d4) == 6  # three edges, both orientations
    assert all(2 in pair for pair in d4)


def test_e_series():
    for r in (6, 7, 8):
        cd = cartan("E", r)
        assert sum(row.count(-1) for row in cd.a) == 2 * (r - 1)
        assert cd.a == tuple(tuple(row) for row in zip(*cd.a))


@pytest.mark.parametrize("series,rank", [("A", 0), ("D", 3), ("E", 5), ("B", 2)])
def test_inadmissible(series, rank):
    with pytest.raises(CartanError):
        cartan(series, rank)


def test_from_label():
    assert from_label("A3").rank == 3
    assert from_label("D4").series == "D"
    with pytest.raises(CartanError):
        from_label("Q7")
