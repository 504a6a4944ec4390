import random
from fractions import Fraction

import pytest

from qcompress.errors import ValidationError
from qcompress.search import (
    PUBLISHED_TABLE,
    SearchRanges,
    SolutionRow,
    _solve_cell,
    exact_solutions,
    merge_cells,
    minimal_block_length,
    rows_to_csv,
    rows_to_json,
    search_cells,
    verify_table1,
    waste,
)
from qcompress.typical import d_lambda


def brute_solutions(ranges):
    """Independent sweep: every (d, n, q, m) tuple tested by direct exponentiation."""
    out = []
    for d in range(ranges.d_min, ranges.d_max + 1):
        for n in range(ranges.n_min, ranges.n_max + 1):
            target = d_lambda(d, n)
            for q in range(ranges.q_min, ranges.q_max + 1):
                for m in range(ranges.m_min, ranges.m_max + 1):
                    if q**m == target:
                        out.append((d, n, q, m, target))
    return out


def test_waste_examples():
    assert waste(4, 2, 2) == 0.0
    assert waste(4, 2, 3) == 1.0
    with pytest.raises(ValidationError):
        waste(4, 2, 1)


def test_minimal_block_length_examples():
    assert minimal_block_length(4, 2) == 2
    assert minimal_block_length(5, 2) == 3
    assert minimal_block_length(65536, 4) == 8
    assert minimal_block_length(1, 7) == 0
    with pytest.raises(ValidationError):
        minimal_block_length(10, 1)


def test_minimal_block_length_property():
    rng = random.Random(5)
    for _ in range(500):
        target = rng.randrange(1, 10**rng.randrange(1, 60))
        q = rng.randrange(2, 40)
        m = minimal_block_length(target, q)
        assert q**m >= target
        assert m == 0 or q ** (m - 1) < target
        assert Fraction(q**m - target, target) < q - 1
        assert waste(target, q, m) < q - 1


def test_table_rows_present_with_published_dimensions():
    rows = {r.as_tuple() for r in exact_solutions()}
    for row in PUBLISHED_TABLE:
        assert row in rows
        assert d_lambda(row[0], row[1]) == row[4]
    assert (2, 9, 16, 2, 256) in rows


def test_search_matches_independent_sweep():
    ranges = SearchRanges(d_max=12, n_max=14, q_max=20, m_max=20)
    assert [r.as_tuple() for r in exact_solutions(ranges)] == brute_solutions(ranges)


def test_binary_restriction():
    ranges = SearchRanges(d_min=2, d_max=2, q_min=2, q_max=2, m_max=16, n_max=17)
    rows = [r.as_tuple() for r in exact_solutions(ranges)]
    # every odd block length qualifies since D(2, n) = 2^(n-1)
    assert rows == [(2, n, 2, n - 1, 2 ** (n - 1)) for n in range(3, 18, 2)]
    for row in [(2, 3, 2, 2, 4), (2, 5, 2, 4, 16), (2, 9, 2, 8, 256), (2, 17, 2, 16, 65536)]:
        assert row in rows


def test_every_solution_has_zero_waste():
    for r in exact_solutions():
        assert waste(r.d_lambda, r.q, r.m) == 0.0


def test_order_independent_of_partitioning():
    ranges = SearchRanges(d_max=16, n_max=20)
    cells = search_cells(ranges)
    serial = merge_cells(map(_solve_cell, cells))
    shuffled = list(cells)
    random.Random(1).shuffle(shuffled)
    assert merge_cells(map(_solve_cell, shuffled)) == serial
    assert exact_solutions(ranges, workers=2) == serial


def test_ranges_validation():
    with pytest.raises(ValidationError):
        SearchRanges(n_min=2)
    with pytest.raises(ValidationError):
        SearchRanges(q_min=5, q_max=4)


def test_verify_table1_report():
    report = verify_table1()
    assert report.passed and report.confirmed == 16
    assert [c.computed_d_lambda for c in report.checks] == [
        4, 16, 256, 65536, 16, 256, 65536, 1024, 1048576, 49, 16, 16, 49, 64, 64, 64
    ]
    extras = {r.as_tuple()[:4] for r in report.extras}
    for row in [(2, 9, 16, 2), (2, 11, 2, 10), (2, 11, 4, 5), (2, 17, 16, 4), (2, 21, 2, 20), (2, 21, 4, 10), (2, 21, 16, 5)]:
        assert row in extras
    assert report.render() == verify_table1().render()


def test_csv_and_json_layout():
    rows = [SolutionRow(2, 3, 2, 2, 4), SolutionRow(22, 3, 8, 2, 64)]
    assert rows_to_csv(rows) == "d,N,q,M,D_Lambda\n2,3,2,2,4\n22,3,8,2,64\n"
    assert '"D_Lambda": 64' in rows_to_json(rows)
