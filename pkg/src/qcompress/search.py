"""Zero-waste q-ary parameterizations: exact integer solutions of q^M = D_Lambda."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable

from .errors import ValidationError
from .typical import d_lambda

CSV_HEADER = ("d", "N", "q", "M", "D_Lambda")

# (d, N, q, M, D_Lambda) as published.
PUBLISHED_TABLE = (
    (2, 3, 2, 2, 4),
    (2, 5, 2, 4, 16),
    (2, 9, 2, 8, 256),
    (2, 17, 2, 16, 65536),
    (2, 5, 4, 2, 16),
    (2, 9, 4, 4, 256),
    (2, 17, 4, 8, 65536),
    (2, 11, 32, 2, 1024),
    (2, 21, 32, 4, 1048576),
    (4, 4, 7, 2, 49),
    (6, 3, 2, 4, 16),
    (6, 3, 4, 2, 16),
    (17, 3, 7, 2, 49),
    (22, 3, 2, 6, 64),
    (22, 3, 4, 3, 64),
    (22, 3, 8, 2, 64),
)


@dataclass(frozen=True, order=True)
class SolutionRow:
    d: int
    n: int
    q: int
    m: int
    d_lambda: int

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.d, self.n, self.q, self.m, self.d_lambda)


@dataclass(frozen=True)
class SearchRanges:
    d_min: int = 2
    d_max: int = 32
    n_min: int = 3
    n_max: int = 32
    q_min: int = 2
    q_max: int = 32
    m_min: int = 2
    m_max: int = 32

    def __post_init__(self):
        for name in ("d", "n", "q", "m"):
            lo, hi = getattr(self, f"{name}_min"), getattr(self, f"{name}_max")
            floor = 3 if name == "n" else 2
            if lo < floor:
                raise ValidationError(f"{name}_min must be >= {floor}, got {lo}")
            if hi < lo:
                raise ValidationError(f"{name}_max ({hi}) is below {name}_min ({lo})")


def waste(d_lam: int, q: int, m: int) -> float:
    """Fractional over-provisioning (q^M - D) / D of the code space."""
    capacity = q**m
    if capacity < d_lam:
        raise ValidationError(f"infeasible: {q}^{m} = {capacity} < D_Lambda = {d_lam}")
    return float(Fraction(capacity - d_lam, d_lam))


def minimal_block_length(d_lam: int, q: int) -> int:
    """Smallest M with q^M >= D, by exact integer comparison."""
    if q < 2:
        raise ValidationError(f"alphabet size must be >= 2, got {q}")
    if d_lam < 1:
        raise ValidationError(f"D_Lambda must be positive, got {d_lam}")
    # float estimate only seeds the loop; the answer comes from exact comparisons
    m = max(0, int((d_lam.bit_length() - 1) / math.log2(q)) - 1)
    while m > 0 and q**m >= d_lam:
        m -= 1
    while q**m < d_lam:
        m += 1
    return m


def _solve_cell(args) -> list[SolutionRow]:
    d, n, ranges = args
    target = d_lambda(d, n)
    rows = []
    for q in range(ranges.q_min, ranges.q_max + 1):
        m = ranges.m_min
        power = q**m
        while power < target and m < ranges.m_max:
            power *= q
            m += 1
        if power == target:
            rows.append(SolutionRow(d, n, q, m, target))
    return rows


def search_cells(ranges: SearchRanges) -> list[tuple[int, int, SearchRanges]]:
    return [
        (d, n, ranges)
        for d in range(ranges.d_min, ranges.d_max + 1)
        for n in range(ranges.n_min, ranges.n_max + 1)
    ]


def merge_cells(results: Iterable[list[SolutionRow]]) -> list[SolutionRow]:
    return sorted(row for rows in results for row in rows)


def exact_solutions(ranges: SearchRanges | None = None, workers: int = 1) -> list[SolutionRow]:
    """Every (d, N, q, M) in range with q^M = D_Lambda(d, N), sorted ascending."""
    ranges = ranges or SearchRanges()
    cells = search_cells(ranges)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return merge_cells(pool.map(_solve_cell, cells, chunksize=16))
    return merge_cells(map(_solve_cell, cells))


@dataclass(frozen=True)
class TableCheck:
    published: tuple[int, int, int, int, int]
    found: bool
    computed_d_lambda: int

    @property
    def ok(self) -> bool:
        return self.found and self.computed_d_lambda == self.published[4]


@dataclass(frozen=True)
class TableReport:
    checks: tuple[TableCheck, ...]
    extras: tuple[SolutionRow, ...]
    total_found: int

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def confirmed(self) -> int:
        return sum(c.ok for c in self.checks)

    def render(self) -> str:
        lines = ["published rows (d, N, q, M, D_Lambda):"]
        for c in self.checks:
            status = "ok" if c.ok else "MISSING"
            lines.append(f"  {status:7s} {c.published}  computed D_Lambda={c.computed_d_lambda}")
        lines.append(f"confirmed {self.confirmed}/{len(self.checks)} published rows")
        lines.append(
            f"search found {self.total_found} exact solutions; "
            f"{len(self.extras)} not in the published table:"
        )
        for row in self.extras:
            lines.append(f"  extra   {row.as_tuple()}")
        if self.extras:
            lines.append(
                "note: the published table is incomplete for its stated ranges "
                "(discrepancy, not an error)"
            )
        return "\n".join(lines)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "confirmed": self.confirmed,
            "published": [
                {"row": list(c.published), "found": c.found, "computed_d_lambda": c.computed_d_lambda}
                for c in self.checks
            ],
            "extras": [list(r.as_tuple()) for r in self.extras],
        }


def verify_table1(ranges: SearchRanges | None = None) -> TableReport:
    rows = exact_solutions(ranges or SearchRanges())
    found = {r.as_tuple() for r in rows}
    published = set(PUBLISHED_TABLE)
    checks = tuple(
        TableCheck(row, row in found, d_lambda(row[0], row[1])) for row in PUBLISHED_TABLE
    )
    extras = tuple(r for r in rows if r.as_tuple() not in published)
    return TableReport(checks=checks, extras=extras, total_found=len(rows))


def rows_to_csv(rows: Iterable[SolutionRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(r.as_tuple())
    return buf.getvalue()


def rows_to_json(rows: Iterable[SolutionRow]) -> str:
    return json.dumps([dict(zip(CSV_HEADER, r.as_tuple())) for r in rows], indent=2) + "\n"


def row_dict(row: SolutionRow) -> dict:
    return asdict(row)
