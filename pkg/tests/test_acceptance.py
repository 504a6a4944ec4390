"""Exit criteria. Each test records one PASS/FAIL line shown in the terminal summary."""

import contextlib
import io
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from qcompress.cli import main
from qcompress.codec import BlockDistribution, decode, encode, huffman_build, measured_rate, shannon_entropy_bits
from qcompress.entropy_split import entropy_decomposition, subadditivity_gap
from qcompress.linalg import PureState, random_density, random_unitary
from qcompress.search import PUBLISHED_TABLE, verify_table1
from qcompress.sources import SignalEnsemble, bell_source, random_source, save_source
from qcompress.typical import (
    SiteWeights,
    d_lambda,
    d_lambda_bruteforce,
    fidelity_bruteforce,
    fidelity_majority,
    site_weights,
)

FIXTURE = str(Path(__file__).parents[1] / "src" / "qcompress" / "data" / "bell.json")


@contextlib.contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"[FAIL] {number}. {title}: {exc}".splitlines()[0])
        raise
    ACCEPTANCE_LINES.append(f"[PASS] {number}. {title}")


def run_cli(*argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(list(argv))
    return code, out.getvalue()


def test_1_table_reproduction():
    with criterion(1, "Table 1 reproduced exactly, extras reported, < 60 s"):
        start = time.perf_counter()
        code, out = run_cli("verify-table1")
        report = verify_table1()
        elapsed = time.perf_counter() - start
        assert code == 0
        assert report.confirmed == 16 == len(PUBLISHED_TABLE)
        for check in report.checks:
            assert check.found and check.computed_d_lambda == check.published[4]
        assert {c.computed_d_lambda for c in report.checks} >= {4, 16, 256, 65536, 1024, 1048576, 49, 64}
        assert (2, 9, 16, 2, 256) in {r.as_tuple() for r in report.extras}
        assert "confirmed 16/16" in out and "(2, 9, 16, 2, 256)" in out and "discrepancy" in out
        assert elapsed < 60


@pytest.mark.slow
def test_2_formula_oracle_equivalence():
    with criterion(2, "D_Lambda formula = enumeration for all d^N <= 1e6, < 5 min"):
        start = time.perf_counter()
        cells = 0
        even_special = 0
        d = 2
        while d**3 <= 10**6:
            n = 3
            while d**n <= 10**6:
                assert d_lambda(d, n) == d_lambda_bruteforce(d, n), (d, n)
                cells += 1
                even_special += n % 2 == 0 and d >= 3
                n += 1
            d += 1
        assert cells > 0 and even_special > 0
        assert time.perf_counter() - start < 300


def test_3_entropy_decomposition():
    with criterion(3, "entropy decomposition residual < 1e-9 (Bell + 200 random sources)"):
        rep = entropy_decomposition(bell_source())
        assert abs(rep.residual) < 1e-9
        assert abs(rep.s_total - (1 + 0.5 * math.log2(3))) < 1e-9
        assert abs(rep.s_total - 1.792481) < 1e-6
        rng = np.random.default_rng(3)
        for _ in range(200):
            dim = int(rng.integers(2, 9))
            d1 = int(rng.integers(1, min(4, dim - 1) + 1))
            d2 = int(rng.integers(1, min(4, dim - d1) + 1))
            rep = entropy_decomposition(random_source(rng, dim, d1, d2))
            assert abs(rep.residual) < 1e-9


def test_4_nonorthogonality_gap():
    with criterion(4, "subadditivity gap >= -1e-9, = 0 on orthogonal, > 1e-3 at theta = pi/4"):
        rng = np.random.default_rng(4)
        for _ in range(200):
            src = random_source(rng, int(rng.integers(2, 9)), 1, 1) if rng.random() < 0.2 else None
            if src is not None:
                assert abs(subadditivity_gap(src.p1, src.sub1, src.sub2)) < 1e-9
                continue
            dim = int(rng.integers(2, 6))
            make = lambda k: SignalEnsemble.create(
                [PureState.normalized(rng.standard_normal(dim) + 1j * rng.standard_normal(dim)) for _ in range(k)],
                rng.dirichlet(np.ones(k)),
            )
            ens1 = make(int(rng.integers(1, dim + 1)))
            ens2 = make(int(rng.integers(1, dim + 1)))
            assert subadditivity_gap(float(rng.uniform()), ens1, ens2) >= -1e-9
        for _ in range(100):
            src = random_source(rng, 8, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
            assert abs(subadditivity_gap(src.p1, src.sub1, src.sub2)) < 1e-9
        theta = math.pi / 4
        ens1 = SignalEnsemble.create([PureState.basis(2, 0)], [1.0])
        ens2 = SignalEnsemble.create([PureState(np.array([math.cos(theta), math.sin(theta)], dtype=complex))], [1.0])
        assert subadditivity_gap(0.5, ens1, ens2) > 1e-3


def test_5_fidelity_oracle_equivalence():
    with criterion(5, "closed-form fidelity = tensor oracle within 1e-10 (100 instances), 0.972 spot value"):
        rng = np.random.default_rng(5)
        for _ in range(100):
            dim = int(rng.integers(2, 5))
            n = int(rng.integers(3, 7))
            while dim**n > 4096:
                n -= 1
            d = int(rng.integers(2, dim + 1))
            rho = random_density(dim, rng, rank=int(rng.integers(1, dim + 1)))
            u = random_unitary(dim, rng)
            basis = [PureState(u[:, i]) for i in range(dim)]
            w = site_weights(rho, basis, d=d)
            assert abs(fidelity_majority(w, n) - fidelity_bruteforce(rho, basis, n, d=d)) < 1e-10
        spot = fidelity_majority(SiteWeights.of(0.9, [0.1]), 3)
        assert abs(spot - 0.972) < 1e-12


def test_6_classical_codec():
    with criterion(6, "Huffman H <= rate < H + 1/k, 1e6-bit round trip, 0.84375 exact"):
        for k in (1, 2, 4, 8):
            for p1 in [round(0.1 * i, 1) for i in range(1, 10)]:
                h = shannon_entropy_bits(p1)
                rate = measured_rate(p1, k)
                assert h - 1e-12 <= rate < h + 1 / k, (p1, k, rate)
        rng = np.random.default_rng(6)
        bits = rng.integers(0, 2, size=1_000_000, dtype=np.uint8)
        book = huffman_build(BlockDistribution.iid(0.5, 8))
        assert np.array_equal(decode(book, encode(book, bits)), bits)
        book = huffman_build(BlockDistribution.iid(0.25, 8))
        assert np.array_equal(decode(book, encode(book, bits)), bits)
        assert measured_rate(0.25, 2) == 0.84375


def test_7_fidelity_non_decreasing_in_block_length():
    with criterion(7, "fidelity non-decreasing in N = 3..11 at (q_s, q_r) = (0.9, 0.1), d = d* = 2"):
        w = SiteWeights.of(0.9, [0.1])
        values = [fidelity_majority(w, n) for n in range(3, 12)]
        drops = [
            (n, round(a, 6), round(b, 6))
            for n, a, b in zip(range(4, 12), values, values[1:])
            if b < a
        ]
        assert not drops, f"F decreases at (N, F(N-1), F(N)) = {drops}"


def test_8_cli_determinism(tmp_path):
    with criterion(8, "every CLI command byte-identical across repeated runs"):
        ens = SignalEnsemble.create(
            [PureState.basis(3, 0), PureState.normalized([0.3, 1, 0]), PureState.normalized([0, 0.2, 1])],
            [0.6, 0.3, 0.1],
        )
        ens_path = str(tmp_path / "ens.json")
        save_source(ens, ens_path)
        commands = [
            ["entropy", FIXTURE],
            ["entropy", FIXTURE, "--format", "json"],
            ["ddim", "--d", "4", "--N", "6", "--oracle"],
            ["search", "--format", "csv"],
            ["search", "--d-max", "8", "--format", "json", "--workers", "2"],
            ["verify-table1"],
            ["verify-table1", "--format", "json"],
            ["fidelity", FIXTURE, "--N", "4", "--oracle"],
            ["fidelity", ens_path, "--N", "5", "--d", "2", "--oracle", "--format", "csv"],
            ["pipeline", FIXTURE, "--N", "64", "--k", "8", "--q", "2", "--seed", "7"],
            ["pipeline", FIXTURE, "--N", "500", "--k", "4", "--q", "3", "--seed", "99", "--format", "json"],
            ["gap", FIXTURE],
        ]
        for argv in commands:
            first = run_cli(*argv)
            second = run_cli(*argv)
            assert first[0] == 0, argv
            assert first == second, argv
