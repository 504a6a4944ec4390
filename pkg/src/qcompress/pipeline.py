"""Hybrid classical-then-quantum compression accounting for a decomposable source.

One run samples N signals, Huffman-codes the membership bits, splits the
block into its H1 and H2 subsequences and sizes a q-ary block code for each
subsequence from the dimension of its majority-species subspace. Code sizes
use the realized subsequence lengths; the sizes that the expected length
P_k N would have required are reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .codec import BlockDistribution, decode, encode, huffman_build, payload_bits
from .entropy_split import entropy_decomposition, membership_string
from .errors import ValidationError
from .search import minimal_block_length
from .sources import DecomposableSource, load_source, sample_sequence
from .typical import d_lambda


@dataclass(frozen=True)
class RunConfig:
    source: str | Path
    n: int
    k: int = 8
    q: int = 2
    seed: int = 0
    output: str | Path | None = None
    fmt: str = "table"

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"N must be >= 1, got {self.n}")
        if not 1 <= self.k <= 16:
            raise ValidationError(f"block length k must be in [1, 16], got {self.k}")
        if self.q < 2:
            raise ValidationError(f"q must be >= 2, got {self.q}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.fmt not in ("table", "csv", "json"):
            raise ValidationError(f"unknown output format {self.fmt!r}")


@dataclass(frozen=True)
class SubspaceAccount:
    """Quantum code sizing for one subsequence.

    ``mode`` is ``typical`` (majority-subspace code), ``trivial`` (one
    dimensional subspace, nothing to send), ``raw`` (fewer than 3 signals,
    stored uncompressed with D = d^n) or ``empty``.
    """

    d: int
    n_realized: int
    n_expected: int
    mode: str
    d_lambda: int
    m: int
    qubits: float
    d_lambda_expected: int
    m_expected: int

    @property
    def m_delta(self) -> int:
        return self.m - self.m_expected


def code_dimension(d: int, n: int) -> tuple[int, str]:
    if n == 0:
        return 1, "empty"
    if d == 1:
        return 1, "trivial"
    if n < 3:
        return d**n, "raw"
    return d_lambda(d, n), "typical"


def account_subspace(d: int, n_realized: int, n_expected: int, q: int) -> SubspaceAccount:
    dim, mode = code_dimension(d, n_realized)
    dim_exp, _ = code_dimension(d, n_expected)
    m = minimal_block_length(dim, q)
    return SubspaceAccount(
        d=d,
        n_realized=n_realized,
        n_expected=n_expected,
        mode=mode,
        d_lambda=dim,
        m=m,
        qubits=m * math.log2(q),
        d_lambda_expected=dim_exp,
        m_expected=minimal_block_length(dim_exp, q),
    )


@dataclass(frozen=True)
class PipelineReport:
    n_total: int
    n1: int
    n2: int
    p1: float
    k: int
    q: int
    seed: int
    h_x_bound: float
    classical_payload_bits: int
    classical_bits_per_signal: float
    expected_bits_per_signal: float
    stream_bytes: int
    round_trip_ok: bool
    s1: float
    s2: float
    s_rho: float
    residual: float
    sub1: SubspaceAccount = field(repr=False)
    sub2: SubspaceAccount = field(repr=False)

    @property
    def quantum_qubits(self) -> float:
        return self.sub1.qubits + self.sub2.qubits

    @property
    def total_resource(self) -> float:
        return self.classical_payload_bits + self.quantum_qubits

    @property
    def entropy_bound(self) -> float:
        return self.s_rho * self.n_total

    def as_dict(self) -> dict:
        out = asdict(self)
        for key in ("sub1", "sub2"):
            out[key]["m_delta"] = getattr(self, key).m_delta
        out["quantum_qubits"] = self.quantum_qubits
        out["total_resource"] = self.total_resource
        out["entropy_bound"] = self.entropy_bound
        return out


def run_on_source(source: DecomposableSource, n: int, k: int = 8, q: int = 2, seed: int = 0) -> PipelineReport:
    seq = sample_sequence(source, n, seed)
    bits = membership_string(seq)
    dist = BlockDistribution.iid(source.p1, k)
    book = huffman_build(dist)
    stream = encode(book, bits)
    round_trip = bool(np.array_equal(decode(book, stream), bits))
    used = payload_bits(book, bits)

    n2 = int(bits.sum())
    n1 = n - n2
    n1_expected = int(round(source.p1 * n))
    ent = entropy_decomposition(source)
    return PipelineReport(
        n_total=n,
        n1=n1,
        n2=n2,
        p1=source.p1,
        k=k,
        q=q,
        seed=seed,
        h_x_bound=ent.h_x,
        classical_payload_bits=used,
        classical_bits_per_signal=used / n,
        expected_bits_per_signal=book.expected_length(dist) / k,
        stream_bytes=len(stream),
        round_trip_ok=round_trip,
        s1=ent.s1,
        s2=ent.s2,
        s_rho=ent.s_total,
        residual=ent.residual,
        sub1=account_subspace(source.d1, n1, n1_expected, q),
        sub2=account_subspace(source.d2, n2, n - n1_expected, q),
    )


def run_pipeline(config: RunConfig) -> PipelineReport:
    source = load_source(config.source)
    if not isinstance(source, DecomposableSource):
        raise ValidationError(f"{config.source}: the pipeline needs a two-subspace source")
    return run_on_source(source, config.n, config.k, config.q, config.seed)
