"""Huffman block coding of the membership bit string.

Block symbols are k-bit integers read most-significant-bit first; bit value
1 (signal from H2) occurs with probability 1 - p1.

Encoded stream layout: an 8-byte little-endian unsigned count of the
unpadded message bits, followed by the codeword bits packed MSB-first into
octets (the final octet is zero-filled). The message is zero-padded up to a
multiple of k before block encoding.
"""

from __future__ import annotations

import heapq
import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

MAX_BLOCK_BITS = 16
HEADER = struct.Struct("<Q")


class TruncatedStreamError(ValidationError):
    pass


def _plogp(p: float) -> float:
    return 0.0 if p <= 0.0 else -p * math.log2(p)


def shannon_entropy_bits(p1: float) -> float:
    if not 0.0 <= p1 <= 1.0:
        raise ValidationError(f"probability must lie in [0, 1], got {p1!r}")
    return _plogp(p1) + _plogp(1.0 - p1)


@dataclass(frozen=True)
class BlockDistribution:
    k: int
    probs: tuple[float, ...]

    @classmethod
    def iid(cls, p1: float, k: int) -> BlockDistribution:
        if not 1 <= k <= MAX_BLOCK_BITS:
            raise ValidationError(f"block length must be in [1, {MAX_BLOCK_BITS}], got {k}")
        if not 0.0 <= p1 <= 1.0:
            raise ValidationError(f"probability must lie in [0, 1], got {p1!r}")
        p2 = 1.0 - p1
        probs = tuple(p1 ** (k - ones) * p2**ones for ones in (bin(v).count("1") for v in range(1 << k)))
        return cls(k, probs)

    def __post_init__(self):
        if len(self.probs) != 1 << self.k:
            raise ValidationError(f"expected {1 << self.k} block probabilities, got {len(self.probs)}")
        if abs(math.fsum(self.probs) - 1.0) > 1e-10:
            raise ValidationError(f"block probabilities sum to {math.fsum(self.probs):.12g}")


@dataclass(frozen=True)
class HuffmanCodebook:
    k: int
    codewords: dict[int, str]

    def __post_init__(self):
        # (length, code) -> symbol, for bitwise decoding
        object.__setattr__(
            self, "_lookup", {(len(w), int(w, 2)): s for s, w in self.codewords.items()}
        )

    @property
    def lengths(self) -> dict[int, int]:
        return {s: len(w) for s, w in self.codewords.items()}

    def expected_length(self, dist: BlockDistribution) -> float:
        return math.fsum(p * len(self.codewords[s]) for s, p in enumerate(dist.probs))

    def kraft_sum(self) -> float:
        return math.fsum(2.0 ** -len(w) for w in self.codewords.values())

    def is_prefix_free(self) -> bool:
        words = sorted(self.codewords.values())
        return all(not b.startswith(a) for a, b in zip(words, words[1:]))


def canonical_codewords(lengths: dict[int, int]) -> dict[int, str]:
    """Assign canonical codewords, shorter first and ascending symbol within a length."""
    code, prev = 0, 0
    out = {}
    for sym in sorted(lengths, key=lambda s: (lengths[s], s)):
        length = lengths[sym]
        code <<= length - prev
        out[sym] = format(code, f"0{length}b")
        code += 1
        prev = length
    return out


def huffman_lengths(probs) -> list[int]:
    """Code lengths from the Huffman merge.

    The two lightest nodes are merged first; equal weights go to the node
    created earliest (leaves are created in symbol order).
    """
    n = len(probs)
    if n == 1:
        return [1]
    heap = [(p, i, (i,)) for i, p in enumerate(probs)]
    heapq.heapify(heap)
    depth = [0] * n
    created = n
    while len(heap) > 1:
        pa, _, a = heapq.heappop(heap)
        pb, _, b = heapq.heappop(heap)
        for leaf in a + b:
            depth[leaf] += 1
        heapq.heappush(heap, (pa + pb, created, a + b))
        created += 1
    return depth


def huffman_build(dist: BlockDistribution) -> HuffmanCodebook:
    """Optimal prefix code over all 2^k block symbols in canonical form.

    The multiset of Huffman lengths is kept and redistributed so lengths are
    non-decreasing along the probability ranking (ties by ascending symbol).
    A single-symbol alphabet still gets a 1-bit codeword.
    """
    lengths = sorted(huffman_lengths(dist.probs))
    ranked = sorted(range(len(dist.probs)), key=lambda s: (-dist.probs[s], s))
    by_symbol = {sym: lengths[r] for r, sym in enumerate(ranked)}
    return HuffmanCodebook(dist.k, canonical_codewords(by_symbol))


def _blocks(bits: np.ndarray, k: int) -> np.ndarray:
    pad = (-bits.size) % k
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    weights = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
    return bits.reshape(-1, k).astype(np.int64) @ weights


def _as_bits(bits) -> np.ndarray:
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    arr = np.asarray(bits, dtype=np.uint8).ravel()
    if arr.size and arr.max() > 1:
        raise ValidationError("membership string must contain only 0 and 1")
    return arr


def payload_bits(codebook: HuffmanCodebook, bits) -> int:
    """Number of codeword bits (excluding header and octet fill) for a message."""
    arr = _as_bits(bits)
    if arr.size == 0:
        return 0
    lengths = codebook.lengths
    return sum(lengths[int(s)] for s in _blocks(arr, codebook.k))


def encode(codebook: HuffmanCodebook, bits) -> bytes:
    arr = _as_bits(bits)
    header = HEADER.pack(arr.size)
    if arr.size == 0:
        return header
    words = codebook.codewords
    stream = "".join(words[int(s)] for s in _blocks(arr, codebook.k))
    packed = np.packbits(np.frombuffer(stream.encode("ascii"), dtype=np.uint8) - ord("0"))
    return header + packed.tobytes()


def decode(codebook: HuffmanCodebook, data: bytes) -> np.ndarray:
    if len(data) < HEADER.size:
        raise TruncatedStreamError("stream shorter than its length header")
    (n_bits,) = HEADER.unpack_from(data)
    n_blocks = -(-n_bits // codebook.k)
    stream = np.unpackbits(np.frombuffer(data, dtype=np.uint8, offset=HEADER.size)).tolist()
    lookup = codebook._lookup
    k = codebook.k
    out = np.empty(n_blocks * k, dtype=np.uint8)
    shifts = range(k - 1, -1, -1)
    longest = max(len(w) for w in codebook.codewords.values())
    pos = 0
    code = length = 0
    for bit in stream:
        if pos == n_blocks:
            break
        code = (code << 1) | bit
        length += 1
        sym = lookup.get((length, code))
        if sym is not None:
            out[pos * k : (pos + 1) * k] = [(sym >> s) & 1 for s in shifts]
            pos += 1
            code = length = 0
        elif length > longest:
            raise ValidationError(f"no codeword matches the bits of block {pos}")
    if pos < n_blocks:
        raise TruncatedStreamError(
            f"stream ended mid-codeword after {pos} of {n_blocks} blocks"
        )
    return out[:n_bits]


def measured_rate(p1: float, k: int) -> float:
    """Expected Huffman code length per membership bit for block length k."""
    dist = BlockDistribution.iid(p1, k)
    return huffman_build(dist).expected_length(dist) / k
