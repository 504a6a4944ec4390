"""Majority-species typical subspace of N-blocks and its fidelity.

Words are length-n sequences over the symbols 1..d* naming product basis
states |e_w1 ... e_wn>. Symbol 1 is the most probable signal |s> = |e_1>,
symbols 2..d are the other directions of the retained space L, and symbols
beyond d lie in the extension of the basis to the full signal space.

A word belongs to the majority set when symbol 1 fills more than half the
slots. For even n = 2L a word with exactly L copies of symbol 1 is also kept
when the first two non-1 symbols (in positional order) differ; this is the
rule whose count is (d-1)^(L-1) (d-2) C(n, L).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ValidationError
from .linalg import DensityOperator, PureState, check_orthonormal

BRUTEFORCE_LIMIT = 10**7
TENSOR_LIMIT = 4096
RANKING_LIMIT = 10**6
_CHUNK = 1 << 18


@dataclass(frozen=True)
class TypicalSubspaceSpec:
    d: int
    n: int
    d_star: int | None = None

    def __post_init__(self):
        d_star = self.d if self.d_star is None else self.d_star
        if self.d < 2:
            raise ValidationError(f"d must be >= 2, got {self.d}")
        if self.n < 3:
            raise ValidationError(f"N must be >= 3, got {self.n}")
        if d_star < self.d:
            raise ValidationError(f"d* = {d_star} is smaller than d = {self.d}")
        object.__setattr__(self, "d_star", d_star)

    def contains(self, word) -> bool:
        return lambda_membership(word, self.d)

    def dimension(self) -> int:
        return d_lambda(self.d, self.n)


def _check_dn(d: int, n: int) -> None:
    if d < 2:
        raise ValidationError(f"d must be >= 2, got {d}")
    if n < 3:
        raise ValidationError(f"N must be >= 3, got {n}")


def d_lambda(d: int, n: int) -> int:
    """Exact dimension of the majority-species subspace."""
    _check_dn(d, n)
    half = (n + 1) // 2
    total = 0
    binom = 1  # C(n, j)
    power = 1  # (d - 1)^j
    for j in range(half):
        total += power * binom
        binom = binom * (n - j) // (j + 1)
        power *= d - 1
    if n % 2 == 0:
        # here binom = C(n, half) and power = (d - 1)^half
        total += power // (d - 1) * (d - 2) * binom
    return total


def _parse_word(word) -> list[int]:
    # strings are read one digit per symbol
    return [int(c) for c in word]


def lambda_membership(word, d: int | None = None) -> bool:
    """Whether a word over 1..d lies in the majority set.

    ``word`` is a sequence of ints or a string of single digits. Symbols above
    ``d`` (when given) fall outside L and never belong.
    """
    w = _parse_word(word)
    n = len(w)
    if d is not None and any(c < 1 or c > d for c in w):
        return False
    k = w.count(1)
    if n % 2 == 1:
        return 2 * k > n
    half = n // 2
    if k > half:
        return True
    if k < half:
        return False
    others = [c for c in w if c != 1]
    return others[0] != others[1]


def _word_chunks(d: int, n: int) -> Iterator[np.ndarray]:
    """All words over 0..d-1 in lexicographic order, as (rows, n) int arrays."""
    total = d**n
    place = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        yield (idx[:, None] // place[None, :]) % d


def _membership_mask(digits: np.ndarray) -> np.ndarray:
    """Vectorized predicate on zero-based words (0 is the |s> species)."""
    n = digits.shape[1]
    k = (digits == 0).sum(axis=1)
    if n % 2 == 1:
        return 2 * k > n
    half = n // 2
    mask = k > half
    tie = np.flatnonzero(k == half)
    if tie.size:
        rows = digits[tie]
        nz = rows != 0
        first = np.argmax(nz, axis=1)
        nz[np.arange(tie.size), first] = False
        second = np.argmax(nz, axis=1)
        r = np.arange(tie.size)
        mask[tie] = rows[r, first] != rows[r, second]
    return mask


def d_lambda_bruteforce(d: int, n: int) -> int:
    """Count majority-set words by exhaustive enumeration of all d^n words."""
    _check_dn(d, n)
    if d**n > BRUTEFORCE_LIMIT:
        raise ValidationError(f"d^N = {d**n} exceeds the enumeration limit {BRUTEFORCE_LIMIT}")
    return int(sum(int(_membership_mask(chunk).sum()) for chunk in _word_chunks(d, n)))


def lambda_words(d: int, n: int) -> list[tuple[int, ...]]:
    """Majority-set words over 1..d in lexicographic order."""
    _check_dn(d, n)
    if d**n > BRUTEFORCE_LIMIT:
        raise ValidationError(f"d^N = {d**n} exceeds the enumeration limit {BRUTEFORCE_LIMIT}")
    out = []
    for chunk in _word_chunks(d, n):
        out.extend(map(tuple, (chunk[_membership_mask(chunk)] + 1).tolist()))
    return out


@dataclass(frozen=True)
class SiteWeights:
    """Diagonal weights <e_i|rho|e_i> over an ordered basis.

    ``weights[0]`` is q_s, ``weights[1:d]`` the q_r of L, and anything past
    index d belongs to the extension basis.
    """

    weights: tuple[float, ...]
    d: int

    def __post_init__(self):
        if not 1 <= self.d <= len(self.weights):
            raise ValidationError(f"d = {self.d} incompatible with {len(self.weights)} weights")
        if any(w < -1e-12 or w > 1 + 1e-12 for w in self.weights):
            raise ValidationError(f"site weights must lie in [0, 1], got {self.weights}")
        if math.fsum(self.weights) > 1 + 1e-10:
            raise ValidationError(f"site weights sum to {math.fsum(self.weights):.12g} > 1")

    @classmethod
    def of(cls, q_s: float, q_r: Sequence[float], extension: Sequence[float] = ()) -> SiteWeights:
        return cls((float(q_s), *map(float, q_r), *map(float, extension)), 1 + len(q_r))

    @property
    def q_s(self) -> float:
        return self.weights[0]

    @property
    def q_r(self) -> tuple[float, ...]:
        return self.weights[1 : self.d]

    @property
    def d_star(self) -> int:
        return len(self.weights)


def _basis_columns(basis) -> np.ndarray:
    vectors = [b if isinstance(b, PureState) else PureState(b) for b in basis]
    return check_orthonormal(vectors)


def site_weights(rho: DensityOperator, basis, d: int | None = None) -> SiteWeights:
    """Weights of rho along e_1..e_d (and any extension vectors after them)."""
    cols = _basis_columns(basis)
    if cols.shape[0] != rho.dim:
        raise ValidationError(f"basis vectors have dimension {cols.shape[0]}, rho has {rho.dim}")
    diag = np.einsum("ij,jk,ki->i", cols.conj().T, rho.matrix, cols).real
    weights = tuple(float(min(1.0, max(0.0, x))) for x in diag)
    return SiteWeights(weights, len(weights) if d is None else d)


def fidelity_majority(w: SiteWeights, n: int) -> float:
    """Tr(rho^{(x)n} W) for the majority subspace, in closed form."""
    _check_dn(w.d, n)
    q_s = w.q_s
    rest = math.fsum(w.q_r)
    half = (n + 1) // 2
    terms = [math.comb(n, j) * q_s ** (n - j) * rest**j for j in range(half)]
    if n % 2 == 0:
        distinct_pair = rest * rest - math.fsum(q * q for q in w.q_r)
        terms.append(math.comb(n, half) * q_s**half * distinct_pair * rest ** (half - 2))
    return min(1.0, max(0.0, math.fsum(terms)))


def fidelity_bruteforce(rho: DensityOperator, basis, n: int, d: int | None = None) -> float:
    """Same quantity from explicit rho^{(x)n} and the projector onto the majority words."""
    cols = _basis_columns(basis)
    d = cols.shape[1] if d is None else d
    _check_dn(d, n)
    dim = rho.dim
    if dim**n > TENSOR_LIMIT:
        raise ValidationError(f"(dim rho)^N = {dim**n} exceeds the tensor limit {TENSOR_LIMIT}")
    big_rho = rho.matrix
    for _ in range(n - 1):
        big_rho = np.kron(big_rho, rho.matrix)
    words = lambda_words(d, n)
    vecs = np.empty((dim**n, len(words)), dtype=np.complex128)
    for j, word in enumerate(words):
        v = cols[:, word[0] - 1]
        for sym in word[1:]:
            v = np.kron(v, cols[:, sym - 1])
        vecs[:, j] = v
    # Tr(R W) with W = V V^dagger
    return float(np.einsum("ij,ij->", vecs.conj(), big_rho @ vecs).real)


def _word_weight(w: SiteWeights, word: Sequence[int]) -> float:
    counts = [0] * w.d_star
    for sym in word:
        counts[sym - 1] += 1
    return math.prod(q**c for q, c in zip(w.weights, counts))


def fidelity_subspace(w: SiteWeights, words: Iterable) -> float:
    """Sum of product weights over an explicit set of distinct words."""
    parsed = [tuple(_parse_word(x)) for x in words]
    if len(set(parsed)) != len(parsed):
        raise ValidationError("word set contains duplicates")
    for word in parsed:
        if any(c < 1 or c > w.d_star for c in word):
            raise ValidationError(f"word {word} uses a symbol outside 1..{w.d_star}")
    return math.fsum(_word_weight(w, word) for word in parsed)


def best_equal_dim_fidelity(w: SiteWeights, n: int, dim: int) -> tuple[float, list[tuple[int, ...]]]:
    """The `dim` heaviest words over the full basis and their total weight.

    Since the fidelity of a span of product basis states is additive over
    words, the heaviest words give the exact optimum among such subspaces.
    Ties are broken by lexicographic word order.
    """
    d_star = w.d_star
    total = d_star**n
    if dim > RANKING_LIMIT or total > RANKING_LIMIT:
        raise ValidationError(f"instance too large: {total} words, dimension {dim}")
    if not 0 <= dim <= total:
        raise ValidationError(f"dimension {dim} outside [0, {total}]")
    q = np.asarray(w.weights, dtype=float)
    scores = []
    for chunk in _word_chunks(d_star, n):
        counts = np.stack([(chunk == s).sum(axis=1) for s in range(d_star)], axis=1)
        scores.append(np.prod(q[None, :] ** counts, axis=1))
    score = np.concatenate(scores)
    top = np.argsort(-score, kind="stable")[:dim]
    place = d_star ** np.arange(n - 1, -1, -1, dtype=np.int64)
    chosen = [tuple(int(x) + 1 for x in (i // place) % d_star) for i in top.tolist()]
    return math.fsum(score[top].tolist()), chosen


def word_space(d_star: int, n: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(1, d_star + 1), repeat=n)
