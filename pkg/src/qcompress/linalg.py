"""Dense complex linear algebra on small Hilbert spaces.

States, density operators, projectors, Kronecker products, a deterministic
Hermitian eigensystem and the von Neumann entropy (always in bits).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import ValidationError

MAX_DIM = 4096

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
ZERO_EIG = 1e-12
ORTHONORMAL_TOL = 1e-8


def _as_complex_vector(values) -> np.ndarray:
    vec = np.asarray(values, dtype=np.complex128)
    if vec.ndim != 1 or vec.size == 0:
        raise ValidationError(f"state amplitudes must be a non-empty vector, got shape {vec.shape}")
    if vec.size > MAX_DIM:
        raise ValidationError(f"Hilbert dimension {vec.size} exceeds cap {MAX_DIM}")
    return vec


def _as_square(matrix) -> np.ndarray:
    mat = np.asarray(matrix, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {mat.shape}")
    if mat.shape[0] > MAX_DIM:
        raise ValidationError(f"Hilbert dimension {mat.shape[0]} exceeds cap {MAX_DIM}")
    return mat


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        vec = _as_complex_vector(self.amplitudes)
        norm2 = float(np.vdot(vec, vec).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalized: squared norm {norm2!r}")
        object.__setattr__(self, "amplitudes", _freeze(vec))

    @classmethod
    def normalized(cls, values) -> PureState:
        vec = _as_complex_vector(values)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(vec / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> PureState:
        vec = np.zeros(dim, dtype=np.complex128)
        vec[index] = 1.0
        return cls(vec)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self):
        return hash(self.amplitudes.tobytes())


def check_hermitian(matrix: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    dev = float(np.max(np.abs(matrix - matrix.conj().T)))
    if dev >= tol:
        raise ValidationError(f"matrix is not Hermitian: max |H - H^dagger| = {dev:.3e}")


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, unit-trace, positive semidefinite operator."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = _as_square(self.matrix)
        check_hermitian(mat)
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"density operator trace is {tr.real:.12g}, expected 1")
        eigs = np.linalg.eigvalsh(mat)
        if eigs[0] < -PSD_TOL:
            raise ValidationError(f"density operator has negative eigenvalue {eigs[0]:.3e}")
        object.__setattr__(self, "matrix", _freeze(mat))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_state(cls, state: PureState) -> DensityOperator:
        return cls(state.projector())


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted descending with the matching eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    def reconstruct(self) -> np.ndarray:
        vecs = self.eigenvectors
        return (vecs * self.eigenvalues) @ vecs.conj().T


@dataclass(frozen=True, eq=False)
class Projector:
    matrix: np.ndarray
    rank: int

    def __post_init__(self):
        mat = _as_square(self.matrix)
        check_hermitian(mat)
        dev = float(np.max(np.abs(mat @ mat - mat)))
        if dev >= NORM_TOL:
            raise ValidationError(f"projector is not idempotent: max |P^2 - P| = {dev:.3e}")
        object.__setattr__(self, "matrix", _freeze(mat))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, state: Union[PureState, np.ndarray]) -> np.ndarray:
        vec = state.amplitudes if isinstance(state, PureState) else np.asarray(state)
        return self.matrix @ vec


def density_from_ensemble(states: Sequence[PureState], probs: Sequence[float]) -> DensityOperator:
    """Return the mixture sum_i p_i |a_i><a_i|."""
    if len(states) == 0 or len(states) != len(probs):
        raise ValidationError(
            f"need one probability per state, got {len(states)} states and {len(probs)} probabilities"
        )
    dims = {s.dim for s in states}
    if len(dims) != 1:
        raise ValidationError(f"states have mismatched dimensions {sorted(dims)}")
    p = np.asarray(probs, dtype=float)
    if np.any(p < 0):
        raise ValidationError(f"probabilities must be nonnegative, got {p.tolist()}")
    if abs(p.sum() - 1.0) > NORM_TOL:
        raise ValidationError(f"probabilities sum to {p.sum():.12g}, expected 1")
    dim = dims.pop()
    rho = np.zeros((dim, dim), dtype=np.complex128)
    for weight, state in zip(p, states):
        rho += weight * state.projector()
    return DensityOperator(rho)


def _phase_fix(vec: np.ndarray) -> np.ndarray:
    # first component of non-negligible magnitude is made real positive
    idx = int(np.argmax(np.abs(vec) > 1e-12 * max(1.0, np.abs(vec).max())))
    pivot = vec[idx]
    if abs(pivot) == 0:
        return vec
    return vec * (abs(pivot) / pivot)


def hermitian_eigensystem(matrix, tie_tol: float = 1e-10) -> Spectrum:
    """Eigendecomposition with a reproducible ordering.

    Eigenvalues are sorted descending. Eigenvalues within ``tie_tol`` of each
    other form a tie group, ordered by descending lexicographic comparison of
    the real parts of their phase-fixed eigenvectors.
    """
    mat = _as_square(matrix)
    check_hermitian(mat)
    # symmetrize away the sub-tolerance skew part before handing to LAPACK
    mat = 0.5 * (mat + mat.conj().T)
    vals, vecs = np.linalg.eigh(mat)
    vecs = np.column_stack([_phase_fix(vecs[:, i]) for i in range(vecs.shape[1])])

    order = list(np.argsort(-vals, kind="stable"))
    sorted_idx: list[int] = []
    i = 0
    while i < len(order):
        j = i + 1
        while j < len(order) and abs(vals[order[i]] - vals[order[j]]) < tie_tol:
            j += 1
        group = order[i:j]
        group.sort(key=lambda c: tuple(-np.round(vecs[:, c].real, 12)))
        sorted_idx.extend(group)
        i = j
    idx = np.array(sorted_idx, dtype=int)
    return Spectrum(eigenvalues=_freeze(vals[idx]), eigenvectors=_freeze(vecs[:, idx]))


def _entropy_from_eigenvalues(eigs: np.ndarray) -> float:
    if eigs.min() < -PSD_TOL:
        raise ValidationError(f"negative eigenvalue {eigs.min():.3e} in entropy evaluation")
    pos = eigs[eigs > ZERO_EIG]
    s = float(-np.sum(pos * np.log2(pos)))
    # rounding on a pure state leaves ~1e-16
    return 0.0 if s < ZERO_EIG else s


def von_neumann_entropy(rho: DensityOperator) -> float:
    """S(rho) = -Tr(rho log2 rho) in bits; 0 log 0 is taken as 0."""
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    eigs = np.linalg.eigvalsh(rho.matrix)
    return min(_entropy_from_eigenvalues(eigs), float(np.log2(rho.dim)))


def tensor_product(a, b):
    """Kronecker product with the left factor as the outer index.

    Two states give a state, two density operators give a density operator,
    anything else gives a plain ndarray.
    """
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(np.kron(a.matrix, b.matrix))
    left = _unwrap(a)
    right = _unwrap(b)
    if left.ndim != right.ndim:
        raise ValidationError("cannot take the product of a vector and a matrix")
    out = np.kron(left, right)
    if out.shape[0] > MAX_DIM:
        raise ValidationError(f"Hilbert dimension {out.shape[0]} exceeds cap {MAX_DIM}")
    return out


def _unwrap(x) -> np.ndarray:
    if isinstance(x, PureState):
        return x.amplitudes
    if isinstance(x, (DensityOperator, Projector)):
        return x.matrix
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim not in (1, 2):
        raise ValidationError(f"expected a vector or matrix, got shape {arr.shape}")
    return arr


def check_orthonormal(vectors: Sequence[PureState], tol: float = ORTHONORMAL_TOL) -> np.ndarray:
    """Stack vectors as columns and verify their Gram matrix is the identity."""
    if not vectors:
        raise ValidationError("empty vector set")
    dims = {v.dim for v in vectors}
    if len(dims) != 1:
        raise ValidationError(f"vectors have mismatched dimensions {sorted(dims)}")
    cols = np.column_stack([v.amplitudes for v in vectors])
    gram = cols.conj().T @ cols
    dev = float(np.max(np.abs(gram - np.eye(len(vectors)))))
    if dev >= tol:
        raise ValidationError(f"vectors are not orthonormal: max Gram deviation {dev:.3e}")
    return cols


def projector_from_basis(vectors: Sequence[PureState]) -> Projector:
    cols = check_orthonormal(vectors)
    return Projector(cols @ cols.conj().T, rank=len(vectors))


def gram_schmidt(vectors: Sequence[np.ndarray], tol: float = 1e-10) -> list[np.ndarray]:
    """Modified Gram-Schmidt with one reorthogonalization pass.

    Vectors whose residual norm falls below ``tol`` are dropped, so the result
    spans the same space as the input.
    """
    basis: list[np.ndarray] = []
    for v in vectors:
        w = np.asarray(v, dtype=np.complex128).copy()
        for _ in range(2):
            for b in basis:
                w -= np.vdot(b, w) * b
        norm = np.linalg.norm(w)
        if norm > tol:
            basis.append(w / norm)
    return basis


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish unitary from the QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityOperator(rho / np.trace(rho).real)
