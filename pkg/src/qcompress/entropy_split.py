"""Membership extraction and the orthogonal-subspace entropy decomposition."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .codec import shannon_entropy_bits
from .linalg import (
    DensityOperator,
    Projector,
    PureState,
    projector_from_basis,
    von_neumann_entropy,
)
from .sources import DecomposableSource, SignalEnsemble, SignalSequence, total_density

SUPPORT_TOL = 1e-10


@dataclass(frozen=True)
class EntropyReport:
    """All entropies in bits. ``residual`` is s_total - h_x - p1*s1 - p2*s2."""

    p1: float
    s_total: float
    h_x: float
    s1: float
    s2: float
    residual: float

    def as_dict(self) -> dict:
        return asdict(self)


def projector_pi1(source: DecomposableSource) -> Projector:
    return projector_from_basis([PureState(e) for e in source.basis1])


def membership_string(seq: SignalSequence) -> np.ndarray:
    """Bit i is 0 when signal i came from H1 and 1 when it came from H2."""
    return (np.asarray(seq.tags, dtype=np.uint8) - 1).astype(np.uint8)


def bits_to_str(bits) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits).tolist())


def entropy_decomposition(source: DecomposableSource) -> EntropyReport:
    p1, p2 = source.p1, source.p2
    s_total = von_neumann_entropy(total_density(source))
    h_x = shannon_entropy_bits(p1)
    s1 = von_neumann_entropy(source.sub1.density())
    s2 = von_neumann_entropy(source.sub2.density())
    return EntropyReport(
        p1=p1, s_total=s_total, h_x=h_x, s1=s1, s2=s2, residual=s_total - h_x - p1 * s1 - p2 * s2
    )


def subadditivity_gap(p1: float, ens1: SignalEnsemble, ens2: SignalEnsemble) -> float:
    """H(X) + P1 S(rho1) + P2 S(rho2) - S(P1 rho1 + P2 rho2).

    Never negative; zero exactly when the two ensembles occupy orthogonal
    subspaces. A positive gap is the part of the membership information
    that cannot be carried by block coding when the subspaces overlap.
    """
    p2 = 1.0 - p1
    rho1 = ens1.density()
    rho2 = ens2.density()
    mixed = DensityOperator(p1 * rho1.matrix + p2 * rho2.matrix)
    return (
        shannon_entropy_bits(p1)
        + p1 * von_neumann_entropy(rho1)
        + p2 * von_neumann_entropy(rho2)
        - von_neumann_entropy(mixed)
    )


def support_projector(rho: DensityOperator, tol: float = SUPPORT_TOL) -> np.ndarray:
    vals, vecs = np.linalg.eigh(rho.matrix)
    keep = vecs[:, vals > tol]
    return keep @ keep.conj().T


def _trace_norm(mat: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(mat, compute_uv=False)))


def orthogonality_trace_check(rho1: DensityOperator, rho2: DensityOperator) -> tuple[float, float]:
    """Weight of each operator on the other's support.

    Returns (||P1 rho2 P1||_1, ||P2 rho1 P2||_1) with P_k the support
    projector of rho_k. Both vanish iff the supports are orthogonal, which is
    when Tr(rho1 log rho2) and Tr(rho2 log rho1) drop out of the mixture
    entropy.
    """
    proj1 = support_projector(rho1)
    proj2 = support_projector(rho2)
    return (
        _trace_norm(proj1 @ rho2.matrix @ proj1),
        _trace_norm(proj2 @ rho1.matrix @ proj2),
    )
