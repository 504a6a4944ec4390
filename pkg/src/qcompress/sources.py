"""Signal ensembles and two-subspace decomposable sources.

Source file schema (JSON)::

    {
      "ambient_dim": 4,
      "subspaces": [
        {"p_subspace": 0.5, "states": [[[re, im], ...], ...], "probs": [1.0]},
        {"p_subspace": 0.5, "states": [...], "probs": [...]}
      ]
    }

Without ``subspaces`` the file holds a single ensemble with top-level
``states`` and ``probs``. Amplitudes are ``[re, im]`` pairs written as
binary64 decimal literals; ``save_source`` writes them with ``repr`` so a
save/load cycle reproduces amplitudes bit for bit.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ValidationError
from .linalg import (
    NORM_TOL,
    DensityOperator,
    PureState,
    density_from_ensemble,
    gram_schmidt,
)

INDEPENDENCE_TOL = 1e-10
SPAN_TOL = 1e-8
CROSS_TOL = 1e-10

SQRT_HALF = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class SignalEnsemble:
    """Linearly independent signal states with probabilities.

    States are re-sorted so probabilities are non-increasing. ``order[i]`` is
    the caller's original index of the state now at position ``i``.
    """

    states: tuple[PureState, ...]
    probs: tuple[float, ...]
    ambient_dim: int
    order: tuple[int, ...]

    @classmethod
    def create(cls, states: Sequence[PureState], probs: Sequence[float]) -> SignalEnsemble:
        states = [s if isinstance(s, PureState) else PureState(s) for s in states]
        if not states:
            raise ValidationError("ensemble needs at least one state")
        if len(states) != len(probs):
            raise ValidationError(
                f"got {len(states)} states but {len(probs)} probabilities"
            )
        dims = {s.dim for s in states}
        if len(dims) != 1:
            raise ValidationError(f"states have mismatched dimensions {sorted(dims)}")
        p = [float(x) for x in probs]
        if any(x < 0 for x in p):
            raise ValidationError(f"probabilities must be nonnegative, got {p}")
        total = sum(p)
        if abs(total - 1.0) > NORM_TOL:
            raise ValidationError(f"probabilities sum to {total:.12g}, expected 1")
        cols = np.column_stack([s.amplitudes for s in states])
        min_eig = float(np.linalg.eigvalsh(cols.conj().T @ cols)[0])
        if min_eig <= INDEPENDENCE_TOL:
            raise ValidationError(
                f"states are not linearly independent: Gram matrix min eigenvalue {min_eig:.3e}"
            )
        order = sorted(range(len(p)), key=lambda i: -p[i])
        return cls(
            states=tuple(states[i] for i in order),
            probs=tuple(p[i] for i in order),
            ambient_dim=dims.pop(),
            order=tuple(order),
        )

    def __len__(self) -> int:
        return len(self.states)

    @property
    def span_dim(self) -> int:
        return len(self.states)

    def density(self) -> DensityOperator:
        return density_from_ensemble(self.states, self.probs)

    def span_basis(self) -> list[np.ndarray]:
        """Orthonormal basis of the span, starting from the most probable state."""
        return gram_schmidt([s.amplitudes for s in self.states])


@dataclass(frozen=True, eq=False)
class DecomposableSource:
    """Source emitting from H1 with probability p1 and from H2 otherwise, H1 orthogonal to H2."""

    sub1: SignalEnsemble
    sub2: SignalEnsemble
    p1: float
    basis1: tuple[np.ndarray, ...]
    basis2: tuple[np.ndarray, ...]

    @property
    def p2(self) -> float:
        return 1.0 - self.p1

    @property
    def d1(self) -> int:
        return len(self.basis1)

    @property
    def d2(self) -> int:
        return len(self.basis2)

    @property
    def ambient_dim(self) -> int:
        return self.sub1.ambient_dim


@dataclass(frozen=True, eq=False)
class SignalSequence:
    """Tags (1 or 2) naming the subspace of each draw, with the state index inside it."""

    tags: np.ndarray
    indices: np.ndarray

    def __len__(self) -> int:
        return int(self.tags.size)

    def __iter__(self):
        return zip(self.tags.tolist(), self.indices.tolist())


def bell_basis() -> list[PureState]:
    """Psi-, Psi+, phi+, phi- over the product basis (uu, ud, du, dd)."""
    h = SQRT_HALF
    return [
        PureState(np.array([0, h, -h, 0], dtype=np.complex128)),
        PureState(np.array([0, h, h, 0], dtype=np.complex128)),
        PureState(np.array([h, 0, 0, h], dtype=np.complex128)),
        PureState(np.array([h, 0, 0, -h], dtype=np.complex128)),
    ]


def _max_overlap(basis_a, states_b) -> tuple[int, float]:
    worst_j, worst = -1, 0.0
    for j, s in enumerate(states_b):
        mag = float(np.sqrt(sum(abs(np.vdot(e, s.amplitudes)) ** 2 for e in basis_a)))
        if mag > worst:
            worst_j, worst = j, mag
    return worst_j, worst


def compose_source(p1: float, sub1: SignalEnsemble, sub2: SignalEnsemble) -> DecomposableSource:
    if not 0.0 <= p1 <= 1.0:
        raise ValidationError(f"p1 must lie in [0, 1], got {p1!r}")
    if sub1.ambient_dim != sub2.ambient_dim:
        raise ValidationError(
            f"sub-ensembles live in different spaces ({sub1.ambient_dim} vs {sub2.ambient_dim})"
        )
    basis1 = sub1.span_basis()
    basis2 = sub2.span_basis()
    cross = max(abs(np.vdot(a, b)) for a in basis1 for b in basis2)
    if cross >= CROSS_TOL:
        j, mag = _max_overlap(basis1, sub2.states)
        k = int(np.argmax([abs(np.vdot(s.amplitudes, sub2.states[j].amplitudes)) for s in sub1.states]))
        raise ValidationError(
            f"subspaces are not orthogonal: sub2 state {sub2.order[j]} has overlap "
            f"magnitude {mag:.6g} with H1 (largest pairing: sub1 state {sub1.order[k]})"
        )
    for name, ens, basis in (("sub1", sub1, basis1), ("sub2", sub2, basis2)):
        cols = np.column_stack(basis)
        for i, s in enumerate(ens.states):
            resid = s.amplitudes - cols @ (cols.conj().T @ s.amplitudes)
            if np.linalg.norm(resid) >= SPAN_TOL:
                raise ValidationError(f"{name} state {ens.order[i]} lies outside its subspace basis")
    return DecomposableSource(
        sub1=sub1, sub2=sub2, p1=float(p1), basis1=tuple(basis1), basis2=tuple(basis2)
    )


def bell_source(p1: float = 0.5, triplet_probs: Sequence[float] = (1 / 3, 1 / 3, 1 / 3)) -> DecomposableSource:
    """Singlet in H1, the three triplet states in H2."""
    singlet, *triplet = bell_basis()
    return compose_source(
        p1,
        SignalEnsemble.create([singlet], [1.0]),
        SignalEnsemble.create(triplet, list(triplet_probs)),
    )


def total_density(source: DecomposableSource) -> DensityOperator:
    rho = source.p1 * source.sub1.density().matrix + source.p2 * source.sub2.density().matrix
    return DensityOperator(rho)


def sample_sequence(source: DecomposableSource, n: int, seed: int) -> SignalSequence:
    """Draw n i.i.d. signals.

    Uses numpy's PCG64 generator seeded with ``seed``: one uniform per signal
    picks the subspace (tag 1 when below p1), then one categorical draw per
    signal from each sub-ensemble, of which the tagged one is kept.
    """
    if n < 1:
        raise ValidationError(f"sequence length must be >= 1, got {n}")
    rng = np.random.default_rng(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    in_h1 = rng.random(n) < source.p1
    idx1 = rng.choice(len(source.sub1), size=n, p=np.asarray(source.sub1.probs))
    idx2 = rng.choice(len(source.sub2), size=n, p=np.asarray(source.sub2.probs))
    tags = np.where(in_h1, 1, 2).astype(np.uint8)
    indices = np.where(in_h1, idx1, idx2).astype(np.int64)
    return SignalSequence(tags=tags, indices=indices)


def random_states_in(basis: Sequence[np.ndarray], count: int, rng: np.random.Generator) -> list[PureState]:
    """Random complex combinations of an orthonormal basis."""
    cols = np.column_stack(basis)
    coeffs = rng.standard_normal((len(basis), count)) + 1j * rng.standard_normal((len(basis), count))
    return [PureState.normalized(cols @ coeffs[:, j]) for j in range(count)]


def random_source(
    rng: np.random.Generator, ambient_dim: int, d1: int, d2: int, p1: float | None = None
) -> DecomposableSource:
    """Random orthogonal two-subspace source for property tests."""
    if d1 + d2 > ambient_dim:
        raise ValidationError(f"d1 + d2 = {d1 + d2} exceeds ambient dimension {ambient_dim}")
    z = rng.standard_normal((ambient_dim, ambient_dim)) + 1j * rng.standard_normal((ambient_dim, ambient_dim))
    frame = gram_schmidt(list(z.T))
    sub1 = SignalEnsemble.create(random_states_in(frame[:d1], d1, rng), rng.dirichlet(np.ones(d1)))
    sub2 = SignalEnsemble.create(random_states_in(frame[d1 : d1 + d2], d2, rng), rng.dirichlet(np.ones(d2)))
    if p1 is None:
        p1 = float(rng.uniform())
    return compose_source(p1, sub1, sub2)


# -- file I/O --------------------------------------------------------------


def _parse_states(raw, field: str, ambient_dim: int) -> list[PureState]:
    if not isinstance(raw, list) or not raw:
        raise ValidationError(f"{field}: expected a non-empty list of states")
    states = []
    for i, amps in enumerate(raw):
        where = f"{field}[{i}]"
        if not isinstance(amps, list) or len(amps) != ambient_dim:
            raise ValidationError(f"{where}: expected {ambient_dim} amplitudes")
        vec = np.empty(ambient_dim, dtype=np.complex128)
        for k, pair in enumerate(amps):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
            ):
                raise ValidationError(f"{where}[{k}]: amplitude must be a [re, im] pair of numbers")
            vec[k] = complex(float(pair[0]), float(pair[1]))
        try:
            states.append(PureState(vec))
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from None
    return states


def _parse_ensemble(block, field: str, ambient_dim: int) -> SignalEnsemble:
    if not isinstance(block, dict):
        raise ValidationError(f"{field}: expected an object")
    for key in ("states", "probs"):
        if key not in block:
            raise ValidationError(f"{field}: missing field '{key}'")
    states = _parse_states(block["states"], f"{field}.states", ambient_dim)
    probs = block["probs"]
    if not isinstance(probs, list) or not all(isinstance(x, (int, float)) for x in probs):
        raise ValidationError(f"{field}.probs: expected a list of numbers")
    try:
        return SignalEnsemble.create(states, probs)
    except ValidationError as exc:
        raise ValidationError(f"{field}: {exc}") from None


def parse_source_parts(data: dict):
    """Validate everything except cross-subspace orthogonality.

    Returns a SignalEnsemble, or ``(p1, sub1, sub2)`` when the document
    describes two subspaces.
    """
    if not isinstance(data, dict):
        raise ValidationError("top level: expected an object")
    dim = data.get("ambient_dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ValidationError("ambient_dim: expected a positive integer")
    if "subspaces" not in data:
        return _parse_ensemble(data, "top level", dim)
    blocks = data["subspaces"]
    if not isinstance(blocks, list) or len(blocks) != 2:
        raise ValidationError("subspaces: expected exactly two blocks")
    subs, weights = [], []
    for i, block in enumerate(blocks):
        field = f"subspaces[{i}]"
        if not isinstance(block, dict) or "p_subspace" not in block:
            raise ValidationError(f"{field}: missing field 'p_subspace'")
        w = block["p_subspace"]
        if not isinstance(w, (int, float)) or not 0.0 <= w <= 1.0:
            raise ValidationError(f"{field}.p_subspace: expected a number in [0, 1]")
        weights.append(float(w))
        subs.append(_parse_ensemble(block, field, dim))
    if abs(sum(weights) - 1.0) > NORM_TOL:
        raise ValidationError(f"subspaces: p_subspace values sum to {sum(weights):.12g}, expected 1")
    return weights[0], subs[0], subs[1]


def read_source_document(path: Union[str, Path]) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def load_source(path: Union[str, Path]) -> Union[DecomposableSource, SignalEnsemble]:
    parts = parse_source_parts(read_source_document(path))
    if isinstance(parts, SignalEnsemble):
        return parts
    return compose_source(*parts)


def _encode_states(states) -> list:
    return [[[float(a.real), float(a.imag)] for a in s.amplitudes] for s in states]


def _ensemble_doc(ens: SignalEnsemble) -> dict:
    return {"states": _encode_states(ens.states), "probs": [float(p) for p in ens.probs]}


def source_document(obj: Union[DecomposableSource, SignalEnsemble]) -> dict:
    if isinstance(obj, SignalEnsemble):
        return {"ambient_dim": obj.ambient_dim, **_ensemble_doc(obj)}
    return {
        "ambient_dim": obj.ambient_dim,
        "subspaces": [
            {"p_subspace": obj.p1, **_ensemble_doc(obj.sub1)},
            {"p_subspace": obj.p2, **_ensemble_doc(obj.sub2)},
        ],
    }


_PAIR = re.compile(r"\[\s*(-?[\d.eE+-]+),\s*(-?[\d.eE+-]+)\s*\]")


def save_source(obj: Union[DecomposableSource, SignalEnsemble], path: Union[str, Path]) -> None:
    text = json.dumps(source_document(obj), indent=2)
    # one [re, im] pair per line
    text = _PAIR.sub(r"[\1, \2]", text)
    Path(path).write_text(text + "\n")
