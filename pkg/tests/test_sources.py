import json
from pathlib import Path

import numpy as np
import pytest

from qcompress.errors import ValidationError
from qcompress.linalg import PureState, von_neumann_entropy
from qcompress.sources import (
    DecomposableSource,
    SignalEnsemble,
    bell_basis,
    bell_source,
    compose_source,
    load_source,
    random_source,
    sample_sequence,
    save_source,
    total_density,
)

H = 1 / np.sqrt(2)
FIXTURE = Path(__file__).parents[1] / "src" / "qcompress" / "data" / "bell.json"


def test_bell_basis_amplitudes():
    psi_m, psi_p, phi_p, phi_m = bell_basis()
    np.testing.assert_array_equal(psi_m.amplitudes, [0, H, -H, 0])
    np.testing.assert_array_equal(phi_p.amplitudes, [H, 0, 0, H])
    np.testing.assert_array_equal(psi_p.amplitudes, [0, H, H, 0])
    np.testing.assert_array_equal(phi_m.amplitudes, [H, 0, 0, -H])
    cols = np.column_stack([s.amplitudes for s in bell_basis()])
    np.testing.assert_allclose(cols.conj().T @ cols, np.eye(4), atol=1e-15)


def test_bell_fixture_dimensions(bell):
    assert isinstance(bell, DecomposableSource)
    assert (bell.d1, bell.d2) == (1, 3)
    assert bell.p1 == 0.5


def test_total_density_bell(bell):
    rho = total_density(bell)
    cols = np.column_stack([s.amplitudes for s in bell_basis()])
    np.testing.assert_allclose(cols.conj().T @ rho.matrix @ cols, np.diag([0.5, 1 / 6, 1 / 6, 1 / 6]), atol=1e-12)
    assert np.trace(rho.matrix).real == pytest.approx(1)


def test_total_density_p1_one_is_rho1():
    src = bell_source(p1=1.0)
    np.testing.assert_allclose(total_density(src).matrix, src.sub1.density().matrix)


def test_compose_rejects_overlap():
    sub1 = SignalEnsemble.create([PureState.basis(3, 0)], [1.0])
    leaky = PureState.normalized([0.3, np.sqrt(1 - 0.09), 0])
    sub2 = SignalEnsemble.create([leaky, PureState.basis(3, 2)], [0.5, 0.5])
    with pytest.raises(ValidationError, match=r"overlap magnitude 0\.3"):
        compose_source(0.5, sub1, sub2)


def test_compose_rejects_bad_weight(bell):
    with pytest.raises(ValidationError):
        compose_source(1.5, bell.sub1, bell.sub2)


def test_ensemble_sorted_with_recorded_permutation():
    states = [PureState.basis(3, i) for i in range(3)]
    ens = SignalEnsemble.create(states, [0.2, 0.5, 0.3])
    assert ens.probs == (0.5, 0.3, 0.2)
    assert ens.order == (1, 2, 0)
    assert ens.states[0] == states[1]


def test_ensemble_rejects_dependent_states():
    a = PureState.basis(2, 0)
    b = PureState.normalized([1, 1])
    c = PureState.basis(2, 1)
    with pytest.raises(ValidationError, match="linearly independent"):
        SignalEnsemble.create([a, b, c], [0.4, 0.3, 0.3])


def test_entropy_invariant_under_state_reordering(rng):
    src = random_source(rng, 6, 2, 3)
    s = von_neumann_entropy(total_density(src))
    perm = [2, 0, 1]
    sub2 = SignalEnsemble.create([src.sub2.states[i] for i in perm], [src.sub2.probs[i] for i in perm])
    again = compose_source(src.p1, src.sub1, sub2)
    assert abs(von_neumann_entropy(total_density(again)) - s) < 1e-12


def test_sampling_p1_one_gives_all_h1():
    seq = sample_sequence(bell_source(p1=1.0), 5, seed=3)
    assert seq.tags.tolist() == [1] * 5


def test_sampling_is_deterministic(bell):
    a = sample_sequence(bell, 200, seed=99)
    b = sample_sequence(bell, 200, seed=99)
    np.testing.assert_array_equal(a.tags, b.tags)
    np.testing.assert_array_equal(a.indices, b.indices)


def test_sampling_frequency(bell):
    seq = sample_sequence(bell, 100_000, seed=12345)
    assert abs(np.mean(seq.tags == 1) - 0.5) < 0.01
    h2 = seq.indices[seq.tags == 2]
    assert h2.max() < 3 and h2.min() >= 0


def test_sampling_rejects_empty(bell):
    with pytest.raises(ValidationError):
        sample_sequence(bell, 0, seed=0)


def test_shipped_fixture_matches_constructor(bell):
    loaded = load_source(FIXTURE)
    assert loaded.p1 == bell.p1
    for a, b in ((loaded.sub1, bell.sub1), (loaded.sub2, bell.sub2)):
        assert a.probs == b.probs
        for x, y in zip(a.states, b.states):
            np.testing.assert_array_equal(x.amplitudes, y.amplitudes)


def test_round_trip_is_bit_exact(tmp_path, rng):
    for _ in range(5):
        src = random_source(rng, 7, 3, 3)
        path = tmp_path / "src.json"
        save_source(src, path)
        back = load_source(path)
        assert back.p1 == src.p1
        for a, b in ((back.sub1, src.sub1), (back.sub2, src.sub2)):
            assert a.probs == b.probs
            for x, y in zip(a.states, b.states):
                assert x.amplitudes.tobytes() == y.amplitudes.tobytes()


def test_single_ensemble_file(tmp_path):
    ens = SignalEnsemble.create([PureState.basis(2, 0), PureState.normalized([1, 1])], [0.7, 0.3])
    path = tmp_path / "ens.json"
    save_source(ens, path)
    back = load_source(path)
    assert isinstance(back, SignalEnsemble)
    assert back.probs == ens.probs


def _write(tmp_path, doc):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    return path


def test_load_rejects_unnormalized_probs(tmp_path):
    doc = json.loads(FIXTURE.read_text())
    doc["subspaces"][1]["probs"] = [0.3, 0.3, 0.3]
    with pytest.raises(ValidationError, match=r"subspaces\[1\].*sum to 0\.9"):
        load_source(_write(tmp_path, doc))


def test_load_rejects_dependent_states(tmp_path):
    doc = {
        "ambient_dim": 2,
        "states": [[[1, 0], [0, 0]], [[H, 0], [H, 0]], [[0, 0], [1, 0]]],
        "probs": [0.5, 0.25, 0.25],
    }
    with pytest.raises(ValidationError, match="linearly independent"):
        load_source(_write(tmp_path, doc))


def test_load_reports_parse_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "ambient_dim": 2,\n  "states": [\n')
    with pytest.raises(ValidationError, match="line 4"):
        load_source(path)


def test_load_reports_field(tmp_path):
    doc = {"ambient_dim": 2, "states": [[[1, 0]]], "probs": [1.0]}
    with pytest.raises(ValidationError, match=r"states\[0\]: expected 2 amplitudes"):
        load_source(_write(tmp_path, doc))
