import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rolecluster.constraints import Scenario
from rolecluster.errors import InputError
from rolecluster.evaluation import compute_der, timeline_from_labels
from rolecluster.pipeline import ClusteringConfig, run_pipeline
from rolecluster.synthesis import (
    RoleScheme,
    SynthConfig,
    derive_seed,
    generate_session,
    sample_oracle_constraints,
    simulate_role_classifier,
)


def test_zero_noise_gives_identical_embeddings_per_speaker():
    s = generate_session(SynthConfig(n_speakers=3, noise_sigma=0.0, seed=2))
    for spk in set(s.speakers):
        rows = s.embeddings[[i for i, x in enumerate(s.speakers) if x == spk]]
        assert np.all(rows == rows[0])


def test_same_seed_same_session():
    a = generate_session(SynthConfig(seed=9))
    b = generate_session(SynthConfig(seed=9))
    assert np.array_equal(a.embeddings, b.embeddings)
    assert a.segments == b.segments and a.predictions == b.predictions
    c = generate_session(SynthConfig(seed=10))
    assert not np.array_equal(a.embeddings, c.embeddings)


@given(st.integers(0, 10_000), st.integers(2, 5), st.integers(1, 12))
@settings(max_examples=30)
def test_session_shape_and_timing(seed, n_speakers, per):
    s = generate_session(SynthConfig(seed=seed, n_speakers=n_speakers, segments_per_speaker=per,
                                     max_centroid_cosine=0.5))
    n = n_speakers * per
    assert len(s.segments) == n and s.embeddings.shape == (n, 16)
    np.testing.assert_allclose(np.linalg.norm(s.embeddings, axis=1), 1.0)
    for prev, seg in zip(s.segments, s.segments[1:]):
        assert seg.start_s == prev.end_s
    for seg in s.segments:
        assert 3.0 - 1e-9 <= seg.end_s - seg.start_s <= 15.0 + 1e-9
        assert 1 <= seg.word_count <= 45
    assert sorted(set(s.speakers)) == [f"spk{i}" for i in range(n_speakers)]


def test_centroids_respect_max_cosine():
    cfg = SynthConfig(n_speakers=6, dim=16, noise_sigma=0.0, max_centroid_cosine=0.1, seed=4,
                      segments_per_speaker=1)
    x = generate_session(cfg).embeddings
    cos = x @ x.T
    assert cos[~np.eye(len(x), dtype=bool)].max() <= 0.1


def test_infeasible_centroids_raise():
    with pytest.raises(InputError, match="centroids"):
        generate_session(SynthConfig(n_speakers=20, dim=4, max_centroid_cosine=-0.5))


def test_one_to_one_roles_are_bijective():
    s = generate_session(SynthConfig(n_speakers=2, seed=1))
    pairs = set(zip(s.speakers, s.oracle_roles))
    assert len(pairs) == 2 and len({r for _, r in pairs}) == 2


def test_host_vs_rest_roles():
    s = generate_session(SynthConfig(n_speakers=4, role_scheme=RoleScheme.HOST_VS_REST, seed=1))
    for spk, role in zip(s.speakers, s.oracle_roles):
        assert role == ("host" if spk == "spk0" else "non-host")
    assert len(s.predictions) == len(s.segments)


def test_non_binary_scheme_has_no_simulator():
    s = generate_session(SynthConfig(n_speakers=3, seed=1))
    assert s.predictions == []
    with pytest.raises(InputError, match="binary"):
        simulate_role_classifier(s, 0.5, 0)


def test_floor_one_is_always_right():
    s = generate_session(SynthConfig(segments_per_speaker=100, classifier_accuracy_floor=1.0))
    assert all(p.confidence == 1.0 for p in s.predictions)
    assert [p.role for p in s.predictions] == s.oracle_roles


def test_simulator_is_calibrated():
    s = generate_session(SynthConfig(segments_per_speaker=5000, seed=21))
    preds = simulate_role_classifier(s, 0.5, seed=3)
    truth = s.oracle_roles
    conf = np.array([p.confidence for p in preds])
    hit = np.array([p.role == t for p, t in zip(preds, truth)])
    assert abs(hit.mean() - 0.75) <= 0.02
    accs = [hit[conf >= t].mean() for t in (0.5, 0.7, 0.9)]
    assert accs == sorted(accs)


@pytest.mark.parametrize("scenario", [Scenario.BOTH, Scenario.ML_ONLY, Scenario.CL_ONLY])
def test_oracle_fraction_counts(scenario):
    s = generate_session(SynthConfig(segments_per_speaker=6, seed=2))
    roles = np.array(s.oracle_roles)
    same = roles[:, None] == roles[None, :]
    iu = np.triu_indices(len(roles), 1)
    m = int({Scenario.BOTH: same[iu].size, Scenario.ML_ONLY: same[iu].sum(),
             Scenario.CL_ONLY: (~same[iu]).sum()}[scenario])
    assert not sample_oracle_constraints(s, 0.0, scenario, 0).any()
    for frac in (0.5, 1.0):
        z = sample_oracle_constraints(s, frac, scenario, 0)
        assert np.count_nonzero(np.triu(z, 1)) == int(np.floor(frac * m))
        assert np.array_equal(z, z.T)
        nz = z != 0
        assert np.all(z[nz] == np.where(same, 1.0, -1.0)[nz])


def test_oracle_fractions_are_nested():
    s = generate_session(SynthConfig(segments_per_speaker=8, seed=5))
    prev = np.zeros((16, 16), dtype=bool)
    for frac in (0.25, 0.5, 0.75, 1.0):
        cur = sample_oracle_constraints(s, frac, Scenario.BOTH, 3) != 0
        assert np.all(cur[prev])
        prev = cur


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(1, 2) == derive_seed(1, 2)
    assert len({derive_seed(1, i) for i in range(100)}) == 100


def test_well_separated_sessions_cluster_cleanly():
    confusion = []
    for seed in range(50):
        s = generate_session(SynthConfig(n_speakers=2, dim=16, noise_sigma=0.05, seed=seed))
        res = run_pipeline(s.embeddings)
        hyp = timeline_from_labels([x.start_s for x in s.segments], [x.end_s for x in s.segments],
                                   res.labels)
        rep = compute_der(s.reference, hyp)
        confusion.append(rep.confusion_s / rep.scored_s)
    assert np.mean(confusion) < 0.01
