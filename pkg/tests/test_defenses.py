import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracle_siege.attack import fit_latent_codec
from oracle_siege.auth import AuthSystem, Decision, default_bounds, enrollment_self_test
from oracle_siege.defenses import (
    FAKE_LABEL, OTHER_LABEL, DefenseConfig, augment, inject_fake_class, inject_other_class,
)
from oracle_siege.harness import generate_synthetic_principals, split_holdout
from oracle_siege.models import TrainConfig

FAST = TrainConfig(nn_epochs=80, seed=0)


def small_population(n=6, k=8, seed=0):
    data = generate_synthetic_principals(n, k, 15, seed=seed)
    enroll, hold = split_holdout(data)
    X = np.vstack(list(enroll.values()))
    labels = [name for name, v in enroll.items() for _ in range(len(v))]
    return enroll, hold, X, labels


def test_other_class_is_uniform_inside_bounds():
    X = np.zeros((4, 3))
    bounds = np.array([[0, 1], [-2, 2], [5, 6]], dtype=float)
    X2, lab2 = inject_other_class(X, ["a"] * 4, bounds, 500, seed=1)
    noise = X2[4:]
    assert lab2[4:] == [OTHER_LABEL] * 500
    assert np.all(noise >= bounds[:, 0]) and np.all(noise <= bounds[:, 1])
    np.testing.assert_allclose(noise.mean(axis=0), bounds.mean(axis=1), atol=0.15)


@pytest.mark.parametrize("count, bounds", [(0, [[0, 1]]), (-3, [[0, 1]]), (5, None), (5, [[0, np.inf]])])
def test_other_class_rejects_bad_input(count, bounds):
    with pytest.raises(ValueError):
        inject_other_class(np.zeros((2, 1)), ["a", "a"], bounds, count)


def test_fake_samples_lie_in_codec_span():
    _, _, X, labels = small_population()
    codec = fit_latent_codec(X, 3)
    X2, lab2 = inject_fake_class(X, labels, codec, 40, seed=0)
    fakes = X2[len(X):]
    assert lab2[len(X):] == [FAKE_LABEL] * 40
    # projection residual against the codec basis vanishes
    resid = (fakes - codec.mean) - (fakes - codec.mean) @ codec.basis @ codec.basis.T
    assert np.abs(resid).max() < 1e-9


def test_fake_box_from_one_sample_per_principal():
    _, _, X, labels = small_population()
    codec = fit_latent_codec(X, 3)
    X2, _ = inject_fake_class(X, labels, codec, 200, seed=4)
    Z = codec.encode(X2[len(X):])
    enc = codec.encode(X)
    assert np.all(Z.min(axis=0) >= enc.min(axis=0) - 1e-9)
    assert np.all(Z.max(axis=0) <= enc.max(axis=0) + 1e-9)


def test_single_principal_box_degenerates():
    X = np.random.default_rng(0).normal(size=(5, 4))
    codec = fit_latent_codec(X, 2)
    X2, _ = inject_fake_class(X, ["solo"] * 5, codec, 6, seed=0)
    fakes = X2[5:]
    np.testing.assert_allclose(fakes, np.tile(fakes[0], (6, 1)))
    assert any(np.allclose(fakes[0], codec.decode(codec.encode(x))) for x in X)


def test_fake_class_dimension_mismatch():
    codec = fit_latent_codec(np.random.default_rng(0).normal(size=(10, 4)), 2)
    with pytest.raises(ValueError, match="codec expects 4"):
        inject_fake_class(np.zeros((3, 5)), ["a"] * 3, codec, 2)


def test_augment_counts_and_determinism():
    enroll, _, X, labels = small_population()
    bounds = default_bounds(X)
    codec = fit_latent_codec(X, 3)
    cfg = DefenseConfig("all", codec=codec, seed=5)
    Xa, la = augment(X, labels, bounds, cfg)
    assert la.count(OTHER_LABEL) == la.count(FAKE_LABEL) == max(len(v) for v in enroll.values())
    Xb, lb = augment(X, labels, bounds, cfg)
    np.testing.assert_array_equal(Xa, Xb)
    assert la == lb
    Xn, ln = augment(X, labels, bounds, DefenseConfig("none"))
    np.testing.assert_array_equal(Xn, X)


def test_defense_config_checks():
    with pytest.raises(ValueError):
        DefenseConfig("bogus")
    with pytest.raises(ValueError):
        DefenseConfig("all")
    with pytest.raises(ValueError):
        DefenseConfig("random", samples_per_class=0)


@pytest.mark.parametrize("backend", ["rf", "svm", "nn"])
def test_defended_oracle_keeps_genuine_users_and_rejects_noise(backend):
    enroll, hold, X, _ = small_population(k=16)
    bounds = default_bounds(X)
    base = AuthSystem(k=16, bounds=bounds, backend=backend, train_config=FAST.replace(n_trees=30))
    plain = base.with_principals(enroll)
    defended = AuthSystem(k=16, bounds=bounds, backend=backend, train_config=FAST.replace(n_trees=30),
                          defense=DefenseConfig("random", seed=1)).with_principals(enroll)
    assert enrollment_self_test(plain, hold) == enrollment_self_test(defended, hold)
    assert min(enrollment_self_test(defended, hold).values()) == 1.0
    probes = np.random.default_rng(0).uniform(bounds[:, 0], bounds[:, 1], size=(200, 16))
    labels = defended.models[None].predict_labels(probes)
    # ten noise rows cannot tile a 16-d box, but they claim a visible share of it
    assert labels.count(OTHER_LABEL) >= 20
    assert OTHER_LABEL not in plain.models[None].classes
    for x, lab in zip(probes[:20], labels):
        if lab == OTHER_LABEL:
            assert all(defended.decide(u, x[None])[0] is Decision.NO for u in enroll)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 50), st.integers(0, 1000))
def test_other_class_count_and_seed(count, seed):
    bounds = np.array([[0.0, 1.0], [2.0, 3.0]])
    a = inject_other_class(np.zeros((1, 2)), ["x"], bounds, count, seed)
    b = inject_other_class(np.zeros((1, 2)), ["x"], bounds, count, seed)
    assert len(a[0]) == count + 1
    np.testing.assert_array_equal(a[0], b[0])
