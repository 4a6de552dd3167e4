import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import RuleModel
from oracle_siege.explainer import (
    Explanation, Rule, explain, fit_discretizer, proximity_weights, render_rules, sample_neighbors,
    weighted_ridge,
)


def test_quartile_boundaries_interpolate_linearly():
    # hand computation: position (n-1)q = 0.75, 1.5, 2.25 into [1, 2, 3, 4]
    disc = fit_discretizer(np.array([[1.0], [2.0], [3.0], [4.0]]), 4)
    np.testing.assert_allclose(disc.boundaries[0], [1.75, 2.5, 3.25])
    assert disc.intervals(0) == [(1.0, 1.75), (1.75, 2.5), (2.5, 3.25), (3.25, 4.0)]


def test_constant_feature_has_one_bin():
    disc = fit_discretizer(np.full((5, 1), 7.0))
    assert disc.n_bins(0) == 1
    assert disc.interval(0, 0) == (7.0, 7.0)


def test_two_bins_split_at_median():
    disc = fit_discretizer(np.array([[0.0], [10.0]]), 2)
    np.testing.assert_allclose(disc.boundaries[0], [5.0])


def test_value_on_a_cut_falls_in_lower_bin():
    disc = fit_discretizer(np.array([[1.0], [2.0], [3.0], [4.0]]), 4)
    assert disc.bin_of(np.array([[1.75], [1.7501], [0.0], [99.0]]))[:, 0].tolist() == [0, 1, 0, 3]


def test_discretizer_needs_data_and_two_bins():
    with pytest.raises(ValueError):
        fit_discretizer(np.empty((0, 3)))
    with pytest.raises(ValueError):
        fit_discretizer(np.ones((3, 2)), 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 6))
def test_bin_of_matches_searchsorted(seed, bins):
    rng = np.random.default_rng(seed)
    R = np.round(rng.normal(size=(rng.integers(2, 30), 4)), 1)  # rounding creates ties
    R[:, 3] = 1.0
    disc = fit_discretizer(R, bins)
    X = np.vstack([R, np.round(rng.normal(size=(30, 4)) * 2, 1)])
    ref = np.column_stack([np.searchsorted(c, X[:, j], side="left") for j, c in enumerate(disc.boundaries)])
    np.testing.assert_array_equal(disc.bin_of(X), ref)


def test_neighbors_stay_in_bins_and_keep_x_first():
    rng = np.random.default_rng(0)
    R = rng.normal(size=(50, 6))
    disc = fit_discretizer(R)
    x = R[3]
    Z = sample_neighbors(x, disc, 400, np.random.default_rng(1))
    np.testing.assert_array_equal(Z[0], x)
    changed = Z != x
    assert 0.4 < changed[1:].mean() < 0.6
    assert np.all(Z[changed] >= np.broadcast_to(disc.minimum, Z.shape)[changed])
    assert np.all(Z[changed] <= np.broadcast_to(disc.maximum, Z.shape)[changed])


def test_weighted_ridge_matches_augmented_least_squares():
    # oracle: solve the same problem as an ordinary least-squares system
    rng = np.random.default_rng(0)
    for n, p in [(60, 8), (20, 40)]:
        A = (rng.random((n, p)) < 0.3).astype(float)
        y = rng.normal(size=n)
        w = rng.random(n) + 0.1
        alpha = 0.05
        coef, intercept, r2 = weighted_ridge(A, y, w, alpha)
        sw = np.sqrt(w)
        top = np.column_stack([sw, A * sw[:, None]])
        pen = np.column_stack([np.zeros(p), np.sqrt(alpha) * np.eye(p)])
        sol = np.linalg.lstsq(np.vstack([top, pen]), np.r_[sw * y, np.zeros(p)], rcond=None)[0]
        np.testing.assert_allclose(coef, sol[1:], atol=1e-8)
        np.testing.assert_allclose(intercept, sol[0], atol=1e-8)
        assert 0.0 <= r2 <= 1.0


def test_proximity_kernel():
    np.testing.assert_allclose(proximity_weights([0.0, 1.0], 1.0), [1.0, np.exp(-1.0)])


def test_constant_model_gives_degenerate_zero_explanation():
    rng = np.random.default_rng(0)
    R = rng.normal(size=(40, 5))
    always_no = RuleModel(rule=lambda X: np.zeros(len(X)), k=5)
    e = explain(always_no, R[0], "YES", fit_discretizer(R), n_perturb=200, seed=0)
    assert e.degenerate
    assert all(r.weight == 0.0 for r in e.rules)
    assert len(e.rules) == 5


def test_threshold_model_ranks_its_feature_first():
    rng = np.random.default_rng(3)
    R = rng.uniform(0, 10, size=(200, 4))
    disc = fit_discretizer(R)
    model = RuleModel(rule=lambda X: X[:, 0] > 5, k=4)
    e = explain(model, np.array([4.0, 5.0, 5.0, 5.0]), "YES", disc, n_perturb=2000, seed=0)
    assert e.rules[0].feature == 0
    assert e.rules[0].lo >= 5.0 - 1e-9
    # the other features carry no signal, so their weights are far smaller
    assert e.rules[1].weight < 0.2 * e.rules[0].weight


def test_threshold_model_brute_force_fit_agrees():
    # rebuild the neighborhood fit by hand and check the top coefficient's bin
    rng = np.random.default_rng(3)
    R = rng.uniform(0, 10, size=(200, 4))
    disc = fit_discretizer(R)
    x = np.array([4.0, 5.0, 5.0, 5.0])
    Z = sample_neighbors(x, disc, 1500, np.random.default_rng(11))
    y = (Z[:, 0] > 5).astype(float)
    B = disc.bin_of(Z)
    A = np.zeros((len(Z), 16))
    for j in range(4):
        A[np.arange(len(Z)), 4 * j + B[:, j]] = 1.0
    d = np.linalg.norm(disc.standardize(Z) - disc.standardize(x), axis=1)
    w = np.exp(-d ** 2 / (0.75 * 2) ** 2)
    sw = np.sqrt(w)
    sol = np.linalg.lstsq(np.column_stack([sw, A * sw[:, None]]), sw * y, rcond=None)[0][1:]
    spans = [np.ptp(sol[4 * j: 4 * j + 4]) for j in range(4)]
    assert int(np.argmax(spans)) == 0
    best_bin = int(np.argmax(sol[:4]))
    assert disc.interval(0, best_bin)[0] >= 5.0 - 1e-9


def test_explain_is_seed_deterministic():
    rng = np.random.default_rng(1)
    R = rng.normal(size=(60, 6))
    model = RuleModel(rule=lambda X: X[:, 2] + X[:, 4] > 0.5, k=6)
    a = explain(model, R[0], "YES", fit_discretizer(R), n_perturb=300, seed=5)
    b = explain(model, R[0], "YES", fit_discretizer(R), n_perturb=300, seed=5)
    assert a == b


def test_explain_argument_checks():
    R = np.random.default_rng(0).normal(size=(20, 3))
    model = RuleModel(rule=lambda X: X[:, 0] > 0, k=3)
    with pytest.raises(ValueError):
        explain(model, R[0], "YES", None)
    with pytest.raises(ValueError):
        explain(model, R[0, :2], "YES", fit_discretizer(R))
    with pytest.raises(ValueError):
        explain(model, R[0], "YES", fit_discretizer(R), kernel_width=0.0)
    with pytest.warns(UserWarning, match="below 10"):
        explain(model, R[0], "YES", fit_discretizer(R), n_perturb=20)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_rules_are_sorted_nonnegative_and_are_bins(seed):
    rng = np.random.default_rng(seed)
    R = rng.normal(size=(40, 5))
    disc = fit_discretizer(R)
    w = rng.normal(size=5)
    model = RuleModel(rule=lambda X: X @ w > 0, k=5)
    e = explain(model, R[0], "NO", disc, n_perturb=300, seed=seed)
    weights = [r.weight for r in e.rules]
    assert weights == sorted(weights, reverse=True)
    assert min(weights) >= 0
    assert sorted(r.feature for r in e.rules) == list(range(5))
    for r in e.rules:
        assert (r.lo, r.hi) in disc.intervals(r.feature)


def test_render_single_rule():
    e = Explanation([Rule(3, 0.5, 1.0, 2.0)], "YES", 0.9)
    text = render_rules(e)
    assert text.splitlines()[1] == "f_3 in (1.0, 2.0]  weight=+0.500 toward YES"


def test_render_empty():
    text = render_rules(Explanation([], "NO", 0.0))
    assert text.splitlines() == ["explanation toward NO (local fit R^2=0.000)"]


def test_render_truncates():
    e = Explanation([Rule(j, 1.0 / (j + 1), 0.0, 1.0) for j in range(64)], "YES", 0.5)
    lines = render_rules(e, top=10).splitlines()
    assert "top 10 of 64" in lines[0]
    assert len(lines) == 11


def test_render_one_sided_with_discretizer():
    R = np.linspace(-10, 10, 41)[:, None]
    disc = fit_discretizer(R)
    lo_rule = Rule(0, 1.0, *disc.interval(0, 0))
    hi_rule = Rule(0, 1.0, *disc.interval(0, 3))
    text = render_rules(Explanation([lo_rule, hi_rule], "YES", 1.0), names=["L_49"], disc=disc)
    assert text.splitlines()[1].startswith("L_49 <= -5.00")
    assert text.splitlines()[2].startswith("L_49 > 5.00")


def test_explanation_json():
    e = Explanation([Rule(1, 0.25, -1.0, 0.0)], "YES", 0.3)
    assert json.loads(e.to_json()) == [{"feature": 1, "weight": 0.25, "lo": -1.0, "hi": 0.0}]
    assert e.top(0) == []
