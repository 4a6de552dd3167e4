import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracle_siege.auth import (
    AuthError, AuthSystem, BudgetExhausted, Decision, OracleHandle, Principal,
    as_feature_matrix, default_bounds, enrollment_self_test, iter_streams, read_enrollment_csv,
    register, stream_digest, write_enrollment_csv,
)
from oracle_siege.harness import generate_synthetic_principals, split_holdout
from oracle_siege.models import LinearSVM, TrainConfig

FAST = TrainConfig(n_trees=15, max_depth=6, nn_epochs=60, svm_epochs=60, seed=0)


def planted(stream_size=1, variance_check=None):
    """Two principals; the oracle says "b" exactly when feature 0 is positive."""
    svm = LinearSVM(classes=["a", "b"], W=np.array([[1.0, 0.0]]), b=np.array([0.0]))
    principals = (Principal("a", -np.ones((2, 2))), Principal("b", np.ones((2, 2))))
    return AuthSystem(k=2, stream_size=stream_size, variance_check=variance_check,
                      principals=principals, models={None: svm})


def stream_with(n_pos, m):
    rng = np.random.default_rng(n_pos)
    x0 = np.r_[np.full(n_pos, 1.0), np.full(m - n_pos, -1.0)]
    return np.column_stack([x0, rng.normal(size=m)])


def test_majority_of_seven():
    s = planted(stream_size=7)
    assert s.decide("b", stream_with(4, 7))[0] is Decision.YES
    assert s.decide("b", stream_with(3, 7))[0] is Decision.NO
    assert s.decide("a", stream_with(3, 7))[0] is Decision.YES


def test_even_split_is_no():
    s = planted(stream_size=2)
    assert s.decide("a", stream_with(1, 2))[0] is Decision.NO
    assert s.decide("b", stream_with(1, 2))[0] is Decision.NO


def test_wrong_stream_length_rejected():
    with pytest.raises(AuthError, match="7 samples"):
        planted(stream_size=7).decide("a", stream_with(1, 3))


def test_unknown_username_is_no_with_flag():
    handle = OracleHandle(planted(), budget=5)
    assert handle.authenticate("mallory", np.ones((1, 2))) is Decision.NO
    assert handle.audit_log[0].flag == "unknown_username"
    assert handle.query_count == 1


def test_replayed_sample_fails_variance_check():
    s = planted(stream_size=5, variance_check=0.01)
    stream = np.tile([2.0, 1.0], (5, 1))
    # variance of a repeated row is exactly 0 < 0.01
    assert float(stream.var(axis=0).mean()) == 0.0
    decision, _, flag = s.decide("b", stream)
    assert decision is Decision.NO and flag == "low_variance"
    assert s.decide("b", stream_with(5, 5))[0] is Decision.YES


def test_variance_check_ignored_for_single_sample_streams():
    assert planted(stream_size=1, variance_check=1.0).decide("b", np.ones((1, 2)))[0] is Decision.YES


def test_non_finite_and_mismatched_inputs():
    with pytest.raises(AuthError, match="finite"):
        as_feature_matrix([[1.0, np.nan]], 2)
    with pytest.raises(AuthError, match="dimension mismatch"):
        as_feature_matrix([[1.0, 2.0, 3.0]], 2)
    with pytest.raises(AuthError):
        as_feature_matrix(np.empty((0, 2)), 2)


def test_budget_is_a_hard_stop():
    handle = OracleHandle(planted(), budget=2)
    oracle = handle.adversary_view()
    oracle.query("a", np.ones((1, 2)))
    oracle.query("a", np.ones((1, 2)))
    assert oracle.remaining == 0
    with pytest.raises(BudgetExhausted):
        oracle.query("a", np.ones((1, 2)))
    assert handle.query_count == 2


def test_adversary_surface_is_minimal():
    handle = OracleHandle(planted(), budget=3)
    oracle = handle.adversary_view()
    public = {n for n in dir(oracle) if not n.startswith("_")}
    assert public == {"query", "remaining", "stream_size", "k", "bounds"}
    assert not hasattr(oracle, "__dict__")
    with pytest.raises(AttributeError):
        oracle.system = None
    assert oracle.query("b", np.ones((1, 2))) in (Decision.YES, Decision.NO)


def test_audit_export(tmp_path):
    handle = OracleHandle(planted(), budget=3)
    handle.authenticate("a", -np.ones((1, 2)))
    handle.authenticate("zz", -np.ones((1, 2)))
    path = tmp_path / "audit.jsonl"
    handle.export_audit(path)
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    assert [r["decision"] for r in rows] == ["YES", "NO"]
    assert rows[0]["digest"] == stream_digest(-np.ones((1, 2)))
    assert rows[1]["flag"] == "unknown_username"


def test_register_into_empty_system():
    s = register(AuthSystem(k=3, backend="nn", train_config=FAST), "solo", np.ones((4, 3)) + np.eye(4, 3))
    assert s.usernames == ["solo"]
    assert s.decide("solo", np.ones((1, 3)))[0] is Decision.YES


@pytest.mark.parametrize("mode", ["multiclass", "per-principal"])
def test_register_then_add_one(mode):
    data = generate_synthetic_principals(4, 6, 8, seed=1)
    s = AuthSystem(k=6, backend="rf", mode=mode, train_config=FAST).with_principals(data)
    extra = generate_synthetic_principals(2, 6, 8, seed=9)["u1"]
    s2 = register(s, "new", extra)
    assert len(s2.usernames) == 5 and len(s.usernames) == 4
    assert s2.decide("new", extra[:1])[0] is Decision.YES
    with pytest.raises(AuthError, match="duplicate"):
        register(s2, "new", extra)
    with pytest.raises(AuthError, match="reserved"):
        register(s2, "other", extra)


def test_fifty_principals_fifteen_samples():
    data = generate_synthetic_principals(50, 16, 15, seed=0)
    enroll, hold = split_holdout(data)
    s = AuthSystem(k=16, backend="nn", train_config=FAST).with_principals(enroll)
    assert len(s.usernames) == 50
    assert all(len(p.samples) == 10 for p in s.principals)
    result = enrollment_self_test(s, hold)
    assert min(result.values()) == 1.0
    for name in list(hold)[:10]:
        assert s.decide(name, hold[name][:1])[0] is Decision.YES


def test_duplicated_principal_caught_by_self_test():
    data = generate_synthetic_principals(4, 6, 15, seed=3)
    data["twin"] = data["u0"].copy()
    enroll, hold = split_holdout(data)
    s = AuthSystem(k=6, backend="nn", train_config=FAST).with_principals(enroll)
    result = enrollment_self_test(s, hold)
    assert min(result["u0"], result["twin"]) < 1.0


def test_csv_roundtrip(tmp_path):
    data = generate_synthetic_principals(3, 4, 5, seed=2)
    path = tmp_path / "e.csv"
    write_enrollment_csv(path, data)
    back = read_enrollment_csv(path)
    assert list(back) == list(data)
    for name in data:
        np.testing.assert_array_equal(back[name], data[name])


@pytest.mark.parametrize("body, match", [
    ("", "empty file"),
    ("name,a,b\nx,1,2\n", "header"),
    ("username,f0,f1\nx,1\n", ":2: expected 3 columns"),
    ("username,f0\nx,1\ny,zz\n", ":3:"),
    ("username,f0\nx,inf\n", "non-finite"),
])
def test_csv_errors_carry_location(tmp_path, body, match):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(AuthError, match=match):
        read_enrollment_csv(path)


def test_default_bounds_pad_the_range():
    b = default_bounds(np.array([[0.0, 5.0], [4.0, 5.0]]))
    np.testing.assert_allclose(b[0], [-1.0, 5.0])
    assert b[1, 0] < 5.0 < b[1, 1]


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 9), st.integers(1, 20))
def test_iter_streams_cover_every_sample(m, n):
    X = np.arange(n, dtype=float)[:, None]
    streams = list(iter_streams(X, m))
    assert all(len(s) == m for s in streams)
    assert set(np.concatenate(streams).ravel()) == set(range(n))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.booleans(), min_size=1, max_size=9))
def test_decision_is_strict_majority(flags):
    m = len(flags)
    s = planted(stream_size=m)
    stream = np.column_stack([np.where(flags, 1.0, -1.0), np.zeros(m)])
    want = Decision.YES if 2 * sum(flags) > m else Decision.NO
    assert s.decide("b", stream)[0] is want
