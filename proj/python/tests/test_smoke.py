"""Smoke tests for the pymealsense extension module."""

import math

import pytest

pymealsense = pytest.importorskip("pymealsense")
scipy_stats = pytest.importorskip("scipy.stats")


def test_welch_t_matches_scipy():
    a = [1.2, 3.4, 2.2, 5.1, 4.4, 2.9]
    b = [2.0, 6.5, 4.1, 5.5, 7.2]
    t, df, p = pymealsense.welch_t(a, b)
    ref = scipy_stats.ttest_ind(a, b, equal_var=False)
    assert math.isclose(t, ref.statistic, rel_tol=1e-9)
    assert math.isclose(p, ref.pvalue, rel_tol=1e-7)
    assert df > 0


def test_cohens_d_hand_example():
    d, lo, hi = pymealsense.cohens_d([1, 2, 3], [3, 4, 5])
    assert math.isclose(d, -2.0, rel_tol=1e-12)
    assert math.isclose(lo, -3.96, rel_tol=1e-6)
    assert math.isclose(hi, -0.04, rel_tol=1e-4)
    assert lo <= d <= hi


def test_student_t_p_sanity():
    assert pymealsense.student_t_two_sided_p(0.0, 12) == 1.0
    p = pymealsense.student_t_two_sided_p(2.0, 12)
    ref = 2 * scipy_stats.t.sf(2.0, 12)
    assert math.isclose(p, ref, rel_tol=1e-9)


def test_radius_of_gyration_two_points():
    dlon = 200.0 / 6371000.0 * 180.0 / math.pi
    r = pymealsense.radius_of_gyration([(0.0, 0.0), (0.0, dlon)])
    assert math.isclose(r, 100.0, rel_tol=1e-6)


def test_synth_matrix_shape_and_determinism():
    kwargs = dict(style="wearable-style", seed=11, n_participants=6, n_days=3)
    m1 = pymealsense.synth_matrix(**kwargs)
    m2 = pymealsense.synth_matrix(**kwargs)
    assert m1 == m2
    assert len(m1["features"]) == len(m1["groups"])
    assert len(m1["rows"]) == len(m1["labels"]) == len(m1["participants"])
    assert len(m1["rows"]) > 10
    assert set(m1["labels"]) <= {"alone", "with_others"}
    assert "time" in m1["features"]
    assert "location" in m1["features"]


def test_run_experiment_smoke():
    out = pymealsense.run_experiment(
        style="wearable-style",
        seed=4,
        n_participants=8,
        n_days=3,
        ntree=10,
        k=4,
        allow_any_ntree=True,
    )
    assert out
    for acc, prec, rec in out.values():
        assert 0.0 <= acc <= 1.0
        assert 0.0 <= prec <= 1.0
        assert 0.0 <= rec <= 1.0


def test_train_forest_and_predict():
    X = [[float(i)] for i in range(10)]
    y = [0] * 5 + [1] * 5
    model = pymealsense.train_forest(X, y, ntree=15, seed=3, allow_any_ntree=True)
    label, prob = model.predict([0.0])
    assert label == "alone"
    assert 0.5 <= prob <= 1.0
    label, _ = model.predict([9.0])
    assert label == "with_others"
    importance = model.feature_importance()
    assert math.isclose(sum(importance.values()), 1.0, rel_tol=1e-9)
    assert model.to_json()
