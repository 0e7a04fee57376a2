import json
import math

import numpy as np
import pytest

import motionskill as ms


def test_filter_response():
    mags = ms.frequency_response(120.0, 24.0, 4, [0.0, 24.0, 59.0])
    assert mags[0] == pytest.approx(1.0, abs=1e-9)
    assert mags[1] == pytest.approx(math.sqrt(0.5), abs=1e-6)
    assert mags[2] < 1e-3


def test_filter_keeps_constant():
    out = ms.filter_series([3.0] * 50, 120.0)
    assert np.allclose(out, 3.0)


def test_nyquist_error():
    with pytest.raises(ms.MotionSkillError, match="Nyquist"):
        ms.filter_series([0.0] * 50, 30.0, 24.0)


def test_min_jerk_midpoint():
    assert ms.min_jerk_profile(0.5) == pytest.approx(0.5)


def test_metrics():
    pred = [1] * 7 + [1] + [0] * 2 + [0] * 4
    truth = [1] * 7 + [0] + [1] * 2 + [0] * 4
    m = ms.evaluate(pred, truth)
    assert m["accuracy"] == pytest.approx(0.7857, abs=1e-4)
    assert m["f1"] == pytest.approx(0.8235, abs=1e-4)


def test_pca_and_scaler():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(50, 4))
    comps, evr, proj = ms.pca(X, 4)
    assert np.allclose(comps @ comps.T, np.eye(4), atol=1e-8)
    assert evr.sum() == pytest.approx(1.0)
    assert proj.shape == (50, 4)
    Z = ms.scale("standard", X)
    assert np.allclose(Z.mean(axis=0), 0.0, atol=1e-12)


def test_folds():
    labels = [1] * 20 + [0] * 80
    folds = ms.stratified_kfold(labels, 10, 42)
    for f in range(10):
        assert sum(1 for i, g in enumerate(folds) if g == f and labels[i] == 1) == 2


def test_features_of_circle():
    t = np.arange(0, 2 * np.pi, 1 / 200)
    x, y = 100 * np.cos(t), 100 * np.sin(t)
    f = ms.kinematic_features(x, y, x, y, 200.0)
    assert f["rms_vel_l"] == pytest.approx(100.0, rel=5e-3)
    # Constant speed has no variance, so the correlation is defined as 0.
    assert f["bimanual_dexterity"] == 0.0
    u = np.sin(t) ** 2
    g = ms.kinematic_features(u, u, u, u, 200.0)
    assert g["bimanual_dexterity"] == pytest.approx(1.0)


def test_cli_round_trip(tmp_path):
    data = str(tmp_path / "data")
    code, _, err = ms.run_cli(["synth", "--subjects", "3", "--out", data])
    assert code == 0, err
    report = str(tmp_path / "r.json")
    code, out, err = ms.run_cli(["cv", "--input", data, "--fps", "120", "--k", "3", "--report", report])
    assert code == 0, err
    assert "Random Forest" in out
    assert json.loads(open(report).read())["summary"]["accuracy"]["mean"] >= 0.0
    assert ms.run_cli(["nope"])[0] == 1
