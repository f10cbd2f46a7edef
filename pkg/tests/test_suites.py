"""Suite harness: pass/fail semantics, determinism, corrupted-model detection."""

import numpy as np
import pytest

from qmaplab import suites
from qmaplab.errors import GeometryError
from qmaplab.special_geometry import CubicModel, _dense_k

QUICK = {"points": 5, "psk_points": 10, "triples": 50, "elements": 5,
         "isometry_points": 4, "killing_points": 2, "curvature_points": 2,
         "pairs": 3}


def test_all_suites_pass_e1(e1):
    rng = np.random.default_rng(11)
    results = suites.run_check_suites(e1, 0.3, rng, samples=QUICK)
    for res in results:
        assert res.passed, (res.name, res.max_residual, res.details)
    assert {r.name for r in results} == {
        "cask", "rigid-cmap", "moment", "group", "twist[c=0.3]", "killing[c=0.3]"}


def test_all_suites_pass_e2(e2):
    rng = np.random.default_rng(12)
    results = suites.run_check_suites(e2, 0.3, rng, samples=QUICK)
    for res in results:
        assert res.passed, (res.name, res.max_residual, res.details)


def test_isometry_and_curvature_suites(e1):
    rng = np.random.default_rng(13)
    res = suites.suite_isometry(e1, 0.3, rng, samples=QUICK)
    assert res.passed
    assert res.details["corrupted_residual"] > 1e-4
    res, rows = suites.suite_curvature(e1, [0.0, 0.3], rng, samples=QUICK)
    assert res.passed
    assert len(rows) == 2 * QUICK["curvature_points"]
    assert all(r["scal"] < 0 for r in rows)
    assert res.details["kretschmann_c0_spread"] < 1e-6


def test_suite_determinism(e1):
    a = suites.suite_cask(e1, np.random.default_rng(7), samples=QUICK)
    b = suites.suite_cask(e1, np.random.default_rng(7), samples=QUICK)
    assert a.max_residual == b.max_residual
    assert a.details == b.details


def test_tolerance_override_flips_status(e1):
    rng = np.random.default_rng(5)
    res = suites.suite_moment(e1, rng, samples=QUICK,
                              tolerances={"moment": 1e-30, "moment-exact": 1e-30,
                                          "moment-homogeneity": 1e-30})
    assert res.status == "FAIL"


def test_corrupted_model_fails(tmp_path):
    # negated cubic: h < 0 on the declared cone, so no valid point exists
    bad = CubicModel(name="bad", m=1, k=_dense_k(1, [(0, 0, 0, -6.0)]),
                     domain_id="positive_orthant", hsurface_samples=[],
                     aut_generators=[], t_box=((0.5, 2.0),))
    rng = np.random.default_rng(3)
    with pytest.raises(GeometryError):
        suites.suite_cask(bad, rng, samples=QUICK)


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("QMAPLAB_THREADS", "3")
    assert suites.thread_count() == 3
    monkeypatch.setenv("QMAPLAB_THREADS", "junk")
    assert suites.thread_count() == 1
    monkeypatch.delenv("QMAPLAB_THREADS")
    assert suites.thread_count() == 1


def test_curvature_parallel_matches_serial(e1, monkeypatch):
    rng1 = np.random.default_rng(9)
    res1, rows1 = suites.suite_curvature(e1, [0.0], rng1, samples=QUICK)
    monkeypatch.setenv("QMAPLAB_THREADS", "2")
    rng2 = np.random.default_rng(9)
    res2, rows2 = suites.suite_curvature(e1, [0.0], rng2, samples=QUICK)
    assert rows1 == rows2
