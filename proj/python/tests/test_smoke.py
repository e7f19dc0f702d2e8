import math

import numpy as np
import pytest

import qcoh

PLUS = np.full((2, 2), 0.5, dtype=complex)
PLUS_STATE = {"layout": {"factors": [["A", 2]]}, "ket": [0.70710678, 0.70710678]}


def test_plus_entropies():
    sigma = qcoh.dephase_all(PLUS)
    assert np.allclose(sigma, np.eye(2) / 2)
    assert qcoh.rel_entropy(PLUS, sigma) == pytest.approx(1.0, abs=1e-12)
    assert qcoh.rel_entropy_variance(PLUS, sigma) == pytest.approx(0.0, abs=1e-12)


def test_dh_matches_closed_form():
    r = qcoh.dh(PLUS, np.eye(2) / 2, 0.5)
    assert r["value_bits"] == pytest.approx(1 - math.log2(0.5))


def test_iid_dh_plus():
    assert qcoh.iid_dh(PLUS, np.eye(2) / 2, 3, 0.5) == pytest.approx(4.0)


def test_curve_and_strong_converse():
    pts = qcoh.second_order_curve(PLUS, 0.5, [1, 2, 4])
    assert [p["n"] for p in pts] == [1, 2, 4]
    assert all(p["lower_bits"] <= p["upper_bits"] for p in pts)
    sc = qcoh.strong_converse_curve(PLUS, 1.2, [2, 4])
    assert all(p["eps_lower_bound"] == pytest.approx(1.0) for p in sc)


def test_extraction_and_distiller():
    h = {"table": [0, 1], "out": 2}
    out = qcoh.run_extraction(PLUS_STATE, h)
    assert out["log_L"] == pytest.approx(1.0)
    assert out["d_sec"] == pytest.approx(0.0, abs=1e-9)
    rep = qcoh.distill(PLUS_STATE, h, 0.0)
    assert all(c["verdict"] for c in rep["certificates"])


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        qcoh.run_extraction({"ket": []}, {"table": [0], "out": 1})


def test_selftest_quick():
    ok, report = qcoh.selftest(quick=True)
    assert ok, report
    assert report.startswith("qcoh selftest v1")
