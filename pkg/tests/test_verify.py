import json
import math

import numpy as np
import pytest

from sbmkit.model import DriftParams
from sbmkit.numerics import NonConvergence
from sbmkit.simulate import WalkConfig
from sbmkit.verify import (
    Check,
    SuiteReport,
    _failed,
    brownian_local_time_joint,
    default_params_grid,
    default_point_grid,
    drifted_gaussian_kernel,
    lattice_width,
    laplace_grid_checks,
    mc_exit_checks,
    run_ck_symmetry_suite,
    run_sandwich_suite,
    run_suite,
    skew_bm_kernel,
    to_json,
)


# ---------------------------------------------------------------------------
# serialization

def test_json_float_format():
    assert to_json(0.1) == "0.10000000000000001"
    assert to_json({"b": 1, "a": 2.5}) == '{"b":1,"a":2.5}'
    assert to_json([True, None, float("nan"), "x"]) == '[true,null,null,"x"]'
    assert to_json(np.float64(1.0) / 3) == format(1 / 3, ".17g")
    assert to_json(np.int64(3)) == "3"


def test_json_round_trips():
    obj = {"x": math.pi, "y": [1e-300, -2.5e10], "s": 'q"uote'}
    back = json.loads(to_json(obj))
    assert back == obj


def test_json_rejects_objects():
    with pytest.raises(TypeError):
        to_json(object())


# ---------------------------------------------------------------------------
# checks and reports

@pytest.mark.parametrize("relation, computed, passed", [
    ("abs", 1.05, True), ("abs", 1.2, False),
    ("ge", 0.95, True), ("ge", 0.8, False),
    ("le", 1.05, True), ("le", 1.2, False),
    ("gt", 1.01, True), ("gt", 1.0, False),
])
def test_check_relations(relation, computed, passed):
    assert Check("c", computed, 1.0, 0.1, relation).passed is passed


def test_check_nonfinite_fails():
    assert not Check("c", math.nan, 1.0, 1.0).passed
    assert not Check("c", 1.0, math.inf, math.inf).passed


def test_check_unknown_relation():
    with pytest.raises(ValueError):
        Check("c", 1.0, 1.0, 0.0, "approx").passed


def test_failed_check_carries_estimate():
    c = _failed("cell", NonConvergence("stuck", 0.25))
    assert not c.passed
    assert c.computed == 0.25
    assert "NonConvergence" in c.detail


def test_report_sorted_and_serialized():
    rep = SuiteReport("demo", [Check("b", 1.0, 1.0, 0.0), Check("a", 2.0, 1.0, 0.5)])
    assert [c.label for c in rep.checks] == ["a", "b"]
    assert not rep.passed
    assert rep.failures()[0].label == "a"
    d = json.loads(rep.to_json())
    assert list(d) == ["suite_name", "passed", "n_checks", "n_failed", "checks"]
    assert d["n_failed"] == 1
    assert d["checks"][0] == {"label": "a", "computed": 2.0, "reference": 1.0,
                              "tolerance": 0.5, "relation": "abs", "pass": False}


def test_report_order_independent():
    checks = [Check(f"c{i}", i, i, 0.0) for i in range(5)]
    assert SuiteReport("s", checks).to_json() == SuiteReport("s", checks[::-1]).to_json()


# ---------------------------------------------------------------------------
# oracles

def test_skew_kernel_values():
    assert skew_bm_kernel(0.7, 1.0, 1.0, 1.0) == pytest.approx(0.42053867, abs=1e-8)
    assert skew_bm_kernel(0.7, 1.0, 1.0, -1.0) == pytest.approx(0.0323946, abs=1e-7)
    assert skew_bm_kernel(0.5, 1.0, 0.3, -0.4) == pytest.approx(
        math.exp(-0.49 / 2) / math.sqrt(2 * math.pi))


def test_drifted_gaussian_value():
    assert drifted_gaussian_kernel(1.0, 1.0, 1.0, 2.0) == pytest.approx(0.3989423, abs=1e-7)


def test_joint_value():
    assert brownian_local_time_joint(1.0, 0.5, 0.5) == pytest.approx(0.2419707, abs=1e-7)


def test_default_grid_size():
    assert len(default_params_grid()) * len(default_point_grid()) >= 500


@pytest.mark.parametrize("width, n, centered, sites", [
    (0.3, 10_000, False, 30), (0.25, 10_000, False, 24), (0.25, 10_000, True, 26), (0.5, 400, True, 10),
])
def test_lattice_width_even_sites(width, n, centered, sites):
    w = lattice_width(width, n, centered)
    assert round(w * math.sqrt(n)) == sites


# ---------------------------------------------------------------------------
# suites

def test_laplace_grid():
    checks = laplace_grid_checks()
    assert len(checks) == 60
    assert all(c.passed for c in checks), [c.to_dict() for c in checks if not c.passed]


def test_small_sandwich_suite():
    rep = run_sandwich_suite([DriftParams(1.0, -2.0, 0.3), DriftParams(2.0, 2.0, 0.7)])
    assert rep.passed, rep.failures()[:3]
    assert rep.find("collapse")
    assert all("m1=" in c.label for c in rep.checks)


def test_ck_suite():
    rep = run_ck_symmetry_suite()
    assert rep.passed, rep.failures()


def test_suite_is_deterministic():
    a = run_ck_symmetry_suite().to_json()
    assert a == run_ck_symmetry_suite().to_json()


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("bogus")


def test_exit_rejection_reported():
    cfg = WalkConfig(n=2_500, paths=20_000, seed=4)
    checks = mc_exit_checks(DriftParams(0.0, 0.0, 0.7), -1.0, 0.0, 1.0, cfg, include_literal=True)
    labels = {c.label: c for c in checks}
    assert all(c.passed for c in checks)
    assert any("literal" in k for k in labels)
