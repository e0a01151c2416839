import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdlab.objective import appendix_c_objective
from gdlab.stability import (
    StabilityConfig,
    classify_minimum_generic,
    lambda_of_r,
    lambda_sgd,
    mu,
    mu_of_r,
    report,
    sample_hyperbola_csv,
    stable_arcs,
)

CFG = StabilityConfig(eta=0.15, p=0.5)


def test_config_validation():
    with pytest.raises(ValueError):
        StabilityConfig(eta=0.1, p=1.5)
    with pytest.raises(ValueError):
        StabilityConfig(eta=-0.1, p=0.5)


def test_mean_coeff_default_data():
    assert CFG.mean_coeff == pytest.approx(3.53, abs=1e-15)


def test_mu_at_unit_point():
    # r = 2, mu = log|1 - 0.15 * 3.53 * 2| = log(0.059) at eta such that
    # the argument stays positive; checked against direct arithmetic
    val = mu((1.0, 1.0), CFG)
    assert val == pytest.approx(math.log(abs(1.0 - 0.15 * 3.53 * 2.0)), abs=1e-15)


def test_mu_minus_inf_at_singular_radius():
    cfg = StabilityConfig(eta=1.0 / 7.06, p=0.5)
    assert mu((1.0, 1.0), cfg) == -math.inf


def test_lambda_hand_value():
    cfg = StabilityConfig(eta=0.15, p=0.5)
    r = 2.0
    expect = 0.5 * math.log(abs(1.0 - 0.15 * 0.81 * r)) + 0.5 * math.log(
        abs(1.0 - 0.15 * 6.25 * r)
    )
    assert lambda_of_r(r, cfg) == pytest.approx(expect, abs=1e-15)
    assert lambda_sgd((1.0, 1.0), cfg) == pytest.approx(expect, abs=1e-15)


def test_lambda_literal_lambda_differs():
    cfg = StabilityConfig(eta=0.15, p=0.5)
    assert lambda_of_r(2.0, cfg, literal_lambda=True) != lambda_of_r(2.0, cfg)


@given(
    eta=st.floats(min_value=0.01, max_value=0.5),
    r=st.floats(min_value=2.0, max_value=50.0),
)
@settings(max_examples=100)
def test_lambda_degenerates_to_mu_at_extreme_p(eta, r):
    for p, coeff in ((1.0, 0.81), (0.0, 6.25)):
        cfg = StabilityConfig(eta=eta, p=p)
        assert cfg.mean_coeff == pytest.approx(coeff, abs=1e-12)
        assert lambda_of_r(r, cfg) == mu_of_r(r, cfg)


def test_mu_symmetric_in_theta():
    assert mu((0.7, 1.9), CFG) == mu((1.9, 0.7), CFG)


def test_report_signs():
    rep = report((1.0, 1.0), CFG)
    assert rep.gd_stable and rep.sgd_stable
    rep_far = report((3.0, 1.0 / 3.0), CFG)
    assert not rep_far.gd_stable


def test_gd_arc_endpoints_eta_015():
    arcs = stable_arcs(CFG)
    assert len(arcs.gd) == 1
    lo, hi = arcs.gd[0]
    assert lo == pytest.approx(0.5353, abs=5e-4)
    assert hi == pytest.approx(1.8679, abs=5e-4)


def test_gd_endpoints_satisfy_quadratic():
    # endpoints solve t^2 - R t + 1 = 0 with R = 2 / (eta * mean_coeff)
    arcs = stable_arcs(CFG)
    big_r = 2.0 / (CFG.eta * CFG.mean_coeff)
    for t1 in arcs.gd[0]:
        t = t1 * t1
        assert t * t - big_r * t + 1.0 == pytest.approx(0.0, abs=1e-10)


def test_sgd_arcs_disjoint_from_gd_at_reference_setting():
    cfg = StabilityConfig(eta=0.3, p=0.58)
    arcs = stable_arcs(cfg)
    assert len(arcs.gd) == 1
    glo, ghi = arcs.gd[0]
    assert glo == pytest.approx(0.823, abs=2e-3)
    assert ghi == pytest.approx(1.215, abs=2e-3)
    assert len(arcs.sgd) == 2
    assert arcs.sgd[0][0] == pytest.approx(0.457, abs=2e-3)
    assert arcs.sgd[0][1] == pytest.approx(0.699, abs=2e-3)
    assert arcs.sgd[1][0] == pytest.approx(1.432, abs=2e-3)
    assert arcs.sgd[1][1] == pytest.approx(2.189, abs=2e-3)
    # every SGD arc avoids the GD arc entirely
    for lo, hi in arcs.sgd:
        assert hi < glo or lo > ghi


def test_arcs_json_schema():
    import json

    doc = json.loads(stable_arcs(CFG).to_json())
    assert set(doc) == {"gd", "sgd"}
    assert all(len(a) == 2 for a in doc["gd"] + doc["sgd"])


def test_gd_arc_empty_for_huge_eta():
    cfg = StabilityConfig(eta=5.0, p=0.5)
    assert stable_arcs(cfg).gd == []


@pytest.mark.parametrize("t1", [0.6, 0.9, 1.0, 1.5, 1.8, 2.2])
def test_mu_sign_matches_generic_classifier(t1):
    obj = appendix_c_objective(0.5)
    theta = (t1, 1.0 / t1)
    rep = report(theta, CFG)
    cls = classify_minimum_generic(obj, theta, CFG.eta)
    assert (cls.verdict == "stable") == rep.gd_stable


def test_classifier_rejects_non_critical_point():
    obj = appendix_c_objective(0.5)
    with pytest.raises(ValueError):
        classify_minimum_generic(obj, (1.3, 1.0), 0.1)


def test_classifier_neutral_direction_excluded():
    obj = appendix_c_objective(0.5)
    cls = classify_minimum_generic(obj, (1.0, 1.0), 0.1)
    assert sum(cls.neutral) == 1
    assert cls.verdict == "stable"
    assert cls.reliable


def test_hyperbola_csv_schema():
    text = sample_hyperbola_csv(CFG, [0.8, 1.0, 1.2])
    lines = text.strip().splitlines()
    assert lines[0] == "theta1,theta2,mu,lambda,gd_stable,sgd_stable"
    assert len(lines) == 4


@given(t1=st.floats(min_value=0.3, max_value=3.0))
@settings(max_examples=100)
def test_arc_membership_matches_pointwise_sign(t1):
    arcs = stable_arcs(CFG)
    rep = report((t1, 1.0 / t1), CFG)
    in_gd = any(lo - 1e-9 <= t1 <= hi + 1e-9 for lo, hi in arcs.gd)
    in_sgd = any(lo - 1e-9 <= t1 <= hi + 1e-9 for lo, hi in arcs.sgd)
    edge = 1e-6
    near_gd_edge = any(min(abs(t1 - lo), abs(t1 - hi)) < edge for lo, hi in arcs.gd)
    near_sgd_edge = any(min(abs(t1 - lo), abs(t1 - hi)) < edge for lo, hi in arcs.sgd)
    if not near_gd_edge:
        assert in_gd == rep.gd_stable
    if not near_sgd_edge:
        assert in_sgd == rep.sgd_stable
