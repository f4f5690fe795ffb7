import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantilever.certify import (
    CertificationError,
    _make,
    asymptotic_scan,
    check_f2,
    check_h1,
    check_h2,
    check_H1,
    check_H1_indicator,
    check_r0,
    f2_lower_threshold,
    multiplicity_scan,
    theorem_summaries,
)
from cantilever.kernel import QuadratureConfig
from cantilever.nonlinearity import parse_spec

NON_MONOTONE = "[0,1): 1-0.5*u ; [1,inf): 0.5"


def h2b_oracle(R1=37.0, slope=4600.0, knee=0.03):
    """Closed form of int M1 f(M1 R1) with M1 = (2/3) t^(3/2)."""
    ts = (1.5 * knee / R1) ** (2 / 3)
    below = slope * R1 * (4 / 9) * ts**4 / 4
    above = slope * knee * (2 / 3) * (2 / 5) * (1 - ts**2.5)
    return below + above, ts


def test_h2_saturated_example(sat):
    h2a, h2b = check_h2(sat, 1.0, 37.0)
    # M0 R0 stays below the knee, so h2a is 4600 int M0^2 = 4600/4536
    assert h2a.lhs == pytest.approx(4600 / 4536, abs=1e-12)
    assert h2a.margin == pytest.approx(0.0141093474426808, abs=1e-12)
    ref, ts = h2b_oracle()
    assert h2b.lhs == pytest.approx(ref, abs=1e-10)
    assert h2b.lhs == pytest.approx(36.799808766604684, abs=1e-10)
    assert h2b.inputs_echo["kinks"][0] == pytest.approx(ts, abs=1e-13)
    assert h2a.passed and h2b.passed
    assert not h2a.heuristic and not h2b.heuristic
    assert h2a.quadrature_error_estimate < 1e-12
    assert h2a.inputs_echo["sense"] == ">=" and h2b.inputs_echo["sense"] == "<="


def h2a_oracle(R0, slope=4600.0, knee=0.03):
    """int M0 f(M0 R0) by mpmath, split where M0 R0 crosses the knee."""
    mp.mp.dps = 30
    m0 = lambda t: mp.sqrt(2) * (1 - t) * t**3 / 6
    f = lambda t: slope * m0(t) * R0 if m0(t) * R0 < knee else slope * knee
    pts = [0, 1]
    if m0(mp.mpf(3) / 4) * R0 > knee:
        g = lambda t: m0(t) * R0 - knee
        pts = [0, mp.findroot(g, (0.3, 0.75), solver="bisect"), mp.findroot(g, (0.75, 1), solver="bisect"), 1]
    return float(mp.quad(lambda t: m0(t) * f(t), pts))


def test_h2a_scales_with_inner_radius_below_the_knee(sat):
    # M0 R0 < 0.03 for R0 < 1.2068, where f is linear and lhs = 4600 R0 / 4536
    h2a, _ = check_h2(sat, 1.02, 37.0)
    assert h2a.lhs == pytest.approx(1.02 * 4600 / 4536, abs=1e-12)
    assert h2a.lhs == pytest.approx(h2a_oracle(1.02), abs=1e-12)
    assert h2a.passed


@pytest.mark.parametrize("R0", [1.3, 1.5, 2.0])
def test_h2a_fails_once_saturation_bites(sat, R0):
    h2a, _ = check_h2(sat, R0, 37.0)
    assert h2a.lhs == pytest.approx(h2a_oracle(R0), abs=1e-9)
    assert h2a.verdict == "FAIL"


def test_h2a_fails_for_zero_nonlinearity(zero):
    h2a, h2b = check_h2(zero, 1.0, 2.0)
    assert h2a.lhs == 0.0 and h2a.verdict == "FAIL"
    assert h2b.passed


@pytest.mark.parametrize("R0", [0.25, 0.5])
def test_h2a_passes_for_smaller_inner_radius(sat, R0):
    assert check_h2(sat, R0, 37.0)[0].passed


def test_h2_input_validation(sat):
    with pytest.raises(CertificationError):
        check_h2(sat, 2.0, 1.0)
    with pytest.raises(CertificationError):
        check_h2(parse_spec(NON_MONOTONE), 1.0, 2.0)


def test_h1(sat):
    ok = check_h1(sat)
    assert ok.passed and ok.heuristic
    bad = check_h1(parse_spec(NON_MONOTONE))
    assert bad.verdict == "FAIL"
    assert "witness" in bad.inputs_echo


def test_f2_threshold_closed_form():
    # M0(3/4)^2 = 162 / 512^2, so the threshold is 4 * 512^2 / 162
    assert f2_lower_threshold(0.75) == pytest.approx(4 * 512**2 / 162, rel=1e-14)
    assert f2_lower_threshold(0.75) == pytest.approx(6472.69135802469, abs=1e-9)


def test_f2(sat):
    lo, up = check_f2(sat, 0.75, 1.0, 37.0)
    assert lo.lhs == pytest.approx(4600.0)
    assert lo.verdict == "FAIL"
    assert up.lhs == pytest.approx(138 / 37)
    assert up.passed
    # boundary case: f(2 R1 / 3) / R1 = 15/4 exactly gives margin 0, which is not a PASS
    _, edge = check_f2(parse_spec("[0,inf): 15"), 0.75, 1.0, 4.0)
    assert edge.margin == 0.0 and edge.verdict == "FAIL"
    with pytest.raises(CertificationError):
        check_f2(parse_spec("[0,inf): 1 + t"), 0.75, 1.0, 2.0)
    with pytest.raises(CertificationError):
        check_f2(sat, 1.5, 1.0, 2.0)


def test_r0_constant_rhs(one):
    a, b = check_r0(one, 0.1, 0.2)
    assert a.lhs == pytest.approx(1 / 8, abs=1e-14)
    assert b.lhs == pytest.approx(1 / 8, abs=1e-14)
    assert a.passed and b.passed
    assert a.inputs_echo["shell_type"] == "compression"
    a2, b2 = check_r0(one, 0.2, 0.1)
    assert a2.inputs_echo["shell_type"] == "expansion"
    assert not a2.passed and not b2.passed
    with pytest.raises(CertificationError):
        check_r0(one, 0.1, 0.1)


def test_H1_constant_rhs(one):
    H1a, H1b = check_H1(one, 0.05, 1.0)
    assert H1a.lhs == pytest.approx(0.0633430791721743, abs=1e-13)
    assert H1b.lhs == pytest.approx(2 / 3, abs=1e-14)
    assert H1a.passed and H1b.passed
    with pytest.raises(CertificationError):
        check_H1(one, 0.5, 1.0)


def test_H1_indicator(one):
    c = check_H1_indicator(one, 0.01, 0.5)
    assert c.inputs_echo["path"] == "indicator"
    assert 0 < c.inputs_echo["J_chi_norm"] < 0.0633430791721743
    assert c.passed
    with pytest.raises(CertificationError):
        check_H1_indicator(one, 0.01, 1.0)


def test_asymptotic_scan(pq5):
    scan = asymptotic_scan(pq5, 0.75, np.geomspace(1e-12, 1e6, 37))
    assert all(c.heuristic for c in scan.certificates)
    assert scan.lower_threshold == pytest.approx(6472.69135802469, abs=1e-9)
    # p u^p / u blows up at 0 and decays at infinity
    assert scan.above_lower[0] and not scan.above_lower[-1]
    assert scan.below_upper[-1]
    assert len(scan.rows()) == 37
    with pytest.raises(CertificationError):
        asymptotic_scan(pq5, 0.75, [1.0, 0.5])


def test_multiplicity_scan(sat):
    scan = multiplicity_scan(sat, [(1.0, 37.0), (1.5, 40.0)])
    assert scan.passed == [True, False]
    assert scan.guaranteed == 1 and scan.predicted == 1
    assert scan.to_dict()["message"] == "1 solutions predicted"
    two = multiplicity_scan(sat, [(1.0, 37.0)], h3=[True])
    assert two.predicted == 2
    with pytest.raises(CertificationError):
        multiplicity_scan(sat, [(2.0, 3.0), (1.0, 37.0)])


def test_theorem_summaries(sat):
    certs = [check_h1(sat), *check_h2(sat, 1.0, 37.0)]
    out = {s.theorem: s for s in theorem_summaries(certs)}
    assert out["energetic_shell"].verdict == "PASS"
    assert out["two_norm_shell"].verdict == "NOT_CHECKED"
    failing = [check_h1(sat), *check_h2(sat, 1.5, 37.0)]
    assert {s.theorem: s for s in theorem_summaries(failing)}["energetic_shell"].verdict == "FAIL"


def test_certificate_serialises(sat):
    for c in check_h2(sat, 1.0, 37.0):
        d = json.loads(json.dumps(c.to_dict()))
        assert d["verdict"] == "PASS"
        assert set(d) >= {"hypothesis", "lhs", "rhs", "margin", "verdict", "heuristic", "quadrature_error_estimate"}


def test_margins_stable_under_refinement(sat):
    vals = []
    for n in (128, 256, 512):
        cfg = QuadratureConfig(panels=n)
        vals.append([c.margin for c in check_h2(sat, 1.0, 37.0, cfg)])
    vals = np.array(vals)
    assert np.max(np.abs(vals - vals[0])) < 1e-6


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.sampled_from([">=", "<="]), st.floats(0, 1e3))
def test_verdict_is_margin_above_estimate(lhs, rhs, sense, est):
    c = _make("h2a", lhs, rhs, sense, est, {})
    assert c.margin == (lhs - rhs if sense == ">=" else rhs - lhs)
    assert c.quadrature_error_estimate >= est
    assert c.passed == (c.margin > c.quadrature_error_estimate)


@given(st.floats(0.05, 0.95))
def test_f2_threshold_matches_definition(a):
    m0 = math.sqrt(2) * (1 - a) * a**3 / 6
    assert f2_lower_threshold(a) == pytest.approx(1 / ((1 - a) * m0 * m0), rel=1e-12)
