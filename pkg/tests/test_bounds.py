import math

import numpy as np
import pytest

from modtail.bounds import (SumMomentEnvelope, c1_pessimistic,
                            calibrate_closed_constant, closed_curve,
                            closed_shape, fenchel_curve_bound, lower_witness,
                            q_bound_closed, q_bound_fenchel,
                            rosenthal_constant, rosenthal_sum_moment,
                            witness_curve)
from modtail.distribution import make_mdt, sample_values, survival
from modtail.errors import DomainError
from modtail.fenchel import GeneratingFunction, tail_from_gls
from modtail.moments import moment_from_tail
from modtail.slowvary import LogPower

E = math.e
EE = math.e ** math.e


def test_rosenthal_constant_values():
    assert rosenthal_constant(2.0) == pytest.approx((4.0 / math.log(2.0)) ** 2)
    with pytest.raises(DomainError):
        rosenthal_constant(1.5)


def test_rosenthal_dominates_single_draw():
    # at n = 1 the sum moment is the single moment, so the envelope must
    # sit above it for every p
    params = make_mdt(4.0, 0.5, LogPower(1.0))
    env = SumMomentEnvelope.compute(params)
    assert np.all(env.envelope >= env.single_moments)


@pytest.mark.parametrize("n", [1, 4, 16, 64, 256])
def test_rosenthal_envelope_monte_carlo(n):
    # MC oracle for E|S_n|**3: the analytic envelope must dominate it
    params = make_mdt(4.0, 0.0)
    m2 = moment_from_tail(params, 2.0)
    m3 = moment_from_tail(params, 3.0)
    bound = rosenthal_sum_moment(params, 3.0, m2, m3)
    reps = 200000 // n + 1000
    x = sample_values(params, seed=300 + n, n=reps * n).reshape(reps, n)
    s3 = np.abs(x.sum(axis=1) / math.sqrt(n)) ** 3
    mc, se = s3.mean(), s3.std() / math.sqrt(reps)
    assert mc + 3 * se <= bound


def test_closed_shape_plugins():
    # constant-free shapes evaluated by hand
    pA = make_mdt(3.0, 0.0)
    assert closed_shape(pA, E) == pytest.approx(math.exp(-3), rel=1e-12)
    pA2 = make_mdt(3.0, 1.0)
    assert closed_shape(pA2, E) == pytest.approx(math.exp(-3), rel=1e-12)
    pB = make_mdt(3.0, -1.0)
    # at u = e**e: u**-3 * ln(ln(u**1)) with y = e gives e**(-3e) * 1
    assert closed_shape(pB, EE) == pytest.approx(math.exp(-3 * E), rel=1e-12)
    pC = make_mdt(3.0, -2.0, LogPower(-1.0))
    # V(y) = (1 + ln(1 + y))**(-1) evaluated at y = 1
    assert closed_shape(pC, E) == pytest.approx(
        math.exp(-3) / (1.0 + math.log(2.0)), rel=1e-12)


def test_closed_shape_domains():
    with pytest.raises(DomainError):
        closed_shape(make_mdt(3.0, 0.0), 2.0)
    with pytest.raises(DomainError):
        closed_shape(make_mdt(3.0, -1.0), E)      # regime B needs u >= e**e
    with pytest.raises(DomainError):
        closed_shape(make_mdt(3.0, -2.0), E)      # regime C needs vanishing V


def test_q_bound_closed_clamped_monotone():
    params = make_mdt(4.0, 1.0, LogPower(1.0))
    u = np.geomspace(E, 1e8, 300)
    q = q_bound_closed(params, u)
    assert np.all((0 <= q) & (q <= 1))
    assert np.all(np.diff(q) <= 1e-15)


def test_q_bound_fenchel_clamped_monotone():
    params = make_mdt(4.0, 0.0)
    u = np.geomspace(E, 1e8, 60)
    q = q_bound_fenchel(params, u)
    assert np.all((0 <= q) & (q <= 1))
    assert np.all(np.diff(q) <= 1e-15)


def test_fenchel_tracks_closed_form():
    # both bounds decay at the u**(-beta) rate, so their log difference
    # stays bounded and nearly flat far out in the tail
    params = make_mdt(3.0, 0.0)
    u = np.exp(np.linspace(10.0, 30.0, 9))
    diff = np.log(q_bound_fenchel(params, u)) - np.log(q_bound_closed(params, u))
    assert np.all(np.abs(diff) < 20.0)
    assert diff.max() - diff.min() < 0.5


def test_lower_witness_is_survival():
    params = make_mdt(4.0, 0.0)
    u = np.geomspace(params.u_star, 1e4, 50)
    assert np.allclose(lower_witness(params, u), survival(params, u), rtol=1e-14)
    with pytest.raises(DomainError):
        lower_witness(params, 1.0)


def test_sandwich_with_calibrated_constant():
    # calibrate on the n=1 exact tail, then the closed bound must sit
    # between the witness and 1
    params = make_mdt(4.0, 0.0)
    u = np.geomspace(EE, 1e4, 80)
    truth = survival(params, u)
    c = calibrate_closed_constant(params, u, truth, slack=0.0)
    upper = q_bound_closed(params, u, c=c)
    lower = lower_witness(params, u)
    assert np.all(upper >= truth * (1 - 1e-12))
    assert np.all(upper >= lower * (1 - 1e-12))


def test_calibration_minimality():
    # halving the calibrated constant must break domination somewhere
    params = make_mdt(4.0, 0.0)
    u = np.geomspace(EE, 1e4, 80)
    truth = survival(params, u)
    c = calibrate_closed_constant(params, u, truth, slack=0.0)
    under = q_bound_closed(params, u, c=c / 2.0)
    assert np.any(under < truth)


def test_ratio_upper_to_witness_grows_like_log():
    # regime A closed form carries one extra ln u factor over the witness
    params = make_mdt(4.0, 0.0)
    u = np.exp(np.linspace(3.0, 20.0, 40))
    ratio = q_bound_closed(params, u, c=1.0) / lower_witness(params, u)
    slope = np.polyfit(np.log(np.log(u)), np.log(ratio), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.05)


def test_scale_homogeneity_through_gls():
    # scaling the variable by 8 shifts the Chebyshev bound argument by 8
    params = make_mdt(4.0, 1.0)
    psi = GeneratingFunction.from_theta(params)
    for z in (50.0, 500.0):
        assert tail_from_gls(psi, 8.0, 8.0 * z) == pytest.approx(
            tail_from_gls(psi, 1.0, z), rel=1e-9)


def test_c1_pessimistic_cached_and_positive():
    params = make_mdt(4.0, 0.0)
    a = c1_pessimistic(params)
    b = c1_pessimistic(make_mdt(4.0, 0.0))
    assert a == b and a > 0


def test_curve_objects():
    params = make_mdt(4.0, 0.0)
    for curve, upper in ((closed_curve(params), True),
                         (fenchel_curve_bound(params), True),
                         (witness_curve(params), False)):
        assert curve.is_upper_bound() == upper
        vals = curve.evaluate(np.geomspace(curve.u_min, 1e4, 10))
        assert np.all((0 <= vals) & (vals <= 1))


def test_curve_csv_roundtrip(tmp_path):
    params = make_mdt(4.0, 0.0)
    curve = closed_curve(params)
    path = tmp_path / "curve.csv"
    u = np.geomspace(E, 1e3, 16)
    curve.to_csv(path, u)
    data = np.loadtxt(path, delimiter=",", skiprows=3)
    assert np.allclose(data[:, 1], curve.evaluate(u), rtol=1e-15)
