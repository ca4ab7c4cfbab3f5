import math

import numpy as np
import pytest

from zorich_lab.analysis import (
    ascent_constant,
    key_inequality_N,
    key_lhs_naive,
    key_log_lhs,
    level_surface_height,
    regime_report,
    run_verification_suite,
    sample_det_checks,
    verify_iterated_det,
    verify_lipschitz_iterates,
    verify_single_det,
    volume_In,
    volume_Tn,
)
from zorich_lab.errors import RegimeError
from zorich_lab.geometry import MapParams
from zorich_lab.zorich import zorich_eval

P = MapParams(2.0, 1.0)


def test_regime_verdicts(regime):
    rep = regime_report(MapParams(1.0, 1.0))
    assert not rep.verdicts["lambda_gt_L5"]
    good = regime_report(regime)
    assert good.verdicts["large_lambda_regime"]
    assert good.L5 == pytest.approx(good.L_hat**5)
    assert good.L_hat == pytest.approx(1 / good.ell_hat, rel=1e-12)


@pytest.mark.parametrize("lam", [2.0, 8.0])
def test_volume_law(lam):
    params = MapParams(lam, 1.0)
    Ts = []
    for n in (0, 1, 5):
        num, form = volume_Tn(params, n, 128)
        assert form == pytest.approx(4 * lam**2 * math.log((n + 2) / (n + 1)), rel=1e-15)
        assert num == pytest.approx(form, rel=1e-6)
        Ts.append(num)
    assert Ts[0] > Ts[1] > Ts[2]


def test_volume_additivity():
    # the volume under S_{n+1} minus the volume under S_n is T_n
    i0, i1 = volume_In(P, 0, 128), volume_In(P, 1, 128)
    assert i1 - i0 == pytest.approx(volume_Tn(P, 0, 128)[0], rel=1e-12)


def test_level_surface_maps_to_boundary():
    rng = np.random.default_rng(0)
    d = rng.uniform(0.05, 2 * P.lam - 0.05, 50)
    s = rng.uniform(-2 * P.lam + 0.05, 2 * P.lam - 0.05, 50)
    u = np.column_stack([(s + d) / 2, (s - d) / 2])
    for n in (0, 3):
        h = level_surface_height(P, n, u)
        y = zorich_eval(P, np.column_stack([u, h]))
        level = np.maximum(y[:, 0] - y[:, 1], np.abs(y[:, 0] + y[:, 1]))
        assert np.allclose(level, 2 * (n + 1) * P.lam, rtol=1e-12)


def test_det_checks():
    assert verify_single_det(P, [0.7, 0.2, 0.3]).ok
    assert verify_iterated_det(P, [0.7, 0.2, -1.0], 2).ok
    for n_iter in (0, 1, 2):
        res = sample_det_checks(P, 2000, n_iter=n_iter, seed=1)
        assert res.fraction_ok >= 0.999
        assert res.n_points == 2000


def test_key_inequality():
    p = MapParams(8.0, 1.0)
    N, c = key_inequality_N(p)
    # c = E^2(0) - lam with E(t) = 8*exp(t)
    assert N == 2
    assert c == pytest.approx(8 * math.exp(8) - 8, rel=1e-12)
    for c in (0.0, 1.0, 3.0):
        assert key_log_lhs(p, c) == pytest.approx(math.log(key_lhs_naive(p, c)), rel=1e-12)
    with pytest.raises(RegimeError):
        key_inequality_N(MapParams(1.0, 0.2))


def test_ascent():
    res = ascent_constant(P, 0.1, n_check=5000)
    assert res.failures == 0
    assert res.c == pytest.approx(1 + math.log(1.9))
    assert 0 < res.delta < P.lam
    with pytest.raises(RegimeError):
        ascent_constant(MapParams(1.0, 0.2), 0.1)


def test_lipschitz_iterates():
    rep = verify_lipschitz_iterates(P, 0.5, 3, 5000, seed=2)
    assert rep.ok and rep.n_used == 3


@pytest.mark.slow
def test_full_suite_in_regime(regime):
    records = run_verification_suite(regime, samples=500, pairs=500, quad_resolution=64, n_max=4)
    assert all(r["ok"] for r in records), [r["check"] for r in records if not r["ok"]]
