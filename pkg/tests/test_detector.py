import math

import numpy as np
import pytest

from condctm.detector import CONTINUE, REJECT, Detector, DetectorConfig, detector_init, detector_step
from condctm.ons import OnsState


@pytest.fixture
def ref():
    return np.random.default_rng(0).standard_normal(1000)


def test_init_threshold_and_wealth(ref):
    det = detector_init(ref, DetectorConfig(alpha=0.05), seed=1)
    assert det.cfg.threshold == 20.0
    assert det.wealth == 1.0 and det.t == 0 and det.rejected_at is None


@pytest.mark.parametrize("kwargs", [
    dict(alpha=0.0), dict(alpha=1.0), dict(delta=1.2), dict(k=0.0), dict(clip=-0.1),
    dict(variant="bogus"), dict(warmup=-1),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        DetectorConfig(**kwargs)


def test_empty_reference_rejected():
    with pytest.raises(ValueError):
        Detector([], DetectorConfig())


def test_nan_score_rejected(ref):
    with pytest.raises(ValueError):
        Detector(ref, DetectorConfig()).step(float("nan"))


def test_clipped_eta_places_no_bet(ref):
    det = Detector(ref, DetectorConfig(clip=0.1))
    det.ons = OnsState(eta=0.05, a=2.0, t=3)
    out = det.step(2.5)
    assert out.bet_factor == 1.0 and out.eta == 0.0
    assert det.wealth == 1.0


def test_reaching_threshold_rejects(ref):
    det = Detector(ref, DetectorConfig(alpha=0.05))
    det.log_wealth = math.log(20.0)
    out = det.step(0.0)  # eta = 0, no bet
    assert out.wealth == pytest.approx(20.0)
    assert out.decision == REJECT and det.rejected_at == 1


def test_standard_reduced_bet(ref):
    det = Detector(ref, DetectorConfig(variant="standard", clip=0.0))
    det.ons = OnsState(eta=0.5, a=1.0, t=0)
    out = det.step(1e9)  # strictly the largest; u = 1 would give p = 1
    expected = 1 + 2 * 0.5 * (out.p_value - 0.5)
    assert out.bet_factor == pytest.approx(expected)
    assert det.ctx.scale_c == 2.0 and det.band() == 0.0
    det2 = Detector(ref, DetectorConfig(variant="standard"))
    from condctm.betting import bet_g
    assert 1 + bet_g(1.0, 0.5, 0.0, det2.ctx) == 1.5


def test_standard_pool_grows(ref):
    det = Detector(ref, DetectorConfig(variant="standard"))
    for x in [0.1, 0.2, 0.3]:
        det.step(x)
    assert det.pool.size == 1003


def test_conditional_factor_bounds_and_monotone_rejection(ref):
    det = Detector(ref, DetectorConfig(clip=0.0))
    stream = np.random.default_rng(9).normal(1.0, 1.0, 500)
    outs = det.run(stream)
    factors = np.array([o.bet_factor for o in outs])
    assert np.all((factors >= 0.5) & (factors <= 1.5))
    decisions = [o.decision for o in outs]
    first = decisions.index(REJECT)
    assert all(d == REJECT for d in decisions[first:])
    assert all(d == CONTINUE for d in decisions[:first])
    assert det.rejected_at == first + 1
    w = np.array([o.wealth for o in outs])
    assert np.all(w >= 0)
    np.testing.assert_allclose(w, np.cumprod(factors), rtol=1e-9)


def test_warmup_bets_nothing_but_learns(ref):
    cfg = DetectorConfig(warmup=50, clip=0.0)
    det = Detector(ref, cfg)
    stream = np.random.default_rng(2).normal(2.0, 1.0, 60)
    outs = det.run(stream)
    assert all(o.bet_factor == 1.0 for o in outs[:50])
    assert outs[49].wealth == 1.0
    assert abs(det.ons.eta) > 0 and det.ons.t == 60
    assert outs[50].bet_factor != 1.0


@pytest.mark.parametrize("variant", ["conditional", "standard", "invalid"])
def test_same_seed_identical_trajectories(ref, variant):
    cfg = DetectorConfig(variant=variant)
    stream = np.random.default_rng(7).normal(0.3, 1.0, 300)
    a = Detector(ref, cfg, seed=42).run(stream)
    b = Detector(ref, cfg, seed=42).run(stream)
    assert a == b


def test_stop_on_reject(ref):
    det = Detector(ref, DetectorConfig())
    outs = det.run(np.full(1000, 3.0), stop_on_reject=True)
    assert outs[-1].decision == REJECT and len(outs) == det.rejected_at


def test_keeps_running_after_rejection(ref):
    det = Detector(ref, DetectorConfig())
    outs = det.run(np.full(300, 3.0))
    assert len(outs) == 300 and det.rejected_at < 300
    assert outs[-1].wealth > outs[det.rejected_at - 1].wealth


def test_log_wealth_does_not_overflow(ref):
    det = Detector(ref, DetectorConfig())
    det.log_wealth = 800.0
    out = detector_step(det, 0.0)
    assert math.isfinite(out.wealth) and out.wealth == np.finfo(float).max
