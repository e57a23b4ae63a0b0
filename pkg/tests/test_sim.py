import math

import numpy as np
import pytest

from adreceiver.channel import cumulative_fraction
from adreceiver.error_model import BitFrame
from adreceiver.exceptions import ConfigError
from adreceiver.mathkernels import make_rng
from adreceiver.params import SystemParams
from adreceiver.sim import (
    SimConfig,
    SimState,
    Status,
    run_ensemble,
    run_trial,
    run_trial_reference,
    wilson_interval,
)


def small(k1=20.0, k_1=5.0, Ntx=40, **kw):
    # thin gap and a coarse step so a short horizon still sees plenty of events
    return SystemParams(D=8.0, r0=10.2, rr=10.0, k1=k1, k_1=k_1, Ntx=Ntx, Ts=0.002, Tb=0.01, **kw)


def cfg(p=None, bits=(1,), horizon=None, trials=1, seed=0, dt=1e-4):
    return SimConfig(p or small(), dt, BitFrame(bits, 1), seed=seed, trials=trials, horizon=horizon)


def test_config_validation():
    p = small()
    with pytest.raises(ConfigError):
        SimConfig(p, 0.0)
    with pytest.raises(ConfigError):
        SimConfig(p, 0.003)
    with pytest.raises(ConfigError):
        SimConfig(p, 3e-4)  # Ts not a multiple of dt
    with pytest.raises(ConfigError):
        SimConfig(p.with_(Tb=0.005), 1e-4)
    with pytest.raises(ConfigError):
        SimConfig(p, 1e-4, trials=0)
    with pytest.raises(ConfigError):
        SimConfig(p, 1e-4, horizon=0.003)
    c = SimConfig(p, 1e-4, BitFrame((1, 0, 1), 1))
    assert (c.steps_per_sample, c.samples_per_bit, c.n_samples, c.n_steps) == (20, 5, 15, 300)
    assert c.emission_steps() == [0, 200]
    assert np.allclose(c.transmitter, (10.2, 0, 0))


class Recorder:
    """Checks particle invariants after every step of the literal stepper."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.prev_sites = None
        self.prev_status = None
        self.adsorbed_total = []
        self.steps = 0

    def __call__(self, state: SimState, counters):
        rr = self.cfg.params.rr
        n = state.n_active
        emitted = sum(1 for s in self.cfg.emission_steps() if s <= self.steps) * self.cfg.params.Ntx
        assert state.n_free + state.n_adsorbed == n == emitted
        status = state.status[:n].copy()
        d = np.linalg.norm(state.position[:n] - state.center, axis=1)
        free, bound = status == Status.FREE, status == Status.ADSORBED
        assert np.all(d[free] >= rr - 1e-9)
        sd = np.linalg.norm(state.site[:n][bound] - state.center, axis=1)
        assert np.all(np.abs(sd - rr) <= 1e-9 * rr)
        assert np.all(state.position[:n][bound] == state.site[:n][bound])
        if self.prev_status is not None:
            m = self.prev_status.size
            stayed = (self.prev_status == Status.ADSORBED) & (status[:m] == Status.ADSORBED)
            assert np.array_equal(state.site[:m][stayed], self.prev_sites[stayed])
        assert 0 <= counters.n_adsorbed_new <= counters.n_collided
        assert counters.n_desorbed_new >= 0
        self.prev_status, self.prev_sites = status, state.site[:n].copy()
        self.adsorbed_total.append(state.n_adsorbed)
        self.steps += 1


@pytest.mark.parametrize("k_1", [0.0, 50.0])
def test_reference_stepper_invariants(k_1):
    c = cfg(small(k1=40.0, k_1=k_1), bits=(1, 1), dt=1e-4)
    rec = Recorder(c)
    res = run_trial_reference(c, make_rng(2), observer=rec)
    assert rec.steps == c.n_steps
    assert res.final_adsorbed == rec.adsorbed_total[-1]
    assert res.net_per_bit.sum() == res.final_adsorbed
    assert np.array_equal(res.demodulated, (res.net_per_bit >= 1).astype(np.int8))
    if k_1 == 0.0:
        assert all(b >= a for a, b in zip(rec.adsorbed_total, rec.adsorbed_total[1:]))
    assert max(rec.adsorbed_total) > 0


@pytest.mark.parametrize("engine", ["fast", "reference"])
def test_trivial_frames(engine):
    r = run_trial(cfg(small(Ntx=0)), make_rng(0), engine)
    assert not r.net_per_sample.any() and not r.demodulated.any()
    r = run_trial(cfg(small(k1=0.0, k_1=0.0)), make_rng(0), engine)
    assert not r.net_per_sample.any()


@pytest.mark.parametrize("engine", ["fast", "reference"])
def test_determinism_and_single_trial_ensemble(engine):
    c = cfg(trials=3, seed=9)
    a = run_ensemble(c, engine)
    b = run_ensemble(c, engine)
    assert np.array_equal(a.net_per_bit, b.net_per_bit)
    assert np.array_equal(a.mean_net_per_sample, b.mean_net_per_sample)
    one = run_ensemble(cfg(trials=1, seed=9), engine)
    direct = run_trial(c, make_rng(9, 0), engine)
    assert np.array_equal(one.mean_net_per_sample, direct.net_per_sample)


def test_unknown_engine():
    with pytest.raises(ConfigError):
        run_trial(cfg(), make_rng(0), "gpu")


def test_fast_engine_irreversible_is_monotone_per_trial():
    c = cfg(small(k_1=0.0, Ntx=200), trials=5, horizon=0.02)
    for i in range(5):
        r = run_trial(c, make_rng(1, i))
        assert np.all(r.net_per_sample >= 0)


def test_engines_agree_in_distribution():
    c = cfg(small(k1=30.0, k_1=40.0, Ntx=30), bits=(1, 1), trials=60, seed=4)
    fast = run_ensemble(c, "fast")
    ref = run_ensemble(c, "reference")
    for j in range(2):
        a, b = fast.net_per_bit[:, j], ref.net_per_bit[:, j]
        se = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
        assert abs(a.mean() - b.mean()) < 4 * se


def test_fast_engine_mean_matches_analytic_fraction():
    p = small(k1=20.0, k_1=5.0, Ntx=200)
    c = SimConfig(p, 1e-5, BitFrame((1,), 1), trials=100, seed=21)
    ens = run_ensemble(c)
    x = ens.net_per_bit[:, 0]
    target = p.Ntx * cumulative_fraction(p.Tb, p)
    assert abs(x.mean() - target) < 4 * x.std(ddof=1) / math.sqrt(x.size) + 0.01 * target


def test_stderr_shrinks_like_root_n():
    p = small(Ntx=200, k_1=0.0)
    e1 = run_ensemble(cfg(p, trials=100, seed=3, dt=1e-5))
    e4 = run_ensemble(cfg(p, trials=400, seed=3, dt=1e-5))
    ratio = e1.stderr_cumulative[-1] / e4.stderr_cumulative[-1]
    assert 1.5 < ratio < 2.7


def test_ensemble_error_rates():
    c = cfg(small(Ntx=60), bits=(1, 0), trials=50, seed=2)
    e = run_ensemble(c)
    assert e.empirical_errors().shape == (2,)
    k = e.error_count(1, 1)
    assert k == np.count_nonzero(e.net_per_bit[:, 0] < 1)
    assert e.error_count(2, 1) == np.count_nonzero(e.net_per_bit[:, 1] >= 1)
    lo, hi = e.error_interval(1, 1)
    assert lo <= k / 50 <= hi
    assert np.allclose(e.times[:3], [0, 0.002, 0.004])


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 and 0.03 < hi < 0.04
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.4038, abs=1e-3) and hi == pytest.approx(0.5962, abs=1e-3)
    assert wilson_interval(0, 0) == (0.0, 1.0)
