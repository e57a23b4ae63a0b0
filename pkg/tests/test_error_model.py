import math

import mpmath as mp
import pytest

from adreceiver.channel import cumulative_fraction
from adreceiver.error_model import (
    BitFrame,
    FractionCache,
    isi_rates,
    p_error_fa_pa,
    p_error_given_bit0,
    p_error_given_bit1,
    p_error_history_averaged,
    p_error_random_bit,
    threshold_sweep,
)
from adreceiver.exceptions import ConfigError, DomainError, ReceiverKindError
from adreceiver.params import SystemParams


def link(k1=20.0, k_1=10.0, **kw):
    base = dict(D=5.0, r0=20.0, rr=15.0, Ntx=50, Ts=0.002, Tb=0.2)
    base.update(kw)
    return SystemParams(k1=k1, k_1=k_1, **base)


def brute_skellam_cdf(n, mu1, mu2, kmax=120):
    mp.mp.dps = 30
    tot = mp.mpf(0)
    for a in range(kmax):
        for b in range(kmax):
            if a - b <= n:
                tot += mp.exp(-mu1 - mu2) * mp.mpf(mu1) ** a * mp.mpf(mu2) ** b / (mp.factorial(a) * mp.factorial(b))
    return float(tot)


def test_frame_validation():
    assert BitFrame.from_string("1 0 1", 3).bits == (1, 0, 1)
    with pytest.raises(ConfigError):
        BitFrame((), 1)
    with pytest.raises(ConfigError):
        BitFrame((1, 2), 1)
    with pytest.raises(ConfigError):
        BitFrame((1,), 1, 0.7, 0.7)
    with pytest.raises(ConfigError):
        BitFrame((1,), 1.5)


def test_first_interval_rates():
    p = link()
    r = isi_rates(BitFrame((1,), 1), 1, p)
    assert r.psi2 == 0.0
    assert r.psi1 == pytest.approx(p.Ntx * cumulative_fraction(p.Tb, p), rel=1e-12)


def test_rates_collect_earlier_bits():
    p = link()
    R = [cumulative_fraction(m * p.Tb, p) for m in range(4)]
    r = isi_rates(BitFrame((1, 0, 1), 1), 3, p)
    assert r.psi1 == pytest.approx(p.Ntx * (R[3] + R[1]), rel=1e-12)
    assert r.psi2 == pytest.approx(p.Ntx * (R[2] + R[0]), rel=1e-12)
    with pytest.raises(DomainError):
        isi_rates(BitFrame((1,), 1), 2, p)


@pytest.mark.parametrize("Nth", [-1, 0, 1, 2, 4])
def test_skellam_errors_against_double_poisson_sum(Nth):
    p = link(Ntx=400)
    f1 = BitFrame((1, 1, 1), Nth)
    r = isi_rates(f1, 3, p)
    assert p_error_given_bit1(f1, 3, p) == pytest.approx(brute_skellam_cdf(Nth - 1, r.psi1, r.psi2), rel=1e-9)
    f0 = BitFrame((1, 1, 0), Nth)
    r0 = isi_rates(f0, 3, p)
    assert p_error_given_bit0(f0, 3, p) == pytest.approx(1 - brute_skellam_cdf(Nth - 1, r0.psi1, r0.psi2), rel=1e-9)


def test_conditional_errors_need_matching_bit():
    with pytest.raises(DomainError):
        p_error_given_bit1(BitFrame((1, 0), 1), 2, link())
    with pytest.raises(DomainError):
        p_error_given_bit0(BitFrame((1, 1), 1), 2, link())


def test_single_poisson_model_for_irreversible_receivers():
    p = link(k_1=0.0)
    R = [cumulative_fraction(m * p.Tb, p) for m in range(4)]
    frame = BitFrame((1, 1, 1), 3)
    gamma1 = (R[3] - R[2]) + (R[2] - R[1]) + (R[1] - R[0])
    gamma0 = (R[3] - R[2]) + (R[2] - R[1])
    mu1, mu0 = p.Ntx * gamma1, p.Ntx * gamma0
    e1 = math.fsum(math.exp(-mu1) * mu1 ** k / math.factorial(k) for k in range(3))
    e0 = 1 - math.fsum(math.exp(-mu0) * mu0 ** k / math.factorial(k) for k in range(3))
    assert p_error_fa_pa(frame, 3, p, 1) == pytest.approx(e1, rel=1e-10)
    assert p_error_fa_pa(frame, 3, p, 0) == pytest.approx(e0, rel=1e-10)
    with pytest.raises(ReceiverKindError):
        p_error_fa_pa(frame, 3, link(), 1)
    fa = link(k1=math.inf, k_1=0.0)
    assert 0 <= p_error_fa_pa(frame, 3, fa, 1) <= 1


def test_skellam_close_to_poisson_without_desorption():
    # with k_1 = 0 the difference model and the single-Poisson model describe the
    # same receiver; the gap is the price of treating the two counts as independent
    p = link(k_1=0.0)
    gaps = []
    for nth in range(-4, 9):
        one = BitFrame((1, 1, 1), nth)
        zero = one.with_bit(3, 0)
        gaps.append(abs(p_error_given_bit1(one, 3, p) - p_error_fa_pa(one, 3, p, 1)))
        gaps.append(abs(p_error_given_bit0(zero, 3, p) - p_error_fa_pa(zero, 3, p, 0)))
    assert max(gaps) <= 0.02, f"largest gap {max(gaps):.4f}"


def test_random_bit_weights_priors():
    p = link()
    frame = BitFrame((1, 1, 1), 1, 0.3, 0.7)
    e1 = p_error_given_bit1(frame, 3, p)
    e0 = p_error_given_bit0(frame.with_bit(3, 0), 3, p)
    assert p_error_random_bit(frame, 3, p) == pytest.approx(0.3 * e1 + 0.7 * e0, rel=1e-14)
    assert p_error_random_bit(frame, 3, p.with_(k_1=0.0), model="auto") == pytest.approx(
        0.3 * p_error_fa_pa(frame, 3, p.with_(k_1=0.0), 1) + 0.7 * p_error_fa_pa(frame, 3, p.with_(k_1=0.0), 0))
    with pytest.raises(DomainError):
        p_error_random_bit(frame, 3, p, model="gaussian")


def test_history_average():
    p = link()
    # one bit: no history to average over
    assert p_error_history_averaged(1, 1, p) == pytest.approx(p_error_random_bit(BitFrame((1,), 1), 1, p))
    hist = [(a, b) for a in (0, 1) for b in (0, 1)]
    expect = sum(0.25 * p_error_random_bit(BitFrame(h + (1,), 1), 3, p) for h in hist)
    assert p_error_history_averaged(3, 1, p) == pytest.approx(expect, rel=1e-13)


def test_threshold_sweep_is_monotone_over_full_range():
    p = link()
    frame = BitFrame((1, 1, 1), 0)
    ths = list(range(-30, 60))
    e1 = threshold_sweep(frame, 3, p, ths, kind="bit1")
    e0 = threshold_sweep(frame, 3, p, ths, kind="bit0")
    assert all(b >= a for a, b in zip(e1, e1[1:]))
    assert all(b <= a for a, b in zip(e0, e0[1:]))
    assert e1[0] < 1e-12 and e1[-1] > 1 - 1e-12
    with pytest.raises(DomainError):
        threshold_sweep(frame, 3, p, ths, kind="other")


def test_fraction_cache_reuse_and_guard():
    p = link()
    calls = []

    def fake(T, q):
        calls.append(T)
        return 0.01 * T

    cache = FractionCache(p, fraction=fake)
    assert cache(2) == pytest.approx(0.004)
    cache(2)
    assert len(calls) == 1
    with pytest.raises(ConfigError):
        isi_rates(BitFrame((1,), 1), 1, link(k1=10.0), cache)
