"""Unit tests for the Monte Carlo simulator."""

import math

import numpy as np
import pytest
import scipy.stats as st

from kmurelay.kappa_mu import KappaMuParams
from kmurelay.montecarlo import (
    SimConfig,
    merge,
    run_model_faithful,
    run_physical,
    run_physical_single_link,
    wilson_ci99,
)
from kmurelay.ser_engine import (
    LinkParams,
    NetworkParams,
    end_to_end_ser,
    link_ser_quadrature,
    modulation,
)
from kmurelay.specfun import DomainError


def _net(mod, gbar=10.0, kappa=1.0, mu=1.0, ap=1):
    link = LinkParams(KappaMuParams(kappa, mu, gbar, ap))
    return NetworkParams(link, link, link, mod)


def test_config_validation():
    net = _net(modulation("qpsk"))
    with pytest.raises(DomainError):
        SimConfig(net, "bogus", 100, 0)
    with pytest.raises(DomainError):
        SimConfig(net, "model_faithful", 0, 0)
    with pytest.raises(DomainError):
        SimConfig(net, "physical", 100, 0)  # antennas missing
    with pytest.raises(DomainError):
        SimConfig(net, "physical", 100, 0, antennas=(3, 1, 1))
    with pytest.raises(DomainError):
        SimConfig(net, "physical", 100, 0, antennas=(2, 1, 1))  # product mismatch
    with pytest.raises(DomainError):
        SimConfig(_net(modulation("mpsk", 8)), "physical", 100, 0,
                  antennas=(1, 1, 1))  # unsupported scheme


def test_wilson_interval_brackets_the_estimate():
    lo, hi = wilson_ci99(37, 1000)
    assert lo <= 0.037 <= hi
    assert wilson_ci99(0, 100)[0] == 0.0
    assert wilson_ci99(100, 100)[1] == 1.0


def test_model_faithful_matches_analytics():
    net = _net(modulation("qpsk"), gbar=10.0)
    cfg = SimConfig(net, "model_faithful", 1_000_000, 2024, partitions=4)
    res = run_model_faithful(cfg)
    assert res.ci99_low <= end_to_end_ser(net) <= res.ci99_high


def test_model_faithful_deterministic():
    net = _net(modulation("mqam", 4), gbar=6.0)
    cfg = SimConfig(net, "model_faithful", 50_000, 7, partitions=3)
    assert run_model_faithful(cfg) == run_model_faithful(cfg)


def test_model_faithful_no_errors_at_huge_snr():
    net = _net(modulation("bpsk"), gbar=1e12)
    res = run_model_faithful(SimConfig(net, "model_faithful", 100_000, 1))
    assert res.errors == 0


def test_merge_identities():
    net = _net(modulation("qpsk"))
    cfg = SimConfig(net, "model_faithful", 10_000, 5, partitions=4)
    res = run_model_faithful(cfg)
    assert merge([res]) == res
    pooled = merge([res, res, res])
    assert pooled.trials == 3 * res.trials
    assert pooled.ser == pytest.approx(res.errors * 3 / (res.trials * 3))


def test_merge_rejects_mixed_configs():
    net = _net(modulation("qpsk"))
    a = run_model_faithful(SimConfig(net, "model_faithful", 1000, 5))
    b = run_model_faithful(SimConfig(net, "model_faithful", 1000, 6))
    with pytest.raises(DomainError):
        merge([a, b])


def test_partition_estimates_are_binomially_dispersed():
    # per-partition error counts behave like independent binomial draws
    net = _net(modulation("qpsk"), gbar=8.0)
    p_true = end_to_end_ser(net)
    n_per = 20_000
    sers = []
    for part in range(24):
        cfg = SimConfig(net, "model_faithful", n_per, 1234 + part)
        sers.append(run_model_faithful(cfg).ser)
    scale = math.sqrt(p_true * (1.0 - p_true) / n_per)
    d = st.kstest(np.array(sers), st.norm(loc=p_true, scale=scale).cdf).statistic
    assert d < 1.95 / math.sqrt(len(sers))


def test_physical_single_link_rayleigh_bpsk():
    fading = KappaMuParams(1e-12, 1.0, 1.0, 1)
    res = run_physical_single_link(fading, modulation("bpsk"), 1, 1, 400_000, 21,
                                   partitions=4)
    closed = 0.5 * (1.0 - math.sqrt(0.5))
    assert res.ci99_low <= closed <= res.ci99_high


def test_physical_alamouti_matches_quadrature():
    fading = KappaMuParams(2.0, 1.0, 8.0, 2)
    mod = modulation("qpsk")
    res = run_physical_single_link(fading, mod, 2, 1, 400_000, 22, partitions=4)
    target = link_ser_quadrature(LinkParams(fading), mod)
    assert res.ci99_low <= target <= res.ci99_high


def test_physical_alamouti_diversity_order_two():
    # slope of log10 SER between 20 and 30 dB must sit near -2 per decade
    mod = modulation("bpsk")
    r20 = run_physical_single_link(KappaMuParams(1e-12, 1.0, 100.0, 2), mod,
                                   2, 1, 2_000_000, 11, partitions=4)
    r30 = run_physical_single_link(KappaMuParams(1e-12, 1.0, 1000.0, 2), mod,
                                   2, 1, 20_000_000, 11, partitions=8)
    slope = math.log10(r30.ser / r20.ser)
    assert -2.3 <= slope <= -1.7


def test_physical_relay_network_runs_and_is_deterministic():
    net = _net(modulation("qpsk"), gbar=10.0)
    cfg = SimConfig(net, "physical", 200_000, 77, partitions=2,
                    antennas=(1, 1, 1))
    a = run_physical(cfg)
    b = run_physical(cfg)
    assert a == b
    assert 0.0 < a.ser < 1.0
    # same order of magnitude as the model-faithful estimate
    m = run_model_faithful(SimConfig(net, "model_faithful", 200_000, 77,
                                     partitions=2))
    assert 0.2 < a.ser / m.ser < 5.0


def test_physical_single_link_validation():
    with pytest.raises(DomainError):
        run_physical_single_link(KappaMuParams(1.0, 1.0, 1.0, 1),
                                 modulation("bpsk"), 2, 1, 100, 0)
    with pytest.raises(DomainError):
        run_physical_single_link(KappaMuParams(1.0, 1.0, 1.0, 3),
                                 modulation("bpsk"), 3, 1, 100, 0)
