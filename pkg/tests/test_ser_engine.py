"""Unit tests for the analytical SER engine."""

import math

import numpy as np
import pytest

from kmurelay.kappa_mu import KappaMuParams
from kmurelay.ser_engine import (
    LinkParams,
    NetworkParams,
    compose_end_to_end,
    conditional_ser,
    coop_ser,
    end_to_end_ser,
    link_ser,
    link_ser_quadrature,
    link_ser_series,
    modulation,
)
from kmurelay.specfun import DomainError, SeriesControl


def _link(kappa, mu, gbar, ap=1):
    return LinkParams(KappaMuParams(kappa, mu, gbar, ap))


def _net(mod, gbar=10.0, kappa=1.0, mu=1.0):
    l = _link(kappa, mu, gbar)
    return NetworkParams(l, l, l, mod)


def test_modulation_table():
    bpsk = modulation("bpsk")
    assert (bpsk.a, bpsk.b, bpsk.c) == (1.0, 2.0, 0.0)
    bfsk = modulation("bfsk")
    assert (bfsk.a, bfsk.b, bfsk.c) == (1.0, 1.0, 0.0)
    qpsk = modulation("qpsk")
    assert (qpsk.a, qpsk.b, qpsk.c) == (2.0, 2.0, 1.0)
    dpsk = modulation("dpsk")
    assert (dpsk.a, dpsk.b, dpsk.c) == (2.0, 2.0, 2.0)
    qam4 = modulation("mqam", 4)
    assert (qam4.a, qam4.b, qam4.c) == (2.0, 1.0, 1.0)
    psk8 = modulation("mpsk", 8)
    assert psk8.a == 2.0 and psk8.b == pytest.approx(2.0 * math.sin(math.pi / 8) ** 2)
    pam4 = modulation("mpam", 4)
    assert (pam4.a, pam4.b, pam4.c) == (1.5, 0.4, 0.0)


def test_modulation_validation():
    with pytest.raises(DomainError):
        modulation("mqam")  # M required
    with pytest.raises(DomainError):
        modulation("mpsk", 6)  # not a power of two
    with pytest.raises(DomainError):
        modulation("nosuch")


def test_conditional_ser_at_zero():
    assert conditional_ser(modulation("bpsk"), 0.0) == pytest.approx(0.5)
    assert conditional_ser(modulation("qpsk"), 0.0) == pytest.approx(0.75)


def test_conditional_ser_monotone_and_bounded():
    g = np.linspace(0.0, 50.0, 200)
    for scheme, M in (("bpsk", None), ("qpsk", None), ("dpsk", None),
                      ("mqam", 16), ("mpam", 8), ("mpsk", 8), ("bfsk", None)):
        vals = conditional_ser(modulation(scheme, M), g)
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
        assert np.all(np.diff(vals) <= 0.0)


def test_rayleigh_bpsk_anchor():
    mod = modulation("bpsk")
    for gbar in (0.5, 1.0, 5.0, 20.0):
        closed = 0.5 * (1.0 - math.sqrt(gbar / (1.0 + gbar)))
        assert link_ser_quadrature(_link(1e-12, 1.0, gbar), mod) == \
            pytest.approx(closed, abs=1e-9)


def test_quadrature_low_snr_limit():
    for scheme in ("bpsk", "qpsk"):
        mod = modulation(scheme)
        val = link_ser_quadrature(_link(1.0, 1.0, 1e-4), mod)
        assert val == pytest.approx(conditional_ser(mod, 0.0), rel=2e-2)


def test_quadrature_kappa_ordering():
    mod = modulation("qpsk")
    with_los = link_ser_quadrature(_link(3.0, 2.0, 10.0), mod)
    without = link_ser_quadrature(_link(1e-12, 2.0, 10.0), mod)
    assert with_los < without


def test_series_matches_quadrature_where_converged():
    # rel_tol 1e-9 lets the hyperplane rule fire within the 40-term budget
    # while keeping far more accuracy than the 1e-6 agreement bound.
    ctl = SeriesControl(max_terms_per_index=40, rel_tol=1e-9)
    cases = [
        ("bpsk", None, 0.5, 1.0, 1, 5.0),
        ("qpsk", None, 2.0, 1.5, 2, 8.0),
        ("mqam", 4, 1.0, 1.0, 1, 20.0),
        ("dpsk", None, 1.0, 2.0, 1, 10.0),
        ("mpsk", 8, 0.5, 1.0, 2, 15.0),
    ]
    for scheme, M, k, mu, ap, gbar in cases:
        mod = modulation(scheme, M)
        link = _link(k, mu, gbar, ap)
        res = link_ser_series(link, mod, ctl)
        quad = link_ser_quadrature(link, mod)
        assert res.converged, (scheme, k, mu, ap, gbar)
        assert res.value == pytest.approx(quad, rel=1e-6)


def test_series_fifteen_term_example():
    # BPSK, kappa=0.5, mu=1, gbar=5: 15 terms per index reach 4 decimals
    mod = modulation("bpsk")
    link = _link(0.5, 1.0, 5.0)
    res = link_ser_series(link, mod, SeriesControl(max_terms_per_index=15))
    assert abs(res.value - link_ser_quadrature(link, mod)) <= 1e-4


def test_series_i2_vanishes_for_two_term_free_schemes():
    res = link_ser_series(_link(1.0, 1.0, 5.0), modulation("bpsk"))
    assert res.i2 == 0.0 and res.value == pytest.approx(res.i1)


def test_series_nonconvergence_flag_and_fallback():
    # large shape at low SNR pushes the series argument toward 1
    link = _link(3.0, 4.0, 1.0, 4)
    mod = modulation("mqam", 4)
    ctl = SeriesControl(max_terms_per_index=40)
    res = link_ser_series(link, mod, ctl)
    assert not res.converged
    # the fallback route must hand back the quadrature value
    assert link_ser(link, mod, method="series", ctl=ctl) == \
        pytest.approx(link_ser_quadrature(link, mod), rel=1e-10)


def test_coop_is_branch_product():
    net = _net(modulation("qpsk"))
    p_sd = link_ser_quadrature(net.sd, net.modulation)
    p_rd = link_ser_quadrature(net.rd, net.modulation)
    assert coop_ser(net) == pytest.approx(p_sd * p_rd, rel=1e-12)
    assert coop_ser(net) == pytest.approx(p_sd ** 2, rel=1e-12)  # symmetric links


def test_coop_vanishes_with_perfect_relay_branch():
    mod = modulation("qpsk")
    net = NetworkParams(_link(1.0, 1.0, 10.0), _link(1.0, 1.0, 10.0),
                        _link(1.0, 1.0, 1e12), mod)
    assert coop_ser(net) < 1e-12


def test_compose_degenerate_cases():
    # perfect source-relay link: only the cooperation branch remains
    assert compose_end_to_end(0.0, 0.3, 0.06) == pytest.approx(0.06)
    # always-failing source-relay link: the direct link decides
    assert compose_end_to_end(1.0, 0.3, 0.06) == pytest.approx(0.3)


def test_end_to_end_limits():
    mod = modulation("qpsk")
    strong_sr = NetworkParams(_link(1.0, 1.0, 1e12), _link(1.0, 1.0, 10.0),
                              _link(1.0, 1.0, 10.0), mod)
    assert end_to_end_ser(strong_sr) == pytest.approx(coop_ser(strong_sr), rel=1e-6)


def test_end_to_end_monotone_in_each_link_snr():
    mod = modulation("mqam", 4)
    for which in range(3):
        prev = 1.0
        for gbar in (1.0, 3.0, 10.0, 30.0, 100.0):
            gs = [5.0, 5.0, 5.0]
            gs[which] = gbar
            net = NetworkParams(_link(1.0, 1.0, gs[0]), _link(1.0, 1.0, gs[1]),
                                _link(1.0, 1.0, gs[2]), mod)
            val = end_to_end_ser(net)
            assert val <= prev + 1e-15
            prev = val


def test_probabilities_in_unit_interval():
    rng = np.random.default_rng(0)
    mod = modulation("qpsk")
    for _ in range(20):
        k = float(rng.uniform(0.0, 5.0))
        mu = float(rng.uniform(0.3, 4.0))
        g = float(10 ** rng.uniform(-1.0, 3.0))
        net = _net(mod, g, k, mu)
        assert 0.0 <= end_to_end_ser(net) <= 1.0
