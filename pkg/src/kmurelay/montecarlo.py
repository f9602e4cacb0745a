"""Trial-based validation of the analytical SER.

Two modes:

* ``model_faithful`` reproduces the event algebra of the analytical
  end-to-end composition exactly in expectation: per trial the three link
  SNRs are drawn, the relay errs with its conditional SER, and the
  cooperation-mode error is the conjunction of two independent branch
  errors (whose expectation is the branch-SER product).
* ``physical`` runs an actual symbol-level simulation (Alamouti for two
  transmit antennas, MRC at every receiver) and therefore exposes the
  approximation error of the product-form cooperation model.

Partitions own independent counter-based streams (Philox keyed by
(seed, partition)), so results are reproducible under any execution order.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from . import kappa_mu
from .kappa_mu import KappaMuParams
from .ser_engine import LinkParams, ModulationParams, NetworkParams, conditional_ser
from .specfun import DomainError

__all__ = [
    "SimConfig",
    "SimResult",
    "wilson_ci99",
    "run_model_faithful",
    "run_physical",
    "run_physical_single_link",
    "merge",
]

# 99% two-sided normal quantile for the Wilson interval.
_Z99 = 2.5758293035489004

_PHYSICAL_SCHEMES = ("bpsk", "qpsk", "mqam")


@dataclass(frozen=True)
class SimConfig:
    """One simulation experiment.

    ``antennas`` = (N_source, N_relay, N_destination); required for
    physical mode, where each count must be 1 or 2 and must reproduce the
    per-link antenna products of ``net``.
    """

    net: NetworkParams
    mode: str
    trials: int
    seed: int
    partitions: int = 1
    antennas: tuple[int, int, int] | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("model_faithful", "physical"):
            raise DomainError(f"unknown simulation mode {self.mode!r}")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.partitions < 1:
            raise DomainError("partitions must be >= 1")
        if self.mode == "physical":
            if self.antennas is None:
                raise DomainError("physical mode requires antenna counts")
            ns, nr, nd = self.antennas
            if not all(n in (1, 2) for n in (ns, nr, nd)):
                raise DomainError("physical mode supports 1 or 2 antennas per node")
            prods = (ns * nr, ns * nd, nr * nd)
            actual = (self.net.sr.fading.antenna_product,
                      self.net.sd.fading.antenna_product,
                      self.net.rd.fading.antenna_product)
            if prods != actual:
                raise DomainError(
                    f"antenna counts {self.antennas} imply per-link products "
                    f"{prods}, but the network carries {actual}")
            if self.net.modulation.scheme not in _PHYSICAL_SCHEMES or \
                    self.net.modulation.M > 4:
                raise DomainError("physical mode supports BPSK, QPSK and 4-QAM only")

    def fingerprint(self) -> str:
        """Configuration hash shared by all partitions of one experiment."""
        return hashlib.sha256(repr(self).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SimResult:
    trials: int
    errors: int
    ser: float
    ci99_low: float
    ci99_high: float
    seed: int
    mode: str
    config_key: str

    def __post_init__(self) -> None:
        if not 0 <= self.errors <= self.trials:
            raise DomainError("errors must lie in [0, trials]")


def wilson_ci99(errors: int, trials: int) -> tuple[float, float]:
    """99% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    z2 = _Z99 * _Z99
    phat = errors / trials
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2.0 * trials)) / denom
    half = (_Z99 / denom) * math.sqrt(phat * (1.0 - phat) / trials
                                      + z2 / (4.0 * trials * trials))
    return max(center - half, 0.0), min(center + half, 1.0)


def _make_result(cfg: SimConfig, trials: int, errors: int) -> SimResult:
    lo, hi = wilson_ci99(errors, trials)
    return SimResult(trials, errors, errors / trials, lo, hi,
                     cfg.seed, cfg.mode, cfg.fingerprint())


def _partition_sizes(trials: int, partitions: int) -> list[int]:
    base, extra = divmod(trials, partitions)
    return [base + (1 if i < extra else 0) for i in range(partitions)]


def _stream(seed: int, partition: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, partition], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def run_model_faithful(cfg: SimConfig) -> SimResult:
    """Monte Carlo estimate whose error-indicator expectation equals the
    analytical end-to-end SER exactly."""
    if cfg.mode != "model_faithful":
        raise DomainError("config mode must be 'model_faithful'")
    mod = cfg.net.modulation
    errors = 0
    for part, n in enumerate(_partition_sizes(cfg.trials, cfg.partitions)):
        if n == 0:
            continue
        rng = _stream(cfg.seed, part)
        g_sr = kappa_mu.sample_snr(cfg.net.sr.fading, rng, size=n)
        g_sd = kappa_mu.sample_snr(cfg.net.sd.fading, rng, size=n)
        g_rd = kappa_mu.sample_snr(cfg.net.rd.fading, rng, size=n)
        u_relay = rng.random(n)
        u_sd = rng.random(n)
        u_rd = rng.random(n)
        relay_err = u_relay < conditional_ser(mod, g_sr)
        sd_err = u_sd < conditional_ser(mod, g_sd)
        rd_err = u_rd < conditional_ser(mod, g_rd)
        dest_err = np.where(relay_err, sd_err, sd_err & rd_err)
        errors += int(dest_err.sum())
    return _make_result(cfg, cfg.trials, errors)


# --- physical (symbol-level) mode -----------------------------------------

def _constellation(mod: ModulationParams) -> np.ndarray:
    if mod.scheme == "bpsk":
        return np.array([1.0 + 0.0j, -1.0 + 0.0j])
    # QPSK and 4-QAM share the unit-energy quadrature constellation.
    return np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / math.sqrt(2.0)


def _symbol_snr_factor(mod: ModulationParams) -> float:
    """Maps the model SNR gamma to the simulated per-symbol Es/N0.

    Chosen so that the AWGN symbol error rate of the simulated constellation
    at Es/N0 = f * gamma equals a Q(sqrt(b*gamma)) - c Q^2(sqrt(b*gamma)).
    """
    if mod.scheme == "bpsk":
        return mod.b / 2.0
    return mod.b


def _draw_channel(fading: KappaMuParams, nrx: int, ntx: int, blocks: int,
                  rng: np.random.Generator) -> np.ndarray:
    elem = KappaMuParams(fading.kappa, fading.mu, 1.0, 1)
    mag, phase = kappa_mu.sample_envelope(elem, rng, size=(blocks, nrx, ntx))
    return mag * np.exp(1j * phase)


def _hop(h: np.ndarray, sym: np.ndarray, gbar: float, factor: float,
         rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Transmit one block of 2 symbols over one hop and combine.

    h: (blocks, nrx, ntx); sym: (blocks, 2) unit-energy symbols.
    Returns per-symbol sufficient statistics (z, gain, noise_var), each
    shaped (blocks, 2), where z = gain * s + CN(0, noise_var).
    """
    blocks, nrx, ntx = h.shape
    fro2 = np.sum(np.abs(h) ** 2, axis=(1, 2))
    sigma2 = nrx / (factor * gbar)
    noise = math.sqrt(sigma2 / 2.0) * (rng.standard_normal((blocks, nrx, 2))
                                       + 1j * rng.standard_normal((blocks, nrx, 2)))
    if ntx == 2:
        h0, h1 = h[:, :, 0], h[:, :, 1]
        s1, s2 = sym[:, 0], sym[:, 1]
        y1 = (s1[:, None] * h0 + s2[:, None] * h1) / math.sqrt(2.0) + noise[:, :, 0]
        y2 = (-np.conj(s2)[:, None] * h0 + np.conj(s1)[:, None] * h1) / math.sqrt(2.0) \
            + noise[:, :, 1]
        z1 = np.sum(np.conj(h0) * y1 + h1 * np.conj(y2), axis=1)
        z2 = np.sum(np.conj(h1) * y1 - h0 * np.conj(y2), axis=1)
        gain = fro2 / math.sqrt(2.0)
        z = np.stack([z1, z2], axis=1)
    else:
        hv = h[:, :, 0]
        y = hv[:, :, None] * sym[:, None, :] + noise
        z = np.sum(np.conj(hv)[:, :, None] * y, axis=1)
        gain = fro2
    gains = np.broadcast_to(gain[:, None], z.shape)
    nvar = np.broadcast_to((fro2 * sigma2)[:, None], z.shape)
    return z, gains, nvar


def _detect(stat: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Index of the nearest constellation point."""
    d = np.abs(stat[..., None] - points[None, None, :])
    return np.argmin(d, axis=-1)


def run_physical(cfg: SimConfig) -> SimResult:
    """Symbol-level simulation of the full relay topology."""
    if cfg.mode != "physical":
        raise DomainError("config mode must be 'physical'")
    ns, nr, nd = cfg.antennas
    mod = cfg.net.modulation
    points = _constellation(mod)
    factor = _symbol_snr_factor(mod)
    errors = 0
    for part, n in enumerate(_partition_sizes(cfg.trials, cfg.partitions)):
        if n == 0:
            continue
        rng = _stream(cfg.seed, part)
        blocks = (n + 1) // 2
        sym_idx = rng.integers(0, len(points), size=(blocks, 2))
        sym = points[sym_idx]

        h_sr = _draw_channel(cfg.net.sr.fading, nr, ns, blocks, rng)
        h_sd = _draw_channel(cfg.net.sd.fading, nd, ns, blocks, rng)
        h_rd = _draw_channel(cfg.net.rd.fading, nd, nr, blocks, rng)

        z_sr, g_sr, v_sr = _hop(h_sr, sym, cfg.net.sr.fading.mean_snr, factor, rng)
        relay_idx = _detect(z_sr / g_sr, points)
        relay_ok = relay_idx == sym_idx

        z_sd, g_sd, v_sd = _hop(h_sd, sym, cfg.net.sd.fading.mean_snr, factor, rng)
        # The relay re-encodes its decisions; only correctly decoded symbols
        # are forwarded, so transmitting the true symbols and masking by
        # relay_ok is equivalent.
        z_rd, g_rd, v_rd = _hop(h_rd, sym, cfg.net.rd.fading.mean_snr, factor, rng)

        w_sd = g_sd / v_sd
        w_rd = np.where(relay_ok, g_rd / v_rd, 0.0)
        num = w_sd * z_sd + w_rd * z_rd
        den = w_sd * g_sd + w_rd * g_rd
        dest_idx = _detect(num / den, points)
        err = (dest_idx != sym_idx).ravel()[:n]
        errors += int(err.sum())
    return _make_result(cfg, cfg.trials, errors)


def run_physical_single_link(fading: KappaMuParams, mod: ModulationParams,
                             ntx: int, nrx: int, trials: int, seed: int,
                             partitions: int = 1) -> SimResult:
    """Physical simulation of a lone hop (the relay-disabled degenerate case).

    ``fading.antenna_product`` must equal ntx * nrx; the hop uses Alamouti
    for ntx = 2 and plain transmission for ntx = 1.
    """
    if fading.antenna_product != ntx * nrx:
        raise DomainError("fading.antenna_product must equal ntx * nrx")
    if ntx not in (1, 2) or nrx not in (1, 2):
        raise DomainError("single-link physical mode supports 1 or 2 antennas")
    points = _constellation(mod)
    factor = _symbol_snr_factor(mod)
    key = hashlib.sha256(
        repr(("single_link", fading, mod, ntx, nrx, trials, seed, partitions)).encode()
    ).hexdigest()[:16]
    errors = 0
    for part, n in enumerate(_partition_sizes(trials, partitions)):
        if n == 0:
            continue
        rng = _stream(seed, part)
        blocks = (n + 1) // 2
        sym_idx = rng.integers(0, len(points), size=(blocks, 2))
        sym = points[sym_idx]
        h = _draw_channel(fading, nrx, ntx, blocks, rng)
        z, g, _ = _hop(h, sym, fading.mean_snr, factor, rng)
        idx = _detect(z / g, points)
        err = (idx != sym_idx).ravel()[:n]
        errors += int(err.sum())
    lo, hi = wilson_ci99(errors, trials)
    return SimResult(trials, errors, errors / trials, lo, hi, seed,
                     "physical", key)


def merge(results: list[SimResult]) -> SimResult:
    """Pool partition results of one experiment."""
    if not results:
        raise DomainError("merge requires at least one result")
    first = results[0]
    for r in results[1:]:
        if r.mode != first.mode or r.config_key != first.config_key:
            raise DomainError("merge requires results from the same configuration")
    trials = sum(r.trials for r in results)
    errors = sum(r.errors for r in results)
    lo, hi = wilson_ci99(errors, trials)
    return SimResult(trials, errors, errors / trials, lo, hi,
                     first.seed, first.mode, first.config_key)
