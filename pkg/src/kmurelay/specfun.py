"""Scalar special functions used by the analytical SER formulas.

Everything here is pure and stateless.  The two hypergeometric evaluators
(`humbert_phi1`, `lauricella_phi1_3`) work term-by-term in sign +
log-magnitude and report whether the truncated series actually converged
within the configured budget, because the SER series are routinely pushed
into regimes where a fixed term budget is not enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special as sc

__all__ = [
    "SeriesControl",
    "SeriesValue",
    "DomainError",
    "log_gamma",
    "rising_factorial",
    "bessel_i_log",
    "gaussian_q",
    "humbert_phi1",
    "lauricella_phi1_3",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Hard ceiling on the number of series terms materialized at once.
_MAX_GRID_ELEMENTS = 50_000_000


class DomainError(ValueError):
    """Argument outside the domain an operation is defined on."""


@dataclass(frozen=True)
class SeriesControl:
    """Truncation budget for the multivariate hypergeometric series.

    max_terms_per_index: number of terms kept along each summation index.
    rel_tol: an index is considered converged once the largest term in its
        current hyperplane drops below rel_tol times the running partial sum
        for three consecutive steps.
    term_floor: terms below this magnitude are treated as exact zeros.
    """

    max_terms_per_index: int = 60
    rel_tol: float = 1e-12
    term_floor: float = math.exp(-745.0)

    def __post_init__(self) -> None:
        if self.max_terms_per_index < 1:
            raise DomainError("max_terms_per_index must be >= 1")
        if not self.rel_tol > 0.0:
            raise DomainError("rel_tol must be positive")
        if not self.term_floor > 0.0:
            raise DomainError("term_floor must be positive")


@dataclass(frozen=True)
class SeriesValue:
    """Result of a truncated series evaluation.

    value = sign * exp(log_abs); ``terms`` holds the number of terms kept
    along each summation index, ``converged`` whether every index met the
    truncation rule before hitting the budget.
    """

    value: float
    sign: float
    log_abs: float
    converged: bool
    terms: tuple[int, ...]


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def rising_factorial(x: float, n: int) -> tuple[float, float]:
    """Rising Pochhammer (x)_n = x (x+1) ... (x+n-1) as (sign, log-magnitude).

    (x)_0 = 1 for any x.  Computed through log-gamma when the whole factor
    chain is positive, otherwise through a direct signed product so that
    zero and negative factors are handled exactly.
    """
    if n < 0:
        raise DomainError("rising_factorial requires n >= 0")
    if n == 0:
        return 1.0, 0.0
    if x > 0.0:
        return 1.0, math.lgamma(x + n) - math.lgamma(x)
    sign = 1.0
    log_abs = 0.0
    for k in range(n):
        f = x + k
        if f == 0.0:
            return 0.0, -math.inf
        if f < 0.0:
            sign = -sign
        log_abs += math.log(abs(f))
    return sign, log_abs


def _bessel_i_log_series(nu: float, x: np.ndarray) -> np.ndarray:
    """Ascending-series ln I_nu(x), stable for small x (any nu >= -0.5)."""
    x = np.asarray(x, dtype=float)
    lead = nu * np.log(x / 2.0) - math.lgamma(nu + 1.0)
    q = x * x / 4.0
    total = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, 400):
        term = term * q / (k * (nu + k))
        total += term
        if np.all(term <= 1e-18 * total):
            break
    return lead + np.log(total)


def bessel_i_log(nu: float, x):
    """ln I_nu(x) for nu >= -0.5, x >= 0.  Accepts scalar or array x.

    Uses the exponentially scaled Bessel function for ordinary arguments and
    falls back to the log-domain ascending series where the scaled value
    underflows (tiny x with large order).
    """
    if nu < -0.5:
        raise DomainError(f"bessel_i_log requires nu >= -0.5, got {nu}")
    scalar = np.isscalar(x)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < 0.0):
        raise DomainError("bessel_i_log requires x >= 0")

    out = np.empty_like(xa)
    zero = xa == 0.0
    if np.any(zero):
        if nu == 0.0:
            out[zero] = 0.0
        elif nu > 0.0:
            out[zero] = -math.inf
        else:
            out[zero] = math.inf
    pos = ~zero
    if np.any(pos):
        xp = xa[pos]
        with np.errstate(divide="ignore"):
            scaled = sc.ive(nu, xp)
            vals = np.where(scaled > 0.0, np.log(np.maximum(scaled, 1e-320)) + xp, -math.inf)
        bad = ~np.isfinite(vals) | (scaled <= 0.0)
        if np.any(bad):
            vals[bad] = _bessel_i_log_series(nu, xp[bad])
        out[pos] = vals
    return float(out[0]) if scalar else out.reshape(np.shape(x))


def gaussian_q(x):
    """Gaussian tail probability Q(x) = erfc(x / sqrt(2)) / 2."""
    return 0.5 * sc.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def _check_c_parameter(c: float) -> None:
    if c <= 0.0 and c == math.floor(c):
        raise DomainError(f"series parameter c={c} is a non-positive integer")


def _log_abs_sign(v: float) -> tuple[float, float]:
    if v == 0.0:
        return -math.inf, 0.0
    return math.log(abs(v)), math.copysign(1.0, v)


def _pochhammer_axis(base: float, count: int) -> tuple[np.ndarray, np.ndarray]:
    """(base)_k for k = 0..count-1 as (log-magnitude, sign) arrays."""
    logs = np.empty(count)
    signs = np.empty(count)
    for k in range(count):
        s, l = rising_factorial(base, k)
        signs[k] = s
        logs[k] = l
    return logs, signs


def _power_axis(z: float, count: int, extra_log: np.ndarray | None = None,
                extra_sign: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """z^k / k! (optionally times an extra Pochhammer factor) per index."""
    k = np.arange(count)
    lz, sz = _log_abs_sign(z)
    if lz == -math.inf:
        logs = np.where(k == 0, 0.0, -math.inf)
    else:
        logs = k * lz - sc.gammaln(k + 1.0)
    if sz < 0.0:
        signs = np.where(k % 2 == 0, 1.0, -1.0)
    elif sz == 0.0:
        signs = np.where(k == 0, 1.0, 0.0)
    else:
        signs = np.ones(count)
    if extra_log is not None:
        logs = logs + extra_log
        signs = signs * extra_sign
    return logs, signs


def _truncate_axis(shifted: np.ndarray, axis: int, rel_tol: float) -> tuple[int, bool]:
    """Apply the hyperplane truncation rule along one axis.

    ``shifted`` holds max-shifted signed term magnitudes.  Scans hyperplanes
    in index order, keeping a running partial sum; stops after three
    consecutive hyperplanes whose largest |term| is below rel_tol times the
    running sum.  Returns (terms kept, converged flag).
    """
    n = shifted.shape[axis]
    other = tuple(i for i in range(shifted.ndim) if i != axis)
    plane_sum = shifted.sum(axis=other)
    plane_max = np.abs(shifted).max(axis=other)
    running = 0.0
    consec = 0
    for j in range(n):
        running += plane_sum[j]
        scale = max(abs(running), 1e-300)
        if plane_max[j] < rel_tol * scale:
            consec += 1
            if consec == 3:
                return j + 1, True
        else:
            consec = 0
    return n, False


def _sum_series(log_terms: np.ndarray, sign_terms: np.ndarray,
                ctl: SeriesControl) -> SeriesValue:
    """Max-shifted signed accumulation plus per-index truncation bookkeeping."""
    floor_log = math.log(ctl.term_floor)
    log_terms = np.where(log_terms < floor_log, -math.inf, log_terms)
    shift = float(np.max(log_terms))
    if shift == -math.inf:
        return SeriesValue(0.0, 0.0, -math.inf, True, (0,) * log_terms.ndim)
    with np.errstate(invalid="ignore"):
        shifted = sign_terms * np.exp(log_terms - shift)
    shifted = np.nan_to_num(shifted, nan=0.0)

    cuts = []
    converged = True
    for axis in range(shifted.ndim):
        cut, ok = _truncate_axis(shifted, axis, ctl.rel_tol)
        cuts.append(cut)
        converged = converged and ok
    box = shifted[tuple(slice(0, c) for c in cuts)]
    total = float(box.sum())
    if total == 0.0:
        return SeriesValue(0.0, 0.0, -math.inf, converged, tuple(cuts))
    log_abs = shift + math.log(abs(total))
    sign = math.copysign(1.0, total)
    value = sign * math.exp(log_abs) if log_abs < 709.0 else sign * math.inf
    return SeriesValue(value, sign, log_abs, converged, tuple(cuts))


def humbert_phi1(a: float, b: float, c: float, x: float, y: float,
                 ctl: SeriesControl = SeriesControl()) -> SeriesValue:
    """Confluent hypergeometric function of two variables.

    Phi1(a, b, c; x, y) = sum_{J,n} (a)_{J+n} (b)_J x^J y^n / ((c)_{J+n} J! n!),
    convergent for |x| < 1 (y unrestricted).
    """
    if not abs(x) < 1.0:
        raise DomainError(f"humbert_phi1 requires |x| < 1, got x={x}")
    _check_c_parameter(c)
    n_terms = ctl.max_terms_per_index
    if n_terms * n_terms > _MAX_GRID_ELEMENTS:
        raise DomainError("max_terms_per_index too large for the double series")

    la, sa = _pochhammer_axis(a, 2 * n_terms - 1)
    lc, scn = _pochhammer_axis(c, 2 * n_terms - 1)
    lb, sb = _pochhammer_axis(b, n_terms)
    lr = la - lc
    sr = sa * scn

    lu, su = _power_axis(x, n_terms, lb, sb)
    lv, sv = _power_axis(y, n_terms)

    idx = np.arange(n_terms)
    s_idx = idx[:, None] + idx[None, :]
    log_terms = lr[s_idx] + lu[:, None] + lv[None, :]
    sign_terms = sr[s_idx] * su[:, None] * sv[None, :]
    return _sum_series(log_terms, sign_terms, ctl)


def lauricella_phi1_3(a: float, b1: float, b2: float, c: float,
                      x: float, y: float, z: float,
                      ctl: SeriesControl = SeriesControl()) -> SeriesValue:
    """Confluent hypergeometric function of three variables.

    Phi1^(3)(a, b1, b2, c; x, y, z) =
        sum_{J,n,p} (a)_{J+n+p} (b1)_J (b2)_n x^J y^n z^p
                    / ((c)_{J+n+p} J! n! p!),
    convergent for |x| < 1 and |y| < 1 (z unrestricted).
    """
    if not abs(x) < 1.0:
        raise DomainError(f"lauricella_phi1_3 requires |x| < 1, got x={x}")
    if not abs(y) < 1.0:
        raise DomainError(f"lauricella_phi1_3 requires |y| < 1, got y={y}")
    _check_c_parameter(c)
    n_terms = ctl.max_terms_per_index
    if n_terms ** 3 > _MAX_GRID_ELEMENTS:
        raise DomainError("max_terms_per_index too large for the triple series")

    la, sa = _pochhammer_axis(a, 3 * n_terms - 2)
    lc, scn = _pochhammer_axis(c, 3 * n_terms - 2)
    lb1, sb1 = _pochhammer_axis(b1, n_terms)
    lb2, sb2 = _pochhammer_axis(b2, n_terms)
    lr = la - lc
    sr = sa * scn

    lu, su = _power_axis(x, n_terms, lb1, sb1)
    lv, sv = _power_axis(y, n_terms, lb2, sb2)
    lw, sw = _power_axis(z, n_terms)

    idx = np.arange(n_terms)
    s_idx = idx[:, None, None] + idx[None, :, None] + idx[None, None, :]
    log_terms = (lr[s_idx] + lu[:, None, None] + lv[None, :, None]
                 + lw[None, None, :])
    sign_terms = (sr[s_idx] * su[:, None, None] * sv[None, :, None]
                  * sw[None, None, :])
    return _sum_series(log_terms, sign_terms, ctl)
