"""Analytical and Monte Carlo symbol-error-rate tools for a selective
decode-and-forward relay link over kappa-mu fading with orthogonal STBC."""

from .kappa_mu import KappaMuParams, cdf_numeric, mgf, pdf, sample_envelope, sample_snr
from .montecarlo import (
    SimConfig,
    SimResult,
    merge,
    run_model_faithful,
    run_physical,
    run_physical_single_link,
    wilson_ci99,
)
from .ser_engine import (
    LinkParams,
    ModulationParams,
    NetworkParams,
    QuadratureError,
    SeriesSerResult,
    compose_end_to_end,
    conditional_ser,
    coop_ser,
    end_to_end_ser,
    link_ser,
    link_ser_quadrature,
    link_ser_series,
    modulation,
)
from .specfun import (
    DomainError,
    SeriesControl,
    SeriesValue,
    bessel_i_log,
    gaussian_q,
    humbert_phi1,
    lauricella_phi1_3,
    log_gamma,
    rising_factorial,
)

__all__ = [
    "KappaMuParams",
    "pdf",
    "mgf",
    "cdf_numeric",
    "sample_snr",
    "sample_envelope",
    "ModulationParams",
    "LinkParams",
    "NetworkParams",
    "SeriesSerResult",
    "QuadratureError",
    "modulation",
    "conditional_ser",
    "link_ser",
    "link_ser_quadrature",
    "link_ser_series",
    "coop_ser",
    "compose_end_to_end",
    "end_to_end_ser",
    "SimConfig",
    "SimResult",
    "run_model_faithful",
    "run_physical",
    "run_physical_single_link",
    "merge",
    "wilson_ci99",
    "DomainError",
    "SeriesControl",
    "SeriesValue",
    "log_gamma",
    "rising_factorial",
    "bessel_i_log",
    "gaussian_q",
    "humbert_phi1",
    "lauricella_phi1_3",
]

__version__ = "1.0.0"
