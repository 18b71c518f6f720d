"""
BPSK error probability and effective spectral efficiency under imperfect CSI.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .asymptotic import ANGLE_NODES, sigma_d_asymptotic, sigma_p_asymptotic
from .correlation import ScenarioParams
from .errors import EmptyError, NonFiniteError
from .numerics import QuadratureSpec, bessel_i0e_real, gauss_legendre, integrate

log = logging.getLogger(__name__)

SEMI_NODES = 512
PDF_TRUNCATION = 1e-14


@dataclass(frozen=True)
class EffectiveLink:
    """Correlation coefficient and equivalent SNR for one data group."""

    rho: float
    gamma_eff: float

    @classmethod
    def from_mse(cls, rician_factor: float, gamma: float, sigma_sq: float):
        if sigma_sq < 0 or not gamma > 0:
            raise ValueError("need sigma^2 >= 0 and gamma > 0")
        rho = math.sqrt(1.0 / (1.0 + (rician_factor + 1.0) * sigma_sq))
        return cls(rho, 1.0 / (sigma_sq + 1.0 / gamma))


def ber_group(rician_factor: float, gamma: float, sigma_sq: float,
              node_count: int = ANGLE_NODES) -> float:
    """BPSK BER of one data group with channel-estimation MSE ``sigma_sq``.

    (1/pi) e^{-K/rho^2} int_0^{pi/2} g(phi) exp{(K/rho^2) g(phi)} dphi with
    g = [1 + gamma_eff / ((K+1) sin^2 phi)]^{-1}. The two exponentials are
    merged so large K cannot overflow.
    """
    k = rician_factor
    link = EffectiveLink.from_mse(k, gamma, sigma_sq)
    c = link.gamma_eff / (k + 1.0)
    k_rho = k / link.rho**2

    def integrand(phi):
        s2 = np.sin(phi) ** 2
        g = s2 / (s2 + c)
        return g * np.exp(-k_rho * (1.0 - g))

    return integrate(integrand, QuadratureSpec.closed(0.0, math.pi / 2, node_count)) / math.pi


def ber_average(per_group) -> float:
    vals = np.asarray(per_group, dtype=float)
    if vals.size == 0:
        raise EmptyError("no groups to average")
    return float(vals.mean())


def _log(x, log_base):
    return np.log(x) / math.log(log_base)


def capacity_upper(h_mag_sq, gamma_eff, log_base: float = 2.0):
    """log(1 + |h_hat|^2 gamma_eff); bits by default, nats with log_base=e."""
    return _log(1.0 + np.asarray(h_mag_sq) * gamma_eff, log_base)


def noncentral_chi2_pdf(x, rician_factor: float):
    """Density of |sqrt(2(K+1)) h|^2: two degrees of freedom, noncentrality 2K."""
    x = np.asarray(x, dtype=float)
    k = rician_factor
    arg = np.sqrt(2.0 * k * np.maximum(x, 0.0))
    return 0.5 * np.exp(-(x + 2.0 * k) / 2.0 + arg) * bessel_i0e_real(arg)


@lru_cache(maxsize=64)
def _pdf_nodes(rician_factor: float, node_count: int):
    """Gauss-Legendre nodes on [0, X] and pdf-weighted weights, X where the pdf
    drops below 1e-14 of its peak."""
    k = rician_factor
    hi = 2.0 * k + 2.0 + 40.0 * math.sqrt(4.0 * k + 4.0) + 80.0
    grid = np.linspace(0.0, hi, 20001)
    pdf = noncentral_chi2_pdf(grid, k)
    ipk = int(np.argmax(pdf))
    below = np.flatnonzero(pdf[ipk:] < PDF_TRUNCATION * pdf[ipk])
    x_max = float(grid[ipk + below[0]]) if below.size else hi
    t, w = gauss_legendre(node_count)
    x = 0.5 * x_max * (t + 1.0)
    wp = 0.5 * x_max * w * noncentral_chi2_pdf(x, k)
    tail = abs(1.0 - wp.sum())
    log.debug("chi2 pdf truncated at x=%.3g (K=%g), tail mass %.2e", x_max, k, tail)
    x.setflags(write=False)
    wp.setflags(write=False)
    return x, wp, x_max, tail


def spectral_efficiency_group(rician_factor: float, gamma: float, delta: float, sigma_sq: float,
                              node_count: int = SEMI_NODES, log_base: float = 2.0) -> float:
    """(1 - delta) E[log(1 + x gamma_eff / (2(K+1)))] over the noncentral chi-square x.

    |h_hat|^2 is approximated by |h|^2; the mean of |h_hat|^2 under the MMSE
    model is 1 - sigma^2 and is only logged.
    """
    if not 0 < delta <= 0.5:
        raise ValueError(f"delta={delta} outside (0, 0.5]")
    k = rician_factor
    link = EffectiveLink.from_mse(k, gamma, sigma_sq)
    x, wp, _, _ = _pdf_nodes(float(k), int(node_count))
    cap = capacity_upper(x / (2.0 * (k + 1.0)), link.gamma_eff, log_base)
    if not np.all(np.isfinite(cap)):
        raise NonFiniteError("capacity integrand is not finite")
    log.debug("E|h_hat|^2 = %.6g (approximated by E|h|^2 = 1)", 1.0 - sigma_sq)
    return (1.0 - delta) * float(np.dot(wp, cap))


def spectral_efficiency_average(per_group, delta: float = None) -> float:
    """Mean over groups; the (1 - delta) factor is already inside each entry."""
    vals = np.asarray(per_group, dtype=float)
    if vals.size == 0:
        raise EmptyError("no groups to average")
    return float(vals.mean())


@dataclass(frozen=True, eq=False)
class MetricPoint:
    delta: float
    snr: float
    sigma_p_sq: float
    sigma_d_sq: np.ndarray
    p_e_per_group: np.ndarray
    p_e: float
    eta_per_group: np.ndarray
    eta: float

    @property
    def l_ratio(self) -> int:
        return len(self.p_e_per_group)


def evaluate_point(s: ScenarioParams, delta: float, gamma: float, *, angle_nodes=ANGLE_NODES,
                   semi_nodes=SEMI_NODES, log_base=2.0) -> MetricPoint:
    """Asymptotic MSEs, BER and spectral efficiency at one (delta, gamma)."""
    l_ratio = round(1.0 / delta - 1.0)
    if l_ratio < 1 or abs(1.0 / (l_ratio + 1) - delta) > 1e-9:
        raise ValueError(f"delta={delta} is not 1/(L+1)")
    k = s.rician_factor
    sp = sigma_p_asymptotic(s, delta, gamma)
    sd = np.array([sigma_d_asymptotic(s, delta, gamma, u, angle_nodes) for u in range(1, l_ratio + 1)])
    pe = np.array([ber_group(k, gamma, x, angle_nodes) for x in sd])
    eta = np.array([spectral_efficiency_group(k, gamma, delta, x, semi_nodes, log_base) for x in sd])
    return MetricPoint(delta, gamma, sp, sd, pe, ber_average(pe), eta, spectral_efficiency_average(eta))
