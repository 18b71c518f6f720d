"""
Large-array limits of the pilot and data-slot estimation MSE.

As N_p grows, the traces of the finite error covariances converge to
integrals over the spectral density of the exponential correlation
sequence. The pilot MSE has a closed form; the data-group MSE needs one
quadrature over [-pi, pi].
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .correlation import ScenarioParams
from .errors import DegenerateError
from .numerics import integrate_doubling

ANGLE_NODES = 256


def _alpha_checked(s: ScenarioParams, delta: float) -> float:
    if not 0 < delta <= 0.5:
        raise ValueError(f"delta={delta} outside (0, 0.5]")
    alpha = s.alpha(delta)
    if not alpha < 1.0:
        raise DegenerateError("alpha = exp(-c0 D / delta) must be < 1")
    return alpha


def sigma_p_asymptotic(s: ScenarioParams, delta: float, gamma: float) -> float:
    """Limit of the average pilot-slot MSE:

        1 / sqrt(gamma^2 + 2 gamma (K+1) (1+a^2)/(1-a^2) + (K+1)^2),  a = exp(-c0 D / delta)
    """
    alpha = _alpha_checked(s, delta)
    k1 = s.rician_factor + 1.0
    ratio = (1.0 + alpha * alpha) / (1.0 - alpha * alpha)
    return 1.0 / math.sqrt(gamma * gamma + 2.0 * gamma * ratio * k1 + k1 * k1)


def sigma_p_from_ab(s: ScenarioParams, delta: float, gamma: float) -> float:
    """Same limit written as (1/(K+1)) / sqrt(a^2 - b^2) with
    a = gamma/(K+1) + (1+alpha^2)/(1-alpha^2), b = -2 alpha/(1-alpha^2)."""
    alpha = _alpha_checked(s, delta)
    k1 = s.rician_factor + 1.0
    # a^2 - b^2 = (a - b)(a + b), each factor free of cancellation
    a_minus_b = gamma / k1 + (1.0 + alpha) / (1.0 - alpha)
    a_plus_b = gamma / k1 + (1.0 - alpha) / (1.0 + alpha)
    return 1.0 / (k1 * math.sqrt(a_minus_b * a_plus_b))


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    alpha: float
    beta: float
    lambda_fn: Callable[[np.ndarray], np.ndarray]
    lambda_dh_fn: Callable[[np.ndarray], np.ndarray]


def spectral_densities(s: ScenarioParams, delta: float, u: int) -> SpectralDensity:
    """DTFTs of the pilot autocorrelation and of the group-``u`` cross-correlation.

    ``u = 0`` is accepted and gives beta = 1, where both densities coincide.
    """
    alpha = _alpha_checked(s, delta)
    if u < 0:
        raise IndexError("u must be >= 0")
    beta = s.beta(u)
    p = s.diffuse_power
    a2 = alpha * alpha

    def lam(omega):
        return p * (1.0 - a2) / (1.0 - 2.0 * alpha * np.cos(omega) + a2)

    def lam_dh(omega):
        num = alpha * (1.0 / beta - beta) * np.exp(1j * np.asarray(omega)) + beta - a2 / beta
        return p * num / (1.0 - 2.0 * alpha * np.cos(omega) + a2)

    return SpectralDensity(alpha, beta, lam, lam_dh)


def _lambda_dh_abs_sq(sd: SpectralDensity, omega, diffuse_power):
    # |A e^{jw} + B|^2 expanded into real and imaginary parts
    alpha, beta = sd.alpha, sd.beta
    a_coef = alpha * (1.0 / beta - beta)
    b_coef = beta - alpha * alpha / beta
    re = a_coef * np.cos(omega) + b_coef
    im = a_coef * np.sin(omega)
    den = 1.0 - 2.0 * alpha * np.cos(omega) + alpha * alpha
    return diffuse_power**2 * (re * re + im * im) / (den * den)


def sigma_d_excess(s, delta, gamma, u, node_count=ANGLE_NODES) -> float:
    """(1/2pi) int (Lambda^2 - |Lambda_dh,u|^2) / (Lambda + 1/gamma) dOmega."""
    sd = spectral_densities(s, delta, u)
    p = s.diffuse_power

    def integrand(omega):
        lam = sd.lambda_fn(omega)
        return (lam * lam - _lambda_dh_abs_sq(sd, omega, p)) / (lam + 1.0 / gamma)

    return integrate_doubling(integrand, -math.pi, math.pi, node_count) / (2.0 * math.pi)


def sigma_d_asymptotic(s: ScenarioParams, delta: float, gamma: float, u: int,
                       node_count: int = ANGLE_NODES) -> float:
    """Limit of the average MSE over data group ``u``; never below the pilot MSE."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    l_ratio = round(1.0 / delta - 1.0)
    if not 1 <= u <= l_ratio:
        raise IndexError(f"group index u={u} outside 1..{l_ratio}")
    sp = sigma_p_asymptotic(s, delta, gamma)
    return max(sp + sigma_d_excess(s, delta, gamma, u, node_count), sp - 1e-12)


def sigma_p_spectral(s: ScenarioParams, delta: float, gamma: float,
                     node_count: int = ANGLE_NODES) -> float:
    """Pilot MSE limit by direct quadrature of Lambda / (Lambda gamma + 1)."""
    sd = spectral_densities(s, delta, 0)

    def integrand(omega):
        lam = sd.lambda_fn(omega)
        return lam / (lam * gamma + 1.0)

    return integrate_doubling(integrand, -math.pi, math.pi, node_count) / (2.0 * math.pi)
