"""
Spatial-temporal cross-correlation of the Rician downlink channel and the
Toeplitz correlation matrices seen by a pilot-aided receiver.

Angles are in radians, distances in metres, the Rician factor is linear.
The train's direction of travel is called ``heading`` here so it does not
clash with the SNR symbol used elsewhere.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from .numerics import SymmetricToeplitz, bessel_i0_complex, bessel_i0_real


@dataclass(frozen=True)
class ScenarioParams:
    rician_factor: float
    scatter_decay: float
    antenna_spacing: float
    speed: float
    wavelength: float
    aoa_width: float = 0.0
    aoa_mean: float = 0.0
    heading: float = 0.0
    num_antennas: Optional[int] = None

    def __post_init__(self):
        if not self.rician_factor >= 0:
            raise ValueError("rician_factor must be >= 0")
        for name in ("scatter_decay", "antenna_spacing", "speed", "wavelength"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise ValueError(f"{name} must be positive and finite")
        if not self.aoa_width >= 0:
            raise ValueError("aoa_width must be >= 0")
        if not -math.pi <= self.aoa_mean < math.pi:
            raise ValueError("aoa_mean must lie in [-pi, pi)")
        if self.num_antennas is not None and self.num_antennas < 1:
            raise ValueError("num_antennas must be positive")

    @property
    def doppler(self) -> float:
        """Maximum Doppler shift v / lambda."""
        return self.speed / self.wavelength

    @property
    def los_power(self) -> float:
        return self.rician_factor / (self.rician_factor + 1.0)

    @property
    def diffuse_power(self) -> float:
        return 1.0 / (self.rician_factor + 1.0)

    def alpha(self, delta: float) -> float:
        """Correlation between adjacent pilots, exp(-c0 D / delta)."""
        return math.exp(-self.scatter_decay * self.antenna_spacing / delta)

    def beta(self, u: int) -> float:
        """Correlation between a pilot and the data slot ``u`` positions later."""
        return math.exp(-self.scatter_decay * u * self.antenna_spacing)


def location_phase(s: ScenarioParams, tau: float, d: float) -> float:
    """Delta = 2 pi (f_D tau - d / lambda)."""
    return 2.0 * math.pi * (s.doppler * tau - d / s.wavelength)


def cross_corr_diffuse(s: ScenarioParams, tau: float, d: float) -> complex:
    """Diffuse cross-correlation between two antennas ``d`` apart, ``tau`` apart in time.

    The I0 argument is the principal square root of
    kappa^2 - Delta^2 - 2j kappa Delta cos(mu - heading); I0 is even, so the
    branch does not matter.
    """
    delta_loc = location_phase(s, tau, d)
    k = s.aoa_width
    arg = cmath.sqrt(k * k - delta_loc**2 - 2j * k * delta_loc * math.cos(s.aoa_mean - s.heading))
    ratio = bessel_i0_complex(arg) / bessel_i0_real(k)
    return ratio * s.diffuse_power * math.exp(-s.scatter_decay * s.speed * abs(tau))


def cross_corr_los(s: ScenarioParams, tau: float, d: float) -> complex:
    delta_loc = location_phase(s, tau, d)
    return s.los_power * cmath.exp(1j * delta_loc * math.cos(s.heading))


def delay_corr(s: ScenarioParams, p: int, q: int, n_r: Optional[int] = None):
    """Diffuse and LOS correlation between antenna ``p`` and antenna ``q``
    sampled when ``p`` reaches the spot ``q`` occupied (1-based, p < q).

    Returns ``(dif, los)``.
    """
    n_r = n_r if n_r is not None else s.num_antennas
    if not 1 <= p < q or (n_r is not None and q > n_r):
        raise IndexError(f"need 1 <= p < q <= N_R, got p={p}, q={q}, N_R={n_r}")
    dif = s.diffuse_power * math.exp(-s.scatter_decay * (q - p) * s.antenna_spacing)
    return dif, s.los_power


def slot_covariance(s: ScenarioParams, n: int) -> np.ndarray:
    """Full n x n diffuse covariance over consecutive slots of the staticized frame."""
    lags = np.arange(n)
    return linalg.toeplitz(s.diffuse_power * np.exp(-s.scatter_decay * s.antenna_spacing * lags))


def build_r_hh(s: ScenarioParams, layout) -> SymmetricToeplitz:
    """Pilot autocorrelation, entry (m, n) = exp(-c0 |m-n| D / delta) / (K_R + 1)."""
    lags = np.arange(layout.n_p)
    row = s.diffuse_power * np.exp(-s.scatter_decay * lags * s.antenna_spacing / layout.delta)
    return SymmetricToeplitz(row)


def offset_toeplitz(s: ScenarioParams, n_p: int, delta: float, offset: float) -> np.ndarray:
    """Toeplitz matrix with (m, n) entry exp(-c0 |m - n + offset * delta| D / delta) / (K_R+1).

    ``offset`` counts slots, so the integer group index gives the data/pilot
    cross-correlation and ``offset = 0`` gives the pilot autocorrelation.
    """
    k = np.arange(n_p)
    c0_scaled = s.scatter_decay * s.antenna_spacing / delta
    col = s.diffuse_power * np.exp(-c0_scaled * np.abs(k + offset * delta))
    row = s.diffuse_power * np.exp(-c0_scaled * np.abs(-k + offset * delta))
    return linalg.toeplitz(col, row)


def build_r_dh(s: ScenarioParams, layout, u: int) -> np.ndarray:
    """Cross-correlation between data group ``u`` (1..L) and the pilots."""
    if not 1 <= u <= layout.l_ratio:
        raise IndexError(f"group index u={u} outside 1..{layout.l_ratio}")
    return offset_toeplitz(s, layout.n_p, layout.delta, u)


@dataclass(frozen=True, eq=False)
class CorrelationSet:
    r_hh_dif: SymmetricToeplitz
    r_dh_dif: tuple
    los_coefficient: float


def build_correlation_set(s: ScenarioParams, layout) -> CorrelationSet:
    r_dh = tuple(build_r_dh(s, layout, u) for u in range(1, layout.l_ratio + 1))
    return CorrelationSet(build_r_hh(s, layout), r_dh, s.los_power)
