"""
Staticized channel: frame layout, block timing, correlated Rician channel
sampling and the received-signal model ``y = sqrt(E0) X h + n``.

Slot indices in code are 0-based. A frame of ``N_R = N_p (L + 1)`` slots
starts every group of ``L + 1`` slots with a pilot, so pilots sit at
``0, L+1, 2(L+1), ...`` and data group ``u`` (1..L) occupies slots
``k (L+1) + u``.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .correlation import ScenarioParams, slot_covariance
from .errors import ModulusError
from .numerics import cholesky_psd, real_matvec


@dataclass(frozen=True)
class PilotLayout:
    n_p: int
    l_ratio: int

    def __post_init__(self):
        if self.n_p < 1 or self.l_ratio < 1:
            raise ValueError("N_p and L must be >= 1")

    @property
    def n_s(self) -> int:
        return self.n_p * self.l_ratio

    @property
    def n_r(self) -> int:
        return self.n_p * (self.l_ratio + 1)

    @property
    def delta(self) -> float:
        """Pilot percentage 1 / (L + 1)."""
        return 1.0 / (self.l_ratio + 1)

    @property
    def pilot_indices(self) -> np.ndarray:
        return np.arange(self.n_p) * (self.l_ratio + 1)

    def group_indices(self, u: int) -> np.ndarray:
        if not 1 <= u <= self.l_ratio:
            raise IndexError(f"group index u={u} outside 1..{self.l_ratio}")
        return self.pilot_indices + u

    @property
    def data_indices(self) -> np.ndarray:
        mask = np.ones(self.n_r, dtype=bool)
        mask[self.pilot_indices] = False
        return np.flatnonzero(mask)


def make_layout(n_p: int, l_ratio: int) -> PilotLayout:
    return PilotLayout(int(n_p), int(l_ratio))


def layout_for_delta(n_p: int, delta: float) -> PilotLayout:
    """Layout for a pilot percentage that must be a unit fraction 1/(L+1)."""
    l_ratio = round(1.0 / delta - 1.0)
    if l_ratio < 1 or abs(1.0 / (l_ratio + 1) - delta) > 1e-9:
        raise ValueError(f"delta={delta} is not 1/(L+1) for an integer L >= 1")
    return PilotLayout(n_p, l_ratio)


@dataclass(frozen=True)
class BlockTiming:
    """Symbol timing such that the train covers one antenna spacing in K symbols."""

    symbol_time: float
    k_per_spacing: int

    @classmethod
    def from_geometry(cls, spacing: float, speed: float, k_per_spacing: int):
        if k_per_spacing < 1:
            raise ValueError("K must be >= 1")
        return cls(spacing / (speed * k_per_spacing), k_per_spacing)

    @property
    def frames_per_block(self) -> int:
        return self.k_per_spacing


@dataclass(frozen=True)
class LinkBudget:
    symbol_energy: float
    noise_var: float

    def __post_init__(self):
        if self.symbol_energy < 0 or not self.noise_var > 0:
            raise ValueError("need E0 >= 0 and noise variance > 0")

    @classmethod
    def from_snr(cls, snr: float, symbol_energy: float = 1.0):
        if not snr > 0:
            raise ValueError("snr must be positive")
        return cls(symbol_energy, symbol_energy / snr)

    @classmethod
    def from_snr_db(cls, snr_db: float, symbol_energy: float = 1.0):
        return cls.from_snr(10.0 ** (snr_db / 10.0), symbol_energy)

    @property
    def snr(self) -> float:
        return self.symbol_energy / self.noise_var


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    h_los: np.ndarray
    h_dif: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return self.h_los + self.h_dif


@lru_cache(maxsize=16)
def diffuse_factor(s: ScenarioParams, n_r: int) -> np.ndarray:
    """Cholesky factor of the N_R x N_R diffuse delay-correlation matrix."""
    a = cholesky_psd(slot_covariance(s, n_r))
    a.setflags(write=False)
    return a


def _cn(rng, size, var=1.0):
    return math.sqrt(var / 2.0) * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def sample_channel(s: ScenarioParams, layout: PilotLayout, rng_seed) -> ChannelRealization:
    """Draw one block's channel. The LOS part has a single uniform phase shared
    by every slot; the diffuse part is A z with A the Cholesky factor of the
    delay-correlation matrix."""
    rng = np.random.default_rng(rng_seed)
    z = _cn(rng, layout.n_r)
    theta = rng.uniform(-math.pi, math.pi)
    h_dif = real_matvec(diffuse_factor(s, layout.n_r), z)
    h_los = np.full(layout.n_r, math.sqrt(s.los_power) * np.exp(1j * theta))
    return ChannelRealization(h_los, h_dif)


def transmit(h, x, budget: LinkBudget, rng_seed) -> np.ndarray:
    """y_i = sqrt(E0) h_i x_i + n_i with n_i ~ CN(0, sigma_n^2)."""
    h = h.h if isinstance(h, ChannelRealization) else np.asarray(h)
    x = np.asarray(x)
    if x.shape != h.shape:
        raise ValueError("x and h must have the same length")
    if np.any(np.abs(np.abs(x) - 1.0) > 1e-9):
        raise ModulusError("transmitted symbols must have unit modulus")
    rng = np.random.default_rng(rng_seed)
    return math.sqrt(budget.symbol_energy) * h * x + _cn(rng, h.size, budget.noise_var)
