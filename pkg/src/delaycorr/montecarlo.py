"""
Monte Carlo link simulation used to check the analytical MSE and BER.

Each trial is one staticized block: draw the channel, send
``frames_per_block`` frames of pilots plus random BPSK, estimate with the
two-step MMSE scheme and detect. Trials draw from independent generators
seeded by ``trial_seed(base_seed, index)``, so results do not depend on how
trials are spread over workers.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from .channel import LinkBudget, PilotLayout, sample_channel, transmit
from .correlation import ScenarioParams
from .errors import ZeroChannelError
from .estimator import build_context, estimate_frame

log = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
CHUNK = 64
PROGRESS_EVERY = 10_000


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(base_seed: int, trial_index: int) -> int:
    return splitmix64(splitmix64(base_seed & _MASK64) ^ trial_index)


@dataclass(frozen=True)
class TrialConfig:
    scenario: ScenarioParams
    layout: PilotLayout
    budget: LinkBudget
    num_trials: int
    base_seed: int = 0
    detector_csi: str = "estimated"
    frames_per_block: int = 1

    def __post_init__(self):
        if self.num_trials < 1:
            raise ValueError("num_trials must be positive")
        if self.detector_csi not in ("estimated", "genie"):
            raise ValueError(f"detector_csi must be 'estimated' or 'genie', not {self.detector_csi!r}")
        if self.frames_per_block < 1:
            raise ValueError("frames_per_block must be positive")


Stat = Tuple[float, float]


@dataclass(frozen=True)
class EmpiricalReport:
    mse_pilot: Stat
    mse_data_per_u: Tuple[Stat, ...]
    ber: Stat
    trials_run: int
    bits: int


def detect_bpsk(y: complex, h_hat: complex, symbol_energy: float = 1.0) -> int:
    """ML decision for BPSK: the sign of Re(conj(h_hat) y)."""
    if abs(h_hat) < 1e-300:
        raise ZeroChannelError("channel estimate is zero; decision undefined")
    metric = (np.conj(h_hat) * y).real / math.sqrt(symbol_energy)
    return 1 if metric >= 0 else -1


def _detect(y, h_hat, rng):
    metric = (np.conj(h_hat) * y).real
    out = np.where(metric >= 0, 1, -1)
    zero = np.abs(h_hat) < 1e-300
    if np.any(zero):
        log.warning("%d zero channel estimates, deciding by coin flip", int(zero.sum()))
        out[zero] = rng.choice([-1, 1], size=int(zero.sum()))
    return out


@lru_cache(maxsize=8)
def _context(scenario, layout, budget):
    return build_context(scenario, layout, budget)


def _trial(cfg: TrialConfig, index: int) -> np.ndarray:
    lay = cfg.layout
    ctx = _context(cfg.scenario, lay, cfg.budget)
    rng = np.random.default_rng(trial_seed(cfg.base_seed, index))
    chan = sample_channel(cfg.scenario, lay, rng)
    h = chan.h
    data = lay.data_indices
    groups = [lay.group_indices(u) for u in range(1, lay.l_ratio + 1)]
    row = np.zeros(lay.l_ratio + 2)
    for _ in range(cfg.frames_per_block):
        bits = rng.integers(0, 2, size=lay.n_s)
        x = np.ones(lay.n_r)
        x[data] = 1.0 - 2.0 * bits
        y = transmit(h, x, cfg.budget, rng)
        h_hat = estimate_frame(ctx, y, chan.h_los)
        err = np.abs(h_hat - h) ** 2
        csi = h if cfg.detector_csi == "genie" else h_hat
        x_hat = _detect(y[data], csi[data], rng)
        row[0] += err[lay.pilot_indices].mean()
        row[1:-1] += [err[g].mean() for g in groups]
        row[-1] += np.count_nonzero(x_hat != x[data]) / lay.n_s
    return row / cfg.frames_per_block


def _chunk(cfg: TrialConfig, start: int, stop: int) -> np.ndarray:
    return np.array([_trial(cfg, i) for i in range(start, stop)])


def _stat(col: np.ndarray) -> Stat:
    n = col.size
    sd = float(col.std(ddof=1)) if n > 1 else math.inf
    return float(col.mean()), sd / math.sqrt(n)


def run(config: TrialConfig, workers: int = 1) -> EmpiricalReport:
    """Run all trials and summarise per-trial averages (mean, standard error)."""
    n = config.num_trials
    bounds = [(a, min(a + CHUNK, n)) for a in range(0, n, CHUNK)]
    parts = []
    done = 0
    next_report = PROGRESS_EVERY
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            futures = [ex.submit(_chunk, config, a, b) for a, b in bounds]
            for fut, (a, b) in zip(futures, bounds):
                parts.append(fut.result())
                done = b
                if done >= next_report:
                    log.info("monte carlo: %d / %d trials", done, n)
                    next_report += PROGRESS_EVERY
    else:
        for a, b in bounds:
            parts.append(_chunk(config, a, b))
            done = b
            if done >= next_report:
                log.info("monte carlo: %d / %d trials", done, n)
                next_report += PROGRESS_EVERY
    rows = np.concatenate(parts, axis=0)
    lay = config.layout
    return EmpiricalReport(
        mse_pilot=_stat(rows[:, 0]),
        mse_data_per_u=tuple(_stat(rows[:, 1 + u]) for u in range(lay.l_ratio)),
        ber=_stat(rows[:, -1]),
        trials_run=n,
        bits=n * lay.n_s * config.frames_per_block,
    )
