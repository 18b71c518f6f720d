"""
Pilot-percentage sweep: spectral-efficiency optimum and the normalised
error-probability / spectral-efficiency polyline above it.
"""

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import List

from .correlation import ScenarioParams
from .errors import GridError
from .metrics import MetricPoint, evaluate_point

L_MAX_DEFAULT = 50


class MonotonicityWarning(UserWarning):
    """P_e or eta is not nonincreasing in delta above the optimum."""


def grid_deltas(l_max: int) -> List[float]:
    if l_max < 1:
        raise GridError(f"L_max={l_max} must be >= 1")
    return [1.0 / (l + 1) for l in range(1, l_max + 1)]


def select_se_optimum(deltas, etas):
    """Index of the largest eta; ties go to the larger delta."""
    if len(deltas) == 0 or len(deltas) != len(etas):
        raise GridError("need matching, non-empty delta and eta lists")
    best = None
    for i, (d, e) in enumerate(zip(deltas, etas)):
        if best is None or e > etas[best] or (e == etas[best] and d > deltas[best]):
            best = i
    return best


def sweep(s: ScenarioParams, gamma: float, l_max: int = L_MAX_DEFAULT, workers: int = 1,
          **metric_kw) -> List[MetricPoint]:
    """Evaluate every grid point delta = 1/(L+1), L = 1..l_max, in grid order."""
    deltas = grid_deltas(l_max)
    fn = partial(_eval, s, gamma, metric_kw)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(fn, deltas))
    return [fn(d) for d in deltas]


def _eval(s, gamma, kw, delta):
    return evaluate_point(s, delta, gamma, **kw)


def find_delta_se_opt(s: ScenarioParams, gamma: float, l_max: int = L_MAX_DEFAULT, **kw):
    """Returns ``(delta_opt, eta_max)`` over the unit-fraction grid."""
    pts = sweep(s, gamma, l_max, **kw)
    i = select_se_optimum([p.delta for p in pts], [p.eta for p in pts])
    return pts[i].delta, pts[i].eta


@dataclass(frozen=True)
class TradeoffPoint:
    delta: float
    l_ratio: int
    p_e: float
    eta: float
    p_e_norm: float
    eta_norm: float
    is_anchor: bool


@dataclass(frozen=True)
class TradeoffCurve:
    points: List[TradeoffPoint]
    delta_se_opt: float
    snr: float
    monotone: bool = True
    sweep_points: List[MetricPoint] = field(default=None, repr=False, compare=False)

    @property
    def anchor(self) -> TradeoffPoint:
        return next(p for p in self.points if p.is_anchor)


def curve_from_points(pts: List[MetricPoint], snr: float) -> TradeoffCurve:
    """Restrict a sweep to [delta_SE-opt, 0.5] and normalise at the optimum."""
    i_opt = select_se_optimum([p.delta for p in pts], [p.eta for p in pts])
    opt = pts[i_opt]
    kept = sorted((p for p in pts if p.delta >= opt.delta), key=lambda p: -p.delta)
    points = [
        TradeoffPoint(p.delta, p.l_ratio, p.p_e, p.eta, p.p_e / opt.p_e, p.eta / opt.eta, p is opt)
        for p in kept
    ]
    # sorted by delta descending, so both metrics must be nondecreasing along the list
    monotone = all(b.p_e >= a.p_e and b.eta >= a.eta for a, b in zip(points, points[1:]))
    if not monotone:
        warnings.warn(f"tradeoff at snr={snr:g} is not jointly monotone in delta", MonotonicityWarning)
    return TradeoffCurve(points, opt.delta, snr, monotone, pts)


def build_tradeoff(s: ScenarioParams, gamma: float, l_max: int = L_MAX_DEFAULT,
                   workers: int = 1, **metric_kw) -> TradeoffCurve:
    return curve_from_points(sweep(s, gamma, l_max, workers, **metric_kw), gamma)
