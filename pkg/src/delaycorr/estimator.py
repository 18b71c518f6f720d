"""
Two-step MMSE channel estimation with all-ones pilots (P = I).

Step one estimates the diffuse channel at the pilot slots, step two
interpolates it to each data group and adds back the (known) LOS part.
The equivalent one-shot linear MMSE estimator is provided as a cross-check.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import linalg

from .channel import LinkBudget, PilotLayout
from .correlation import ScenarioParams, build_correlation_set, build_r_dh, build_r_hh
from .errors import SingularityError
from .numerics import real_matvec


def _cho(a):
    try:
        return linalg.cho_factor(a, lower=True, check_finite=True)
    except linalg.LinAlgError as exc:
        raise SingularityError("regularised pilot Gram matrix is not positive definite") from exc


@dataclass(frozen=True, eq=False)
class EstimatorContext:
    scenario: ScenarioParams
    layout: PilotLayout
    budget: LinkBudget
    r_hh: np.ndarray
    r_dh: tuple
    w_p: np.ndarray
    interpolators: tuple  # W_{d,u}^H for u = 1..L

    @property
    def pilot_matrix(self) -> np.ndarray:
        return np.eye(self.layout.n_p)

    @cached_property
    def stacked_interpolator(self) -> np.ndarray:
        """Rows ordered like ``layout.data_indices``: slot k(L+1)+u maps to row k*L + u-1."""
        w = np.stack(self.interpolators, axis=1)  # (N_p, L, N_p)
        return w.reshape(self.layout.n_s, self.layout.n_p)


def build_context(s: ScenarioParams, layout: PilotLayout, budget: LinkBudget) -> EstimatorContext:
    cs = build_correlation_set(s, layout)
    r_hh = cs.r_hh_dif.to_dense()
    e0, n0 = budget.symbol_energy, budget.noise_var
    gram = _cho(e0 * r_hh + n0 * np.eye(layout.n_p))
    w_p = math.sqrt(e0) * linalg.cho_solve(gram, r_hh)
    r_cho = _cho(r_hh)
    # W^H = R_dh R_hh^{-1}  <=>  W = R_hh^{-1} R_dh^T (all real)
    interp = tuple(linalg.cho_solve(r_cho, r_dh.T).T for r_dh in cs.r_dh_dif)
    for w in (w_p, *interp):
        w.setflags(write=False)
    return EstimatorContext(s, layout, budget, r_hh, cs.r_dh_dif, w_p, interp)


def estimate_pilot_locations(ctx: EstimatorContext, y_p, h_los_p) -> np.ndarray:
    """Diffuse channel estimate W_p^H (y_p - sqrt(E0) h_p^LOS) at the pilots."""
    resid = np.asarray(y_p) - math.sqrt(ctx.budget.symbol_energy) * np.asarray(h_los_p)
    return real_matvec(ctx.w_p.T, resid)


def interpolate(ctx: EstimatorContext, h_p_dif, u: int, h_los_d) -> np.ndarray:
    if not 1 <= u <= ctx.layout.l_ratio:
        raise IndexError(f"group index u={u} outside 1..{ctx.layout.l_ratio}")
    return real_matvec(ctx.interpolators[u - 1], h_p_dif) + np.asarray(h_los_d)


def estimate_frame(ctx: EstimatorContext, y, h_los) -> np.ndarray:
    """Two-step estimate of the whole frame (length N_R)."""
    lay = ctx.layout
    h_p = estimate_pilot_locations(ctx, y[lay.pilot_indices], h_los[lay.pilot_indices])
    out = np.empty(lay.n_r, dtype=complex)
    out[lay.pilot_indices] = h_p
    out[lay.data_indices] = real_matvec(ctx.stacked_interpolator, h_p)
    return out + h_los


def estimate_direct(ctx: EstimatorContext, y_p, h_los, i: int) -> complex:
    """One-shot linear MMSE estimate at slot ``i`` (0-based) from the pilot observations.

    ``h_los`` is the full-frame LOS vector. The slot/pilot cross-correlation row
    is built from slot distances, independently of the group matrices.
    """
    lay = ctx.layout
    if not 0 <= i < lay.n_r:
        raise IndexError(f"slot {i} outside 0..{lay.n_r - 1}")
    s = ctx.scenario
    e0, n0 = ctx.budget.symbol_energy, ctx.budget.noise_var
    lags = np.abs(i - lay.pilot_indices)
    r_i = s.diffuse_power * np.exp(-s.scatter_decay * s.antenna_spacing * lags)
    h_los = np.asarray(h_los)
    resid = np.asarray(y_p) - math.sqrt(e0) * h_los[lay.pilot_indices]
    gram = _cho(e0 * ctx.r_hh + n0 * np.eye(lay.n_p))
    return complex(math.sqrt(e0) * r_i @ linalg.cho_solve(gram, resid) + h_los[i])


@dataclass(frozen=True, eq=False)
class MseReport:
    sigma_p_sq_finite: float
    sigma_d_sq_finite: np.ndarray
    error_cov_pilot: Optional[np.ndarray] = None
    error_cov_data: Optional[tuple] = None


def error_covariances(ctx: EstimatorContext) -> MseReport:
    """Finite-N_p error covariances at the pilots and at every data group."""
    return finite_error_covariances(ctx.r_hh, ctx.r_dh, ctx.budget.snr)


def finite_error_covariances(r_hh, r_dh_family, gamma: float, matrices: bool = True) -> MseReport:
    """R_ee = R - R (R + I/gamma)^{-1} R and Psi_u = R - R_dh,u (R + I/gamma)^{-1} R_dh,u^T.

    With ``matrices=False`` only the traces are formed, from the triangular
    solve X = C^{-1} R with C C^T = R + I/gamma, since trace(X^T X) = ||X||_F^2.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    n = r_hh.shape[0]
    if not matrices:
        c = _cho(r_hh + np.eye(n) / gamma)[0]
        tr_r = np.trace(r_hh)

        def excess(m):
            x = linalg.solve_triangular(c, m, lower=True, check_finite=False)
            return float(np.einsum("ij,ij->", x, x))

        sigma_d = np.array([(tr_r - excess(r_dh.T)) / n for r_dh in r_dh_family])
        return MseReport(float((tr_r - excess(r_hh)) / n), sigma_d)
    reg = _cho(r_hh + np.eye(n) / gamma)
    r_ee = r_hh - r_hh @ linalg.cho_solve(reg, r_hh)
    r_ee = 0.5 * (r_ee + r_ee.T)
    psi = []
    for r_dh in r_dh_family:
        p = r_hh - r_dh @ linalg.cho_solve(reg, r_dh.T)
        psi.append(0.5 * (p + p.T))
    sigma_d = np.array([np.trace(p) / n for p in psi])
    return MseReport(float(np.trace(r_ee) / n), sigma_d, r_ee, tuple(psi))


def finite_mse(s: ScenarioParams, layout: PilotLayout, gamma: float, groups=None,
               matrices: bool = True) -> MseReport:
    """Trace-based MSEs without building estimator matrices.

    ``groups`` restricts the data groups evaluated (default: all of 1..L);
    ``matrices=False`` skips the full error covariances (much cheaper at large N_p).
    """
    groups = range(1, layout.l_ratio + 1) if groups is None else groups
    r_hh = build_r_hh(s, layout).to_dense()
    return finite_error_covariances(r_hh, [build_r_dh(s, layout, u) for u in groups], gamma, matrices)
