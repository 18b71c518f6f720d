"""
Special functions, quadrature and matrix primitives.

Nothing in here knows about channels; the other modules build on these.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple, Union

import numpy as np
from scipy import linalg, special

from .errors import DivergenceError, NonFiniteError, NotPsdError

log = logging.getLogger(__name__)

TERM_BUDGET = 200
# below this the power series is used, above it the large-argument expansion
_SERIES_CUTOFF = 30.0
_EPS_TERM = 1e-17
# accepted rounding loss from cancellation between alternating-sign terms
_CANCEL_TOL = 1e-10

CHOL_JITTER_START = 1e-12
CHOL_JITTER_MAX = 1e-8


def _kahan_series(q, budget=TERM_BUDGET):
    """Sum (q)^k / (k!)^2 for k >= 0 with compensated summation.

    ``q`` may be a real array or a complex scalar.
    """
    term = np.ones_like(q)
    total = np.ones_like(q)
    comp = np.zeros_like(q)
    biggest = np.ones(np.shape(q))
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, budget + 1):
            term = term * q / (k * k)
            biggest = np.maximum(biggest, np.abs(term))
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
            if np.all(np.abs(term) <= _EPS_TERM * np.abs(total)):
                break
        else:
            raise DivergenceError(f"I0 power series did not converge in {budget} terms")
        loss = np.finfo(float).eps * biggest / np.abs(total)
    if not np.all(np.isfinite(total)) or np.any(~(loss <= _CANCEL_TOL)):
        raise DivergenceError("I0 power series lost accuracy to cancellation")
    return total


def _i0e_large(x):
    # I0(x) e^{-x} ~ (2 pi x)^{-1/2} sum_k c_k, c_k = c_{k-1} (2k-1)^2 / (8 k x)
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, TERM_BUDGET + 1):
        term = term * (2 * k - 1) ** 2 / (8.0 * k * x)
        total = total + term
        if np.all(term <= _EPS_TERM * total):
            break
    return total / np.sqrt(2.0 * np.pi * x)


def bessel_i0e_real(z):
    """Exponentially scaled modified Bessel function ``exp(-|z|) I0(z)``.

    Accepts scalars or arrays; never overflows.
    """
    x = np.abs(np.asarray(z, dtype=float))
    out = np.empty_like(x)
    small = x <= _SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        out[small] = _kahan_series((xs / 2.0) ** 2) * np.exp(-xs)
    if np.any(~small):
        out[~small] = _i0e_large(x[~small])
    return out if out.ndim else float(out)


def bessel_i0_real(z):
    """Modified Bessel function of the first kind, order zero, real argument.

    Relative error stays below 1e-12 on [0, 700]. The function is even, so
    negative arguments are folded onto the positive axis.
    """
    x = np.abs(np.asarray(z, dtype=float))
    out = np.empty_like(x)
    small = x <= _SERIES_CUTOFF
    if np.any(small):
        out[small] = _kahan_series((x[small] / 2.0) ** 2)
    if np.any(~small):
        xl = x[~small]
        out[~small] = np.exp(xl) * _i0e_large(xl)
    return out if out.ndim else float(out)


def bessel_i0_complex(z: complex) -> complex:
    """I0 at a complex argument via the power series sum (z^2/4)^k / (k!)^2.

    Raises DivergenceError when the series does not settle within the term
    budget, or when cancellation between terms would cost more than 1e-10
    relative accuracy (large imaginary part). On the real axis this defers to ``bessel_i0_real``.
    """
    z = complex(z)
    if abs(z) > 1e3:
        raise ValueError(f"|z| = {abs(z):g} exceeds 1e3")
    if z.imag == 0.0:
        return complex(bessel_i0_real(z.real))
    return complex(_kahan_series(np.complex128(z * z / 4.0)))


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature rule description.

    ``rule`` is ``"gauss-legendre"`` on a closed interval or ``"semi-infinite"``
    on ``[lower, inf)``. The semi-infinite rule maps Gauss-Legendre nodes on
    (0, 1) through ``x = lower + scale * t / (1 - t)``.
    """

    node_count: int = 256
    interval: Tuple[float, float] = (-math.pi, math.pi)
    rule: str = "gauss-legendre"
    scale: float = 1.0

    def __post_init__(self):
        if self.node_count < 2:
            raise ValueError("node_count must be >= 2")
        lower, upper = self.interval
        if self.rule == "gauss-legendre":
            if not (math.isfinite(lower) and math.isfinite(upper)) or not lower < upper:
                raise ValueError(f"bad closed interval {self.interval}")
        elif self.rule == "semi-infinite":
            if not math.isfinite(lower) or upper != math.inf:
                raise ValueError("semi-infinite rule needs (finite, inf)")
            if self.scale <= 0:
                raise ValueError("scale must be positive")
        else:
            raise ValueError(f"unknown rule {self.rule!r}")

    @classmethod
    def closed(cls, lower, upper, node_count=256):
        return cls(node_count, (float(lower), float(upper)), "gauss-legendre")

    @classmethod
    def semi_infinite(cls, lower=0.0, node_count=512, scale=1.0):
        return cls(node_count, (float(lower), math.inf), "semi-infinite", scale)


@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    """Nodes and weights on [-1, 1] (read-only arrays)."""
    t, w = special.roots_legendre(n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def integrate(f: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec) -> float:
    """Integrate a vectorised real function according to ``spec``."""
    t, w = gauss_legendre(spec.node_count)
    lower, upper = spec.interval
    if spec.rule == "gauss-legendre":
        half = 0.5 * (upper - lower)
        x = 0.5 * (upper + lower) + half * t
        vals = _checked(f, x)
        return float(half * np.dot(w, vals))
    u = 0.5 * (t + 1.0)
    x = lower + spec.scale * u / (1.0 - u)
    vals = _checked(f, x)
    jac = spec.scale / (1.0 - u) ** 2
    return float(0.5 * np.dot(w, vals * jac))


def _checked(f, x):
    vals = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    if not np.all(np.isfinite(vals)):
        bad = x[~np.isfinite(vals)][0]
        raise NonFiniteError(f"integrand is not finite at x={bad!r}")
    return vals


def integrate_doubling(f, lower, upper, node_count=256, rtol=1e-9, atol=1e-15, max_nodes=8192):
    """Closed-interval Gauss-Legendre, doubling nodes until two successive
    estimates agree to ``rtol`` (relative) or ``atol`` (absolute), or
    ``max_nodes`` is reached."""
    n = node_count
    prev = integrate(f, QuadratureSpec.closed(lower, upper, n))
    while n < max_nodes:
        n *= 2
        cur = integrate(f, QuadratureSpec.closed(lower, upper, n))
        if abs(cur - prev) <= max(rtol * abs(cur), atol):
            return cur
        prev = cur
    log.warning("quadrature on [%g, %g] not converged at %d nodes", lower, upper, n)
    return prev


def real_matvec(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``a @ v`` for real ``a`` and complex ``v`` without promoting ``a`` to complex."""
    v = np.asarray(v)
    if np.iscomplexobj(v):
        return a @ v.real + 1j * (a @ v.imag)
    return a @ v


@dataclass(frozen=True, eq=False)
class SymmetricToeplitz:
    """Symmetric Toeplitz matrix stored by its first row."""

    first_row: np.ndarray

    def __post_init__(self):
        row = np.array(self.first_row, dtype=float)
        if row.ndim != 1 or row.size == 0:
            raise ValueError("first_row must be a non-empty vector")
        row.setflags(write=False)
        object.__setattr__(self, "first_row", row)

    @property
    def n(self) -> int:
        return self.first_row.size

    def to_dense(self) -> np.ndarray:
        return linalg.toeplitz(self.first_row)

    def __getitem__(self, idx):
        m, n = idx
        return self.first_row[abs(m - n)]


def cholesky_psd(m: Union[SymmetricToeplitz, np.ndarray], *, return_jitter=False):
    """Lower Cholesky factor of a symmetric PSD matrix.

    If the plain factorisation fails, a diagonal jitter of
    ``1e-12 * max(diag)`` is added and grown tenfold up to ``1e-8 * max(diag)``.
    With ``return_jitter=True`` returns ``(factor, jitter)``.
    """
    a = m.to_dense() if isinstance(m, SymmetricToeplitz) else np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.conj().T, rtol=0, atol=1e-12 * max(np.abs(a).max(), 1.0)):
        raise ValueError("matrix is not symmetric")
    scale = float(np.max(np.abs(np.diag(a)))) or 1.0
    jitter = 0.0
    eye = np.eye(a.shape[0])
    while True:
        try:
            factor = np.linalg.cholesky(a + jitter * eye)
            break
        except np.linalg.LinAlgError:
            jitter = CHOL_JITTER_START * scale if jitter == 0.0 else jitter * 10.0
            if jitter > CHOL_JITTER_MAX * scale * (1 + 1e-9):
                raise NotPsdError("matrix is not PSD even with 1e-8 diagonal jitter")
    if jitter:
        log.debug("cholesky_psd used jitter %.1e", jitter)
    return (factor, jitter) if return_jitter else factor
