"""Laplace-Stieltjes transforms of class-2 waits and numerical inversion.

The class-2 waiting time beyond the delay horizon has transform

    sum_j  w_j * eta(s)^j        (times exp(-s d) for the unshifted law),

where ``w_j`` is the busy-horizon state distribution from :mod:`dapq.markov`
and ``eta`` the accreditation-interval transform.  CDFs are recovered with
the Euler-summation Fourier-series inversion (Abate--Whitt style): the
Bromwich integral is discretized with step pi/t on the contour Re(s) =
A/(2t), giving a discretization error below exp(-A) for functions bounded
by 1, and the alternating series is accelerated by binomial averaging.  The
difference between the last two binomial averages serves as the error
estimate.

Empirically the exponent on eta is the full ahead count j: with exponential
service the residual's accreditation interval is an ordinary accreditation
interval (memorylessness), and the inverted curves match simulated delayed
APQ waits to within Monte Carlo noise.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    DEFAULT_TOL,
    AccuracyNotMet,
    NonConvergence,
    OutOfRange,
    QueueConfig,
    ServiceKind,
    ToleranceConfig,
    validate,
)
from .markov import busy_state_distribution


@dataclass(frozen=True)
class Lst:
    """An evaluatable Laplace-Stieltjes transform with its mass metadata.

    ``fn`` accepts real or complex s with Re(s) >= 0.  ``mass`` is the value
    at s = 0 (1 for proper laws, the tail probability for tail transforms);
    ``atom_at_zero`` is P[X = 0] when known, used for CDF values at t = 0.
    """

    fn: Callable[[complex], complex]
    mass: float
    atom_at_zero: Optional[float] = None
    label: str = ""

    def __call__(self, s) -> complex:
        return self.fn(s)


@dataclass(frozen=True)
class CdfCurve:
    """A monotone CDF evaluated on a fixed grid of abscissae."""

    ts: np.ndarray
    values: np.ndarray
    provenance: str
    max_adjustment: float = 0.0

    def at(self, t: float) -> float:
        """Linear interpolation between grid points (0 left of the grid)."""
        if t < self.ts[0]:
            return 0.0
        return float(np.interp(t, self.ts, self.values))


# --------------------------------------------------------------------------
# accreditation-interval transforms
# --------------------------------------------------------------------------

def eta_mm1(s, arrival_rate: float, mu: float):
    """Accreditation-interval transform for exponential service, closed form.

    Continuous limit mu/(mu+s) as the accrediting arrival rate vanishes.
    Accepts complex s (principal square root); real s >= 0 gives a real
    value in (0, 1].
    """
    if arrival_rate < 1e-14:
        val = mu / (mu + s)
    else:
        z = s + mu + arrival_rate
        sq = cmath.sqrt(z * z - 4.0 * mu * arrival_rate)
        val = (z - sq) / (2.0 * arrival_rate)
    if isinstance(s, complex):
        return val
    return float(val.real) if isinstance(val, complex) else float(val)


def _service_lst(service: ServiceKind, mu: float) -> Callable[[float], float]:
    if service is ServiceKind.EXPONENTIAL:
        return lambda u: mu / (mu + u)
    return lambda u: math.exp(-u / mu)


def eta_fixed_point(
    s: float,
    service: ServiceKind,
    arrival_rate: float,
    mu: float = 1.0,
    tol: ToleranceConfig = DEFAULT_TOL,
    max_iter: int = 200_000,
) -> float:
    """Accreditation-interval transform for either service kind.

    Solves eta = F_S(s + a*(1 - eta)) by fixed-point iteration from 1,
    where F_S is the service LST.  For exponential service this agrees
    with the closed form to within eps_root-level accuracy.
    """
    if s < 0:
        raise OutOfRange("s must be nonnegative")
    fs = _service_lst(service, mu)
    eta = 1.0
    for _ in range(max_iter):
        nxt = fs(s + arrival_rate * (1.0 - eta))
        if abs(nxt - eta) < tol.eps_root:
            return nxt
        eta = nxt
    raise NonConvergence(
        f"accreditation fixed point did not converge at s={s}, rate={arrival_rate}"
    )


# --------------------------------------------------------------------------
# class-2 waiting-time transforms (exponential service)
# --------------------------------------------------------------------------

def _tail_weights(config: QueueConfig, tol: ToleranceConfig) -> np.ndarray:
    rates = validate(config)
    if config.service is not ServiceKind.EXPONENTIAL:
        raise OutOfRange("class-2 transform machinery requires exponential service")
    return busy_state_distribution(config, tol)


def class2_tail_lst(config: QueueConfig, s, tol: ToleranceConfig = DEFAULT_TOL):
    """E[exp(-s W2) ; W2 > d] for the delayed APQ.

    At s = 0 this is the probability the tagged class-2 customer is still
    waiting when the delay expires.
    """
    w = _tail_weights(config, tol)
    rates = validate(config)
    e = eta_mm1(complex(s), rates.lambda1_acc, config.mu)
    val = cmath.exp(-complex(s) * config.d) * np.sum(w * e ** np.arange(1, len(w) + 1))
    if isinstance(s, complex):
        return val
    return float(val.real)


def _shifted_tail_lst(config: QueueConfig, tol: ToleranceConfig) -> Lst:
    """Transform of the over-delay measure shifted back to the origin.

    Inverting this gives H(u) = P[W2 - d <= u, W2 > d]; the shift avoids
    the oscillatory exp(-s d) factor in the inversion.
    """
    w = _tail_weights(config, tol)
    rates = validate(config)
    lam_acc = rates.lambda1_acc
    mu = config.mu
    js = np.arange(1, len(w) + 1)

    def fn(s):
        e = eta_mm1(complex(s), lam_acc, mu)
        return complex(np.sum(w * e**js))

    return Lst(fn=fn, mass=float(w.sum()), atom_at_zero=0.0, label="class2-over-delay")


# --------------------------------------------------------------------------
# Euler-summation inversion
# --------------------------------------------------------------------------

def _euler_params(eps: float):
    a = max(18.5, -math.log(eps) + 2.3)
    return a, 45, 15  # contour constant, burn-in terms, averaged terms


def _invert_point(transform: Lst, t: float, a: float, n_burn: int, n_avg: int):
    """One Bromwich-contour evaluation; returns (value, error_estimate)."""
    fhat = lambda s: transform.fn(s) / s
    base = math.exp(a / 2.0) / t
    terms = np.empty(n_burn + n_avg + 1)
    terms[0] = 0.5 * base * complex(fhat(a / (2.0 * t))).real
    for k in range(1, n_burn + n_avg + 1):
        s = complex(a / (2.0 * t), k * math.pi / t)
        terms[k] = base * ((-1) ** k) * complex(fhat(s)).real
    partial = np.cumsum(terms)
    binom = np.array([math.comb(n_avg, m) for m in range(n_avg + 1)], dtype=float)
    binom /= 2.0**n_avg
    val = float(binom @ partial[n_burn : n_burn + n_avg + 1])
    val_prev = float(binom @ partial[n_burn - 1 : n_burn + n_avg])
    return val, abs(val - val_prev)


def invert_to_cdf(
    transform: Lst, grid: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL
) -> CdfCurve:
    """Pointwise CDF recovery from an LST, monotonized by isotonic clamping.

    Raises AccuracyNotMet when the inversion error estimate (successive
    binomial averages plus the contour discretization bound) exceeds
    eps_invert at any grid point.
    """
    grid = np.asarray(grid, dtype=float)
    a, n_burn, n_avg = _euler_params(tol.eps_invert)
    disc_err = math.exp(-a)
    raw = np.empty_like(grid)
    worst = 0.0
    for i, t in enumerate(grid):
        if t < 0:
            raw[i] = 0.0
        elif t == 0.0:
            if transform.atom_at_zero is not None:
                raw[i] = transform.atom_at_zero
            else:
                raw[i] = float(complex(transform.fn(1e12)).real)
        else:
            raw[i], est = _invert_point(transform, t, a, n_burn, n_avg)
            worst = max(worst, est)
    if worst + disc_err > tol.eps_invert:
        raise AccuracyNotMet(
            f"inversion error estimate {worst + disc_err:.3e} exceeds "
            f"eps_invert={tol.eps_invert:.3e}"
        )
    clipped = np.clip(raw, 0.0, 1.0)
    iso = np.maximum.accumulate(clipped)
    return CdfCurve(
        ts=grid,
        values=iso,
        provenance="inverted",
        max_adjustment=float(np.max(np.abs(iso - raw))),
    )


def default_grid(config: QueueConfig, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """0.05/mu-spaced abscissae out to where the FCFS survival is below 1e-6."""
    if tol.grid is not None:
        return np.asarray(tol.grid, dtype=float)
    rates = validate(config)
    mu = config.mu
    rho = max(rates.rho, 1e-6)
    t_end = math.log(rho / 1e-6) / (mu * (1.0 - rates.rho))
    t_end = max(t_end, config.d + 10.0 / mu)
    return np.arange(0.0, t_end, 0.05 / mu)


def class2_cdf_dapq(
    config: QueueConfig,
    grid: Optional[np.ndarray] = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> CdfCurve:
    """Waiting-time CDF of class-2 customers in the delayed APQ (M/M/1).

    Within the delay horizon the law coincides with the strict-priority
    (b = 0) reference, so those abscissae are served by the same machinery
    evaluated at b = 0; beyond d the over-delay inversion takes over.
    """
    rates = validate(config)
    if config.service is not ServiceKind.EXPONENTIAL:
        raise OutOfRange("class2_cdf_dapq requires exponential service")
    ts = default_grid(config, tol) if grid is None else np.asarray(grid, dtype=float)
    atom = 1.0 - rates.rho
    d = config.d

    npq_lst = _shifted_tail_lst(config.replace(b=0.0, d=0.0), tol)
    values = np.empty_like(ts)
    a, n_burn, n_avg = _euler_params(tol.eps_invert)
    disc_err = math.exp(-a)
    worst = 0.0

    def npq_cdf(t: float) -> float:
        nonlocal worst
        if t <= 0.0:
            return atom
        v, est = _invert_point(npq_lst, t, a, n_burn, n_avg)
        worst = max(worst, est)
        return atom + v

    f_at_d = npq_cdf(d) if d > 0 else atom
    tail_lst = _shifted_tail_lst(config, tol)

    for i, t in enumerate(ts):
        if t < 0.0:
            values[i] = 0.0
        elif t <= d:
            values[i] = npq_cdf(t)
        else:
            v, est = _invert_point(tail_lst, t - d, a, n_burn, n_avg)
            worst = max(worst, est)
            values[i] = f_at_d + v
    if worst + disc_err > tol.eps_invert:
        raise AccuracyNotMet(
            f"inversion error estimate {worst + disc_err:.3e} exceeds "
            f"eps_invert={tol.eps_invert:.3e}"
        )
    clipped = np.clip(values, 0.0, 1.0)
    iso = np.maximum.accumulate(clipped)
    return CdfCurve(
        ts=ts,
        values=iso,
        provenance="inverted",
        max_adjustment=float(np.max(np.abs(iso - values))),
    )
