"""Stationary queue-length distributions and busy-horizon transition laws.

Two kinds of object live here:

* the distribution of the number of customers an arrival finds in system,
  for M/M/1 (geometric) and M/D/1 (alternating-sum formula with a geometric
  tail continuation), and

* the joint law of "``j`` customers ahead after ``d`` time units and the
  ahead-set never emptied", computed by uniformizing the birth--death chain
  with birth rate ``lambda1`` and death rate ``mu`` (a Poisson-weighted sum
  of powers of the absorbing chain's positive part).

On the M/D/1 geometric tail: the decay of consecutive probabilities is the
*reciprocal* of the nontrivial root ``sigma > 1`` of ``exp(rho*sigma)/sigma
= exp(rho)``.  The orientation was fixed by comparing against exact
consecutive ratios (see ``md1_tail_ratio``); the root itself exceeds 1, so
it cannot be the ratio directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.stats import poisson

from .core import (
    DEFAULT_TOL,
    NumericalInstability,
    OutOfRange,
    QueueConfig,
    RootBracketFailure,
    ServiceKind,
    ToleranceConfig,
    TruncationOverflow,
    validate,
)

_MAX_DPS = 2000


@dataclass(frozen=True)
class StationaryDist:
    """Arriving-customer queue-length pmf with a geometric continuation.

    ``probs[i]`` holds pi_i for i <= truncation_K; beyond that index the
    pmf continues geometrically with ratio ``tail_ratio``.
    """

    probs: np.ndarray
    tail_ratio: float
    truncation_K: int

    def pmf(self, i: int) -> float:
        if i < 0:
            return 0.0
        if i <= self.truncation_K:
            return float(self.probs[i])
        return float(self.probs[self.truncation_K] * self.tail_ratio ** (i - self.truncation_K))

    def pmf_array(self, n: int) -> np.ndarray:
        """pi_0 .. pi_n as a dense array, continuing the tail as needed."""
        if n <= self.truncation_K:
            return self.probs[: n + 1].copy()
        ext = self.probs[self.truncation_K] * self.tail_ratio ** np.arange(
            1, n - self.truncation_K + 1
        )
        return np.concatenate([self.probs, ext])

    def total_mass(self) -> float:
        """Sum of the truncated pmf plus the closed-form geometric tail."""
        g = self.tail_ratio
        tail = self.probs[self.truncation_K] * g / (1.0 - g) if g > 0 else 0.0
        return float(self.probs.sum() + tail)


def mm1_stationary(rho: float, tol: ToleranceConfig = DEFAULT_TOL) -> StationaryDist:
    """Geometric M/M/1 queue-length pmf, truncated where the tail mass < eps_series."""
    if not 0.0 <= rho < 1.0:
        raise OutOfRange(f"rho must lie in [0,1), got {rho}")
    if rho == 0.0:
        return StationaryDist(probs=np.array([1.0]), tail_ratio=0.0, truncation_K=0)
    # tail mass beyond K is rho**(K+1)
    K = max(1, math.ceil(math.log(tol.eps_series) / math.log(rho)) - 1)
    K = min(K, tol.max_states)
    probs = (1.0 - rho) * rho ** np.arange(K + 1)
    return StationaryDist(probs=probs, tail_ratio=rho, truncation_K=K)


def md1_tail_ratio(rho: float, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Geometric decay ratio of the M/D/1 queue-length pmf, in (0,1).

    Solves exp(rho*sigma)/sigma = exp(rho) for the unique root sigma > 1/rho
    by safeguarded bisection (sigma = 1 always solves it and is rejected);
    the pmf ratio pi_{i+1}/pi_i tends to 1/sigma.
    """
    if not 0.0 < rho < 1.0:
        raise OutOfRange(f"rho must lie in (0,1), got {rho}")
    g = lambda s: rho * s - math.log(s) - rho  # log of the defining equation
    lo = 1.0 / rho  # location of the minimum; g(lo) < 0 for rho < 1
    if g(lo) >= 0.0:
        raise RootBracketFailure(f"no bracket above 1/rho for rho = {rho}")
    hi = lo
    for _ in range(200):
        hi *= 2.0
        if g(hi) > 0.0:
            break
    else:
        raise RootBracketFailure(f"upper bracket not found for rho = {rho}")
    while hi - lo > tol.eps_root * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    sigma = 0.5 * (lo + hi)
    return 1.0 / sigma


def _md1_pi_exact(rho: float, n: int, dps: int) -> float:
    """pi_n for M/D/1 from the pgf expansion, in extended precision.

    pi_n = (1-rho) * [ sum_{m=0}^{n}   e^{m rho} (-m rho)^{n-m}/(n-m)!
                     - sum_{m=0}^{n-1} e^{m rho} (-m rho)^{n-1-m}/(n-1-m)! ]

    The terms alternate and grow like e^{n rho}, so the evaluation is done
    with mpmath at a precision budgeted for the cancellation.
    """
    with mp.workdps(dps):
        r = mp.mpf(rho)
        s1 = mp.fsum(
            mp.e ** (m * r) * (-m * r) ** (n - m) / mp.factorial(n - m)
            for m in range(n + 1)
        )
        if n >= 1:
            s2 = mp.fsum(
                mp.e ** (m * r) * (-m * r) ** (n - 1 - m) / mp.factorial(n - 1 - m)
                for m in range(n)
            )
        else:
            s2 = mp.mpf(0)
        return float((1 - r) * (s1 - s2))


def md1_pi_exact(rho: float, n: int) -> float:
    """Exact M/D/1 queue-length probability pi_n (no tail continuation)."""
    if not 0.0 <= rho < 1.0:
        raise OutOfRange(f"rho must lie in [0,1), got {rho}")
    dps = 40 + int(0.8 * n)
    if dps > _MAX_DPS:
        raise NumericalInstability(
            f"pi_{n} at rho={rho} would need more than {_MAX_DPS} digits"
        )
    return _md1_pi_exact(rho, n, dps)


def md1_stationary(rho: float, tol: ToleranceConfig = DEFAULT_TOL) -> StationaryDist:
    """M/D/1 queue-length pmf: exact terms, then a geometric continuation.

    Exact evaluation runs until the geometric tail carries less than
    eps_series/2 of the mass, so the truncated-plus-tail total is accurate
    to eps_series even though the continuation uses the limiting ratio.
    """
    if not 0.0 <= rho < 1.0:
        raise OutOfRange(f"rho must lie in [0,1), got {rho}")
    if rho == 0.0:
        return StationaryDist(probs=np.array([1.0]), tail_ratio=0.0, truncation_K=0)
    g = md1_tail_ratio(rho, tol)
    probs = [1.0 - rho]
    i = 0
    while True:
        i += 1
        if i > tol.max_states:
            raise TruncationOverflow(
                f"M/D/1 pmf needs more than max_states={tol.max_states} exact terms"
            )
        probs.append(md1_pi_exact(rho, i))
        if i >= 8 and probs[-1] * g / (1.0 - g) < 0.5 * tol.eps_series:
            break
    return StationaryDist(probs=np.asarray(probs), tail_ratio=g, truncation_K=i)


def stationary_for(config: QueueConfig, tol: ToleranceConfig = DEFAULT_TOL) -> StationaryDist:
    """Queue-length pmf seen by an arrival, per the config's service kind."""
    rates = validate(config)
    if config.service is ServiceKind.EXPONENTIAL:
        return mm1_stationary(rates.rho, tol)
    return md1_stationary(rates.rho, tol)


# --------------------------------------------------------------------------
# uniformized busy-horizon transition law (exponential service)
# --------------------------------------------------------------------------

def _poisson_horizon(nu_d: float, eps: float) -> np.ndarray:
    """Poisson(nu*d) pmf out to where the remaining tail mass is below eps."""
    if nu_d == 0.0:
        return np.array([1.0])
    hi = int(nu_d + 12.0 * math.sqrt(nu_d + 1.0) + 40.0)
    pmf = poisson.pmf(np.arange(hi + 1), nu_d)
    tail = 1.0 - np.cumsum(pmf)  # tail[k] = P[N > k]
    cut = int(np.argmax(tail < eps))  # first index meeting the bound
    return pmf[: cut + 1]


def _chain_step(v: np.ndarray, p_up: float, q_down: float) -> np.ndarray:
    """One step of the positive part of the absorbing ahead-set chain.

    State j receives q from j+1 and p from j-1; state 1 receives only from 2
    (mass flowing to the absorbing empty state is dropped).
    """
    out = np.zeros_like(v)
    out[:-1] += q_down * v[1:]
    out[1:] += p_up * v[:-1]
    return out


def _state_cap(rho: float, n_poisson: int, tol: ToleranceConfig) -> int:
    # reachability: no path climbs more than one state per jump
    base = 64 if rho == 0.0 else math.ceil(math.log(tol.eps_series) / math.log(rho))
    need = max(64, base) + n_poisson
    if need > tol.max_states:
        raise TruncationOverflow(
            f"uniformization needs {need} states but max_states={tol.max_states}"
        )
    return need


@dataclass(frozen=True)
class SurvivalTransition:
    """probs[i-1, j-1] = P[j ahead after d with the ahead-set never empty | i at 0].

    Row sums are at most 1 (the deficit is absorption at the empty state) and
    are nonincreasing in the horizon d.  ``d = 0`` gives the identity block.
    """

    probs: np.ndarray
    max_initial: int
    max_final: int
    poisson_terms: int

    def prob(self, i: int, j: int) -> float:
        if not (1 <= i <= self.max_initial and 1 <= j <= self.max_final):
            return 0.0
        return float(self.probs[i - 1, j - 1])

    def row_sum(self, i: int) -> float:
        return float(self.probs[i - 1].sum())


def survival_transition(
    config: QueueConfig,
    tol: ToleranceConfig = DEFAULT_TOL,
    max_initial: int = 64,
) -> SurvivalTransition:
    """Busy-horizon transition law of the uniformized ahead-set chain.

    Entry (i, j) is the Poisson(nu*d)-weighted sum over jump counts of the
    absorbing chain's positive-part powers; the jump sum stops when the
    Poisson tail falls below eps_series and states are capped by a
    reachability bound.
    """
    rates = validate(config)
    if config.service is not ServiceKind.EXPONENTIAL:
        raise OutOfRange("survival_transition requires exponential service")
    pmf = _poisson_horizon(rates.nu * config.d, 0.5 * tol.eps_series)
    S = _state_cap(rates.rho, len(pmf), tol)
    max_initial = min(max_initial, S)
    rows = np.zeros((max_initial, S))
    for i in range(1, max_initial + 1):
        v = np.zeros(S)
        v[i - 1] = 1.0
        acc = pmf[0] * v
        for k in range(1, len(pmf)):
            v = _chain_step(v, rates.p_up, rates.q_down)
            acc = acc + pmf[k] * v
        rows[i - 1] = acc
    return SurvivalTransition(
        probs=rows, max_initial=max_initial, max_final=S, poisson_terms=len(pmf)
    )


def busy_state_distribution(
    config: QueueConfig, tol: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray:
    """w[j-1] = P[j ahead after d, ahead-set never empty] for a tagged arrival.

    The initial state is the stationary arriving-customer count (PASTA),
    restricted to busy finds; equivalent to pi_+ premultiplying the
    survival transition, computed as a single weighted row iteration.
    """
    rates = validate(config)
    if config.service is not ServiceKind.EXPONENTIAL:
        raise OutOfRange("busy_state_distribution requires exponential service")
    pmf = _poisson_horizon(rates.nu * config.d, 0.5 * tol.eps_series)
    S = _state_cap(rates.rho, len(pmf), tol)
    rho = rates.rho
    v = (1.0 - rho) * rho ** np.arange(1, S + 1)
    acc = pmf[0] * v
    for k in range(1, len(pmf)):
        v = _chain_step(v, rates.p_up, rates.q_down)
        acc = acc + pmf[k] * v
    return acc
