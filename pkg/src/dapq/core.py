"""Domain types, parameter validation, and the work-conserving conservation law.

All types are immutable values and all operations are pure, so everything in
this module is safe to share across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


# --------------------------------------------------------------------------
# errors
# --------------------------------------------------------------------------

class DapqError(Exception):
    """Base class for all errors raised by this package."""


class OutOfRange(DapqError):
    """A rate or ratio parameter is outside its admissible range."""


class UnstableSystem(DapqError):
    """Offered load is at or above capacity (rho >= 1)."""


class InvalidDelay(DapqError):
    """Deterministic service requires the delay to be an integer number of services."""


class NoClass1(DapqError):
    """Class-1 occupancy is zero, so no class-1 mean can be derived."""


class TruncationOverflow(DapqError):
    """A truncated sum failed to meet its tail bound within the state cap."""


class RootBracketFailure(DapqError):
    """A bracketing root search could not locate a sign change."""


class NumericalInstability(DapqError):
    """A computation would lose all significant digits at the working precision."""


class NonConvergence(DapqError):
    """An iterative scheme failed to converge within its iteration cap."""


class AccuracyNotMet(DapqError):
    """A numerical inversion could not certify the requested accuracy."""


class EmptyOverlap(DapqError):
    """Two CDF curves share no common evaluation interval."""


class DegenerateMean(DapqError):
    """A zero mean is incompatible with a positive busy probability."""


class MonotonicityViolation(DapqError):
    """An empirically-verified monotonicity assumption failed; bisection aborted."""


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

class ServiceKind(enum.Enum):
    """Service-time distribution: Exponential(rate mu) or Deterministic(1/mu)."""

    EXPONENTIAL = "exp"
    DETERMINISTIC = "det"

    def second_moment(self, mu: float) -> float:
        """E[S^2]: 2/mu^2 for exponential service, 1/mu^2 for deterministic."""
        if self is ServiceKind.EXPONENTIAL:
            return 2.0 / mu**2
        return 1.0 / mu**2


@dataclass(frozen=True)
class QueueConfig:
    """A two-class priority-queue scenario.

    Class-1 customers accumulate priority credit at rate 1 from arrival;
    class-2 customers accumulate at rate ``b`` starting ``d`` time units
    after arrival.  ``b = 1, d = 0`` is FCFS; ``b = 0`` (or ``d = inf``)
    is the non-preemptive priority queue.
    """

    lambda1: float
    lambda2: float
    mu: float
    b: float = 0.0
    d: float = 0.0
    service: ServiceKind = ServiceKind.EXPONENTIAL

    def replace(self, **kwargs) -> "QueueConfig":
        from dataclasses import replace

        return replace(self, **kwargs)


@dataclass(frozen=True)
class DerivedRates:
    """Occupancies and uniformization constants derived from a valid config.

    ``lambda1_acc`` is the thinned class-1 rate governing accreditation
    intervals; ``p_up``/``q_down`` are the jump probabilities of the
    uniformized ahead-of-me chain (birth lambda1, death mu) and
    ``r_coef = p_up + q_down * rho**2`` its geometric-tail coefficient.
    """

    rho1: float
    rho2: float
    rho: float
    lambda1_acc: float
    rho1_acc: float
    nu: float
    p_up: float
    q_down: float
    r_coef: float


@dataclass(frozen=True)
class Kpi:
    """A waiting-time target paired with a required compliance probability.

    ``compliance_p`` is the minimum acceptable fraction of class
    ``class_index`` customers whose wait is below ``target_w``.
    """

    target_w: float
    compliance_p: float
    class_index: int = 2

    def __post_init__(self):
        if self.target_w <= 0:
            raise OutOfRange(f"target_w must be positive, got {self.target_w}")
        if not 0.0 < self.compliance_p < 1.0:
            raise OutOfRange(f"compliance_p must be in (0,1), got {self.compliance_p}")
        if self.class_index not in (1, 2):
            raise OutOfRange(f"class_index must be 1 or 2, got {self.class_index}")


@dataclass(frozen=True)
class WaitSummary:
    """Exact expected waits for both classes plus the conservation residual.

    ``conservation_residual`` is |rho1*E[W1] + rho2*E[W2] - conservation_rhs|;
    it is carried on every result so downstream consumers can self-check.
    """

    mean_w1: float
    mean_w2: float
    conservation_residual: float


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances shared by the analytic machinery.

    eps_series   absolute truncation tolerance for infinite sums
    eps_root     root-finder / bisection tolerance
    eps_invert   target absolute accuracy of transform inversion
    max_states   hard cap on truncated state spaces
    grid         optional fixed abscissae for CDF evaluation
    """

    eps_series: float = 1e-10
    eps_root: float = 1e-10
    eps_invert: float = 1e-8
    max_states: int = 6000
    grid: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.eps_series <= 0 or self.eps_root <= 0 or self.eps_invert <= 0:
            raise OutOfRange("all tolerances must be positive")
        if self.max_states < 1:
            raise OutOfRange("max_states must be >= 1")


DEFAULT_TOL = ToleranceConfig()


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def validate(config: QueueConfig) -> DerivedRates:
    """Check every invariant of ``config`` and return its derived rates.

    Raises OutOfRange, UnstableSystem, or InvalidDelay.
    """
    if config.lambda1 < 0 or config.lambda2 < 0:
        raise OutOfRange("arrival rates must be nonnegative")
    if config.mu <= 0:
        raise OutOfRange("service rate mu must be positive")
    if not 0.0 <= config.b <= 1.0:
        raise OutOfRange(f"accumulation ratio b must lie in [0,1], got {config.b}")
    if config.d < 0:
        raise OutOfRange(f"delay d must be nonnegative, got {config.d}")

    rho1 = config.lambda1 / config.mu
    rho2 = config.lambda2 / config.mu
    rho = rho1 + rho2
    if rho >= 1.0:
        raise UnstableSystem(f"rho = {rho:.6g} >= 1; the queue is unstable")

    if config.service is ServiceKind.DETERMINISTIC and config.d > 0:
        ell = config.d * config.mu
        if abs(ell - round(ell)) > 1e-9 or round(ell) < 1:
            raise InvalidDelay(
                f"deterministic service requires d = l/mu for integer l >= 1; "
                f"got d*mu = {ell:.6g}"
            )

    lambda1_acc = config.lambda1 * (1.0 - config.b)
    nu = config.mu + config.lambda1
    p_up = config.lambda1 / nu
    q_down = config.mu / nu
    return DerivedRates(
        rho1=rho1,
        rho2=rho2,
        rho=rho,
        lambda1_acc=lambda1_acc,
        rho1_acc=lambda1_acc / config.mu,
        nu=nu,
        p_up=p_up,
        q_down=q_down,
        r_coef=p_up + q_down * rho**2,
    )


def conservation_rhs(config: QueueConfig) -> float:
    """Discipline-free value of rho1*E[W1] + rho2*E[W2].

    Equals rho/(1-rho) * lambda*E[S^2]/2 for any work-conserving,
    non-preemptive discipline; independent of ``b`` and ``d``.
    """
    rates = validate(config)
    lam = config.lambda1 + config.lambda2
    es2 = config.service.second_moment(config.mu)
    return rates.rho / (1.0 - rates.rho) * lam * es2 / 2.0


def class1_mean_from_class2(config: QueueConfig, mean_w2: float) -> float:
    """Recover the class-1 mean wait from the class-2 mean via conservation."""
    rates = validate(config)
    if rates.rho1 == 0.0:
        raise NoClass1("lambda1 = 0: class-1 mean is undefined")
    return (conservation_rhs(config) - rates.rho2 * mean_w2) / rates.rho1
