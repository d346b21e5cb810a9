"""Discrete-event simulation of the two-class delayed APQ.

Brute-force oracle for the analytic machinery: every customer is generated
and moved through the queue explicitly.  At each service start the waiting
customer with the most accumulated credit is chosen, where class-1 credit
grows at rate 1 from arrival and class-2 credit at rate b starting d time
units after arrival.  Credit order within a class is arrival order, so the
selection reduces to comparing the two queue heads.

Replications draw from independent substreams spawned off one root seed
(SeedSequence spawn keys), so results are deterministic given the seed and
independent of execution order.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .core import OutOfRange, QueueConfig, ServiceKind, validate
from .transforms import CdfCurve


@dataclass(frozen=True)
class SimConfig:
    """Replicated-run protocol: who to simulate, how long, and the seed.

    ``n_customers`` services are recorded per replication after the first
    ``burn_in`` services are discarded.
    """

    queue: QueueConfig
    n_customers: int = 4000
    burn_in: int = 1500
    replications: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.burn_in < 0 or self.n_customers <= self.burn_in:
            raise OutOfRange("need n_customers > burn_in >= 0")
        if self.replications < 1:
            raise OutOfRange("replications must be >= 1")


@dataclass(frozen=True)
class EmpiricalCdf:
    """Replication-averaged empirical CDFs and means, one entry per class."""

    grid: np.ndarray
    curves: Dict[int, CdfCurve]
    curve_se: Dict[int, np.ndarray]
    means: Dict[int, float]
    mean_se: Dict[int, float]
    replications: int


WaitRecord = Tuple[int, float, float]  # (class, arrival time, wait)


def _rng_for(seed: int, rep_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(rep_index,))
    return np.random.Generator(np.random.Philox(ss))


def run_single(sim: SimConfig, rep_index: int) -> List[WaitRecord]:
    """Simulate one replication; returns post-burn-in (class, arrival, wait)."""
    cfg = sim.queue
    validate(cfg)
    rng = _rng_for(sim.seed, rep_index)
    lam1, lam2, mu = cfg.lambda1, cfg.lambda2, cfg.mu
    b, d = cfg.b, cfg.d
    det = cfg.service is ServiceKind.DETERMINISTIC

    def svc() -> float:
        return 1.0 / mu if det else rng.exponential(1.0 / mu)

    next1 = rng.exponential(1.0 / lam1) if lam1 > 0 else math.inf
    next2 = rng.exponential(1.0 / lam2) if lam2 > 0 else math.inf
    q1: deque = deque()
    q2: deque = deque()
    completion = math.inf
    idle = True
    need = sim.burn_in + sim.n_customers
    served = 0
    records: List[WaitRecord] = []

    while served < need:
        t = min(next1, next2, completion)
        if completion <= next1 and completion <= next2:
            completion = math.inf
            chosen = 0
            if q1 and q2:
                c1 = t - q1[0]
                c2 = b * max(0.0, t - q2[0] - d)
                if c1 > c2:
                    chosen = 1
                elif c2 > c1:
                    chosen = 2
                else:
                    # ties: earlier arrival first, then class-1
                    chosen = 1 if q1[0] <= q2[0] else 2
            elif q1:
                chosen = 1
            elif q2:
                chosen = 2
            if chosen == 0:
                idle = True
            else:
                arr = q1.popleft() if chosen == 1 else q2.popleft()
                served += 1
                if served > sim.burn_in:
                    records.append((chosen, arr, t - arr))
                completion = t + svc()
        elif next1 <= next2:
            if idle:
                served += 1
                if served > sim.burn_in:
                    records.append((1, t, 0.0))
                completion = t + svc()
                idle = False
            else:
                q1.append(t)
            next1 = t + rng.exponential(1.0 / lam1)
        else:
            if idle:
                served += 1
                if served > sim.burn_in:
                    records.append((2, t, 0.0))
                completion = t + svc()
                idle = False
            else:
                q2.append(t)
            next2 = t + rng.exponential(1.0 / lam2)
    return records


def run_replicated(sim: SimConfig, grid: np.ndarray) -> EmpiricalCdf:
    """Averaged per-class empirical CDFs on ``grid`` with replication SEs."""
    grid = np.asarray(grid, dtype=float)
    reps = sim.replications
    cdf_acc = {1: [], 2: []}
    mean_acc = {1: [], 2: []}
    for r in range(reps):
        records = run_single(sim, r)
        for cls in (1, 2):
            waits = np.array([w for c, _, w in records if c == cls])
            if len(waits) == 0:
                continue
            waits.sort()
            cdf_acc[cls].append(np.searchsorted(waits, grid, side="right") / len(waits))
            mean_acc[cls].append(waits.mean())
    curves, curve_se, means, mean_se = {}, {}, {}, {}
    for cls in (1, 2):
        if not cdf_acc[cls]:
            continue
        stack = np.vstack(cdf_acc[cls])
        n = stack.shape[0]
        avg = stack.mean(axis=0)
        curves[cls] = CdfCurve(ts=grid, values=avg, provenance="empirical")
        curve_se[cls] = (
            stack.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(avg)
        )
        marr = np.array(mean_acc[cls])
        means[cls] = float(marr.mean())
        mean_se[cls] = float(marr.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return EmpiricalCdf(
        grid=grid,
        curves=curves,
        curve_se=curve_se,
        means=means,
        mean_se=mean_se,
        replications=reps,
    )


def dump_raw_records(sim: SimConfig, path: str) -> None:
    """Write every replication's post-burn-in records as CSV.

    Header ``rep,class,arrival,wait``; floats carry 12 significant digits.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "class", "arrival", "wait"])
        for r in range(sim.replications):
            for cls, arr, wait in run_single(sim, r):
                writer.writerow([r, cls, f"{arr:.12g}", f"{wait:.12g}"])
