import math

import numpy as np
import pytest

from dapq.core import OutOfRange, QueueConfig, ServiceKind, conservation_rhs
from dapq.mean_wait import fcfs_mean, npq_class2_mean
from dapq.simulate import SimConfig, dump_raw_records, run_replicated, run_single

EXP = ServiceKind.EXPONENTIAL
DET = ServiceKind.DETERMINISTIC

GRID = np.arange(0.0, 30.0, 0.1)


def test_sim_config_invariants():
    cfg = QueueConfig(0.5, 0.3, 1.0)
    with pytest.raises(OutOfRange):
        SimConfig(queue=cfg, n_customers=100, burn_in=100)
    with pytest.raises(OutOfRange):
        SimConfig(queue=cfg, replications=0)


def test_determinism_bitwise():
    sim = SimConfig(queue=QueueConfig(0.5, 0.3, 1.0, b=0.5, d=2.0), n_customers=500,
                    burn_in=100, replications=3, seed=7)
    a = run_single(sim, 1)
    b = run_single(sim, 1)
    assert a == b
    ra = run_replicated(sim, GRID)
    rb = run_replicated(sim, GRID)
    for cls in (1, 2):
        assert np.array_equal(ra.curves[cls].values, rb.curves[cls].values)
        assert ra.means[cls] == rb.means[cls]


def test_replications_are_order_independent_substreams():
    sim = SimConfig(queue=QueueConfig(0.5, 0.3, 1.0), n_customers=300, burn_in=50,
                    replications=4, seed=11)
    r2_first = run_single(sim, 2)
    run_single(sim, 0)  # unrelated draw must not shift substream 2
    assert run_single(sim, 2) == r2_first


def test_single_class_fcfs_mean():
    # lambda2 = 0: a lone class reduces to plain FCFS
    cfg = QueueConfig(0.8, 0.0, 1.0, b=0.0, d=0.0, service=EXP)
    sim = SimConfig(queue=cfg, n_customers=4000, burn_in=1500, replications=30, seed=3)
    res = run_replicated(sim, GRID)
    want = 0.8 / (1.0 - 0.8)
    assert abs(res.means[1] - want) < 3.0 * res.mean_se[1]
    assert 2 not in res.means


def test_fcfs_order_when_credits_equal():
    # b=1, d=0: both classes accrue identically, so waits follow arrival order
    cfg = QueueConfig(0.5, 0.3, 1.0, b=1.0, d=0.0, service=EXP)
    sim = SimConfig(queue=cfg, n_customers=4000, burn_in=1500, replications=30, seed=5)
    res = run_replicated(sim, GRID)
    want = fcfs_mean(cfg)
    for cls in (1, 2):
        assert abs(res.means[cls] - want) < 3.5 * res.mean_se[cls]


@pytest.mark.parametrize("service", [EXP, DET])
def test_npq_means_both_service_kinds(service):
    cfg = QueueConfig(0.5, 0.3, 1.0, b=0.0, d=0.0, service=service)
    sim = SimConfig(queue=cfg, n_customers=4000, burn_in=1500, replications=40, seed=13)
    res = run_replicated(sim, GRID)
    w2 = npq_class2_mean(cfg)
    w1 = (conservation_rhs(cfg) - 0.3 * w2) / 0.5
    assert abs(res.means[2] - w2) < 3.0 * res.mean_se[2]
    assert abs(res.means[1] - w1) < 3.0 * res.mean_se[1]


def test_work_conservation_within_noise():
    cfg = QueueConfig(0.5, 0.3, 1.0, b=0.5, d=2.0, service=EXP)
    sim = SimConfig(queue=cfg, n_customers=4000, burn_in=1500, replications=40, seed=17)
    res = run_replicated(sim, GRID)
    lhs = 0.5 * res.means[1] + 0.3 * res.means[2]
    se = math.sqrt((0.5 * res.mean_se[1]) ** 2 + (0.3 * res.mean_se[2]) ** 2)
    assert abs(lhs - conservation_rhs(cfg)) < 3.0 * se


def test_class2_waits_match_npq_inside_delay_window():
    d = 2.0
    base = SimConfig(queue=QueueConfig(0.5, 0.3, 1.0, b=0.0, d=d), n_customers=4000,
                     burn_in=1500, replications=30, seed=23)
    apq = SimConfig(queue=QueueConfig(0.5, 0.3, 1.0, b=0.8, d=d), n_customers=4000,
                    burn_in=1500, replications=30, seed=23)
    res_npq = run_replicated(base, GRID)
    res_apq = run_replicated(apq, GRID)
    inside = GRID <= d
    diff = np.abs(res_npq.curves[2].values[inside] - res_apq.curves[2].values[inside])
    se = np.sqrt(res_npq.curve_se[2][inside] ** 2 + res_apq.curve_se[2][inside] ** 2)
    assert np.all(diff <= 2.0 * se + 5e-3)


def test_se_shrinks_with_replications():
    cfg = QueueConfig(0.5, 0.3, 1.0, b=0.5, d=2.0)
    few = run_replicated(SimConfig(queue=cfg, n_customers=2000, burn_in=500,
                                   replications=5, seed=29), GRID)
    many = run_replicated(SimConfig(queue=cfg, n_customers=2000, burn_in=500,
                                    replications=80, seed=29), GRID)
    # ~ 1/sqrt(R) scaling, within loose stochastic bounds
    ratio = few.mean_se[2] / many.mean_se[2]
    assert 1.5 < ratio < 12.0


def test_burn_in_counts_served_customers():
    sim = SimConfig(queue=QueueConfig(0.5, 0.3, 1.0), n_customers=100, burn_in=50,
                    replications=1, seed=31)
    records = run_single(sim, 0)
    assert len(records) == 100  # recorded services, burn-in excluded


def test_raw_dump_format(tmp_path):
    sim = SimConfig(queue=QueueConfig(0.5, 0.3, 1.0, b=0.5, d=1.0), n_customers=50,
                    burn_in=10, replications=2, seed=37)
    path = tmp_path / "raw.csv"
    dump_raw_records(sim, str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "rep,class,arrival,wait"
    assert len(lines) == 1 + 2 * 50
    rep, cls, arrival, wait = lines[1].split(",")
    assert rep == "0"
    assert cls in ("1", "2")
    assert float(wait) >= 0.0
