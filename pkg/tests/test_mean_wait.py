import numpy as np
import pytest

from _oracles import correction_by_matrix, x_rows_by_matrix
from dapq.core import (
    InvalidDelay,
    NoClass1,
    OutOfRange,
    QueueConfig,
    ServiceKind,
    validate,
)
from dapq.mean_wait import (
    dapq_means,
    fcfs_mean,
    interpolated_mean,
    md1_dapq_class2_mean,
    mm1_dapq_class2_mean,
    npq_class2_mean,
    x_table,
)

EXP = ServiceKind.EXPONENTIAL
DET = ServiceKind.DETERMINISTIC


def test_fcfs_mean_values():
    assert fcfs_mean(QueueConfig(0.5, 0.3, 1.0, service=EXP)) == pytest.approx(4.0)
    assert fcfs_mean(QueueConfig(0.5, 0.3, 1.0, service=DET)) == pytest.approx(2.0)
    assert fcfs_mean(QueueConfig(0.0, 0.0, 1.0)) == 0.0


def test_npq_class2_mean_values():
    assert npq_class2_mean(QueueConfig(0.5, 0.3, 1.0, service=EXP)) == pytest.approx(8.0)
    assert npq_class2_mean(QueueConfig(0.5, 0.3, 1.0, service=DET)) == pytest.approx(4.0)
    # single class: reduces to FCFS
    cfg = QueueConfig(0.0, 0.6, 1.0, service=EXP)
    assert npq_class2_mean(cfg) == pytest.approx(fcfs_mean(cfg), abs=1e-14)


def test_x_table_first_entry_and_edge():
    rates = validate(QueueConfig(0.5, 0.3, 1.0, service=EXP))
    table = x_table(rates, 10)
    q, r, p = rates.q_down, rates.r_coef, rates.p_up
    assert table.row(1)[0] == pytest.approx(q * 0.8**2, abs=1e-15)
    assert table.row(1)[0] == pytest.approx(r - p, abs=1e-15)
    for k in range(1, 11):
        assert table.row(k)[-1] == pytest.approx(r**k - p**k, rel=1e-12)


def test_x_table_base_case_follows_matrix_not_typo():
    # the recursion-consistent second-row head is q*rho*r
    rates = validate(QueueConfig(0.5, 0.3, 1.0, service=EXP))
    table = x_table(rates, 3)
    q, r, p = rates.q_down, rates.r_coef, rates.p_up
    assert table.row(2)[0] == pytest.approx(q * 0.8 * r, rel=1e-14)
    assert table.row(2)[0] != pytest.approx(q * r * p, rel=1e-3)


@pytest.mark.parametrize("lam1", [0.5, 0.2])
def test_x_table_matches_matrix_oracle(lam1):
    lam2 = 0.3
    rho = lam1 + lam2
    rates = validate(QueueConfig(lam1, lam2, 1.0, service=EXP))
    table = x_table(rates, 25)
    oracle = x_rows_by_matrix(lam1, 1.0, rho, 25)
    for k in range(1, 26):
        assert np.max(np.abs(table.row(k) - oracle[k - 1])) < 1e-12


def test_mm1_reduces_to_npq_at_b_zero():
    for d in (0.0, 1.0, 5.0):
        cfg = QueueConfig(0.5, 0.3, 1.0, b=0.0, d=d, service=EXP)
        assert mm1_dapq_class2_mean(cfg) == pytest.approx(npq_class2_mean(cfg), abs=1e-10)


def test_mm1_reduces_to_fcfs_at_b_one_d_zero():
    for lam1, lam2 in [(0.5, 0.3), (0.2, 0.7), (0.05, 0.6)]:
        cfg = QueueConfig(lam1, lam2, 1.0, b=1.0, d=0.0, service=EXP)
        assert mm1_dapq_class2_mean(cfg) == pytest.approx(fcfs_mean(cfg), abs=1e-10)


def test_mm1_mean_against_matrix_oracle():
    for lam1, lam2, b, d in [(0.5, 0.3, 0.5, 2.0), (0.2, 0.7, 0.5, 2.0), (0.5, 0.3, 1.0, 4.0)]:
        cfg = QueueConfig(lam1, lam2, 1.0, b=b, d=d, service=EXP)
        rho = lam1 + lam2
        rho1a = lam1 * (1 - b)
        factor = lam1 * b / ((1 - rho1a) * (1 - lam1))
        expected = npq_class2_mean(cfg) - factor * correction_by_matrix(lam1, 1.0, rho, d)
        assert mm1_dapq_class2_mean(cfg) == pytest.approx(expected, abs=1e-10)


def test_mm1_mean_sits_between_extremes():
    cfg = QueueConfig(0.5, 0.3, 1.0, b=0.5, d=2.0, service=EXP)
    val = mm1_dapq_class2_mean(cfg)
    assert fcfs_mean(cfg) < val < npq_class2_mean(cfg)
    assert val == pytest.approx(5.789561362696921, abs=1e-9)  # regression pin


def test_mm1_requires_exponential_service():
    with pytest.raises(OutOfRange):
        mm1_dapq_class2_mean(QueueConfig(0.5, 0.3, 1.0, b=0.5, d=1.0, service=DET))


def test_md1_reduces_to_npq_at_b_zero():
    for d in (0.0, 1.0, 4.0):
        cfg = QueueConfig(0.5, 0.3, 1.0, b=0.0, d=d, service=DET)
        assert md1_dapq_class2_mean(cfg) == pytest.approx(npq_class2_mean(cfg), abs=1e-10)


def test_md1_reduces_to_fcfs_at_b_one_d_zero():
    for lam1, lam2 in [(0.5, 0.3), (0.2, 0.7), (0.05, 0.6)]:
        cfg = QueueConfig(lam1, lam2, 1.0, b=1.0, d=0.0, service=DET)
        assert md1_dapq_class2_mean(cfg) == pytest.approx(fcfs_mean(cfg), abs=1e-10)


def test_md1_rejects_fractional_delay():
    with pytest.raises(InvalidDelay):
        md1_dapq_class2_mean(QueueConfig(0.5, 0.3, 1.0, b=0.5, d=2.5, service=DET))


def test_md1_reference_values():
    # values cross-validated against the replicated event simulation
    # (z-scores below 1 at 50 replications); pinned here to full precision
    cases = {
        (0.5, 0.3, 0.5, 2.0): 3.081335068936494,
        (0.2, 0.7, 0.5, 2.0): 5.171442610689,
        (0.5, 0.3, 0.5, 3.0): 3.2302842525415203,
    }
    for (l1, l2, b, d), want in cases.items():
        cfg = QueueConfig(l1, l2, 1.0, b=b, d=d, service=DET)
        got = md1_dapq_class2_mean(cfg)
        assert got == pytest.approx(want, abs=1e-9)
        assert got < npq_class2_mean(cfg)


def test_md1_mu_rescaling():
    # same dimensionless problem at a different clock speed
    base = md1_dapq_class2_mean(QueueConfig(0.5, 0.3, 1.0, b=0.5, d=2.0, service=DET))
    fast = md1_dapq_class2_mean(QueueConfig(1.0, 0.6, 2.0, b=0.5, d=1.0, service=DET))
    assert fast == pytest.approx(base / 2.0, rel=1e-10)


def test_dapq_means_npq_closed_forms():
    summary = dapq_means(QueueConfig(0.5, 0.3, 1.0, b=0.0, d=3.0, service=EXP))
    assert summary.mean_w1 == pytest.approx(1.6, abs=1e-10)
    assert summary.mean_w2 == pytest.approx(8.0, abs=1e-10)


def test_dapq_means_fcfs_boundary():
    for service in (EXP, DET):
        cfg = QueueConfig(0.5, 0.3, 1.0, b=1.0, d=0.0, service=service)
        summary = dapq_means(cfg)
        assert summary.mean_w1 == pytest.approx(fcfs_mean(cfg), abs=1e-10)
        assert summary.mean_w2 == pytest.approx(fcfs_mean(cfg), abs=1e-10)


def test_dapq_means_surfaces_no_class1():
    with pytest.raises(NoClass1):
        dapq_means(QueueConfig(0.0, 0.5, 1.0, b=0.5, d=1.0, service=EXP))


def test_dapq_means_conservation_grid():
    lam_pairs = [(0.05, 0.05), (0.05, 0.5), (0.25, 0.25), (0.5, 0.3), (0.2, 0.6)]
    for service in (EXP, DET):
        for lam1, lam2 in lam_pairs:
            for b in (0.0, 0.5, 1.0):
                for d in (0.0, 2.0):
                    cfg = QueueConfig(lam1, lam2, 1.0, b=b, d=d, service=service)
                    assert dapq_means(cfg).conservation_residual < 1e-8


def test_mean_monotone_in_b_and_d():
    # class-1 mean rises with b at fixed d and falls with d at fixed b
    w1_by_b = [
        dapq_means(QueueConfig(0.5, 0.3, 1.0, b=b, d=2.0, service=EXP)).mean_w1
        for b in np.linspace(0.0, 1.0, 9)
    ]
    assert all(b2 >= b1 - 1e-12 for b1, b2 in zip(w1_by_b, w1_by_b[1:]))
    w1_by_d = [
        dapq_means(QueueConfig(0.5, 0.3, 1.0, b=0.5, d=d, service=EXP)).mean_w1
        for d in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0)
    ]
    assert all(b2 <= b1 + 1e-12 for b1, b2 in zip(w1_by_d, w1_by_d[1:]))
    # class-2 mirrors in the opposite direction
    w2_by_b = [
        dapq_means(QueueConfig(0.5, 0.3, 1.0, b=b, d=2.0, service=EXP)).mean_w2
        for b in np.linspace(0.0, 1.0, 9)
    ]
    assert all(b2 <= b1 + 1e-12 for b1, b2 in zip(w2_by_b, w2_by_b[1:]))


def test_class2_never_favored():
    # class-2 mean is at least the class-1 mean whenever b < 1 or d > 0
    rng = np.random.default_rng(71)
    for _ in range(40):
        lam1 = rng.uniform(0.05, 0.6)
        lam2 = rng.uniform(0.05, min(0.9 - lam1, 0.6))
        b = rng.uniform(0.0, 1.0)
        d = float(rng.integers(0, 5))
        service = EXP if rng.random() < 0.5 else DET
        s = dapq_means(QueueConfig(lam1, lam2, 1.0, b=b, d=d, service=service))
        assert s.mean_w2 >= s.mean_w1 - 1e-10
        assert s.mean_w1 >= 0.0


def test_md1_below_mm1_at_equal_parameters():
    for b in (0.0, 0.5, 1.0):
        for d in (0.0, 1.0, 3.0):
            exp_cfg = QueueConfig(0.5, 0.3, 1.0, b=b, d=d, service=EXP)
            det_cfg = QueueConfig(0.5, 0.3, 1.0, b=b, d=d, service=DET)
            assert dapq_means(det_cfg).mean_w2 <= dapq_means(exp_cfg).mean_w2 + 1e-12
            assert dapq_means(det_cfg).mean_w1 <= dapq_means(exp_cfg).mean_w1 + 1e-12


def test_interpolated_mean_endpoints_and_midpoint():
    cfg = QueueConfig(0.5, 0.3, 1.0, b=1.0, d=0.0, service=EXP)
    exp_s = dapq_means(cfg.replace(service=EXP))
    det_s = dapq_means(cfg.replace(service=DET))
    assert interpolated_mean(cfg, 1.0).mean_w2 == pytest.approx(exp_s.mean_w2, abs=1e-12)
    assert interpolated_mean(cfg, 0.0).mean_w2 == pytest.approx(det_s.mean_w2, abs=1e-12)
    mid = interpolated_mean(cfg, 0.5)
    assert mid.mean_w2 == pytest.approx(0.5 * (exp_s.mean_w2 + det_s.mean_w2), abs=1e-12)
    assert mid.conservation_residual < 1e-10


def test_interpolated_mean_requires_valid_det_delay():
    with pytest.raises(InvalidDelay):
        interpolated_mean(QueueConfig(0.5, 0.3, 1.0, b=0.5, d=1.5, service=EXP), 0.5)
