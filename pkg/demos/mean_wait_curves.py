"""Expected-wait curves: how the accumulation rate and delay trade the two
classes off against each other.

Writes plot-ready CSVs into demos/output/:

  mean_vs_b_<service>.csv   class means as b runs over [0,1] at several delays
  mean_vs_d_<service>.csv   class means as d grows at several accumulation rates

The headline effects: at b = 0 every curve starts at the strict-priority
values; pushing b toward 1 trades class-1 wait for class-2 wait sub-linearly;
growing d walks the system back toward strict priority, with deterministic
service cutting every wait roughly in half.
"""

import csv
import pathlib

import numpy as np

from dapq import QueueConfig, ServiceKind, dapq_means

LAM1, LAM2, MU = 0.5, 0.3, 1.0  # occupancy 0.8
OUT = pathlib.Path(__file__).parent / "output"


def sweep_b(service: ServiceKind, path: pathlib.Path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["b", "d", "mean_w1", "mean_w2"])
        for d in (0.0, 1.0, 2.0, 4.0, 8.0):
            for b in np.linspace(0.0, 1.0, 41):
                s = dapq_means(QueueConfig(LAM1, LAM2, MU, b=float(b), d=d, service=service))
                w.writerow([f"{b:.4f}", d, f"{s.mean_w1:.10f}", f"{s.mean_w2:.10f}"])


def sweep_d(service: ServiceKind, path: pathlib.Path):
    d_values = range(0, 21) if service is ServiceKind.DETERMINISTIC else np.arange(0.0, 20.5, 0.5)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["d", "b", "mean_w1", "mean_w2"])
        for b in (0.25, 0.5, 0.75, 1.0):
            for d in d_values:
                s = dapq_means(QueueConfig(LAM1, LAM2, MU, b=b, d=float(d), service=service))
                w.writerow([d, b, f"{s.mean_w1:.10f}", f"{s.mean_w2:.10f}"])


def main():
    OUT.mkdir(exist_ok=True)
    for service in (ServiceKind.EXPONENTIAL, ServiceKind.DETERMINISTIC):
        tag = service.value
        sweep_b(service, OUT / f"mean_vs_b_{tag}.csv")
        sweep_d(service, OUT / f"mean_vs_d_{tag}.csv")
        fcfs = dapq_means(QueueConfig(LAM1, LAM2, MU, b=1.0, d=0.0, service=service))
        npq = dapq_means(QueueConfig(LAM1, LAM2, MU, b=0.0, d=0.0, service=service))
        print(f"{tag}: FCFS wait {fcfs.mean_w1:.3f} | strict-priority "
              f"class-1 {npq.mean_w1:.3f}, class-2 {npq.mean_w2:.3f}")
    print(f"curves written under {OUT}/")


if __name__ == "__main__":
    main()
