"""Independent brute-force oracles shared by the test modules.

Everything here deliberately avoids the package's own recursions: chain
products are explicit truncated matrix-vector iterations and the M/D/1 pmf
comes from the departure-epoch chain recursion in extended precision.
"""

import math

import mpmath as mp
import numpy as np
from scipy.stats import poisson


def x_rows_by_matrix(lam1, mu, rho, k_max, size=800):
    """(pi_+ P_+^k)_l / (1-rho) for l = 1..k via explicit truncated products."""
    nu = mu + lam1
    p, q = lam1 / nu, mu / nu
    v = rho ** np.arange(1, size + 1)
    rows = []
    for k in range(1, k_max + 1):
        w = np.zeros_like(v)
        w[:-1] += q * v[1:]
        w[1:] += p * v[:-1]
        v = w
        rows.append(v[:k].copy())
    return rows


def correction_by_matrix(lam1, mu, rho, d, size=2500):
    """sum_k pois(nu d; k) pi_+ P_+^k J_+ by direct truncated products."""
    nu = mu + lam1
    p, q = lam1 / nu, mu / nu
    nd = nu * d
    K = int(nd + 12 * math.sqrt(nd + 1) + 60)
    v = (1 - rho) * rho ** np.arange(1, size + 1)
    J = np.arange(1, size + 1, dtype=float)
    pmf = poisson.pmf(np.arange(K + 1), nd)
    tot = pmf[0] * (v @ J)
    for k in range(1, K + 1):
        w = np.zeros_like(v)
        w[:-1] += q * v[1:]
        w[1:] += p * v[:-1]
        v = w
        tot += pmf[k] * (v @ J)
    return tot


def md1_pi_embedded(rho, n_max):
    """Forward recursion on the departure-epoch chain, 80 digits."""
    with mp.workdps(80):
        r = mp.mpf(rho)
        a = [mp.e ** (-r) * r**k / mp.factorial(k) for k in range(n_max + 3)]
        ps = [1 - r]
        for j in range(n_max + 1):
            s = ps[j] - ps[0] * a[j] - mp.fsum(ps[k] * a[j - k + 1] for k in range(1, j + 1))
            ps.append(s / a[0])
        return [float(x) for x in ps]
