"""Shared test oracles and generators.

Everything here is deliberately independent of the library's computation
paths: determinants through LU, gradients through central finite
differences, capacities through the closed-form water level, so that a bug
in the package cannot hide inside its own oracle.
"""

import numpy as np

from securebc import ChannelSet, CovariancePlan, sample_channel_set


def herm(m):
    return m.conj().T


def rand_complex(rng, rows, cols):
    return (rng.standard_normal((rows, cols))
            + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def rand_hermitian(rng, n, scale=1.0):
    a = rand_complex(rng, n, n)
    return scale * (a + herm(a)) / 2


def rand_hpd(rng, n, scale=1.0, floor=0.05):
    """Strictly positive definite, safe for small perturbations."""
    a = rand_complex(rng, n, n)
    m = a @ herm(a) + floor * np.eye(n)
    t = float(np.trace(m).real)
    return m * (scale / t)


def rand_bc_plan(rng, ch: ChannelSet, budget_frac=0.9, floor=0.05) -> CovariancePlan:
    """Random strictly-PD downlink plan with total trace <= budget_frac * P."""
    mats = [rand_hpd(rng, ch.n_t, scale=1.0, floor=floor) for _ in range(ch.num_users)]
    total = sum(float(np.trace(m).real) for m in mats)
    scale = budget_frac * ch.power * (0.3 + 0.7 * rng.random()) / total
    return CovariancePlan("bc", [m * scale for m in mats])


def rand_instance(rng, K=None, n_t=None, n_e=None, square=True, power=None):
    """Random channel set; square=True forces n_k == n_t for every user."""
    K = K or int(rng.integers(1, 4))
    n_t = n_t or int(rng.integers(1, 4))
    n_e = n_e or int(rng.integers(1, 3))
    power = power or float(0.5 + 2.0 * rng.random())
    n_k = [n_t] * K if square else [int(rng.integers(1, 4)) for _ in range(K)]
    return sample_channel_set(int(rng.integers(2 ** 31)), K, n_t, n_k, n_e, power)


def fd_gradient(fun, x0, h=1e-6):
    """Central-difference gradient of a real function of a Hermitian matrix.

    Returns the Hermitian matrix A with d/dt fun(x0 + t D) = Re tr(A D) for
    Hermitian directions D.
    """
    n = x0.shape[0]
    grad = np.zeros((n, n), dtype=complex)
    for p in range(n):
        e_pp = np.zeros((n, n), dtype=complex)
        e_pp[p, p] = 1.0
        grad[p, p] = (fun(x0 + h * e_pp) - fun(x0 - h * e_pp)) / (2 * h)
        for q in range(p + 1, n):
            d_re = np.zeros((n, n), dtype=complex)
            d_re[p, q] = d_re[q, p] = 1.0
            d_im = np.zeros((n, n), dtype=complex)
            d_im[p, q] = 1.0j
            d_im[q, p] = -1.0j
            d1 = (fun(x0 + h * d_re) - fun(x0 - h * d_re)) / (2 * h)
            d2 = (fun(x0 + h * d_im) - fun(x0 - h * d_im)) / (2 * h)
            grad[p, q] = (d1 + 1j * d2) / 2
            grad[q, p] = np.conj(grad[p, q])
    return grad


def waterfilling_capacity(h_matrix, power):
    """Closed-form capacity of one user with no eavesdropper.

    Pours power over the squared singular values of the channel; returned in
    nats.  Independent of the package solver.
    """
    gains = np.linalg.svd(h_matrix, compute_uv=False) ** 2
    gains = np.sort(gains[gains > 1e-15])[::-1]
    for m in range(len(gains), 0, -1):
        level = (power + np.sum(1.0 / gains[:m])) / m
        if level >= 1.0 / gains[m - 1] - 1e-15:
            return float(np.sum(np.log(level * gains[:m])))
    return 0.0


def waterfilling_covariance(h_matrix, lam):
    """Maximizer of logdet(I + H Q H^H) - lam tr(Q) over PSD Q."""
    u, s, vh = np.linalg.svd(h_matrix)
    gains = s ** 2
    powers = np.maximum(0.0, 1.0 / lam - 1.0 / np.maximum(gains, 1e-300))
    powers[gains <= 1e-15] = 0.0
    v = vh.conj().T[:, :len(powers)]
    return (v * powers) @ herm(v)
