"""Reference computations that share no code with the package under test."""

import math

import numpy as np


def overlap_probabilities(psi, lam):
    """p[o, j] = |<beta_o|alpha_j>|^2 from explicit meter vectors, broadcasting over lam."""
    lam = np.asarray(lam, dtype=float)
    alpha = np.array([[math.cos(psi), math.cos(psi)], [math.sin(psi), -math.sin(psi)]])  # columns alpha_j
    beta0 = np.stack([np.cos(lam), np.sin(lam)], axis=-1)
    beta1 = np.stack([-np.sin(lam), np.cos(lam)], axis=-1)
    return np.stack([(beta0 @ alpha) ** 2, (beta1 @ alpha) ** 2])


def grid_oracle_pair(psi, coarse=1e-3, fine=1e-5):
    """Exhaustive 2-D search: a 1e-3 global grid, then a 1e-5 grid around its best cell."""
    first = overlap_probabilities(psi, math.pi / 4)

    def k_of(l0, l1):
        p0 = overlap_probabilities(psi, l0)
        p1 = overlap_probabilities(psi, l1)
        g0 = [first[0, j] * p0[0, ..., j] + first[1, j] * p1[0, ..., j] for j in range(2)]
        return np.abs(g0[0] - g0[1])

    axis = np.arange(0.0, math.pi / 2 + coarse / 2, coarse)
    vals = k_of(axis[:, None], axis[None, :])
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    a = np.arange(axis[i] - coarse, axis[i] + coarse, fine)
    b = np.arange(axis[j] - coarse, axis[j] + coarse, fine)
    a, b = a[(a >= 0) & (a <= math.pi / 2)], b[(b >= 0) & (b <= math.pi / 2)]
    vals = k_of(a[:, None], b[None, :])
    m, n = np.unravel_index(np.argmax(vals), vals.shape)
    return a[m], b[n], vals[m, n]
