"""Independent reference implementations used as test oracles.

These are deliberately plain: whole-array numpy updates with explicit
neighbour sums, no ping-pong buffers, no compiled code.
"""

import numpy as np


def neighbour_sum(u, excitable):
    """Sum of the four neighbours, with zero outside the grid and at
    non-excitable nodes; summed north, south, west, east."""
    z = np.where(excitable, u, 0.0)
    h, w = z.shape
    north = np.zeros_like(z)
    south = np.zeros_like(z)
    west = np.zeros_like(z)
    east = np.zeros_like(z)
    north[1:, :] = z[:-1, :]
    south[:-1, :] = z[1:, :]
    west[:, 1:] = z[:, :-1]
    east[:, :-1] = z[:, 1:]
    return ((north + south) + west) + east


def laplacian_loop(u, excitable, dx):
    """Per-node four-neighbour Laplacian, written as nested loops."""
    h, w = u.shape
    out = np.zeros_like(u, dtype=float)
    for i in range(h):
        for j in range(w):
            if not excitable[i, j]:
                continue
            s = 0.0
            for a, b in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)):
                if 0 <= a < h and 0 <= b < w and excitable[a, b]:
                    s += u[a, b]
            out[i, j] = (s - 4.0 * u[i, j]) / (dx * dx)
    return out


def reference_step(u, v, excitable, p):
    """One explicit Euler step of the two-variable Oregonator with the
    activator floored at zero; ``p`` is a SimParams."""
    lap = (neighbour_sum(u, excitable) - 4.0 * u) / (p.dx * p.dx)
    react = (u - u * u - (p.f * v + p.phi) * (u - p.q) / (u + p.q)) / p.epsilon
    un = u + p.dt * (react + p.du * lap)
    un = np.maximum(un, 0.0)
    vn = v + p.dt * (u - v)
    un = np.where(excitable, un, 0.0)
    vn = np.where(excitable, vn, 0.0)
    return un, vn


def reference_run(u, v, excitable, p, nsteps):
    u = np.array(u, dtype=float)
    v = np.array(v, dtype=float)
    for _ in range(nsteps):
        u, v = reference_step(u, v, excitable, p)
    return u, v


def scan_count(u, excitable, threshold):
    """Excited-node count by an explicit scan over every node."""
    n = 0
    h, w = u.shape
    for i in range(h):
        for j in range(w):
            if excitable[i, j] and u[i, j] > threshold:
                n += 1
    return n


def random_mask(rng, shape, density=0.75):
    m = rng.random(shape) < density
    m[0, 0] = True
    return m
