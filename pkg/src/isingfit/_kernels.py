"""Compiled inner loops for sampling and measurement.

All kernels assume C-contiguous int8 spin arrays with values +/-1 and wrap
indices modulo the side length, matching the conventions of `lattice` and
`potentials`.  The flip-energy kernel uses closed-form neighborhood updates
and requires L >= 3 so that no displacement aliases the flipped site itself.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _x2_at(spins, a, b, L):
    # group-2 collective variable (nearest-neighbor mean) at site (a, b)
    return (
        spins[(a + 1) % L, b]
        + spins[(a - 1) % L, b]
        + spins[a, (b + 1) % L]
        + spins[a, (b - 1) % L]
    ) * 0.25


@njit(cache=True, inline="always")
def _x3_at(spins, a, b, L):
    # group-3 collective variable (diagonal mean) at site (a, b)
    return (
        spins[(a + 1) % L, (b + 1) % L]
        + spins[(a + 1) % L, (b - 1) % L]
        + spins[(a - 1) % L, (b + 1) % L]
        + spins[(a - 1) % L, (b - 1) % L]
    ) * 0.25


@njit(cache=True, inline="always")
def _delta_quartic(spins, i, j, s, alpha):
    # Contribution of the three non-quadratic potentials to the flip energy.
    # Flipping x at (i, j) shifts the group-2 mean of each nearest neighbor
    # and the group-3 mean of each diagonal neighbor by -s/2.
    L = spins.shape[0]
    h = 0.5 * s
    d6 = 0.0
    d7 = 0.0
    d8 = 0.0
    for t in range(4):
        if t == 0:
            a = (i + 1) % L
            b = j
        elif t == 1:
            a = (i - 1) % L
            b = j
        elif t == 2:
            a = i
            b = (j + 1) % L
        else:
            a = i
            b = (j - 1) % L
        u = _x2_at(spins, a, b, L)
        u2 = u - h
        uu = u * u
        u22 = u2 * u2
        d6 -= u22 * u22 - uu * uu
        w = _x3_at(spins, a, b, L)
        d8 -= (u22 - uu) * (w * w)
    for t in range(4):
        if t == 0:
            a = (i + 1) % L
            b = (j + 1) % L
        elif t == 1:
            a = (i + 1) % L
            b = (j - 1) % L
        elif t == 2:
            a = (i - 1) % L
            b = (j + 1) % L
        else:
            a = (i - 1) % L
            b = (j - 1) % L
        v = _x3_at(spins, a, b, L)
        v2 = v - h
        vv = v * v
        v22 = v2 * v2
        d7 -= v22 * v22 - vv * vv
        u = _x2_at(spins, a, b, L)
        d8 -= (u * u) * (v22 - vv)
    return alpha[5] * d6 + alpha[6] * d7 + alpha[7] * d8


@njit(cache=True, inline="always")
def delta_flip(spins, i, j, alpha):
    """Exact energy change for flipping the spin at (i, j).

    Quadratic potentials: psi_k gains (4/n_g) * x * S_g, where S_g is the sum
    of spins over group g's displacements around the site (each displacement
    counted once, so wrap aliasing matches the basis definition).
    """
    L = spins.shape[0]
    ip1 = i + 1 if i + 1 < L else 0
    im1 = i - 1 if i >= 1 else L - 1
    ip2 = i + 2 if i + 2 < L else i + 2 - L
    im2 = i - 2 if i >= 2 else i - 2 + L
    jp1 = j + 1 if j + 1 < L else 0
    jm1 = j - 1 if j >= 1 else L - 1
    jp2 = j + 2 if j + 2 < L else j + 2 - L
    jm2 = j - 2 if j >= 2 else j - 2 + L
    s = float(spins[i, j])
    s2 = float(spins[ip1, j] + spins[im1, j] + spins[i, jp1] + spins[i, jm1])
    s3 = float(spins[ip1, jp1] + spins[ip1, jm1] + spins[im1, jp1] + spins[im1, jm1])
    s4 = float(spins[ip2, j] + spins[im2, j] + spins[i, jp2] + spins[i, jm2])
    s5 = float(
        spins[ip2, jp1] + spins[ip2, jm1] + spins[im2, jp1] + spins[im2, jm1]
        + spins[ip1, jp2] + spins[ip1, jm2] + spins[im1, jp2] + spins[im1, jm2]
    )
    s6 = float(spins[ip2, jp2] + spins[ip2, jm2] + spins[im2, jp2] + spins[im2, jm2])
    d = s * (
        alpha[0] * s2
        + alpha[1] * s3
        + alpha[2] * s4
        + 0.5 * alpha[3] * s5
        + alpha[4] * s6
    )
    if alpha[5] != 0.0 or alpha[6] != 0.0 or alpha[7] != 0.0:
        d += _delta_quartic(spins, i, j, s, alpha)
    return d


@njit(cache=True)
def sweep(spins, alpha, rng):
    """One raster-order Metropolis sweep (one proposal per site), in place.

    Returns the number of accepted flips, or -1 if a non-finite energy change
    was encountered (diverging parameters).
    """
    L = spins.shape[0]
    accepted = 0
    for i in range(L):
        for j in range(L):
            d = delta_flip(spins, i, j, alpha)
            if not np.isfinite(d):
                return -1
            if d <= 0.0 or rng.random() < np.exp(-d):
                spins[i, j] = -spins[i, j]
                accepted += 1
    return accepted


@njit(cache=True)
def sweep_masked(spins, alpha, rng, free):
    """Raster Metropolis sweep proposing flips only where free != 0."""
    L = spins.shape[0]
    accepted = 0
    for i in range(L):
        for j in range(L):
            if free[i, j] == 0:
                continue
            d = delta_flip(spins, i, j, alpha)
            if not np.isfinite(d):
                return -1
            if d <= 0.0 or rng.random() < np.exp(-d):
                spins[i, j] = -spins[i, j]
                accepted += 1
    return accepted


@njit(cache=True)
def basis(spins):
    """The 8 potential values of a configuration (any side length >= 2)."""
    L = spins.shape[0]
    out = np.zeros(8)
    for i in range(L):
        ip1 = (i + 1) % L
        im1 = (i - 1) % L
        ip2 = (i + 2) % L
        im2 = (i - 2) % L
        for j in range(L):
            jp1 = (j + 1) % L
            jm1 = (j - 1) % L
            jp2 = (j + 2) % L
            jm2 = (j - 2) % L
            x1 = float(spins[i, j])
            x2 = (spins[ip1, j] + spins[im1, j] + spins[i, jp1] + spins[i, jm1]) * 0.25
            x3 = (
                spins[ip1, jp1] + spins[ip1, jm1] + spins[im1, jp1] + spins[im1, jm1]
            ) * 0.25
            x4 = (spins[ip2, j] + spins[im2, j] + spins[i, jp2] + spins[i, jm2]) * 0.25
            x5 = (
                spins[ip2, jp1] + spins[ip2, jm1] + spins[im2, jp1] + spins[im2, jm1]
                + spins[ip1, jp2] + spins[ip1, jm2] + spins[im1, jp2] + spins[im1, jm2]
            ) * 0.125
            x6 = (
                spins[ip2, jp2] + spins[ip2, jm2] + spins[im2, jp2] + spins[im2, jm2]
            ) * 0.25
            out[0] -= x1 * x2
            out[1] -= x1 * x3
            out[2] -= x1 * x4
            out[3] -= x1 * x5
            out[4] -= x1 * x6
            x2sq = x2 * x2
            x3sq = x3 * x3
            out[5] -= x2sq * x2sq
            out[6] -= x3sq * x3sq
            out[7] -= x2sq * x3sq
    return out


@njit(cache=True)
def block_spins(spins):
    """Majority-rule 2x2 blocking; ties take the block's lower-left corner."""
    L = spins.shape[0]
    Lc = L // 2
    out = np.empty((Lc, Lc), dtype=np.int8)
    for bi in range(Lc):
        for bj in range(Lc):
            ll = spins[2 * bi, 2 * bj]
            total = (
                ll
                + spins[2 * bi, 2 * bj + 1]
                + spins[2 * bi + 1, 2 * bj]
                + spins[2 * bi + 1, 2 * bj + 1]
            )
            if total > 0:
                out[bi, bj] = 1
            elif total < 0:
                out[bi, bj] = -1
            else:
                out[bi, bj] = ll
    return out


@njit(cache=True)
def run_chain(spins, alpha, burn_in, n_cycles, measure_every, levels, rng):
    """Run one Metropolis chain and record potential measurements.

    After `burn_in` sweeps, performs `n_cycles` cycles of `measure_every`
    sweeps each; at the end of every cycle the configuration is blocked as
    many times as each entry of `levels` (sorted ascending, 0 = fine lattice)
    requests and the 8 potentials are recorded per level.

    Returns (psi, accepted) with psi of shape (n_cycles, len(levels), 8);
    accepted is -1 if a non-finite energy change occurred.
    """
    n_levels = levels.shape[0]
    max_level = 0
    for t in range(n_levels):
        if levels[t] > max_level:
            max_level = levels[t]
    psi = np.zeros((n_cycles, n_levels, 8))
    accepted = 0
    for _ in range(burn_in):
        a = sweep(spins, alpha, rng)
        if a < 0:
            return psi, -1
        accepted += a
    for c in range(n_cycles):
        for _ in range(measure_every):
            a = sweep(spins, alpha, rng)
            if a < 0:
                return psi, -1
            accepted += a
        cur = spins
        cur_level = 0
        for t in range(n_levels):
            while cur_level < levels[t]:
                cur = block_spins(cur)
                cur_level += 1
            ps = basis(cur)
            for k in range(8):
                psi[c, t, k] = ps[k]
    return psi, accepted
