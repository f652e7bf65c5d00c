"""Periodic square spin lattice: geometry, collective variables, majority blocking.

Sites are addressed as (row, col) pairs with row-major storage; all index
arithmetic wraps modulo the side length L in both coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Neighbor groups around a site, by increasing squared Euclidean distance.
# Group 1 is the site itself; groups 2-6 collect the displacement vectors at
# squared distances 1, 2, 4, 5, 8 (the next realizable distances on the
# integer lattice after 0).
GROUP_OFFSETS: tuple[tuple[tuple[int, int], ...], ...] = (
    ((0, 0),),
    ((1, 0), (-1, 0), (0, 1), (0, -1)),
    ((1, 1), (1, -1), (-1, 1), (-1, -1)),
    ((2, 0), (-2, 0), (0, 2), (0, -2)),
    ((2, 1), (2, -1), (-2, 1), (-2, -1), (1, 2), (1, -2), (-1, 2), (-1, -2)),
    ((2, 2), (2, -2), (-2, 2), (-2, -2)),
)

GROUP_SIZES: tuple[int, ...] = tuple(len(g) for g in GROUP_OFFSETS)  # (1, 4, 4, 4, 8, 4)
GROUP_SQDIST: tuple[int, ...] = (0, 1, 2, 4, 5, 8)

N_GROUPS = len(GROUP_OFFSETS)


@dataclass
class SpinLattice:
    """L x L grid of +/-1 spins with periodic boundary conditions."""

    spins: np.ndarray

    def __post_init__(self) -> None:
        spins = np.asarray(self.spins)
        if spins.ndim != 2 or spins.shape[0] != spins.shape[1] or spins.shape[0] < 1:
            raise ValueError(f"spins must be a square 2D array, got shape {spins.shape}")
        if not np.isin(spins, (-1, 1)).all():
            raise ValueError("every spin must be -1 or +1")
        self.spins = spins.astype(np.int8)

    @property
    def L(self) -> int:
        return self.spins.shape[0]

    def copy(self) -> "SpinLattice":
        return SpinLattice(self.spins.copy())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpinLattice):
            return NotImplemented
        return self.spins.shape == other.spins.shape and bool(
            (self.spins == other.spins).all()
        )


def new_lattice(L: int, init: str = "all_up", seed: int | None = None) -> SpinLattice:
    """Create an L x L lattice.

    L must be even and at least 4: majority blocking halves the side, and the
    potential offsets span a 5 x 5 neighborhood.  `init` is one of "all_up",
    "all_down" or "random"; random initialization requires a seed and is
    reproducible from it.
    """
    if L < 4:
        raise ValueError(f"L must be >= 4 (potential offsets span a 5x5 neighborhood), got {L}")
    if L % 2 != 0:
        raise ValueError(f"L must be even (majority blocking halves the lattice), got {L}")
    if init == "all_up":
        spins = np.ones((L, L), dtype=np.int8)
    elif init == "all_down":
        spins = -np.ones((L, L), dtype=np.int8)
    elif init == "random":
        if seed is None:
            raise ValueError("init='random' requires a seed")
        rng = np.random.default_rng(seed)
        spins = rng.choice(np.array([-1, 1], dtype=np.int8), size=(L, L))
    else:
        raise ValueError(f"unknown init {init!r}; expected 'all_up', 'all_down' or 'random'")
    return SpinLattice(spins)


def group_offsets(k: int) -> tuple[tuple[int, int], ...]:
    """Displacement pairs of neighbor group k (1-based, k in 1..6)."""
    if not 1 <= k <= N_GROUPS:
        raise ValueError(f"group index must be in 1..{N_GROUPS}, got {k}")
    return GROUP_OFFSETS[k - 1]


def collective_variable(lat: SpinLattice, site: tuple[int, int], k: int) -> float:
    """Mean spin over group k around `site`, with periodic wrap.

    Offsets that alias under the wrap (possible for small L) are counted once
    per displacement, the same convention used everywhere in this package.
    """
    offs = group_offsets(k)
    L = lat.L
    i, j = site
    if not (0 <= i < L and 0 <= j < L):
        raise ValueError(f"site {site} outside lattice of side {L}")
    total = sum(int(lat.spins[(i + di) % L, (j + dj) % L]) for di, dj in offs)
    return total / len(offs)


def block_majority(lat: SpinLattice) -> SpinLattice:
    """Coarse-grain by non-overlapping 2x2 blocks under the majority rule.

    Each block maps to the sign of its spin sum; a tied block takes the value
    of its lower-left spin, i.e. the smallest (row, col) corner, which is also
    the representative site of the block.
    """
    L = lat.L
    if L % 2 != 0:
        raise ValueError(f"majority blocking requires even L, got {L}")
    s = lat.spins
    Lc = L // 2
    sums = s.reshape(Lc, 2, Lc, 2).sum(axis=(1, 3))
    corners = s[::2, ::2]
    coarse = np.where(sums > 0, 1, np.where(sums < 0, -1, corners)).astype(np.int8)
    return SpinLattice(coarse)


def magnetization(lat: SpinLattice) -> float:
    """Mean of all spins, in [-1, 1]."""
    return float(lat.spins.mean())
