"""Resonant atom-field interaction on the truncated composite space.

The evolution couples each pair (|n, a>, |n+1, b>) through the vacuum-Rabi
angles C_n = cos(g_tau sqrt(n+1)), S_n = sin(g_tau sqrt(n+1)); |0, b> is
stationary. At the truncation edge |n_max, a> has no partner inside the
space, so it is held fixed. That keeps the operator exactly unitary, and the
guard-band precondition below guarantees the frozen level is never populated
enough to matter.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import TruncationLeakError, ValidationError
from .states import CompositeDensityMatrix, sanitize

GUARD_POPULATION_TOL = 1e-10


@dataclass(frozen=True)
class JcInteraction:
    """Dimensionless pulse area g_tau = (vacuum Rabi coupling) x (transit time)."""

    g_tau: float

    def __post_init__(self):
        g = float(self.g_tau)
        if not g >= 0.0:
            raise ValidationError(f"g_tau must be nonnegative, got {g!r}")
        object.__setattr__(self, "g_tau", g)


@lru_cache(maxsize=1024)
def _unitary(g_tau: float, n_max: int) -> np.ndarray:
    dim = 2 * (n_max + 1)
    u = np.zeros((dim, dim), dtype=complex)
    root = np.sqrt(np.arange(1.0, n_max + 2.0))
    cos = np.cos(g_tau * root)
    sin = np.sin(g_tau * root)
    u[1, 1] = 1.0
    for n in range(n_max + 1):
        a = 2 * n
        if n < n_max:
            u[a, a] = cos[n]
            u[2 * (n + 1) + 1, a] = -1j * sin[n]
        else:
            u[a, a] = 1.0
        if n >= 1:
            b = a + 1
            u[b, b] = cos[n - 1]
            u[2 * (n - 1), b] = -1j * sin[n - 1]
    u.setflags(write=False)
    return u


def jc_unitary(interaction: JcInteraction, n_max: int) -> np.ndarray:
    """Dense evolution operator on the 2*(n_max+1)-dimensional composite basis."""
    if n_max < 1:
        raise ValidationError(f"n_max must be at least 1, got {n_max!r}")
    return _unitary(float(interaction.g_tau), int(n_max))


def evolve_composite(w: CompositeDensityMatrix, interaction: JcInteraction) -> CompositeDensityMatrix:
    """Conjugate the composite state by the interaction unitary.

    Precondition: the top excited level |n_max, a> carries no more than
    GUARD_POPULATION_TOL population, since the truncated operator holds that
    level fixed instead of rotating it out of the space.
    """
    if interaction.g_tau == 0.0:
        return w
    edge = 2 * w.n_max
    top = w.entries[edge, edge].real
    if top > GUARD_POPULATION_TOL:
        raise TruncationLeakError(
            f"population {top:.3e} at |n_max={w.n_max}, a> would leak past the truncation; "
            "raise the engine photon cutoff")
    u = jc_unitary(interaction, w.n_max)
    return CompositeDensityMatrix(sanitize(u @ w.entries @ u.conj().T))
