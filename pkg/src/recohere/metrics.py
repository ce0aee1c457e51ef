"""Distances, costs, and phase-space diagnostics.

The distance between two density matrices is the Frobenius norm of their
difference, sqrt(sum over entries of |w1_nm - w2_nm|^2). The recovery cost
divides that distance by a power of the success probability so the exponent r
dials between pure-fidelity and probability-weighted optimization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, ValidationError
from .measurement import PROBABILITY_FLOOR
from .states import FieldDensityMatrix

IMAG_RESIDUE_TOL = 1e-10


@dataclass(frozen=True)
class CostSpec:
    """Exponent r in the cost d / p**r; r = 0 ignores probability entirely."""

    r: float

    def __post_init__(self):
        r = float(self.r)
        if not r >= 0.0:
            raise ValidationError(f"cost exponent r must be nonnegative, got {r!r}")
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class QGridSpec:
    """Rectangular grid in the coherent-amplitude plane beta = Re + i Im."""

    re_min: float = -3.0
    re_max: float = 3.0
    im_min: float = -3.0
    im_max: float = 3.0
    re_points: int = 121
    im_points: int = 121

    def __post_init__(self):
        if self.re_points < 2 or self.im_points < 2:
            raise ValidationError("q grid needs at least 2 points per axis")
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ValidationError("q grid extents must satisfy max > min")

    def re_axis(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.re_points)

    def im_axis(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.im_points)

    @property
    def cell_area(self) -> float:
        dre = (self.re_max - self.re_min) / (self.re_points - 1)
        dim = (self.im_max - self.im_min) / (self.im_points - 1)
        return dre * dim


@dataclass(frozen=True, eq=False)
class QGrid:
    """Sampled Q values, row i at im_axis[i] and column j at re_axis[j]."""

    values: np.ndarray
    re_axis: np.ndarray
    im_axis: np.ndarray

    def __post_init__(self):
        for name in ("values", "re_axis", "im_axis"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.values.shape != (self.im_axis.size, self.re_axis.size):
            raise ValidationError(
                f"grid shape {self.values.shape} does not match axes "
                f"({self.im_axis.size}, {self.re_axis.size})")


def _entries(w) -> np.ndarray:
    if isinstance(w, FieldDensityMatrix):
        return w.entries
    return np.asarray(w, dtype=complex)


def distance(w1, w2) -> float:
    """Frobenius distance between two equally truncated matrices."""
    a, b = _entries(w1), _entries(w2)
    if a.shape != b.shape:
        raise ValidationError(f"distance needs matching truncations, got {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def error_matrix(w, target) -> np.ndarray:
    """Hermitian difference w - target; traceless whenever both are states."""
    a, b = _entries(w), _entries(target)
    if a.shape != b.shape:
        raise ValidationError(f"error matrix needs matching truncations, got {a.shape} vs {b.shape}")
    return a - b


def cost(d: float, p: float, spec: CostSpec) -> float:
    """Recovery cost d / p**r; an unusable branch maps to the +inf sentinel."""
    if d < 0.0:
        raise ValidationError(f"distance must be nonnegative, got {d!r}")
    if spec.r == 0.0:
        return float(d)
    if p < PROBABILITY_FLOOR:
        return math.inf
    return float(d / p**spec.r)


def filtering_probability(w0, wt) -> float:
    """Overlap tr(w0 wt): the success probability of plain projection onto
    the original pure state, the benchmark conditional measurements compete with."""
    a, b = _entries(w0), _entries(wt)
    if a.shape != b.shape:
        raise ValidationError(f"overlap needs matching truncations, got {a.shape} vs {b.shape}")
    return float(np.einsum("nm,mn->", a, b).real)


def _coherent_table(betas: np.ndarray, dim: int) -> np.ndarray:
    """Row b holds <n|beta_b> = exp(-|beta|^2/2) beta^n / sqrt(n!) for n < dim."""
    table = np.empty((betas.size, dim), dtype=complex)
    table[:, 0] = np.exp(-0.5 * np.abs(betas) ** 2)
    for n in range(1, dim):
        table[:, n] = table[:, n - 1] * betas / np.sqrt(n)
    return table


def q_function(w, spec: QGridSpec = QGridSpec()) -> QGrid:
    """Husimi distribution Q(beta) = <beta|w|beta> sampled on the grid.

    No 1/pi prefactor, so a unit-trace state integrates to pi and the vacuum
    peaks at exactly 1. Accepts a density matrix or a raw Hermitian matrix
    (for error surfaces); values must come out real to within the residue
    tolerance or the input was not Hermitian.
    """
    a = _entries(w)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"q_function needs a square matrix, got shape {a.shape}")
    re = spec.re_axis()
    im = spec.im_axis()
    betas = (re[None, :] + 1j * im[:, None]).ravel()
    table = _coherent_table(betas, a.shape[0])
    q = np.einsum("bn,nm,bm->b", table.conj(), a, table)
    residue = float(np.max(np.abs(q.imag)))
    if residue > IMAG_RESIDUE_TOL:
        raise InternalConsistencyError(
            f"Q values have imaginary residue {residue:.3e}; input matrix is not Hermitian")
    return QGrid(values=q.real.reshape(im.size, re.size), re_axis=re, im_axis=im)
