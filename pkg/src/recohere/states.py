"""State containers over a truncated Fock basis.

Composite field-atom states use the basis ordering index = 2*n + s where n is
the photon number and s = 0 labels the excited atomic state |a>, s = 1 the
ground state |b>. The atom index runs fastest so each resonant doublet
(|n, a>, |n+1, b>) sits in a contiguous 2x2 neighbourhood.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
KET_NORM_TOL = 1e-12
PSD_TOL = 1e-10
# Truncation policy: two guard levels above the largest photon number a run
# can reach, and the top guard level must stay essentially unpopulated.
GUARD_LEVELS = 2
TOP_LEVEL_TOL = 1e-8

_THETA_SLACK = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=complex)
    out.setflags(write=False)
    return out


def sanitize(entries: np.ndarray) -> np.ndarray:
    """Re-symmetrize and renormalize a density matrix to suppress float drift."""
    h = 0.5 * (entries + entries.conj().T)
    return h / np.trace(h).real


def _check_density(w: np.ndarray, what: str) -> None:
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValidationError(f"{what} must be square, got shape {w.shape}")
    dev = float(np.max(np.abs(w - w.conj().T)))
    if dev > HERMITICITY_TOL:
        raise ValidationError(f"{what} is not Hermitian: max deviation {dev:.3e}")
    tr = np.trace(w)
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"{what} trace is {tr!r}, expected 1 within {TRACE_TOL:g}")


@dataclass(frozen=True, eq=False)
class FieldKet:
    """Pure cavity-field state given by amplitudes c_0 .. c_n_max."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise ValidationError("field ket needs at least the vacuum amplitude")
        norm_sq = float(np.sum(np.abs(c) ** 2))
        if abs(norm_sq - 1.0) > KET_NORM_TOL:
            raise ValidationError(f"field ket is not normalized: sum of |c_n|^2 is {norm_sq!r}")
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def n_max(self) -> int:
        return self.coeffs.size - 1

    def top_occupied(self) -> int:
        """Highest Fock index carrying any amplitude (0 for the vacuum)."""
        occupied = np.nonzero(np.abs(self.coeffs) > 0)[0]
        return int(occupied[-1]) if occupied.size else 0

    def padded(self, n_max: int) -> "FieldKet":
        """The same state embedded in a basis truncated at n_max, never shrunk."""
        if n_max <= self.n_max:
            return self
        c = np.zeros(n_max + 1, dtype=complex)
        c[: self.coeffs.size] = self.coeffs
        return FieldKet(c)

    @classmethod
    def fock(cls, n: int, n_max: int) -> "FieldKet":
        if not 0 <= n <= n_max:
            raise ValidationError(f"fock index {n} outside [0, {n_max}]")
        c = np.zeros(n_max + 1, dtype=complex)
        c[n] = 1.0
        return cls(c)


@dataclass(frozen=True)
class AtomKet:
    """Two-level atomic state cos(theta)|a> + sin(theta) e^{i phi}|b>.

    The parametrization fixes the global phase so the excited amplitude is
    real and nonnegative; theta must lie in [0, pi/2] and phi is stored
    reduced to [0, 2*pi).
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        th = float(self.theta)
        if th < -_THETA_SLACK or th > np.pi / 2 + _THETA_SLACK:
            raise ValidationError(f"theta must lie in [0, pi/2], got {th!r}")
        object.__setattr__(self, "theta", float(np.clip(th, 0.0, np.pi / 2)))
        object.__setattr__(self, "phi", float(self.phi) % (2 * np.pi))

    @property
    def alpha(self) -> float:
        return float(np.cos(self.theta))

    @property
    def beta(self) -> complex:
        return complex(np.sin(self.theta) * np.exp(1j * self.phi))

    def amplitudes(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    def orthogonal(self) -> "AtomKet":
        """The unique orthogonal state in the same parametrization."""
        return AtomKet(np.pi / 2 - self.theta, (self.phi + np.pi) % (2 * np.pi))


@dataclass(frozen=True, eq=False)
class FieldDensityMatrix:
    """Cavity-field density matrix on the truncated Fock basis."""

    entries: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.entries, dtype=complex)
        _check_density(w, "field density matrix")
        object.__setattr__(self, "entries", _frozen(w))

    @property
    def n_max(self) -> int:
        return self.entries.shape[0] - 1

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue, for positivity checks in validation paths."""
        return float(np.linalg.eigvalsh(self.entries)[0])


@dataclass(frozen=True, eq=False)
class CompositeDensityMatrix:
    """Joint field-atom density matrix, basis index 2*n + s (atom fastest)."""

    entries: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.entries, dtype=complex)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] % 2:
            raise ValidationError(f"composite matrix must be square with even size, got {w.shape}")
        _check_density(w, "composite density matrix")
        object.__setattr__(self, "entries", _frozen(w))

    @property
    def n_max(self) -> int:
        return self.entries.shape[0] // 2 - 1

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])


def pure_density(ket: FieldKet) -> FieldDensityMatrix:
    return FieldDensityMatrix(np.outer(ket.coeffs, ket.coeffs.conj()))


def compose_with_atom(field: FieldDensityMatrix, atom: AtomKet) -> CompositeDensityMatrix:
    amps = atom.amplitudes()
    return CompositeDensityMatrix(np.kron(field.entries, np.outer(amps, amps.conj())))


def partial_trace_atom(w: CompositeDensityMatrix) -> FieldDensityMatrix:
    dim = w.n_max + 1
    blocks = w.entries.reshape(dim, 2, dim, 2)
    return FieldDensityMatrix(np.einsum("nsms->nm", blocks))


def purity(w: FieldDensityMatrix) -> float:
    e = w.entries
    return float(np.einsum("nm,mn->", e, e).real)


def engine_n_max(top_occupied: int, planned_cms: int, guard_levels: int = GUARD_LEVELS) -> int:
    """Truncation for a run: each measurement can raise the support by one photon,
    damping never raises it, and guard levels sit on top to catch leakage."""
    if top_occupied < 0 or planned_cms < 0 or guard_levels < 1:
        raise ValidationError("engine_n_max arguments must be nonnegative (guard_levels >= 1)")
    return top_occupied + planned_cms + guard_levels
