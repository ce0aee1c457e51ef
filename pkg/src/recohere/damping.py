"""Zero-temperature cavity damping.

Two independent routes to the same channel: the exact binomial photon-loss
map, and a fourth-order Runge-Kutta integration of the decay master equation
dw/d(gamma_t) = 2 a w a+ - a+ a w - w a+ a. The closed form is the production
path; the integrator exists so each can check the other.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import IntegrationQualityError, ValidationError
from .states import FieldDensityMatrix, sanitize

TRACE_DRIFT_TOL = 1e-6


@dataclass(frozen=True)
class DampingSpec:
    """Damping exposure gamma_t = (cavity decay constant) x (elapsed time)."""

    gamma_t: float

    def __post_init__(self):
        g = float(self.gamma_t)
        if not g >= 0.0:
            raise ValidationError(f"gamma_t must be nonnegative, got {g!r}")
        object.__setattr__(self, "gamma_t", g)


def loss_kraus(n_max: int, gamma_t: float) -> np.ndarray:
    """Stack of k-photon-loss operators; k runs from 0 to n_max.

    K_k[n, n+k] = sqrt(binom(n+k, n) eta^n (1-eta)^k) with eta = exp(-2 gamma_t).
    The completeness sum K_k+ K_k = 1 holds exactly by the binomial theorem.
    """
    eta = np.exp(-2.0 * gamma_t)
    dim = n_max + 1
    ops = np.zeros((dim, dim, dim))
    for k in range(dim):
        for n in range(dim - k):
            ops[k, n, n + k] = np.sqrt(comb(n + k, n) * eta**n * (1.0 - eta) ** k)
    return ops


def apply_damping(w0: FieldDensityMatrix, spec: DampingSpec) -> FieldDensityMatrix:
    """Evolve w0 through the exact photon-loss channel."""
    if spec.gamma_t == 0.0:
        return w0
    ops = loss_kraus(w0.n_max, spec.gamma_t)
    out = np.einsum("knm,ml,kpl->np", ops, w0.entries, ops.conj())
    return FieldDensityMatrix(sanitize(out))


def _rhs(w: np.ndarray) -> np.ndarray:
    dim = w.shape[0]
    n = np.arange(dim)
    out = -(n[:, None] + n[None, :]).astype(complex) * w
    if dim > 1:
        up = n[:-1] + 1
        out[:-1, :-1] += 2.0 * np.sqrt(up[:, None] * up[None, :]) * w[1:, 1:]
    return out


def lindblad_rhs(w) -> np.ndarray:
    """Right-hand side 2 a w a+ - a+ a w - w a+ a per unit damping exposure."""
    entries = w.entries if isinstance(w, FieldDensityMatrix) else np.asarray(w, dtype=complex)
    return _rhs(entries)


def rk4_evolve(w0: FieldDensityMatrix, spec: DampingSpec, steps: int) -> FieldDensityMatrix:
    """Integrate the decay master equation with classic fixed-step RK4.

    Oracle path: slower than apply_damping and subject to step-size error,
    but derived independently of the closed form.
    """
    if steps < 1:
        raise ValidationError(f"steps must be a positive integer, got {steps!r}")
    if spec.gamma_t == 0.0:
        return w0
    h = spec.gamma_t / steps
    w = np.array(w0.entries, dtype=complex)
    for _ in range(steps):
        k1 = _rhs(w)
        k2 = _rhs(w + 0.5 * h * k1)
        k3 = _rhs(w + 0.5 * h * k2)
        k4 = _rhs(w + h * k3)
        w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    drift = abs(np.trace(w).real - 1.0)
    if drift > TRACE_DRIFT_TOL:
        raise IntegrationQualityError(
            f"trace drifted by {drift:.3e} after {steps} steps; increase steps")
    return FieldDensityMatrix(sanitize(w))
