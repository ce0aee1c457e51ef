"""Conditional measurements: prepare an atom, let it interact, post-select.

A step sends the field through w -> <psi_f| U (w x |psi_i><psi_i|) U+ |psi_f>,
renormalized by the success probability P of actually finding the atom in
|psi_f>. Failed post-selections discard the run, so P multiplies into the
overall sequence probability.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroProbabilityError
from .jaynes_cummings import JcInteraction, evolve_composite
from .states import (
    AtomKet,
    CompositeDensityMatrix,
    FieldDensityMatrix,
    compose_with_atom,
    sanitize,
)

PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class CmParams:
    """Full description of one conditional measurement.

    (theta_i, phi_i) prepare the incoming atom, (theta_f, phi_f) pick the
    post-selected state, g_tau is the interaction pulse area. Construction
    applies the same range rules as AtomKet, so phases come out wrapped.
    """

    theta_i: float
    phi_i: float
    theta_f: float
    phi_f: float
    g_tau: float

    def __post_init__(self):
        initial = AtomKet(self.theta_i, self.phi_i)
        final = AtomKet(self.theta_f, self.phi_f)
        interaction = JcInteraction(self.g_tau)
        object.__setattr__(self, "theta_i", initial.theta)
        object.__setattr__(self, "phi_i", initial.phi)
        object.__setattr__(self, "theta_f", final.theta)
        object.__setattr__(self, "phi_f", final.phi)
        object.__setattr__(self, "g_tau", interaction.g_tau)

    @property
    def initial_atom(self) -> AtomKet:
        return AtomKet(self.theta_i, self.phi_i)

    @property
    def final_atom(self) -> AtomKet:
        return AtomKet(self.theta_f, self.phi_f)

    def as_array(self) -> np.ndarray:
        return np.array([self.theta_i, self.phi_i, self.theta_f, self.phi_f, self.g_tau])

    @classmethod
    def from_array(cls, x) -> "CmParams":
        ti, pi_, tf, pf, g = (float(v) for v in x)
        return cls(theta_i=ti, phi_i=pi_, theta_f=tf, phi_f=pf, g_tau=g)


@dataclass(frozen=True)
class CmOutcome:
    """Conditional field state together with the branch probability."""

    field_state: FieldDensityMatrix
    probability: float


def conditional_measure(w: CompositeDensityMatrix, final_atom: AtomKet) -> CmOutcome:
    """Post-select the atom in final_atom and renormalize the field remnant."""
    dim = w.n_max + 1
    amps = final_atom.amplitudes()
    blocks = w.entries.reshape(dim, 2, dim, 2)
    m = np.einsum("s,nsmt,t->nm", amps.conj(), blocks, amps)
    p = float(np.trace(m).real)
    if p < PROBABILITY_FLOOR:
        raise ZeroProbabilityError(
            f"post-selected branch has probability {p:.3e}; conditional state is undefined")
    return CmOutcome(FieldDensityMatrix(sanitize(m / p)), p)


def cm_step(field: FieldDensityMatrix, params: CmParams) -> CmOutcome:
    """Run one full conditional measurement on a bare field state."""
    composite = compose_with_atom(field, params.initial_atom)
    composite = evolve_composite(composite, JcInteraction(params.g_tau))
    return conditional_measure(composite, params.final_atom)
