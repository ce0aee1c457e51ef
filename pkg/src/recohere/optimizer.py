"""Search for conditional measurements that pull a damped field back to its target.

The search space is the five-parameter box (theta_i, phi_i, theta_f, phi_f,
g_tau). Strategy: a deterministic coarse grid scan, then simplex refinement
started from the best grid cell, then a tie-aware final selection among grid
winner, refined point, and any injected candidates.

The scan exploits that preparation and post-selection are pure: the whole
step collapses to one field-space operator K = <psi_f| U |psi_i>, so the
conditional state is K w K+ / tr(K w K+). Batching K over every atom-parameter
combination turns the inner loop into a few dense matrix products per g_tau.
Final selection re-evaluates every finalist through the canonical step in
measurement.cm_step, so reported numbers never come from the fast path.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .damping import DampingSpec, apply_damping
from .errors import OptimizationFailedError, TruncationLeakError, ValidationError, ZeroProbabilityError
from .jaynes_cummings import GUARD_POPULATION_TOL, JcInteraction, jc_unitary
from .measurement import PROBABILITY_FLOOR, CmOutcome, CmParams, cm_step
from .metrics import CostSpec, cost, distance
from .states import FieldDensityMatrix, FieldKet, engine_n_max, pure_density

DEFAULT_GRID_COUNTS = (9, 8, 9, 8, 257)
DEFAULT_G_TAU_MAX = 16.0 * np.pi
COST_TIE_TOL = 1e-12
PROB_TIE_TOL = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs for one single-step search; identical configs give identical answers."""

    cost_spec: CostSpec
    g_tau_max: float = DEFAULT_G_TAU_MAX
    grid_counts: tuple = DEFAULT_GRID_COUNTS
    refine_iters: int = 200
    seed: int = 0
    random_restarts: int = 0

    def __post_init__(self):
        if not float(self.g_tau_max) > 0.0:
            raise ValidationError(f"g_tau_max must be positive, got {self.g_tau_max!r}")
        counts = tuple(int(c) for c in self.grid_counts)
        if len(counts) != 5 or any(c < 2 for c in counts):
            raise ValidationError(f"grid_counts needs 5 entries of at least 2, got {self.grid_counts!r}")
        if self.refine_iters < 0 or self.random_restarts < 0:
            raise ValidationError("refine_iters and random_restarts must be nonnegative")
        object.__setattr__(self, "g_tau_max", float(self.g_tau_max))
        object.__setattr__(self, "grid_counts", counts)


@dataclass(frozen=True)
class RecoveryRecord:
    """One row of a recovery sequence; step 0 is the bare damped state."""

    step_index: int
    params: Optional[CmParams]
    distance_after: float
    step_probability: float
    sequence_probability: float
    cost: Optional[float]


@dataclass(frozen=True)
class SaturationSummary:
    """Where a sequence stopped paying for itself."""

    saturation_step: int
    first_step_reduction: Optional[float]
    final_distance: float
    final_sequence_probability: float
    threshold: float


def grid_axes(config: OptimizerConfig):
    """The five scan axes. Phases use a half-open [0, 2*pi) spacing so the
    endpoint never duplicates phi = 0; the other axes include both ends."""
    n_ti, n_pi, n_tf, n_pf, n_g = config.grid_counts
    half_pi = 0.5 * np.pi
    return (
        np.linspace(0.0, half_pi, n_ti),
        np.linspace(0.0, 2.0 * np.pi, n_pi, endpoint=False),
        np.linspace(0.0, half_pi, n_tf),
        np.linspace(0.0, 2.0 * np.pi, n_pf, endpoint=False),
        np.linspace(0.0, config.g_tau_max, n_g),
    )


def _atom_table(thetas: np.ndarray, phis: np.ndarray):
    """Amplitude rows for every (theta, phi) combination, theta-major."""
    th = np.repeat(thetas, phis.size)
    ph = np.tile(phis, thetas.size)
    amps = np.stack([np.cos(th).astype(complex), np.sin(th) * np.exp(1j * ph)], axis=1)
    return amps, th, ph


def _scan_grid(field: FieldDensityMatrix, target: FieldDensityMatrix, config: OptimizerConfig):
    w = field.entries
    t = target.entries
    n_max = field.n_max
    top = w[n_max, n_max].real
    if top > GUARD_POPULATION_TOL:
        raise TruncationLeakError(
            f"population {top:.3e} at the top Fock level {n_max}; widen the truncation before optimizing")
    th_i, ph_i, th_f, ph_f, g_taus = grid_axes(config)
    amps_i, ti_flat, pi_flat = _atom_table(th_i, ph_i)
    amps_f, tf_flat, pf_flat = _atom_table(th_f, ph_f)
    r = config.cost_spec.r
    dim = n_max + 1
    n_f, n_i = amps_f.shape[0], amps_i.shape[0]
    costs = np.empty((g_taus.size, n_f, n_i))
    probs = np.empty_like(costs)
    for gi, g in enumerate(g_taus):
        u4 = jc_unitary(JcInteraction(float(g)), n_max).reshape(dim, 2, dim, 2)
        k = np.einsum("fs,nsmt,it->finm", amps_f.conj(), u4, amps_i).reshape(-1, dim, dim)
        m = k @ w @ k.conj().transpose(0, 2, 1)
        p = np.einsum("knn->k", m).real
        usable = p >= PROBABILITY_FLOOR
        safe_p = np.where(usable, p, 1.0)
        diff = m / safe_p[:, None, None] - t
        d = np.sqrt(np.einsum("kij,kij->k", diff, diff.conj()).real)
        c = d.copy() if r == 0.0 else d / safe_p**r
        c[~usable] = np.inf
        costs[gi] = c.reshape(n_f, n_i)
        probs[gi] = p.reshape(n_f, n_i)
    tables = (ti_flat, pi_flat, tf_flat, pf_flat, g_taus)
    return costs, probs, tables


def _pick_grid_minimum(costs, probs, tables) -> CmParams:
    """Tie-break ladder: lowest cost, then highest probability, then smallest
    g_tau, then lexicographically smallest atom parameters."""
    ti_flat, pi_flat, tf_flat, pf_flat, g_taus = tables
    best = costs.min()
    if not np.isfinite(best):
        raise OptimizationFailedError("every grid candidate fell below the probability floor")
    mask = costs <= best + COST_TIE_TOL
    masked_p = np.where(mask, probs, -np.inf)
    p_best = masked_p.max()
    mask &= masked_p >= p_best - PROB_TIE_TOL
    choices = [
        (g_taus[gi], ti_flat[ii], pi_flat[ii], tf_flat[fi], pf_flat[fi])
        for gi, fi, ii in np.argwhere(mask)
    ]
    g, ti, pi_, tf, pf = min(choices)
    return CmParams(theta_i=ti, phi_i=pi_, theta_f=tf, phi_f=pf, g_tau=g)


def evaluate_candidate(field, target, params: CmParams, cost_spec: CostSpec):
    """Canonical scoring of one candidate: (outcome or None, distance, cost)."""
    try:
        outcome = cm_step(field, params)
    except ZeroProbabilityError:
        return None, np.inf, np.inf
    d = distance(outcome.field_state, target)
    return outcome, d, cost(d, outcome.probability, cost_spec)


def _params_from_vector(x, g_tau_max: float) -> CmParams:
    half_pi = 0.5 * np.pi
    return CmParams(
        theta_i=float(np.clip(x[0], 0.0, half_pi)),
        phi_i=float(x[1]),
        theta_f=float(np.clip(x[2], 0.0, half_pi)),
        phi_f=float(x[3]),
        g_tau=float(np.clip(x[4], 0.0, g_tau_max)),
    )


def _refine(field, target, start: np.ndarray, config: OptimizerConfig) -> CmParams:
    """Simplex descent from a start vector, clipped to the search box."""
    half_pi = 0.5 * np.pi
    n_ti, n_pi, n_tf, n_pf, n_g = config.grid_counts
    steps = np.array([
        0.5 * half_pi / (n_ti - 1),
        np.pi / n_pi,
        0.5 * half_pi / (n_tf - 1),
        np.pi / n_pf,
        0.5 * config.g_tau_max / (n_g - 1),
    ])
    lows = np.array([0.0, -np.inf, 0.0, -np.inf, 0.0])
    highs = np.array([half_pi, np.inf, half_pi, np.inf, config.g_tau_max])
    x0 = np.clip(np.asarray(start, dtype=float), lows, highs)
    simplex = [x0]
    for j in range(5):
        vertex = x0.copy()
        vertex[j] += steps[j] if x0[j] + steps[j] <= highs[j] else -steps[j]
        simplex.append(vertex)

    def objective(x):
        return evaluate_candidate(field, target, _params_from_vector(x, config.g_tau_max),
                                  config.cost_spec)[2]

    result = minimize(
        objective, x0, method="Nelder-Mead",
        bounds=list(zip(lows, highs)),
        options={
            "maxiter": config.refine_iters,
            "initial_simplex": np.array(simplex),
            "xatol": 1e-10,
            "fatol": 1e-12,
            "disp": False,
        },
    )
    return _params_from_vector(result.x, config.g_tau_max)


def _beats(challenger, incumbent) -> bool:
    """(cost, probability, params) ladder used for the final selection."""
    c_cost, c_prob, c_params = challenger
    i_cost, i_prob, i_params = incumbent
    if c_cost < i_cost - COST_TIE_TOL:
        return True
    if c_cost > i_cost + COST_TIE_TOL:
        return False
    if c_prob > i_prob + PROB_TIE_TOL:
        return True
    if c_prob < i_prob - PROB_TIE_TOL:
        return False
    c_key = (c_params.g_tau, c_params.theta_i, c_params.phi_i, c_params.theta_f, c_params.phi_f)
    i_key = (i_params.g_tau, i_params.theta_i, i_params.phi_i, i_params.theta_f, i_params.phi_f)
    return c_key < i_key


def optimize_single_cm(
    field: FieldDensityMatrix,
    target: FieldDensityMatrix,
    config: OptimizerConfig,
    extra_candidates: Sequence[CmParams] = (),
):
    """Best single conditional measurement for pulling field toward target.

    Returns (params, outcome, cost). Injected extra_candidates enter the final
    selection on equal footing with the grid winner and the refined point, so
    the returned cost never exceeds the cost of any injected candidate.
    """
    if field.n_max != target.n_max:
        raise ValidationError(
            f"field and target truncations differ: {field.n_max} vs {target.n_max}")
    costs, probs, tables = _scan_grid(field, target, config)
    grid_best = _pick_grid_minimum(costs, probs, tables)
    finalists = [grid_best]
    finalists.extend(extra_candidates)
    if config.refine_iters > 0:
        finalists.append(_refine(field, target, grid_best.as_array(), config))
    if config.random_restarts > 0:
        rng = np.random.default_rng(config.seed)
        half_pi = 0.5 * np.pi
        for _ in range(config.random_restarts):
            x0 = rng.uniform(
                [0.0, 0.0, 0.0, 0.0, 0.0],
                [half_pi, 2.0 * np.pi, half_pi, 2.0 * np.pi, config.g_tau_max])
            finalists.append(_refine(field, target, x0, config))
    best = None
    for params in finalists:
        outcome, _, c = evaluate_candidate(field, target, params, config.cost_spec)
        prob = outcome.probability if outcome is not None else -np.inf
        if best is None or _beats((c, prob, params), (best[0], best[1], best[2])):
            best = (c, prob, params, outcome)
    if best[3] is None or not np.isfinite(best[0]):
        raise OptimizationFailedError("no candidate measurement had usable probability")
    return best[2], best[3], best[0]


def run_sequence(
    initial_target: FieldKet,
    damping: DampingSpec,
    config: OptimizerConfig,
    max_steps: int,
    extra_candidates: Sequence[CmParams] = (),
    inter_cm_gamma_t: float = 0.0,
):
    """Damp the target once, then apply optimized measurements until they stop helping.

    Every step aims back at the original pure state. A step is accepted only
    if it strictly reduces the distance to the target; the first non-improving
    step ends the sequence. Records start with the bare damped state (step 0)
    and sequence_probability telescopes across accepted steps. A nonzero
    inter_cm_gamma_t inserts extra damping exposure before every step after
    the first, for runs where the field keeps decaying between atoms.
    """
    if max_steps < 0:
        raise ValidationError(f"max_steps must be nonnegative, got {max_steps!r}")
    if inter_cm_gamma_t < 0.0:
        raise ValidationError(f"inter_cm_gamma_t must be nonnegative, got {inter_cm_gamma_t!r}")
    ket = initial_target.padded(engine_n_max(initial_target.top_occupied(), max_steps))
    target = pure_density(ket)
    current = apply_damping(target, damping)
    records = [RecoveryRecord(
        step_index=0,
        params=None,
        distance_after=distance(current, target),
        step_probability=1.0,
        sequence_probability=1.0,
        cost=None,
    )]
    for step in range(1, max_steps + 1):
        if step > 1 and inter_cm_gamma_t > 0.0:
            current = apply_damping(current, DampingSpec(inter_cm_gamma_t))
        params, outcome, step_cost = optimize_single_cm(current, target, config, extra_candidates)
        d_next = distance(outcome.field_state, target)
        if d_next >= records[-1].distance_after:
            break
        records.append(RecoveryRecord(
            step_index=step,
            params=params,
            distance_after=d_next,
            step_probability=outcome.probability,
            sequence_probability=records[-1].sequence_probability * outcome.probability,
            cost=step_cost,
        ))
        current = outcome.field_state
    return records


def saturation_report(records: Sequence[RecoveryRecord], threshold: float = 0.05) -> SaturationSummary:
    """First step whose relative distance improvement drops below threshold.

    saturation_step = 0 means no measurement was accepted at all; a value of
    len(records) means every accepted step still cleared the threshold.
    """
    if not records:
        raise ValidationError("saturation_report needs at least the step-0 record")
    if not 0.0 < threshold < 1.0:
        raise ValidationError(f"threshold must sit strictly between 0 and 1, got {threshold!r}")
    if len(records) == 1:
        saturation = 0
    else:
        saturation = len(records)
        for k in range(1, len(records)):
            before = records[k - 1].distance_after
            after = records[k].distance_after
            relative = (before - after) / before if before > 0.0 else 0.0
            if relative < threshold:
                saturation = k
                break
    first = None
    if len(records) > 1 and records[1].distance_after > 0.0:
        first = records[0].distance_after / records[1].distance_after
    return SaturationSummary(
        saturation_step=saturation,
        first_step_reduction=first,
        final_distance=records[-1].distance_after,
        final_sequence_probability=records[-1].sequence_probability,
        threshold=threshold,
    )
