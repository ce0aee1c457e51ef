"""Distance, cost, filtering overlap, and the phase-space Q surface."""
import math

import numpy as np
import pytest

from recohere import (
    CostSpec,
    FieldDensityMatrix,
    FieldKet,
    InternalConsistencyError,
    QGridSpec,
    ValidationError,
    cost,
    distance,
    error_matrix,
    filtering_probability,
    pure_density,
    q_function,
)

from helpers import BENCH_D0, BENCH_FILTERING, benchmark_states, random_density, random_ket


def test_distance_basics():
    target, damped = benchmark_states()
    assert distance(target, target) == 0.0
    a = pure_density(FieldKet.fock(0, 1))
    b = pure_density(FieldKet.fock(1, 1))
    assert abs(distance(a, b) - np.sqrt(2.0)) < 1e-15
    assert abs(distance(damped, target) - BENCH_D0) < 1e-9
    with pytest.raises(ValidationError):
        distance(a, target)


def test_distance_is_a_metric():
    rng = np.random.default_rng(1)
    for _ in range(15):
        x = random_density(rng, 5)
        y = random_density(rng, 5)
        z = random_density(rng, 5)
        assert abs(distance(x, y) - distance(y, x)) < 1e-13
        assert distance(x, z) <= distance(x, y) + distance(y, z) + 1e-13
        assert distance(x, y) >= 0.0


def test_cost_values():
    assert cost(0.1, 0.5, CostSpec(2.0)) == pytest.approx(0.4)
    assert cost(0.1, 0.5, CostSpec(1.0)) == pytest.approx(0.2)
    assert cost(0.3, 1.0, CostSpec(2.0)) == pytest.approx(0.3)
    # r = 0 ignores probability entirely
    assert cost(0.3, 1e-30, CostSpec(0.0)) == pytest.approx(0.3)
    # below the floor the sentinel is infinite
    assert cost(0.3, 1e-30, CostSpec(2.0)) == math.inf
    with pytest.raises(ValidationError):
        cost(-0.1, 0.5, CostSpec(1.0))
    with pytest.raises(ValidationError):
        CostSpec(-1.0)


def test_cost_monotonicity():
    spec = CostSpec(2.0)
    assert cost(0.2, 0.5, spec) < cost(0.3, 0.5, spec)
    assert cost(0.2, 0.6, spec) < cost(0.2, 0.5, spec)


def test_filtering_probability_values():
    target, damped = benchmark_states()
    assert abs(filtering_probability(target, target) - 1.0) < 1e-12
    a = pure_density(FieldKet.fock(0, 1))
    b = pure_density(FieldKet.fock(1, 1))
    assert abs(filtering_probability(a, b)) < 1e-15
    assert abs(filtering_probability(target, damped) - BENCH_FILTERING) < 1e-9
    assert abs(filtering_probability(target, damped) - filtering_probability(damped, target)) < 1e-13


def test_filtering_probability_bounds():
    rng = np.random.default_rng(2)
    for _ in range(10):
        value = filtering_probability(random_density(rng, 4), random_density(rng, 4))
        assert -1e-12 < value < 1.0 + 1e-12


def test_error_matrix_properties():
    target, damped = benchmark_states()
    err = error_matrix(damped, target)
    assert abs(np.trace(err)) < 1e-12
    assert np.max(np.abs(err - err.conj().T)) < 1e-12
    assert np.max(np.abs(error_matrix(target, target))) == 0.0


def test_qgrid_spec_validation():
    with pytest.raises(ValidationError):
        QGridSpec(re_points=1)
    with pytest.raises(ValidationError):
        QGridSpec(re_min=1.0, re_max=-1.0)
    spec = QGridSpec(re_min=-2, re_max=2, im_min=-1, im_max=1, re_points=5, im_points=3)
    assert np.array_equal(spec.re_axis(), [-2, -1, 0, 1, 2])
    assert np.array_equal(spec.im_axis(), [-1, 0, 1])
    assert spec.cell_area == pytest.approx(1.0)


def test_vacuum_q_surface():
    vacuum = pure_density(FieldKet.fock(0, 3))
    grid = q_function(vacuum)
    center = grid.values[60, 60]  # beta = 0 on the default 121x121 grid
    assert center == 1.0
    # closed form exp(-|beta|^2) everywhere
    re, im = np.meshgrid(grid.re_axis, grid.im_axis)
    assert np.max(np.abs(grid.values - np.exp(-(re**2 + im**2)))) < 1e-12


def test_one_photon_q_surface():
    one = pure_density(FieldKet.fock(1, 3))
    grid = q_function(one)
    re, im = np.meshgrid(grid.re_axis, grid.im_axis)
    mod_sq = re**2 + im**2
    assert np.max(np.abs(grid.values - mod_sq * np.exp(-mod_sq))) < 1e-12


def test_q_orientation_distinguishes_axes():
    # (|0> + |1>)/sqrt(2): Q(beta) = exp(-|beta|^2) |1 + conj(beta)|^2 / 2
    w = pure_density(FieldKet(np.array([1.0, 1.0]) / np.sqrt(2)).padded(3))
    spec = QGridSpec(re_min=-1, re_max=1, im_min=-1, im_max=1, re_points=3, im_points=3)
    grid = q_function(w, spec)
    assert grid.values[1, 2] == pytest.approx(2.0 * np.exp(-1.0), abs=1e-12)  # beta = +1
    assert grid.values[1, 0] == pytest.approx(0.0, abs=1e-12)                 # beta = -1
    assert grid.values[2, 1] == pytest.approx(np.exp(-1.0), abs=1e-12)        # beta = +i


def test_q_bounded_for_states():
    rng = np.random.default_rng(3)
    spec = QGridSpec(re_points=21, im_points=21)
    for _ in range(5):
        grid = q_function(random_density(rng, 5), spec)
        assert grid.values.min() > -1e-12
        assert grid.values.max() < 1.0 + 1e-12


def test_error_surface_integrates_to_zero():
    target, damped = benchmark_states()
    grid = q_function(error_matrix(damped, target))
    total = float(grid.values.sum()) * QGridSpec().cell_area
    assert abs(total) < 0.01


def test_non_hermitian_input_raises():
    bad = np.zeros((3, 3), dtype=complex)
    bad[0, 1] = 1.0
    with pytest.raises(InternalConsistencyError):
        q_function(bad)


def test_q_accepts_raw_matrices():
    ket = random_ket(np.random.default_rng(4), 4)
    from_wrapped = q_function(pure_density(ket), QGridSpec(re_points=11, im_points=11))
    from_raw = q_function(np.outer(ket.coeffs, ket.coeffs.conj()),
                          QGridSpec(re_points=11, im_points=11))
    assert np.array_equal(from_wrapped.values, from_raw.values)
