"""Containers, composition, and partial trace on the truncated Fock basis."""
import numpy as np
import pytest

from recohere import (
    AtomKet,
    CompositeDensityMatrix,
    FieldDensityMatrix,
    FieldKet,
    ValidationError,
    compose_with_atom,
    engine_n_max,
    partial_trace_atom,
    pure_density,
    purity,
)
from recohere.states import sanitize

from helpers import BENCH_PURITY_DAMPED, benchmark_states, random_composite, random_density, random_ket


def test_vacuum_projector():
    w = pure_density(FieldKet.fock(0, 3))
    expected = np.zeros((4, 4))
    expected[0, 0] = 1.0
    assert np.array_equal(w.entries, expected)


def test_benchmark_superposition_density():
    ket = FieldKet(np.array([1.0, np.exp(1j * np.pi / 3)]) / np.sqrt(2))
    w = pure_density(ket)
    assert abs(w.entries[0, 0] - 0.5) < 1e-15
    assert abs(w.entries[1, 1] - 0.5) < 1e-15
    # upper off-diagonal is c_0 conj(c_1)
    assert abs(w.entries[0, 1] - 0.5 * np.exp(-1j * np.pi / 3)) < 1e-15


def test_equal_superposition_density_is_flat():
    w = pure_density(FieldKet(np.array([1.0, 1.0]) / np.sqrt(2)))
    assert np.max(np.abs(w.entries - 0.5)) < 1e-15


def test_ket_requires_normalization():
    with pytest.raises(ValidationError):
        FieldKet(np.array([1.0, 1.0]))
    with pytest.raises(ValidationError):
        FieldKet(np.array([]))


def test_ket_padding_and_top_occupied():
    ket = FieldKet(np.array([1.0, 1.0]) / np.sqrt(2)).padded(5)
    assert ket.n_max == 5
    assert ket.top_occupied() == 1
    assert np.max(np.abs(ket.coeffs[2:])) == 0.0
    # padding never shrinks
    assert ket.padded(2).n_max == 5


def test_atom_ket_parametrization():
    atom = AtomKet(np.pi / 3, 7.0 * np.pi)
    assert abs(atom.alpha - 0.5) < 1e-15
    assert abs(atom.phi - np.pi) < 1e-12
    assert abs(atom.alpha**2 + abs(atom.beta) ** 2 - 1.0) < 1e-15
    with pytest.raises(ValidationError):
        AtomKet(np.pi / 2 + 1e-6)
    with pytest.raises(ValidationError):
        AtomKet(-0.1)


def test_atom_orthogonal_complement():
    rng = np.random.default_rng(7)
    for _ in range(25):
        atom = AtomKet(rng.uniform(0, np.pi / 2), rng.uniform(0, 2 * np.pi))
        other = atom.orthogonal()
        overlap = np.vdot(atom.amplitudes(), other.amplitudes())
        assert abs(overlap) < 1e-14


def test_density_matrix_validation():
    with pytest.raises(ValidationError):
        FieldDensityMatrix(np.array([[0.5, 0.5j], [0.5j, 0.5]]))  # not Hermitian
    with pytest.raises(ValidationError):
        FieldDensityMatrix(np.eye(3))  # trace 3
    with pytest.raises(ValidationError):
        FieldDensityMatrix(np.ones((2, 3)))
    with pytest.raises(ValidationError):
        CompositeDensityMatrix(np.eye(5) / 5.0)  # odd dimension


def test_entries_are_read_only():
    w = pure_density(FieldKet.fock(0, 2))
    with pytest.raises(ValueError):
        w.entries[0, 0] = 2.0


def test_pure_density_is_rank_one():
    rng = np.random.default_rng(11)
    for _ in range(10):
        w = pure_density(random_ket(rng, 6))
        eig = np.linalg.eigvalsh(w.entries)
        assert eig[-1] > 1.0 - 1e-12
        assert np.max(np.abs(eig[:-1])) < 1e-12


def test_compose_vacuum_with_excited_atom():
    w = compose_with_atom(pure_density(FieldKet.fock(0, 1)), AtomKet(0.0))
    expected = np.zeros((4, 4))
    expected[0, 0] = 1.0
    assert np.max(np.abs(w.entries - expected)) < 1e-15


def test_compose_ground_atom_has_no_excited_components():
    target, _ = benchmark_states()
    w = compose_with_atom(target, AtomKet(np.pi / 2, 0.3))
    # s = 0 rows/columns (even indices) must vanish
    assert np.max(np.abs(w.entries[0::2, :])) < 1e-15
    assert np.max(np.abs(w.entries[:, 0::2])) < 1e-15


def test_compose_matches_direct_tensor_product():
    # independent oracle: literal kron of explicit matrices
    field = pure_density(FieldKet.fock(1, 2))
    atom = AtomKet(np.pi / 4, 0.0)
    w = compose_with_atom(field, atom)
    f = np.zeros((3, 3))
    f[1, 1] = 1.0
    a = np.full((2, 2), 0.5)
    assert np.max(np.abs(w.entries - np.kron(f, a))) < 1e-15


def test_compose_then_trace_roundtrip():
    rng = np.random.default_rng(3)
    for _ in range(20):
        field = random_density(rng, int(rng.integers(2, 7)))
        atom = AtomKet(rng.uniform(0, np.pi / 2), rng.uniform(0, 2 * np.pi))
        back = partial_trace_atom(compose_with_atom(field, atom))
        assert np.max(np.abs(back.entries - field.entries)) < 1e-14


def test_partial_trace_of_entangled_composite():
    # (|0,a> + |1,b>)/sqrt(2) has a maximally mixed field marginal
    vec = np.zeros(4, dtype=complex)
    vec[0] = vec[3] = 1.0 / np.sqrt(2)
    w = CompositeDensityMatrix(np.outer(vec, vec.conj()))
    field = partial_trace_atom(w)
    assert np.max(np.abs(field.entries - np.diag([0.5, 0.5]))) < 1e-15


def test_partial_trace_preserves_trace():
    rng = np.random.default_rng(5)
    for _ in range(10):
        w = random_composite(rng, int(rng.integers(1, 5)))
        field = partial_trace_atom(w)
        assert abs(np.trace(field.entries) - 1.0) < 1e-12


def test_purity_values():
    target, damped = benchmark_states()
    assert abs(purity(target) - 1.0) < 1e-12
    assert abs(purity(FieldDensityMatrix(np.diag([0.5, 0.5]))) - 0.5) < 1e-15
    assert abs(purity(damped) - BENCH_PURITY_DAMPED) < 1e-9
    assert 0.5 < purity(damped) < 1.0


def test_purity_matches_eigenvalue_oracle():
    rng = np.random.default_rng(13)
    for _ in range(10):
        w = random_density(rng, 5)
        eig = np.linalg.eigvalsh(w.entries)
        assert abs(purity(w) - float(np.sum(eig**2))) < 1e-12


def test_constructed_states_are_positive():
    rng = np.random.default_rng(17)
    for _ in range(10):
        assert random_density(rng, 6).min_eigenvalue() > -1e-12
        assert random_composite(rng, 3).min_eigenvalue() > -1e-12


def test_sanitize_restores_invariants():
    w = pure_density(FieldKet.fock(1, 2)).entries * 1.5
    drifted = np.array(w)
    drifted[0, 1] = 1e-13
    fixed = sanitize(drifted)
    assert abs(np.trace(fixed) - 1.0) < 1e-15
    assert np.max(np.abs(fixed - fixed.conj().T)) == 0.0


def test_engine_truncation_policy():
    assert engine_n_max(1, 4) == 7
    assert engine_n_max(0, 0) == 2
    assert engine_n_max(3, 2, guard_levels=3) == 8
    with pytest.raises(ValidationError):
        engine_n_max(-1, 0)
    with pytest.raises(ValidationError):
        engine_n_max(0, 0, guard_levels=0)
