import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_projector, random_state, random_unitary
from everett_preclusion import (
    DimensionMismatch,
    InvalidState,
    NotAProjector,
    NotUnitary,
    Projector,
    StateVector,
    UnitaryMatrix,
    heisenberg_weight,
    is_post_measurement_eigenstate,
    weight,
)
from everett_preclusion.errors import NonRealWeight
from everett_preclusion.weights import _expectation
from oracles import dense_expectation, matmul, matvec

KET1 = StateVector.basis(2, 0)
P1 = Projector.basis(2, [0])


def test_eigenstate_has_unit_weight():
    assert weight(KET1, P1) == 1.0


def test_superposition_weight_is_squared_amplitude():
    c1, c2 = np.sqrt(0.3), np.sqrt(0.7) * np.exp(0.4j)
    assert weight(StateVector([c1, c2]), P1) == pytest.approx(0.3, abs=1e-15)


def test_random_rank2_weight_matches_dense_oracle(rng):
    for _ in range(20):
        psi = random_state(rng, 4)
        mat = random_projector(rng, 4, 2)
        want = dense_expectation(list(psi), mat.tolist())
        assert abs(weight(StateVector(psi), Projector(mat)) - want.real) <= 1e-12
        assert abs(want.imag) <= 1e-12


def test_heisenberg_identity_evolution():
    psi = StateVector([np.sqrt(0.2), 1j * np.sqrt(0.8)])
    assert heisenberg_weight(psi, UnitaryMatrix.identity(2), P1) == weight(psi, P1)


def test_heisenberg_rotation_moves_weight_away():
    # U|1> = |2>; hand product: U^dag P U = |2><2| ... applied to |1> gives 0
    u = [[0, -1], [1, 0]]
    evolved = matmul(matmul([[0, 1], [-1, 0]], [[1, 0], [0, 0]]), u)
    assert evolved == [[0, 0], [0, 1]]
    assert heisenberg_weight(KET1, UnitaryMatrix(u), P1) == 0.0


def test_picture_equivalence_random(rng):
    for dim in (2, 3, 5):
        psi, u = StateVector(random_state(rng, dim)), UnitaryMatrix(random_unitary(rng, dim))
        p = Projector(random_projector(rng, dim, 1))
        assert abs(heisenberg_weight(psi, u, p) - weight(u.apply(psi), p)) <= 1e-12


def test_eigenstate_checks():
    assert is_post_measurement_eigenstate(KET1, P1)
    assert not is_post_measurement_eigenstate(StateVector([0.6, 0.8]), P1)
    s = StateVector(np.array([1, 1, 0]) / np.sqrt(2))
    p = Projector.basis(3, [0, 1])
    assert np.allclose(matvec(p.mat.tolist(), list(s.amps)), s.amps)
    assert is_post_measurement_eigenstate(s, p)


def test_complete_family_sums_to_one(rng):
    psi = StateVector(random_state(rng, 6))
    u = random_unitary(rng, 6)
    family = [Projector(np.outer(u[:, i], u[:, i].conj())) for i in range(6)]
    assert abs(sum(weight(psi, p) for p in family) - 1.0) <= 1e-12


@given(st.floats(0, 2 * np.pi), st.integers(0, 2**32 - 1))
def test_global_phase_invariance(phase, seed):
    r = np.random.default_rng(seed)
    psi = random_state(r, 3)
    p = Projector(random_projector(r, 3, 2))
    a = weight(StateVector(psi), p)
    b = weight(StateVector(np.exp(1j * phase) * psi), p)
    assert abs(a - b) <= 1e-12
    assert -1e-12 <= a <= 1 + 1e-12


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_picture_equivalence_property(dim, seed):
    r = np.random.default_rng(seed)
    psi = StateVector(random_state(r, dim))
    u = UnitaryMatrix(random_unitary(r, dim))
    p = Projector(random_projector(r, dim, int(r.integers(0, dim + 1))))
    assert abs(heisenberg_weight(psi, u, p) - weight(u.apply(psi), p)) <= 1e-12


def test_validation_errors():
    with pytest.raises(InvalidState):
        StateVector([1.0, 1.0])
    with pytest.raises(NotAProjector, match="idempotent"):
        Projector(np.diag([2.0, 0.0]))
    with pytest.raises(NotAProjector, match="Hermitian"):
        Projector([[1, 1], [0, 0]])
    with pytest.raises(NotUnitary):
        UnitaryMatrix([[1, 1], [0, 1]])
    with pytest.raises(DimensionMismatch):
        weight(KET1, Projector.basis(3, [0]))
    with pytest.raises(DimensionMismatch):
        heisenberg_weight(KET1, UnitaryMatrix.identity(3), P1)


def test_tolerance_is_configurable():
    almost = [1.0, 1e-5]  # norm off by 1e-10
    with pytest.raises(InvalidState):
        StateVector(almost)
    assert StateVector(almost, atol=1e-9).dim == 2


def test_large_imaginary_part_is_an_error():
    # a non-Hermitian matrix slipped past validation
    with pytest.raises(NonRealWeight):
        _expectation(np.array([1, 1j]) / np.sqrt(2), np.array([[0, 1], [0, 0]], dtype=complex), 1e-12)
