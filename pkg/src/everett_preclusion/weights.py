"""State vectors, event projectors, unitaries and the weight <psi|P|psi>.

Invariants (normalization, Hermiticity, idempotency, unitarity) are checked
once, at construction, so the weight functions themselves stay cheap.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidState, NonRealWeight, NotAProjector, NotUnitary

TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


def _square(mat, what):
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
        raise DimensionMismatch(f"{what} must be a non-empty square matrix, got shape {mat.shape}")
    return mat.shape[0]


@dataclass(frozen=True, eq=False)
class StateVector:
    amps: np.ndarray

    def __init__(self, amps, atol=TOL):
        amps = _frozen(amps)
        if amps.ndim != 1 or amps.size < 1:
            raise InvalidState(f"state must be a non-empty 1-d amplitude vector, got shape {amps.shape}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > atol:
            raise InvalidState(f"state is not normalized: sum |amp|^2 = {norm!r}")
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self):
        return self.amps.shape[0]

    @classmethod
    def basis(cls, dim, i):
        """Computational basis vector ``|i>`` (0-based)."""
        a = np.zeros(dim, dtype=np.complex128)
        a[i] = 1.0
        return cls(a)


@dataclass(frozen=True, eq=False)
class Projector:
    mat: np.ndarray

    def __init__(self, mat, atol=TOL):
        mat = _frozen(mat)
        _square(mat, "projector")
        if not np.allclose(mat, mat.conj().T, rtol=0.0, atol=atol):
            raise NotAProjector("projector is not Hermitian")
        if not np.allclose(mat @ mat, mat, rtol=0.0, atol=atol):
            raise NotAProjector("projector is not idempotent (P @ P != P)")
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self):
        return self.mat.shape[0]

    @classmethod
    def onto(cls, vectors):
        """Orthogonal projector onto the span of ``vectors`` (rows)."""
        v = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))
        q, _ = np.linalg.qr(v.T)
        return cls(q @ q.conj().T)

    @classmethod
    def basis(cls, dim, indices):
        """Projector onto the span of the listed computational basis states."""
        d = np.zeros(dim, dtype=np.complex128)
        d[list(indices)] = 1.0
        return cls(np.diag(d))


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    mat: np.ndarray

    def __init__(self, mat, atol=TOL):
        mat = _frozen(mat)
        dim = _square(mat, "evolution")
        if not np.allclose(mat.conj().T @ mat, np.eye(dim), rtol=0.0, atol=atol):
            raise NotUnitary("evolution is not unitary (U^dagger U != 1)")
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self):
        return self.mat.shape[0]

    @classmethod
    def identity(cls, dim):
        """Evolution at the reference time, U(t0) = 1."""
        return cls(np.eye(dim))

    def apply(self, state):
        _check_dims(state, self)
        return StateVector(self.mat @ state.amps)


def _check_dims(*objs):
    dims = {o.dim for o in objs}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")


def _expectation(amps, mat, atol):
    w = np.vdot(amps, mat @ amps)
    if abs(w.imag) > atol:
        raise NonRealWeight(f"weight has imaginary part {w.imag!r}")
    w = float(w.real)
    # not clamped: a value outside [0, 1] beyond roundoff means a broken input
    assert -atol <= w <= 1.0 + atol, w
    return w


def weight(state, event, atol=TOL):
    """Weight of ``event`` in ``state``: the real number <psi|P|psi>."""
    _check_dims(state, event)
    return _expectation(state.amps, event.mat, atol)


def heisenberg_weight(state0, evolution, event, atol=TOL):
    """Weight computed with the evolved operator U^dagger P U and the fixed state."""
    _check_dims(state0, evolution, event)
    u = evolution.mat
    return _expectation(state0.amps, u.conj().T @ event.mat @ u, atol)


def is_post_measurement_eigenstate(state, event, atol=TOL):
    """True iff ``P|psi> == |psi>``, i.e. ``state`` is in the event's range."""
    _check_dims(state, event)
    return bool(np.allclose(event.mat @ state.amps, state.amps, rtol=0.0, atol=atol))
