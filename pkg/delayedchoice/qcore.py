"""
Dense complex linear algebra over small tensor-product spaces

States, operators, projectors and projective families, plus lifting of
single-subsystem operators to the joint space. Tensor layout is row-major
with the last subsystem index varying fastest.
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

TOLERANCE = 1e-12
BASIS_TOLERANCE = 1e-10


class DimensionError(ValueError):
    """Dimensions, lengths or slot indices do not fit together"""


class NormalizationError(ValueError):
    """Amplitudes cannot be normalized"""


class OperatorError(ValueError):
    """An operator violates the invariants of its kind"""


def _as_dims(dims: Iterable[int]) -> Tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimensionError(f"dims must be a nonempty sequence of positive integers, got {dims}")
    return dims


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.complex128)
    array.setflags(write=False)
    return array


def _max_norm(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitude vector over a tensor product of finite subsystems"""

    dims: Tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dims", _as_dims(self.dims))
        object.__setattr__(self, "amps", _frozen(self.amps).reshape(-1))
        if self.amps.size != self.dim:
            raise DimensionError(
                f"{self.amps.size} amplitudes do not match dims {self.dims} (expected {self.dim})"
            )
        if not np.all(np.isfinite(self.amps)):
            raise NormalizationError("amplitudes must be finite")
        norm = float(np.vdot(self.amps, self.amps).real)
        if abs(norm - 1.0) > TOLERANCE:
            raise NormalizationError(f"state is not normalized (norm^2 = {norm!r})")

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per subsystem"""
        return self.amps.reshape(self.dims)

    def __getitem__(self, index) -> complex:
        if isinstance(index, tuple):
            return complex(self.tensor()[index])
        return complex(self.amps[index])


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """Square complex matrix acting on a tensor-product space"""

    dims: Tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dims", _as_dims(self.dims))
        object.__setattr__(self, "matrix", _frozen(self.matrix))
        side = int(np.prod(self.dims))
        if self.matrix.shape != (side, side):
            raise DimensionError(
                f"operator of shape {self.matrix.shape} does not act on dims {self.dims}"
            )
        if not np.all(np.isfinite(self.matrix)):
            raise OperatorError("operator entries must be finite")
        self._validate()

    def _validate(self):
        pass

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def adjoint(self) -> np.ndarray:
        return self.matrix.conj().T


class Projector(LinearOperator):
    """Hermitian idempotent operator"""

    def _validate(self):
        if _max_norm(self.matrix - self.adjoint) > TOLERANCE:
            raise OperatorError("projector must be Hermitian")
        if _max_norm(self.matrix @ self.matrix - self.matrix) > TOLERANCE:
            raise OperatorError("projector must be idempotent")


class Unitary(LinearOperator):
    """Operator with U U^dagger = identity"""

    def _validate(self):
        if _max_norm(self.matrix @ self.adjoint - np.eye(self.dim)) > TOLERANCE:
            raise OperatorError("operator is not unitary")


@dataclass(frozen=True, eq=False)
class ProjectiveFamily:
    """Complete set of pairwise orthogonal projectors; one per outcome"""

    projectors: Tuple[Projector, ...]

    def __post_init__(self):
        projectors = tuple(self.projectors)
        object.__setattr__(self, "projectors", projectors)
        if not projectors:
            raise OperatorError("projective family must not be empty")
        dims = projectors[0].dims
        if any(p.dims != dims for p in projectors):
            raise DimensionError("all projectors of a family must share dims")
        for i, p in enumerate(projectors):
            for q in projectors[i + 1:]:
                if _max_norm(p.matrix @ q.matrix) > TOLERANCE:
                    raise OperatorError("family projectors must be pairwise orthogonal")
        total = sum(p.matrix for p in projectors)
        if _max_norm(total - np.eye(projectors[0].dim)) > TOLERANCE:
            raise OperatorError("family projectors must sum to the identity")

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.projectors[0].dims

    @property
    def dim(self) -> int:
        return self.projectors[0].dim

    def __len__(self) -> int:
        return len(self.projectors)

    def __getitem__(self, outcome: int) -> Projector:
        return self.projectors[outcome]

    def __iter__(self):
        return iter(self.projectors)


def make_state(dims: Sequence[int], raw_amps) -> StateVector:
    """Build a state from raw amplitudes, normalizing them"""
    dims = _as_dims(dims)
    raw = np.asarray(raw_amps, dtype=np.complex128).reshape(-1)
    expected = int(np.prod(dims))
    if raw.size != expected:
        raise DimensionError(f"{raw.size} amplitudes do not match dims {dims} (expected {expected})")
    if not np.all(np.isfinite(raw)):
        raise NormalizationError("amplitudes must be finite")
    norm = float(np.linalg.norm(raw))
    if norm == 0.0:
        raise NormalizationError("unnormalizable: zero vector")
    if abs(norm - 1.0) > TOLERANCE:
        logger.debug("Rescaled %d amplitudes by 1/%.6g", raw.size, norm)
    return StateVector(dims, raw / norm)


def tensor_state(a: StateVector, b: StateVector) -> StateVector:
    """Product state a (x) b; b's index varies fastest"""
    amps = np.kron(a.amps, b.amps)
    # renormalize away the rounding in |a|^2 |b|^2
    return StateVector(a.dims + b.dims, amps / np.linalg.norm(amps))


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugating a"""
    if a.dims != b.dims:
        raise DimensionError(f"dims {a.dims} and {b.dims} differ")
    return complex(np.vdot(a.amps, b.amps))


def identity(dims: Sequence[int]) -> Projector:
    """Identity on the whole tensor space"""
    dims = _as_dims(dims)
    return Projector(dims, np.eye(int(np.prod(dims))))


def lift(op: LinearOperator, dims: Sequence[int], slot: int) -> LinearOperator:
    """Extend a single-subsystem operator to the joint space by tensoring with identities.

    The result has the same kind as ``op``: lifting a Projector yields a Projector,
    lifting a Unitary yields a Unitary.
    """
    dims = _as_dims(dims)
    if not 0 <= slot < len(dims):
        raise DimensionError(f"slot {slot} out of range for dims {dims}")
    if op.dim != dims[slot]:
        raise DimensionError(
            f"operator of dimension {op.dim} does not fit slot {slot} of dims {dims}"
        )
    before = int(np.prod(dims[:slot], dtype=int))
    after = int(np.prod(dims[slot + 1:], dtype=int))
    matrix = reduce(np.kron, (np.eye(before), op.matrix, np.eye(after)))
    return type(op)(dims, matrix)


def apply(op: LinearOperator, s: StateVector) -> np.ndarray:
    """Matrix-vector product; the result is not renormalized"""
    if op.dims != s.dims:
        raise DimensionError(f"operator dims {op.dims} do not match state dims {s.dims}")
    return op.matrix @ s.amps


def projector_onto(vector) -> Projector:
    """|v><v| for a normalized vector v"""
    v = np.asarray(vector, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > BASIS_TOLERANCE:
        raise NormalizationError("projector_onto expects a normalized vector")
    return Projector((v.size,), np.outer(v, v.conj()))


def family_from_basis(vectors) -> ProjectiveFamily:
    """One rank-1 projector per vector of an orthonormal basis"""
    basis = np.array([np.asarray(v, dtype=np.complex128).reshape(-1) for v in vectors])
    if basis.ndim != 2 or basis.shape[0] == 0:
        raise DimensionError("basis must be a nonempty list of equal-length vectors")
    count, dim = basis.shape
    if count != dim:
        raise OperatorError(f"{count} vectors cannot form a basis of dimension {dim}")
    gram = basis.conj() @ basis.T
    if _max_norm(gram - np.eye(dim)) > BASIS_TOLERANCE:
        raise OperatorError("basis vectors are not orthonormal")
    return ProjectiveFamily(tuple(projector_onto(v) for v in basis))


def computational_family(dim: int) -> ProjectiveFamily:
    """Projectors onto |0>, ..., |dim - 1>"""
    return family_from_basis(np.eye(dim))


def spin_family(angle: float) -> ProjectiveFamily:
    """Spin-1/2 measurement along ``angle`` in the x-z plane (0 = z, pi/2 = x).

    Outcome 0 is "up" along the axis, outcome 1 is "down".
    """
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return family_from_basis([[c, s], [-s, c]])


def singlet_state() -> StateVector:
    """(|up,down> - |down,up>) / sqrt(2)"""
    return make_state((2, 2), [0, 1, -1, 0])
