"""
Dense-matrix foundations and tolerance-aware subspace arithmetic.

Every subspace is carried by an orthonormal basis; rank decisions use a
relative singular-value threshold and every yes/no answer is a
`CheckResult` carrying the decisive quantity and its distance from the
tolerance it was compared against.
"""
import dataclasses
import enum
import math
from typing import Iterable, Optional, Tuple

import gin
import numpy as np
import scipy.linalg as spla
from absl import logging

from .core import DimensionMismatchError, PreconditionError, guard_band


@gin.constants_from_enum
class FieldTag(enum.Enum):
    REAL = 'real'
    COMPLEX = 'complex'

    @property
    def dtype(self):
        return np.float64 if self is FieldTag.REAL else np.complex128

    @classmethod
    def of(cls, *arrays) -> 'FieldTag':
        if any(np.iscomplexobj(a) for a in arrays):
            return cls.COMPLEX
        return cls.REAL


@gin.configurable
@dataclasses.dataclass(frozen=True)
class TolerancePolicy:
    rank_rel_eps: float = 1e-10
    subspace_eq_tol: float = 1e-8
    pairing_tol: float = 1e-8

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not value > 0:
                raise PreconditionError(
                    f'{field.name} must be strictly positive, got {value}')

    def rank_threshold(self, singular_values: np.ndarray, shape) -> float:
        """rank_rel_eps * sigma_max * max(rows, cols); 0 for a zero matrix."""
        if singular_values.size == 0:
            return 0.
        return self.rank_rel_eps * float(np.max(singular_values)) * max(shape)


def default_policy(tol: Optional[TolerancePolicy]) -> TolerancePolicy:
    return tol if tol is not None else TolerancePolicy()


@dataclasses.dataclass(frozen=True)
class CheckResult:
    """
    Boolean verdict with a signed margin (positive iff the verdict is true).

    `quantity` is the decisive number and `tolerance` the threshold it was
    compared with; `parts` holds the components of a conjunction.
    """
    verdict: bool
    margin: float
    trace: str = ''
    quantity: float = 0.
    tolerance: float = 0.
    parts: Tuple['CheckResult', ...] = ()

    @classmethod
    def at_most(cls, quantity: float, tolerance: float, trace: str = ''):
        quantity = float(quantity)
        return cls(
            verdict=quantity <= tolerance,
            margin=tolerance - quantity,
            trace=f'{trace} [{quantity:.3e} <= {tolerance:.1e}]',
            quantity=quantity,
            tolerance=tolerance,
        )

    @classmethod
    def above(cls, quantity: float, threshold: float, trace: str = ''):
        quantity = float(quantity)
        return cls(
            verdict=quantity > threshold,
            margin=quantity - threshold,
            trace=f'{trace} [{quantity:.3e} > {threshold:.1e}]',
            quantity=quantity,
            tolerance=threshold,
        )

    def ambiguous(self, guard: Optional[float] = None) -> bool:
        """True when the decisive quantity lies within a factor `guard` of
        its tolerance, where floating point cannot be trusted to decide."""
        guard = guard if guard is not None else guard_band()
        if self.parts:
            return any(p.ambiguous(guard) for p in self.parts)
        if self.tolerance <= 0:
            return False
        return self.tolerance / guard < self.quantity < self.tolerance * guard

    def to_dict(self) -> dict:
        return {
            'verdict': bool(self.verdict),
            'margin': _finite_or_none(self.margin),
            'trace': self.trace,
        }


def _finite_or_none(value: float):
    value = float(value)
    return value if math.isfinite(value) else None


def conjunction(results: Iterable[CheckResult], trace: str = '') -> CheckResult:
    results = tuple(results)
    if not results:
        raise PreconditionError('conjunction of an empty set of checks')
    return CheckResult(
        verdict=all(r.verdict for r in results),
        margin=min(r.margin for r in results),
        trace=trace or ' & '.join(r.trace for r in results),
        parts=results,
    )


@dataclasses.dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of an `ambient_dim`-dimensional space with orthonormal
    `basis` columns."""
    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        basis = np.array(self.basis)
        if basis.ndim != 2 or basis.shape[0] != self.ambient_dim:
            raise DimensionMismatchError(
                f'basis of shape {basis.shape} does not live in an '
                f'{self.ambient_dim}-dimensional space')
        if basis.shape[1] > self.ambient_dim:
            raise DimensionMismatchError(
                f'{basis.shape[1]} basis vectors in dimension {self.ambient_dim}')
        if not np.issubdtype(basis.dtype, np.inexact):
            basis = basis.astype(np.float64)
        basis.setflags(write=False)
        object.__setattr__(self, 'basis', basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def dtype(self):
        return self.basis.dtype

    @classmethod
    def zero(cls, ambient_dim: int, dtype=np.float64) -> 'Subspace':
        return cls(ambient_dim, np.zeros((ambient_dim, 0), dtype=dtype))

    @classmethod
    def full(cls, ambient_dim: int, dtype=np.float64) -> 'Subspace':
        return cls(ambient_dim, np.eye(ambient_dim, dtype=dtype))

    def is_orthonormal(self, tol: Optional[TolerancePolicy] = None) -> bool:
        tol = default_policy(tol)
        gram = self.basis.conj().T @ self.basis
        return bool(np.all(np.abs(gram - np.eye(self.dim)) <= 10 * tol.rank_rel_eps))

    def __repr__(self):
        return f'Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})'


def as_matrix(matrix) -> np.ndarray:
    matrix = np.asarray(matrix)
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    if matrix.ndim != 2:
        raise DimensionMismatchError(
            f'expected a matrix, got an array of shape {matrix.shape}')
    if not np.issubdtype(matrix.dtype, np.inexact):
        matrix = matrix.astype(np.float64)
    return matrix


def orthonormal_basis(matrix,
                      tol: Optional[TolerancePolicy] = None,
                      ambient_dim: Optional[int] = None) -> Subspace:
    """Column space of `matrix`, orthonormalized by a truncated SVD."""
    tol = default_policy(tol)
    matrix = as_matrix(matrix)
    rows, cols = matrix.shape
    if ambient_dim is not None and rows != ambient_dim:
        raise DimensionMismatchError(
            f'matrix has {rows} rows, expected {ambient_dim}')
    if rows == 0 or cols == 0:
        return Subspace.zero(rows, matrix.dtype)
    u, s, _ = spla.svd(matrix, full_matrices=False)
    threshold = tol.rank_threshold(s, matrix.shape)
    keep = s > threshold
    logging.debug('orthonormal_basis: %d of %d singular values above %.3e',
                  int(keep.sum()), s.size, threshold)
    return Subspace(rows, u[:, keep])


def rank(matrix, tol: Optional[TolerancePolicy] = None) -> int:
    tol = default_policy(tol)
    matrix = as_matrix(matrix)
    if matrix.size == 0:
        return 0
    s = spla.svdvals(matrix)
    return int(np.sum(s > tol.rank_threshold(s, matrix.shape)))


def _check_ambient(a: Subspace, b: Subspace):
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatchError(
            f'subspaces of {a.ambient_dim}- and {b.ambient_dim}-dimensional spaces')


def complement(a: Subspace) -> Subspace:
    n, k = a.ambient_dim, a.dim
    if k == 0:
        return Subspace.full(n, a.dtype)
    if k == n:
        return Subspace.zero(n, a.dtype)
    # the basis is orthonormal, so exactly k left singular vectors span it
    u, _, _ = spla.svd(a.basis, full_matrices=True)
    return Subspace(n, u[:, k:])


def add(a: Subspace, b: Subspace, tol: Optional[TolerancePolicy] = None) -> Subspace:
    """Subspace sum a + b."""
    _check_ambient(a, b)
    if a.dim == 0:
        return b
    if b.dim == 0:
        return a
    return orthonormal_basis(np.hstack([a.basis, b.basis]), tol)


def intersect(a: Subspace, b: Subspace, tol: Optional[TolerancePolicy] = None) -> Subspace:
    _check_ambient(a, b)
    return complement(add(complement(a), complement(b), tol))


def projector(a: Subspace) -> np.ndarray:
    return a.basis @ a.basis.conj().T


def operator_norm(matrix) -> float:
    matrix = as_matrix(matrix)
    if matrix.size == 0:
        return 0.
    return float(spla.svdvals(matrix)[0])


def contains(a: Subspace, b: Subspace,
             tol: Optional[TolerancePolicy] = None) -> CheckResult:
    """Does a contain b? Decided on ||(I - P_a) basis(b)||_2."""
    tol = default_policy(tol)
    _check_ambient(a, b)
    residual = b.basis - a.basis @ (a.basis.conj().T @ b.basis)
    return CheckResult.at_most(operator_norm(residual), tol.subspace_eq_tol,
                               f'contains(dim {a.dim} >= dim {b.dim})')


def distance(a: Subspace, b: Subspace) -> float:
    """||P_a - P_b||_2, the sine of the largest principal angle when
    dimensions agree and 1 otherwise."""
    _check_ambient(a, b)
    return operator_norm(projector(a) - projector(b))


def equals(a: Subspace, b: Subspace,
           tol: Optional[TolerancePolicy] = None) -> CheckResult:
    tol = default_policy(tol)
    return CheckResult.at_most(distance(a, b), tol.subspace_eq_tol,
                               f'equals(dim {a.dim}, dim {b.dim})')


def principal_angles(a: Subspace, b: Subspace) -> np.ndarray:
    """Cosines of the principal angles between a and b, nonincreasing."""
    _check_ambient(a, b)
    if a.dim == 0 or b.dim == 0:
        return np.zeros(0)
    cosines = spla.svdvals(a.basis.conj().T @ b.basis)
    return np.clip(cosines, 0, 1)
