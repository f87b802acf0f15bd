"""
Linear relations between finite-dimensional spaces H and K, stored as
graph subspaces of H x K with the H block first.
"""
import dataclasses
import math
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as spla
from absl import logging

from .core import DimensionMismatchError, NotAnOperatorError, PreconditionError
from .subspace import (CheckResult, Subspace, TolerancePolicy, default_policy, add,
                       as_matrix, complement, conjunction, contains, equals,
                       intersect, operator_norm, orthonormal_basis)


@dataclasses.dataclass(frozen=True)
class RelationParts:
    dom: Subspace
    ran: Subspace
    ker: Subspace
    mul: Subspace


@dataclasses.dataclass(frozen=True)
class OperatorSpec:
    """Matrix of shape (k_dim, h_dim), acting on `domain_basis` or on all
    of H when no domain is given."""
    matrix: np.ndarray
    domain_basis: Optional[Subspace] = None

    @property
    def h_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def k_dim(self) -> int:
        return self.matrix.shape[0]


@dataclasses.dataclass(frozen=True, eq=False)
class LinearRelation:
    h_dim: int
    k_dim: int
    graph: Subspace

    def __post_init__(self):
        if self.graph.ambient_dim != self.h_dim + self.k_dim:
            raise DimensionMismatchError(
                f'graph lives in dimension {self.graph.ambient_dim}, '
                f'expected {self.h_dim} + {self.k_dim}')

    @property
    def h_block(self) -> np.ndarray:
        return self.graph.basis[:self.h_dim]

    @property
    def k_block(self) -> np.ndarray:
        return self.graph.basis[self.h_dim:]

    @property
    def dim(self) -> int:
        return self.graph.dim

    @property
    def dtype(self):
        return self.graph.dtype

    @property
    def is_square(self) -> bool:
        return self.h_dim == self.k_dim

    def __repr__(self):
        return (f'LinearRelation(h_dim={self.h_dim}, k_dim={self.k_dim}, '
                f'graph_dim={self.dim})')


def _relation(h_dim: int, k_dim: int, spanners,
              tol: Optional[TolerancePolicy] = None) -> LinearRelation:
    graph = orthonormal_basis(spanners, tol, ambient_dim=h_dim + k_dim)
    return LinearRelation(h_dim, k_dim, graph)


def from_operator(spec: OperatorSpec,
                  tol: Optional[TolerancePolicy] = None) -> LinearRelation:
    matrix = as_matrix(spec.matrix)
    k_dim, h_dim = matrix.shape
    if spec.domain_basis is None:
        domain = np.eye(h_dim, dtype=matrix.dtype)
    else:
        if spec.domain_basis.ambient_dim != h_dim:
            raise DimensionMismatchError(
                f'domain lives in dimension {spec.domain_basis.ambient_dim}, '
                f'matrix acts on dimension {h_dim}')
        domain = spec.domain_basis.basis
    return _relation(h_dim, k_dim, np.vstack([domain, matrix @ domain]), tol)


def from_matrix(matrix, domain: Optional[Subspace] = None,
                tol: Optional[TolerancePolicy] = None) -> LinearRelation:
    return from_operator(OperatorSpec(as_matrix(matrix), domain), tol)


def from_spanners(pairs, h_dim: int, k_dim: int,
                  tol: Optional[TolerancePolicy] = None) -> LinearRelation:
    pairs = np.asarray(pairs)
    if pairs.size == 0:
        pairs = np.zeros((h_dim + k_dim, 0))
    pairs = as_matrix(pairs)
    if pairs.shape[0] != h_dim + k_dim:
        raise DimensionMismatchError(
            f'spanners have {pairs.shape[0]} rows, expected {h_dim} + {k_dim}')
    return _relation(h_dim, k_dim, pairs, tol)


def zero_relation(h_dim: int, k_dim: int, dtype=np.float64) -> LinearRelation:
    return LinearRelation(h_dim, k_dim, Subspace.zero(h_dim + k_dim, dtype))


def full_relation(h_dim: int, k_dim: int, dtype=np.float64) -> LinearRelation:
    return LinearRelation(h_dim, k_dim, Subspace.full(h_dim + k_dim, dtype))


def identity(dim: int, dtype=np.float64) -> LinearRelation:
    return from_matrix(np.eye(dim, dtype=dtype))


# parts


def _null_space(matrix: np.ndarray, tol: TolerancePolicy) -> np.ndarray:
    """Orthonormal basis of {c : matrix @ c = 0}."""
    cols = matrix.shape[1]
    if cols == 0:
        return np.zeros((0, 0), dtype=matrix.dtype)
    row_space = orthonormal_basis(matrix.conj().T, tol, ambient_dim=cols)
    return complement(row_space).basis


def dom(R: LinearRelation, tol: Optional[TolerancePolicy] = None) -> Subspace:
    return orthonormal_basis(R.h_block, tol, ambient_dim=R.h_dim)


def ran(R: LinearRelation, tol: Optional[TolerancePolicy] = None) -> Subspace:
    return orthonormal_basis(R.k_block, tol, ambient_dim=R.k_dim)


def ker(R: LinearRelation, tol: Optional[TolerancePolicy] = None) -> Subspace:
    """{h : (h, 0) in R}: the H block of graph vectors with vanishing K block."""
    tol = default_policy(tol)
    null = _null_space(R.k_block, tol)
    return orthonormal_basis(R.h_block @ null, tol, ambient_dim=R.h_dim)


def mul(R: LinearRelation, tol: Optional[TolerancePolicy] = None) -> Subspace:
    tol = default_policy(tol)
    null = _null_space(R.h_block, tol)
    return orthonormal_basis(R.k_block @ null, tol, ambient_dim=R.k_dim)


def parts(R: LinearRelation, tol: Optional[TolerancePolicy] = None) -> RelationParts:
    return RelationParts(dom=dom(R, tol), ran=ran(R, tol),
                         ker=ker(R, tol), mul=mul(R, tol))


# flips and adjoint


def flip_V(R: LinearRelation) -> LinearRelation:
    """(h, k) -> (k, -h), a relation from K to H."""
    basis = np.vstack([R.k_block, -R.h_block])
    return LinearRelation(R.k_dim, R.h_dim, Subspace(basis.shape[0], basis))


def flip_W(R: LinearRelation) -> LinearRelation:
    """(k, h) -> (-h, k), swapping the roles of the two blocks."""
    basis = np.vstack([-R.k_block, R.h_block])
    return LinearRelation(R.k_dim, R.h_dim, Subspace(basis.shape[0], basis))


def adjoint(R: LinearRelation) -> LinearRelation:
    flipped = flip_V(R)
    return LinearRelation(R.k_dim, R.h_dim, complement(flipped.graph))


def closure(R: LinearRelation) -> LinearRelation:
    # every subspace of a finite-dimensional space is closed
    return R


# combinators


def check_same_spaces(R1: LinearRelation, R2: LinearRelation):
    if (R1.h_dim, R1.k_dim) != (R2.h_dim, R2.k_dim):
        raise DimensionMismatchError(
            f'relations between {R1.h_dim}x{R1.k_dim} and '
            f'{R2.h_dim}x{R2.k_dim} spaces')


def check_square(R: LinearRelation, name: str):
    if not R.is_square:
        raise DimensionMismatchError(
            f'{name} needs a relation in a single space, got '
            f'{R.h_dim}x{R.k_dim}')


def intersect_relations(R1: LinearRelation, R2: LinearRelation,
                        tol: Optional[TolerancePolicy] = None) -> LinearRelation:
    check_same_spaces(R1, R2)
    return LinearRelation(R1.h_dim, R1.k_dim, intersect(R1.graph, R2.graph, tol))


def vee(R1: LinearRelation, R2: LinearRelation,
        tol: Optional[TolerancePolicy] = None) -> LinearRelation:
    """Linear span of the union of both graphs."""
    check_same_spaces(R1, R2)
    return LinearRelation(R1.h_dim, R1.k_dim, add(R1.graph, R2.graph, tol))


def compose(T: LinearRelation, S: LinearRelation,
            tol: Optional[TolerancePolicy] = None) -> LinearRelation:
    """
    T o S = {(h, l) : (h, k) in S and (k, l) in T for some k}.

    Both graphs are lifted to H x K x L, intersected there and the result
    is projected onto the (h, l) coordinates.
    """
    if S.k_dim != T.h_dim:
        raise DimensionMismatchError(
            f'cannot compose a relation into dimension {S.k_dim} with one '
            f'from dimension {T.h_dim}')
    h, k, l = S.h_dim, S.k_dim, T.k_dim
    dtype = np.result_type(S.dtype, T.dtype)
    lift_S = np.block([
        [S.h_block, np.zeros((h, l))],
        [S.k_block, np.zeros((k, l))],
        [np.zeros((l, S.dim)), np.eye(l)],
    ]).astype(dtype)
    lift_T = np.block([
        [np.eye(h), np.zeros((h, T.dim))],
        [np.zeros((k, h)), T.h_block],
        [np.zeros((l, h)), T.k_block],
    ]).astype(dtype)
    common = intersect(Subspace(h + k + l, lift_S), Subspace(h + k + l, lift_T), tol)
    logging.debug('compose: common lift of dimension %d', common.dim)
    projected = np.vstack([common.basis[:h], common.basis[h + k:]])
    return _relation(h, l, projected, tol)


def add_scalar(R: LinearRelation, lam,
               tol: Optional[TolerancePolicy] = None) -> LinearRelation:
    """R + lam I = {(h, k + lam h) : (h, k) in R}."""
    check_square(R, 'add_scalar')
    return _relation(R.h_dim, R.k_dim,
                     np.vstack([R.h_block, R.k_block + lam * R.h_block]), tol)


def scale(R: LinearRelation, c,
          tol: Optional[TolerancePolicy] = None) -> LinearRelation:
    """c R = {(h, c k) : (h, k) in R}."""
    return _relation(R.h_dim, R.k_dim, np.vstack([R.h_block, c * R.k_block]), tol)


def negate(R: LinearRelation) -> LinearRelation:
    basis = np.vstack([R.h_block, -R.k_block])
    return LinearRelation(R.h_dim, R.k_dim, Subspace(basis.shape[0], basis))


def inverse(R: LinearRelation) -> LinearRelation:
    basis = np.vstack([R.k_block, R.h_block])
    return LinearRelation(R.k_dim, R.h_dim, Subspace(basis.shape[0], basis))


# predicates


def _full_column_rank(matrix: np.ndarray, tol: TolerancePolicy,
                      trace: str) -> CheckResult:
    rows, cols = matrix.shape
    if cols == 0:
        return CheckResult(True, math.inf, f'{trace} [no columns]')
    if rows < cols:
        return CheckResult.above(0., 0., f'{trace} [{cols} columns in dimension {rows}]')
    s = spla.svdvals(matrix)
    return CheckResult.above(s[-1], tol.rank_threshold(s, matrix.shape), trace)


def _full_row_rank(matrix: np.ndarray, tol: TolerancePolicy,
                   trace: str) -> CheckResult:
    return _full_column_rank(matrix.T, tol, trace)


def is_operator(R: LinearRelation,
                tol: Optional[TolerancePolicy] = None) -> CheckResult:
    """mul R = {0}, i.e. the H block of the graph basis is injective."""
    return _full_column_rank(R.h_block, default_policy(tol), 'is_operator')


def is_everywhere_defined(R: LinearRelation,
                          tol: Optional[TolerancePolicy] = None) -> CheckResult:
    return _full_row_rank(R.h_block, default_policy(tol), 'is_everywhere_defined')


def is_surjective(R: LinearRelation,
                  tol: Optional[TolerancePolicy] = None) -> CheckResult:
    return _full_row_rank(R.k_block, default_policy(tol), 'is_surjective')


def is_symmetric(R: LinearRelation,
                 tol: Optional[TolerancePolicy] = None) -> CheckResult:
    check_square(R, 'is_symmetric')
    return contains(adjoint(R).graph, R.graph, tol)


def is_selfadjoint(R: LinearRelation,
                   tol: Optional[TolerancePolicy] = None) -> CheckResult:
    check_square(R, 'is_selfadjoint')
    return equals(adjoint(R).graph, R.graph, tol)


def is_skewadjoint(R: LinearRelation,
                   tol: Optional[TolerancePolicy] = None) -> CheckResult:
    check_square(R, 'is_skewadjoint')
    return equals(adjoint(R).graph, negate(R).graph, tol)


def is_unitary(R: LinearRelation,
               tol: Optional[TolerancePolicy] = None) -> CheckResult:
    """Total bijective operator whose adjoint is its inverse."""
    return conjunction([
        is_operator(R, tol),
        is_everywhere_defined(R, tol),
        is_surjective(R, tol),
        equals(adjoint(R).graph, inverse(R).graph, tol),
    ], 'is_unitary')


# operators


def require_operator(R: LinearRelation, name: str = 'relation',
                     tol: Optional[TolerancePolicy] = None):
    check = is_operator(R, tol)
    if not check.verdict:
        raise NotAnOperatorError(f'{name} has a nontrivial multivalued part{check.trace}')


def domain_action(R: LinearRelation,
                  tol: Optional[TolerancePolicy] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis D of dom R together with the images R D."""
    require_operator(R, tol=tol)
    domain = dom(R, tol).basis
    if domain.shape[1] == 0:
        return domain, np.zeros((R.k_dim, 0), dtype=R.dtype)
    coefficients, *_ = spla.lstsq(R.h_block, domain)
    return domain, R.k_block @ coefficients


def to_matrix(R: LinearRelation,
              tol: Optional[TolerancePolicy] = None) -> np.ndarray:
    """Matrix of an everywhere-defined operator."""
    require_operator(R, tol=tol)
    if not is_everywhere_defined(R, tol).verdict:
        raise PreconditionError('to_matrix needs an everywhere-defined operator')
    if R.h_dim == 0:
        return np.zeros((R.k_dim, 0), dtype=R.dtype)
    coefficients, *_ = spla.lstsq(R.h_block, np.eye(R.h_dim))
    return R.k_block @ coefficients


def check_pair(S: LinearRelation, T: LinearRelation):
    if (T.h_dim, T.k_dim) != (S.k_dim, S.h_dim):
        raise DimensionMismatchError(
            f'S maps {S.h_dim} -> {S.k_dim} but T maps {T.h_dim} -> {T.k_dim}')


def pairing_defect(S: LinearRelation, T: LinearRelation,
                   tol: Optional[TolerancePolicy] = None) -> float:
    """
    Largest violation of <S x, y> = <x, T y> over unit vectors x in dom S
    and y in dom T, i.e. the spectral norm of the pairing matrix
    [<S x_i, y_j> - <x_i, T y_j>] in orthonormal domain bases.
    """
    check_pair(S, T)
    require_operator(S, 'S', tol)
    require_operator(T, 'T', tol)
    x, Sx = domain_action(S, tol)
    y, Ty = domain_action(T, tol)
    pairing = y.conj().T @ Sx - Ty.conj().T @ x
    return operator_norm(pairing)


def formally_adjoint(S: LinearRelation, T: LinearRelation,
                     tol: Optional[TolerancePolicy] = None) -> CheckResult:
    """S contained in T* and T contained in S*."""
    check_pair(S, T)
    return conjunction([
        contains(adjoint(T).graph, S.graph, tol),
        contains(adjoint(S).graph, T.graph, tol),
    ], 'formally_adjoint')
