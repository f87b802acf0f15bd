"""
Seeded generators of well-conditioned random instances.

Every draw comes from a Philox counter-based bit generator keyed by a
`SeedSequence` built from the configuration seed and a label naming the
draw, so identical configurations and arguments give bit-identical
results on every platform. Use `GenConfig.spawn` to draw several
independent objects of the same kind.
"""
import dataclasses
import hashlib
from typing import NamedTuple, Optional, Tuple

import gin
import numpy as np
import scipy.linalg as spla
from absl import logging

from .core import GenerationError, PreconditionError
from .relation import (LinearRelation, OperatorSpec, from_matrix,
                       from_operator, is_everywhere_defined, require_operator,
                       to_matrix, domain_action)
from .subspace import FieldTag, Subspace, operator_norm

GENERATOR_ID = 'numpy.Philox/SeedSequence/standard_normal'

_SEED_MASK = (1 << 64) - 1


def _key(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & _SEED_MASK
    digest = hashlib.md5(str(label).encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'little')


@gin.configurable
@dataclasses.dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    field: FieldTag = FieldTag.REAL
    max_dim: int = 6
    margin_floor: float = 1e-4
    max_retries: int = 100

    def __post_init__(self):
        if not 0 <= self.seed <= _SEED_MASK:
            raise PreconditionError(f'seed must be a 64-bit unsigned integer, got {self.seed}')
        if self.max_dim < 1:
            raise PreconditionError(f'max_dim must be positive, got {self.max_dim}')
        if not 0 < self.margin_floor < 1:
            raise PreconditionError(f'margin_floor must lie in (0, 1), got {self.margin_floor}')
        if isinstance(self.field, str):
            object.__setattr__(self, 'field', FieldTag(self.field))

    def rng(self, *labels) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed,
                                          spawn_key=tuple(_key(l) for l in labels))
        return np.random.Generator(np.random.Philox(sequence))

    def spawn(self, *labels) -> 'GenConfig':
        sequence = np.random.SeedSequence(self.seed,
                                          spawn_key=tuple(_key(l) for l in labels))
        seed = int(sequence.generate_state(1, dtype=np.uint64)[0])
        return dataclasses.replace(self, seed=seed)

    def for_trial(self, trial: int) -> 'GenConfig':
        return dataclasses.replace(self, seed=self.seed ^ trial)

    @property
    def dtype(self):
        return self.field.dtype


def gaussian(rng: np.random.Generator, shape, field: FieldTag) -> np.ndarray:
    """Standard Gaussian entries; complex entries are (a + ib) / sqrt(2)."""
    if field is FieldTag.COMPLEX:
        real = rng.standard_normal(shape)
        imag = rng.standard_normal(shape)
        return (real + 1j * imag) / np.sqrt(2)
    return rng.standard_normal(shape)


def _conditioned(matrix: np.ndarray, floor: float) -> bool:
    """Smallest of the min(rows, cols) singular values above floor times
    the largest."""
    if matrix.size == 0:
        return True
    s = spla.svdvals(matrix)
    return bool(s[-1] >= floor * max(1., s[0]))


def _draw(cfg: GenConfig, label: str, shape, accept=None) -> np.ndarray:
    for attempt in range(cfg.max_retries):
        sample = gaussian(cfg.rng(label, *shape, attempt), shape, cfg.field)
        if accept is None or accept(sample):
            return sample
        logging.debug('%s: draw %d rejected', label, attempt)
    logging.warning('%s: no acceptable draw of shape %s after %d attempts',
                    label, shape, cfg.max_retries)
    raise GenerationError(f'{label}: retry cap of {cfg.max_retries} exceeded')


def _check_bounds(name: str, value: int, upper: int):
    if not 0 <= value <= upper:
        raise PreconditionError(f'{name} = {value} outside [0, {upper}]')


def random_matrix(cfg: GenConfig, rows: int, cols: int,
                  norm: Optional[float] = None) -> np.ndarray:
    """Gaussian matrix with singular values separated from zero by
    `margin_floor`, rescaled to spectral norm `norm` when given."""
    def accept(sample):
        return _conditioned(sample, cfg.margin_floor)

    matrix = _draw(cfg, 'matrix', (rows, cols), accept)
    if norm is not None and matrix.size:
        matrix = matrix * (norm / operator_norm(matrix))
    return matrix


def random_subspace(cfg: GenConfig, ambient: int, dim: int) -> Subspace:
    _check_bounds('dim', dim, ambient)
    if dim == 0:
        return Subspace.zero(ambient, cfg.dtype)
    sample = _draw(cfg, 'subspace', (ambient, dim),
                   lambda m: _conditioned(m, cfg.margin_floor))
    q, _ = spla.qr(sample, mode='economic')
    return Subspace(ambient, q)


def random_relation(cfg: GenConfig, h_dim: int, k_dim: int,
                    graph_dim: int) -> LinearRelation:
    """Relation whose graph is a random subspace of H x K; both blocks of
    the graph basis are kept away from rank deficiency."""
    _check_bounds('graph_dim', graph_dim, h_dim + k_dim)

    def accept(sample):
        q, _ = spla.qr(sample, mode='economic')
        return (_conditioned(sample, cfg.margin_floor)
                and _conditioned(q[:h_dim], cfg.margin_floor)
                and _conditioned(q[h_dim:], cfg.margin_floor))

    if graph_dim == 0:
        return LinearRelation(h_dim, k_dim, Subspace.zero(h_dim + k_dim, cfg.dtype))
    sample = _draw(cfg, 'relation', (h_dim + k_dim, graph_dim), accept)
    q, _ = spla.qr(sample, mode='economic')
    return LinearRelation(h_dim, k_dim, Subspace(h_dim + k_dim, q))


def random_operator(cfg: GenConfig, h_dim: int, k_dim: int, domain_dim: int,
                    norm: Optional[float] = None) -> LinearRelation:
    """Random matrix restricted to a random domain; total when
    domain_dim = h_dim."""
    _check_bounds('domain_dim', domain_dim, h_dim)
    matrix = random_matrix(cfg.spawn('operator-matrix'), k_dim, h_dim, norm)
    domain = None
    if domain_dim < h_dim:
        domain = random_subspace(cfg.spawn('operator-domain'), h_dim, domain_dim)
    return from_operator(OperatorSpec(matrix, domain))


def random_adjoint_pair(cfg: GenConfig, h_dim: int, k_dim: int,
                        norm: Optional[float] = None) -> Tuple[LinearRelation, LinearRelation]:
    matrix = random_matrix(cfg.spawn('adjoint-pair'), k_dim, h_dim, norm)
    return from_matrix(matrix), from_matrix(matrix.conj().T)


def _hermitian_part(sample: np.ndarray) -> np.ndarray:
    return (sample + sample.conj().T) / 2


def random_symmetric(cfg: GenConfig, dim: int,
                     norm: Optional[float] = None) -> LinearRelation:
    """Total operator (B + B^H) / 2, invertible with margin."""
    sample = _draw(cfg, 'symmetric', (dim, dim),
                   lambda m: _conditioned(_hermitian_part(m), cfg.margin_floor))
    matrix = _hermitian_part(sample)
    if norm is not None and dim:
        matrix = matrix * (norm / operator_norm(matrix))
    return from_matrix(matrix)


def random_skew(cfg: GenConfig, dim: int,
                norm: Optional[float] = None) -> LinearRelation:
    """Total operator (B - B^H) / 2. Real skew matrices of odd size are
    singular, so no conditioning is imposed."""
    sample = gaussian(cfg.rng('skew', dim), (dim, dim), cfg.field)
    matrix = (sample - sample.conj().T) / 2
    if norm is not None and operator_norm(matrix) > 0:
        matrix = matrix * (norm / operator_norm(matrix))
    return from_matrix(matrix)


def random_unitary(cfg: GenConfig, dim: int) -> LinearRelation:
    """Orthonormalized Gaussian with the phases of R's diagonal divided out."""
    if dim == 0:
        return from_matrix(np.zeros((0, 0), dtype=cfg.dtype))
    sample = _draw(cfg, 'unitary', (dim, dim),
                   lambda m: _conditioned(m, cfg.margin_floor))
    q, r = spla.qr(sample)
    phases = np.diag(r) / np.abs(np.diag(r))
    return from_matrix(q * phases)


class Perturbation(NamedTuple):
    S: LinearRelation
    T: LinearRelation
    coupling: float


def perturb_pairing(S: LinearRelation, T: LinearRelation, delta: float,
                    cfg: Optional[GenConfig] = None,
                    direction: Optional[np.ndarray] = None) -> Perturbation:
    """
    T' = T + delta E for a unit-norm E, random unless `direction` is given.

    The reported coupling c = ||D_S^H E||, with D_S an orthonormal basis of
    dom S, satisfies pairing_defect(S, T') >= c delta - pairing_defect(S, T).
    """
    if delta < 0:
        raise PreconditionError(f'delta must be nonnegative, got {delta}')
    require_operator(T, 'T')
    if not is_everywhere_defined(T).verdict:
        raise PreconditionError('perturb_pairing needs an everywhere-defined T')
    matrix = to_matrix(T)
    if direction is None:
        cfg = cfg if cfg is not None else GenConfig()
        direction = random_matrix(cfg.spawn('perturbation'), *matrix.shape)
    direction = np.asarray(direction)
    if direction.shape != matrix.shape:
        raise PreconditionError(
            f'direction of shape {direction.shape} for an operator of shape {matrix.shape}')
    if direction.size:
        direction = direction / operator_norm(direction)
    domain, _ = domain_action(S)
    coupling = operator_norm(domain.conj().T @ direction)
    if delta == 0:
        return Perturbation(S, T, coupling)
    return Perturbation(S, from_matrix(matrix + delta * direction), coupling)


def restrict_to_partial(S_total: LinearRelation, cfg: GenConfig,
                        domain_dim: int) -> LinearRelation:
    """Same action as S_total on a random domain_dim-dimensional domain."""
    require_operator(S_total, 'S')
    if not is_everywhere_defined(S_total).verdict:
        raise PreconditionError('restrict_to_partial needs an everywhere-defined operator')
    _check_bounds('domain_dim', domain_dim, S_total.h_dim)
    if domain_dim == S_total.h_dim:
        return S_total
    domain = random_subspace(cfg.spawn('restriction'), S_total.h_dim, domain_dim)
    return from_operator(OperatorSpec(to_matrix(S_total), domain))


def random_subrelation(cfg: GenConfig, R: LinearRelation, dim: int) -> LinearRelation:
    """Random dim-dimensional subspace of R's graph."""
    _check_bounds('dim', dim, R.dim)
    coefficients = random_subspace(cfg.spawn('subrelation'), R.dim, dim).basis
    return LinearRelation(R.h_dim, R.k_dim,
                          Subspace(R.h_dim + R.k_dim, R.graph.basis @ coefficients))
