"""
The operator matrix M = [[0, -T], [S, 0]] on H x K, its resolvent and the
resolvent-norm criterion for mutual adjointness.
"""
import dataclasses
import math
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import gin
import numpy as np
import scipy.linalg as spla
from absl import logging

from .characterize import oracle_mutually_adjoint
from .core import NotInResolventSetError, PreconditionError
from .relation import (LinearRelation, add_scalar, adjoint, check_pair,
                       check_square, domain_action, flip_W, inverse,
                       is_everywhere_defined, is_operator, is_selfadjoint,
                       is_skewadjoint, is_unitary, negate, pairing_defect,
                       ran, require_operator, scale, to_matrix)
from .subspace import (CheckResult, Subspace, TolerancePolicy, add,
                       conjunction, default_policy, equals)


@gin.configurable
def default_grid(exponents: Sequence[int] = tuple(range(-3, 4))) -> Tuple[float, ...]:
    """{+-2^k} for the given exponents, in increasing order."""
    magnitudes = [2.**k for k in exponents]
    return tuple(sorted([-m for m in magnitudes] + magnitudes))


@gin.configurable
def norm_slack(value: float = 1e-8) -> float:
    return value


@gin.configurable
def include_critical(enabled: bool = True) -> bool:
    return enabled


@dataclasses.dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """
    (h, k) -> (-T k, S h) as a relation on H x K, defined on dom S x dom T.

    `matrix` is the dense block matrix when S and T are everywhere defined.
    """
    underlying: LinearRelation
    h_dim: int
    k_dim: int
    matrix: Optional[np.ndarray] = None
    domain_checks: Tuple[CheckResult, ...] = ()

    @property
    def dim(self) -> int:
        return self.h_dim + self.k_dim

    @property
    def is_total(self) -> bool:
        return self.matrix is not None


def build_matrix(S: LinearRelation, T: LinearRelation,
                 tol: Optional[TolerancePolicy] = None) -> OperatorMatrix:
    check_pair(S, T)
    require_operator(S, 'S', tol)
    require_operator(T, 'T', tol)
    h, k = S.h_dim, S.k_dim
    dtype = np.result_type(S.dtype, T.dtype)
    # input (h, 0) -> output (0, S h); input (0, k) -> output (-T k, 0)
    spanners = np.block([
        [S.h_block, np.zeros((h, T.dim))],
        [np.zeros((k, S.dim)), T.h_block],
        [np.zeros((h, S.dim)), -T.k_block],
        [S.k_block, np.zeros((k, T.dim))],
    ]).astype(dtype)
    underlying = LinearRelation(h + k, h + k, Subspace(2 * (h + k), spanners))
    domain_checks = (is_everywhere_defined(S, tol), is_everywhere_defined(T, tol))
    matrix = None
    if all(c.verdict for c in domain_checks):
        A, B = to_matrix(S, tol), to_matrix(T, tol)
        matrix = np.block([
            [np.zeros((h, h), dtype=dtype), -B],
            [A, np.zeros((k, k), dtype=dtype)],
        ])
    return OperatorMatrix(underlying, h, k, matrix, domain_checks)


def _shifted(M: OperatorMatrix, t: float) -> np.ndarray:
    return M.matrix - t * np.eye(M.dim)


def _check_parameter(t) -> float:
    if np.iscomplexobj(t):
        raise PreconditionError(f'spectral parameter must be real, got {t}')
    t = float(t)
    if t == 0:
        raise PreconditionError('the spectral parameter must be nonzero')
    return t


def _in_resolvent_set(M: OperatorMatrix, t: float, tol: TolerancePolicy) -> CheckResult:
    if not M.is_total:
        return conjunction(M.domain_checks, f'in_resolvent_set({t:g}): partial operator matrix')
    if M.dim == 0:
        return CheckResult(True, math.inf, f'in_resolvent_set({t:g}): trivial space')
    shifted = _shifted(M, t)
    s = spla.svdvals(shifted)
    return CheckResult.above(s[-1], tol.rank_threshold(s, shifted.shape),
                             f'in_resolvent_set({t:g}): sigma_min(M - t)')


def in_resolvent_set(S: LinearRelation, T: LinearRelation, t: float,
                     tol: Optional[TolerancePolicy] = None) -> CheckResult:
    """M - t is a bijection from dom M onto H x K."""
    t = _check_parameter(t)
    return _in_resolvent_set(build_matrix(S, T, tol), t, default_policy(tol))


def _resolvent_norm(M: OperatorMatrix, t: float, method: str) -> float:
    if M.dim == 0:
        return 0.
    shifted = _shifted(M, t)
    if method == 'inverse':
        return float(spla.svdvals(spla.inv(shifted))[0])
    if method == 'singular':
        return 1. / float(spla.svdvals(shifted)[-1])
    raise ValueError(f'unknown method {method!r}')


def resolvent_norm(S: LinearRelation, T: LinearRelation, t: float,
                   tol: Optional[TolerancePolicy] = None,
                   method: str = 'inverse') -> float:
    """||(M - t)^-1||, either from the explicit inverse or as
    1 / sigma_min(M - t)."""
    t = _check_parameter(t)
    M = build_matrix(S, T, tol)
    membership = _in_resolvent_set(M, t, default_policy(tol))
    if not membership.verdict:
        raise NotInResolventSetError(f'{t:g} is not in the resolvent set{membership.trace}')
    return _resolvent_norm(M, t, method)


@dataclasses.dataclass(frozen=True)
class ResolventProbe:
    t: float
    in_resolvent_set: CheckResult
    norm: Optional[float]
    bound: float
    satisfied: CheckResult

    @property
    def excess(self) -> float:
        """norm - bound, infinite outside the resolvent set."""
        return math.inf if self.norm is None else self.norm - self.bound

    def to_dict(self) -> dict:
        return {
            't': self.t,
            'in_resolvent_set': self.in_resolvent_set.to_dict(),
            'norm': self.norm,
            'bound': self.bound,
            'satisfied': self.satisfied.to_dict(),
        }


def _probe(M: OperatorMatrix, t: float, tol: TolerancePolicy) -> ResolventProbe:
    membership = _in_resolvent_set(M, t, tol)
    bound = 1. / abs(t)
    norm = None
    if membership.verdict:
        norm = _resolvent_norm(M, t, 'singular')
        within = CheckResult.at_most(norm - bound, norm_slack(),
                                     f'||R({t:g})|| - 1/|t|')
    else:
        within = CheckResult(False, -math.inf, f'R({t:g}) undefined')
    satisfied = conjunction([membership, within], f'probe({t:g})')
    logging.debug('probe t=%g norm=%s bound=%g satisfied=%s', t, norm, bound,
                  satisfied.verdict)
    return ResolventProbe(t, membership, norm, bound, satisfied)


def probe(S: LinearRelation, T: LinearRelation, t: float,
          tol: Optional[TolerancePolicy] = None) -> ResolventProbe:
    t = _check_parameter(t)
    return _probe(build_matrix(S, T, tol), t, default_policy(tol))


def bounded_below(S: LinearRelation, T: LinearRelation, t: float,
                  tol: Optional[TolerancePolicy] = None) -> CheckResult:
    """||(M - t) v|| >= |t| ||v|| for all v in dom M."""
    t = _check_parameter(t)
    M = build_matrix(S, T, tol)
    domain, image = domain_action(M.underlying, tol)
    if domain.shape[1] == 0:
        return CheckResult(True, math.inf, f'bounded_below({t:g}): trivial domain')
    smallest = float(spla.svdvals(image - t * domain)[-1])
    return CheckResult.at_most(abs(t) - smallest, norm_slack(),
                               f'bounded_below({t:g}): |t| - min ||(M - t) v||')


def critical_parameters(S: LinearRelation, T: LinearRelation,
                        tol: Optional[TolerancePolicy] = None,
                        max_iter: int = 200) -> Tuple[float, float]:
    """
    Thresholds (t_plus, t_minus) such that the resolvent bound holds for
    0 < t <= t_plus and -t_minus <= t < 0 and fails beyond them.

    For total S and T the bound at t is equivalent to
    M^H M - t (M + M^H) >= 0, whose least eigenvalue is concave in t.
    """
    tol = default_policy(tol)
    M = build_matrix(S, T, tol)
    if not M.is_total:
        raise PreconditionError('critical parameters need everywhere-defined S and T')
    if M.dim == 0:
        return math.inf, math.inf
    gram = M.matrix.conj().T @ M.matrix
    sym = M.matrix + M.matrix.conj().T
    scale_ = max(1., float(spla.svdvals(M.matrix)[0]))**2
    noise = tol.rank_rel_eps * scale_ * M.dim

    def threshold(direction: np.ndarray) -> float:
        def f(t):
            return spla.eigvalsh(gram - t * direction)[0]

        if spla.eigvalsh(direction)[-1] <= noise:
            return math.inf
        lo, hi = 0., 1.
        while f(hi) >= -noise:
            lo, hi = hi, 2 * hi
            if hi > 1e12:
                return math.inf
        for _ in range(max_iter):
            mid = (lo + hi) / 2
            if f(mid) >= -noise:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-13 * hi:
                break
        return lo

    t_plus, t_minus = threshold(sym), threshold(-sym)
    logging.debug('critical parameters: t+ = %g, t- = %g', t_plus, t_minus)
    return t_plus, t_minus


def critical_probes(S: LinearRelation, T: LinearRelation,
                    tol: Optional[TolerancePolicy] = None,
                    steps: int = 8) -> List[ResolventProbe]:
    """Probes at the worst violation beyond each finite critical parameter."""
    tol = default_policy(tol)
    M = build_matrix(S, T, tol)
    probes = []
    for sign, threshold in zip((1., -1.), critical_parameters(S, T, tol)):
        if not math.isfinite(threshold):
            continue
        base = threshold if threshold > 0 else min(abs(t) for t in default_grid())
        candidates = [_probe(M, sign * base * 2**(j / 2), tol) for j in range(1, steps + 1)]
        probes.append(max(candidates, key=lambda p: p.excess * abs(p.t)))
    return probes


@dataclasses.dataclass(frozen=True, eq=False)
class NieminenReport:
    criterion_id: str
    probes: Tuple[ResolventProbe, ...]
    pairing_defect: Optional[float]
    overall: CheckResult
    oracle: CheckResult
    critical_probes: Tuple[ResolventProbe, ...] = ()
    conditions: Dict[str, CheckResult] = dataclasses.field(default_factory=dict)

    def failing(self) -> List[float]:
        return [p.t for p in (*self.probes, *self.critical_probes)
                if not p.satisfied.verdict]

    def ambiguous(self, guard: Optional[float] = None) -> bool:
        return self.overall.ambiguous(guard) or self.oracle.ambiguous(guard)

    def to_dict(self) -> dict:
        return {
            'criterion': self.criterion_id,
            'overall': self.overall.to_dict(),
            'oracle': self.oracle.to_dict(),
            'pairing_defect': self.pairing_defect,
            'conditions': {k: v.to_dict() for k, v in self.conditions.items()},
            'probes': [p.to_dict() for p in self.probes],
            'critical_probes': [p.to_dict() for p in self.critical_probes],
        }


def _validate_grid(grid: Optional[Sequence[float]]) -> Tuple[float, ...]:
    grid = default_grid() if grid is None else tuple(grid)
    if not grid:
        raise PreconditionError('empty evaluation grid')
    return tuple(_check_parameter(t) for t in grid)


def nieminen_criterion(S: LinearRelation, T: LinearRelation,
                       grid: Optional[Sequence[float]] = None,
                       tol: Optional[TolerancePolicy] = None,
                       oracle: Optional[CheckResult] = None,
                       conditions: Optional[Dict[str, CheckResult]] = None,
                       criterion_id: str = 'nieminen') -> NieminenReport:
    """
    Every probed nonzero t lies in the resolvent set of M with
    ||R(t)|| <= 1/|t|. Beyond the grid, a probe is added past each finite
    critical parameter when `include_critical` is on.
    """
    grid = _validate_grid(grid)
    policy = default_policy(tol)
    M = build_matrix(S, T, policy)
    probes = tuple(_probe(M, t, policy) for t in grid)
    extra = ()
    if include_critical() and M.is_total:
        extra = tuple(critical_probes(S, T, policy))
    conditions = dict(conditions or {})
    overall = conjunction([p.satisfied for p in (*probes, *extra)] + list(conditions.values()),
                          f'{criterion_id}: all probes')
    if oracle is None:
        oracle = oracle_mutually_adjoint(S, T, policy)
    report = NieminenReport(
        criterion_id=criterion_id,
        probes=probes,
        pairing_defect=pairing_defect(S, T, policy),
        overall=overall,
        oracle=oracle,
        critical_probes=extra,
        conditions=conditions,
    )
    logging.debug('%s: overall %s, failing at %s', criterion_id, overall.verdict,
                  report.failing())
    return report


def selfadjoint_nieminen(S: LinearRelation, grid: Optional[Sequence[float]] = None,
                         tol: Optional[TolerancePolicy] = None) -> NieminenReport:
    """Criterion with T := S."""
    check_square(S, 'selfadjoint_nieminen')
    require_operator(S, 'S', tol)
    oracle = conjunction([is_everywhere_defined(S, tol), is_selfadjoint(S, tol)],
                         'everywhere-defined and self-adjoint')
    return nieminen_criterion(S, S, grid, tol, oracle=oracle,
                              criterion_id='nieminen-selfadjoint')


def skewadjoint_nieminen(S: LinearRelation, grid: Optional[Sequence[float]] = None,
                         tol: Optional[TolerancePolicy] = None) -> NieminenReport:
    """Criterion with T := -S."""
    check_square(S, 'skewadjoint_nieminen')
    require_operator(S, 'S', tol)
    oracle = conjunction([is_everywhere_defined(S, tol), is_skewadjoint(S, tol)],
                         'everywhere-defined and skew-adjoint')
    return nieminen_criterion(S, negate(S), grid, tol, oracle=oracle,
                              criterion_id='nieminen-skew')


def unitary_nieminen(U: LinearRelation, grid: Optional[Sequence[float]] = None,
                     tol: Optional[TolerancePolicy] = None) -> NieminenReport:
    """
    Criterion with T := U^-1 plus the condition ker U = {0}. A nontrivial
    kernel makes U^-1 multivalued; that is reported as a failed condition.
    """
    require_operator(U, 'U', tol)
    oracle = is_unitary(U, tol)
    U_inv = inverse(U)
    conditions = {'ker_U_trivial': is_operator(U_inv, tol)}
    if not conditions['ker_U_trivial'].verdict:
        logging.debug('unitary_nieminen: U has a nontrivial kernel')
        return NieminenReport(
            criterion_id='nieminen-unitary',
            probes=(),
            pairing_defect=None,
            overall=conjunction(conditions.values(), 'nieminen-unitary: conditions'),
            oracle=oracle,
            conditions=conditions,
        )
    return nieminen_criterion(U, U_inv, grid, tol, oracle=oracle, conditions=conditions,
                              criterion_id='nieminen-unitary')


class RangeDecomposition(NamedTuple):
    decomposition: Subspace
    resolvent_range: Subspace
    agree: CheckResult


def range_decomposition(S: LinearRelation, t: float,
                        tol: Optional[TolerancePolicy] = None) -> RangeDecomposition:
    """
    (1/t) S + W((1/t) S*) as a subspace of H x K, next to ran(M + t) for
    the pair (S, S*).
    """
    t = _check_parameter(t)
    S_adj = adjoint(S)
    decomposition = add(scale(S, 1 / t, tol).graph,
                        flip_W(scale(S_adj, 1 / t, tol)).graph, tol)
    M = build_matrix(S, S_adj, tol)
    resolvent_range = ran(add_scalar(M.underlying, t, tol), tol)
    return RangeDecomposition(decomposition, resolvent_range,
                              equals(decomposition, resolvent_range, tol))


def block_product_identity(S: LinearRelation, T: LinearRelation,
                           tol: Optional[TolerancePolicy] = None) -> Tuple[np.ndarray, np.ndarray]:
    """-(M + 1)(M - 1) and diag(I + TS, I + ST) for total S and T."""
    M = build_matrix(S, T, tol)
    if not M.is_total:
        raise PreconditionError('the block product identity needs everywhere-defined S and T')
    A, B = to_matrix(S, tol), to_matrix(T, tol)
    eye = np.eye(M.dim)
    product = -(M.matrix + eye) @ (M.matrix - eye)
    diagonal = spla.block_diag(np.eye(M.h_dim) + B @ A, np.eye(M.k_dim) + A @ B)
    return product, diagonal
