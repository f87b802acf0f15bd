"""
Range-kernel characterizations of inclusion, equality and mutual
adjointness of linear relations.

Every checker evaluates all sides of the characterization it implements,
never short-circuiting, so callers can compare the statements against one
another and against `oracle_mutually_adjoint`.
"""
import dataclasses
from typing import Dict, Optional

from absl import logging

from .core import PreconditionError
from .relation import (LinearRelation, check_pair, check_same_spaces,
                       check_square, add_scalar, adjoint, closure, compose,
                       formally_adjoint, intersect_relations, is_everywhere_defined,
                       is_operator, is_selfadjoint, is_surjective, is_symmetric,
                       ker, pairing_defect, ran, require_operator, vee)
from .subspace import (CheckResult, TolerancePolicy, add, complement,
                       conjunction, contains, default_policy, equals)


@dataclasses.dataclass(frozen=True, eq=False)
class CriterionReport:
    """
    `conditions` are the hypotheses of the criterion and `overall` their
    conjunction. `statements` holds the labelled sides of an equivalence,
    `conclusion_verified` the oracle check of what a one-way criterion
    asserts, and `diagnostics` informational checks not counted in
    `overall`.
    """
    criterion_id: str
    conditions: Dict[str, CheckResult]
    overall: CheckResult
    conclusion_verified: Optional[CheckResult] = None
    statements: Dict[str, CheckResult] = dataclasses.field(default_factory=dict)
    diagnostics: Dict[str, CheckResult] = dataclasses.field(default_factory=dict)

    @classmethod
    def build(cls, criterion_id: str, conditions: Dict[str, CheckResult],
              **kwargs) -> 'CriterionReport':
        overall = conjunction(conditions.values(), f'{criterion_id}: all conditions')
        report = cls(criterion_id, dict(conditions), overall, **kwargs)
        logging.debug('%s: overall %s (margin %.3e)', criterion_id,
                      overall.verdict, overall.margin)
        return report

    def ambiguous(self, guard: Optional[float] = None) -> bool:
        checks = [self.overall, *self.statements.values()]
        if self.conclusion_verified is not None:
            checks.append(self.conclusion_verified)
        return any(c.ambiguous(guard) for c in checks)

    def statements_agree(self) -> bool:
        return len({s.verdict for s in self.statements.values()}) <= 1

    def implication_holds(self) -> bool:
        if self.conclusion_verified is None:
            return True
        return not self.overall.verdict or self.conclusion_verified.verdict

    def to_dict(self) -> dict:
        data = {
            'criterion': self.criterion_id,
            'overall': self.overall.to_dict(),
            'conditions': {k: v.to_dict() for k, v in self.conditions.items()},
        }
        if self.statements:
            data['statements'] = {k: v.to_dict() for k, v in self.statements.items()}
        if self.conclusion_verified is not None:
            data['conclusion_verified'] = self.conclusion_verified.to_dict()
        if self.diagnostics:
            data['diagnostics'] = {k: v.to_dict() for k, v in self.diagnostics.items()}
        return data


def _require_operators(S: LinearRelation, T: LinearRelation, tol):
    check_pair(S, T)
    require_operator(S, 'S', tol)
    require_operator(T, 'T', tol)


def oracle_mutually_adjoint(S: LinearRelation, T: LinearRelation,
                            tol: Optional[TolerancePolicy] = None) -> CheckResult:
    """S* = T and T* = S with both S and T everywhere-defined operators."""
    check_pair(S, T)
    return conjunction([
        equals(adjoint(S).graph, T.graph, tol),
        equals(adjoint(T).graph, S.graph, tol),
        is_operator(S, tol),
        is_operator(T, tol),
        is_everywhere_defined(S, tol),
        is_everywhere_defined(T, tol),
    ], 'oracle_mutually_adjoint')


# inclusion and equality


def arens_inclusion(S: LinearRelation, T: LinearRelation,
                    tol: Optional[TolerancePolicy] = None) -> CriterionReport:
    check_same_spaces(S, T)
    S_and_T = intersect_relations(S, T, tol)
    S_or_T = vee(S, T, tol)
    statements = {
        'i': contains(T.graph, S.graph, tol),
        'ii': conjunction([
            contains(ker(T, tol), ker(S, tol), tol),
            contains(ran(S_and_T, tol), ran(S, tol), tol),
        ]),
        'iii': conjunction([
            contains(ran(T, tol), ran(S, tol), tol),
            contains(ker(T, tol), ker(S_or_T, tol), tol),
        ]),
    }
    return CriterionReport.build('arens', statements, statements=statements)


def arens_equality(S: LinearRelation, T: LinearRelation,
                   tol: Optional[TolerancePolicy] = None) -> CriterionReport:
    check_same_spaces(S, T)
    S_and_T = intersect_relations(S, T, tol)
    S_or_T = vee(S, T, tol)
    statements = {
        'i': equals(S.graph, T.graph, tol),
        'ii': conjunction([
            equals(ker(S, tol), ker(T, tol), tol),
            contains(ran(S_and_T, tol), add(ran(S, tol), ran(T, tol), tol), tol),
        ]),
        'iii': conjunction([
            equals(ran(S, tol), ran(T, tol), tol),
            contains(ker(S_and_T, tol), ker(S_or_T, tol), tol),
        ]),
    }
    return CriterionReport.build('arens-eq', statements, statements=statements)


def arens_equality_under_inclusion(S: LinearRelation, T: LinearRelation,
                                   tol: Optional[TolerancePolicy] = None) -> CriterionReport:
    check_same_spaces(S, T)
    inclusion = contains(T.graph, S.graph, tol)
    if not inclusion.verdict:
        raise PreconditionError(f'S is not contained in T{inclusion.trace}')
    statements = {
        'i': equals(S.graph, T.graph, tol),
        'ii': conjunction([
            equals(ker(S, tol), ker(T, tol), tol),
            equals(ran(S, tol), ran(T, tol), tol),
        ]),
    }
    return CriterionReport.build('arens-eq-incl', statements, statements=statements,
                                 diagnostics={'inclusion': inclusion})


# one-way criteria


def _cores(S: LinearRelation, T: LinearRelation, tol):
    """S0 = S meet T* and T0 = T meet S*."""
    return (intersect_relations(S, adjoint(T), tol),
            intersect_relations(T, adjoint(S), tol))


def gen_stone(S: LinearRelation, T: LinearRelation,
              tol: Optional[TolerancePolicy] = None) -> CriterionReport:
    _require_operators(S, T, tol)
    S0, T0 = _cores(S, T, tol)
    return CriterionReport.build('gen-stone', {
        'ran_S0_full': is_surjective(S0, tol),
        'ran_T0_full': is_surjective(T0, tol),
    }, conclusion_verified=oracle_mutually_adjoint(S, T, tol))


def surjective_pair(S: LinearRelation, T: LinearRelation,
                    tol: Optional[TolerancePolicy] = None) -> CriterionReport:
    _require_operators(S, T, tol)
    policy = default_policy(tol)
    return CriterionReport.build('surjective-pair', {
        'pairing': CheckResult.at_most(pairing_defect(S, T, tol), policy.pairing_tol,
                                       'pairing_defect'),
        'S_surjective': is_surjective(S, tol),
        'T_surjective': is_surjective(T, tol),
    }, conclusion_verified=oracle_mutually_adjoint(S, T, tol))


def _square_operator(S: LinearRelation, name: str, tol):
    check_square(S, name)
    require_operator(S, 'S', tol)


def selfadjoint_via_range(S: LinearRelation,
                          tol: Optional[TolerancePolicy] = None) -> CriterionReport:
    _square_operator(S, 'selfadjoint_via_range', tol)
    core = intersect_relations(S, adjoint(S), tol)
    return CriterionReport.build('selfadjoint-range', {
        'ran_core_full': is_surjective(core, tol),
    }, conclusion_verified=oracle_mutually_adjoint(S, S, tol))


def stone_surjective_symmetric(S: LinearRelation,
                               tol: Optional[TolerancePolicy] = None) -> CriterionReport:
    _square_operator(S, 'stone_surjective_symmetric', tol)
    return CriterionReport.build('stone', {
        'symmetric': is_symmetric(S, tol),
        'surjective': is_surjective(S, tol),
    }, conclusion_verified=oracle_mutually_adjoint(S, S, tol))


# equivalences for adjoint pairs


def adjoint_identification(S: LinearRelation, T: LinearRelation,
                           tol: Optional[TolerancePolicy] = None) -> CriterionReport:
    """Is S the adjoint of an everywhere-defined T?"""
    _require_operators(S, T, tol)
    T_adj = adjoint(T)
    core = intersect_relations(S, T_adj, tol)
    conditions = {
        'ker_S_is_ran_T_perp': equals(complement(ran(T, tol)), ker(S, tol), tol),
        'ranges_in_core': contains(ran(core, tol),
                                   add(ran(S, tol), ran(T_adj, tol), tol), tol),
    }
    report = CriterionReport.build('adjoint-ident', conditions)
    statements = {
        'i': conjunction([is_everywhere_defined(T, tol),
                          equals(S.graph, T_adj.graph, tol)]),
        'ii': report.overall,
    }
    return dataclasses.replace(report, statements=statements)


def von_neumann_ranges(S: LinearRelation, T: LinearRelation,
                       tol: Optional[TolerancePolicy] = None) -> CriterionReport:
    """
    S and T are mutually adjoint iff I + T0 S0 maps onto H and I + S0 T0
    maps onto K, where S0 = S meet T* and T0 = T meet S* are the cores.
    """
    _require_operators(S, T, tol)
    S0, T0 = _cores(S, T, tol)
    conditions = {
        'ran_I_plus_T0S0': is_surjective(add_scalar(compose(T0, S0, tol), 1, tol), tol),
        'ran_I_plus_S0T0': is_surjective(add_scalar(compose(S0, T0, tol), 1, tol), tol),
    }
    report = CriterionReport.build('von-neumann', conditions)
    diagnostics = {
        'cores_mutually_adjoint': conjunction([
            equals(adjoint(S0).graph, T0.graph, tol),
            equals(adjoint(T0).graph, S0.graph, tol),
        ]),
        'formally_adjoint_cores': formally_adjoint(S0, T0, tol),
    }
    statements = {
        'i': oracle_mutually_adjoint(S, T, tol),
        'ii': report.overall,
    }
    return dataclasses.replace(report, statements=statements, diagnostics=diagnostics)


def closedness_via_ranges(S: LinearRelation,
                          tol: Optional[TolerancePolicy] = None) -> CriterionReport:
    """
    For an everywhere-defined operator S: S is closed, S*S and SS* are
    self-adjoint, and I + S*S, I + SS* are onto. All three always hold in
    finite dimension.
    """
    require_operator(S, 'S', tol)
    if not is_everywhere_defined(S, tol).verdict:
        raise PreconditionError('closedness_via_ranges needs an everywhere-defined operator')
    S_adj = adjoint(S)
    ranges = von_neumann_ranges(S, S_adj, tol)
    statements = {
        'i': conjunction([
            equals(closure(S).graph, S.graph, tol),
            equals(adjoint(S_adj).graph, S.graph, tol),
        ]),
        'ii': conjunction([
            is_selfadjoint(compose(S_adj, S, tol), tol),
            is_selfadjoint(compose(S, S_adj, tol), tol),
        ]),
        'iii': ranges.overall,
    }
    return CriterionReport.build('closedness', ranges.conditions, statements=statements)


def symmetric_adjoint_characterization(T: LinearRelation,
                                       tol: Optional[TolerancePolicy] = None) -> CriterionReport:
    """Is T the adjoint of some everywhere-defined symmetric operator? T*
    is the canonical witness."""
    _square_operator(T, 'symmetric_adjoint_characterization', tol)
    T_adj = adjoint(T)
    T_adj_adj = adjoint(T_adj)
    core = intersect_relations(T, T_adj, tol)
    conditions = {
        'ker_T_is_ran_T_adj_perp': equals(ker(T, tol), complement(ran(T_adj, tol)), tol),
        'core_ranges_agree': conjunction([
            equals(ran(core, tol), ran(T_adj_adj, tol), tol),
            equals(ran(T_adj_adj, tol), ran(T_adj, tol), tol),
        ]),
    }
    report = CriterionReport.build('symmetric-adjoint', conditions)
    statements = {
        'i': conjunction([
            is_everywhere_defined(T, tol),
            is_operator(T_adj, tol),
            contains(T.graph, T_adj.graph, tol),
        ]),
        'ii': report.overall,
    }
    return dataclasses.replace(report, statements=statements)


def formal_adjointness(S: LinearRelation, T: LinearRelation,
                       tol: Optional[TolerancePolicy] = None) -> CriterionReport:
    """The pairing identity <S x, y> = <x, T y> against its graph form
    S in T*, T in S*."""
    _require_operators(S, T, tol)
    policy = default_policy(tol)
    statements = {
        'pairing': CheckResult.at_most(pairing_defect(S, T, tol), policy.pairing_tol,
                                       'pairing_defect'),
        'graph': formally_adjoint(S, T, tol),
    }
    return CriterionReport.build('formal-adjoint', statements, statements=statements)
