import itertools

import gin
import numpy as np
import pytest

from linrel import characterize
from linrel.core import NotAnOperatorError, PreconditionError
from linrel.generate import (GenConfig, perturb_pairing, random_adjoint_pair,
                             random_operator, random_relation, random_subrelation,
                             random_symmetric, restrict_to_partial)
from linrel.relation import (OperatorSpec, adjoint, from_matrix, from_operator,
                             from_spanners)
from linrel.subspace import FieldTag, orthonormal_basis

gin.enter_interactive_mode()

fields = [FieldTag.REAL, FieldTag.COMPLEX]
seeds = range(15)


def _agree(report):
    # boundary-ambiguous reports are not judged
    return report.ambiguous() or report.statements_agree()


def _e1_to_e2():
    domain = orthonormal_basis(np.array([[1.], [0.]]))
    return from_operator(OperatorSpec(np.array([[0., 0.], [1., 0.]]), domain))


def test_oracle_on_scalar_pairs():
    assert characterize.oracle_mutually_adjoint(from_matrix([[2.]]), from_matrix([[2.]])).verdict
    assert not characterize.oracle_mutually_adjoint(from_matrix([[1.]]),
                                                    from_matrix([[2.]])).verdict


def test_oracle_rejects_partial_operators():
    S = _e1_to_e2()
    assert not characterize.oracle_mutually_adjoint(S, adjoint(S)).verdict


def test_arens_inclusion_on_nested_operators():
    T = from_matrix(np.diag([1., 2.]))
    S = from_operator(OperatorSpec(np.diag([1., 2.]), orthonormal_basis([[1.], [0.]])))
    report = characterize.arens_inclusion(S, T)
    assert report.overall.verdict
    assert set(report.statements) == {'i', 'ii', 'iii'}
    assert _agree(report)
    reverse = characterize.arens_inclusion(T, S)
    assert not reverse.statements['i'].verdict
    assert _agree(reverse)


@pytest.mark.parametrize('field,seed', itertools.product(fields, seeds))
def test_arens_statements_agree(field, seed):
    cfg = GenConfig(seed=seed, field=field)
    h, k = 1 + seed % 4, 1 + (seed // 4) % 4
    T = random_relation(cfg.spawn('T'), h, k, 1 + seed % (h + k))
    S = random_subrelation(cfg.spawn('S'), T, seed % (T.dim + 1))
    U = random_relation(cfg.spawn('U'), h, k, 1 + (seed // 2) % (h + k))
    for report in [characterize.arens_inclusion(S, T),
                   characterize.arens_inclusion(U, T),
                   characterize.arens_equality(S, T),
                   characterize.arens_equality(U, T),
                   characterize.arens_equality_under_inclusion(S, T)]:
        if not report.ambiguous():
            assert report.statements_agree(), report.to_dict()
    assert characterize.arens_inclusion(S, T).overall.verdict


def test_arens_equality_under_inclusion_needs_inclusion():
    with pytest.raises(PreconditionError):
        characterize.arens_equality_under_inclusion(from_matrix([[1.]]), from_matrix([[2.]]))


def test_arens_equality_of_identical_relations():
    R = from_spanners([[1, 0], [0, 1], [1, 0], [2, 1]], 2, 2)
    assert characterize.arens_equality(R, R).overall.verdict


def test_checkers_reject_multivalued_inputs():
    R = from_spanners([[0], [1]], 1, 1)
    with pytest.raises(NotAnOperatorError):
        characterize.gen_stone(R, from_matrix([[1.]]))


@pytest.mark.parametrize('field,seed', itertools.product(fields, seeds))
def test_one_way_criteria_on_adjoint_pairs(field, seed):
    cfg = GenConfig(seed=seed, field=field)
    n = 1 + seed % 6
    S, T = random_adjoint_pair(cfg, n, n)
    # square Gaussian matrices are invertible with margin
    for report in [characterize.gen_stone(S, T), characterize.surjective_pair(S, T)]:
        assert report.overall.verdict
        assert report.conclusion_verified.verdict
        assert report.implication_holds()


def test_zero_operator_witnesses_converse_failure():
    Z = from_matrix(np.zeros((2, 2)))
    for report in [characterize.surjective_pair(Z, Z),
                   characterize.stone_surjective_symmetric(Z)]:
        assert not report.overall.verdict
        assert report.conclusion_verified.verdict
        assert report.implication_holds()


def test_gen_stone_converse_witness():
    # S0 = 0 meet 0* = 0, whose range is {0}
    Z = from_matrix(np.zeros((2, 2)))
    report = characterize.gen_stone(Z, Z)
    assert not report.conditions['ran_S0_full'].verdict
    assert report.conclusion_verified.verdict


@pytest.mark.parametrize('seed', range(10))
def test_stone_on_symmetric_operators(seed):
    S = random_symmetric(GenConfig(seed=seed), 1 + seed % 6)
    report = characterize.stone_surjective_symmetric(S)
    assert report.overall.verdict and report.implication_holds()
    assert characterize.selfadjoint_via_range(S).overall.verdict


def test_selfadjoint_via_range_on_nonsymmetric_operator():
    S = from_matrix([[0., 1.], [0., 0.]])
    report = characterize.selfadjoint_via_range(S)
    assert not report.overall.verdict
    assert not report.conclusion_verified.verdict


@pytest.mark.parametrize('field,seed', itertools.product(fields, seeds))
def test_adjoint_identification_biconditional(field, seed):
    cfg = GenConfig(seed=seed, field=field)
    h, k = 1 + seed % 5, 1 + (seed // 5) % 5
    S, T = random_adjoint_pair(cfg, h, k)
    clean = characterize.adjoint_identification(T, S)
    assert clean.statements['i'].verdict and _agree(clean)
    S_perturbed, T_perturbed, _ = perturb_pairing(S, T, .1, cfg)
    perturbed = characterize.adjoint_identification(T_perturbed, S_perturbed)
    assert not perturbed.statements['i'].verdict and _agree(perturbed)
    partial = restrict_to_partial(T, cfg, seed % k)
    restricted = characterize.adjoint_identification(partial, S)
    assert not restricted.statements['i'].verdict and _agree(restricted)


@pytest.mark.parametrize('field,seed', itertools.product(fields, seeds))
def test_von_neumann_biconditional(field, seed):
    cfg = GenConfig(seed=seed, field=field)
    h, k = 1 + seed % 5, 1 + (seed // 5) % 5
    S, T = random_adjoint_pair(cfg, h, k)
    report = characterize.von_neumann_ranges(S, T)
    assert report.overall.verdict and _agree(report)
    assert report.diagnostics['cores_mutually_adjoint'].verdict
    assert report.diagnostics['formally_adjoint_cores'].verdict
    S_perturbed, T_perturbed, _ = perturb_pairing(S, T, .1, cfg)
    perturbed = characterize.von_neumann_ranges(S_perturbed, T_perturbed)
    assert not perturbed.overall.verdict and _agree(perturbed)


def test_von_neumann_partial_counterexample():
    # S: e1 -> e2 on span{e1}, T = 0 on all of H
    S = _e1_to_e2()
    T = from_matrix(np.zeros((2, 2)))
    report = characterize.von_neumann_ranges(S, T)
    assert not report.statements['i'].verdict
    assert not report.overall.verdict
    assert _agree(report)


@pytest.mark.parametrize('seed', range(10))
def test_closedness_statements_all_hold(seed):
    cfg = GenConfig(seed=seed, field=fields[seed % 2])
    S = random_operator(cfg, 1 + seed % 4, 1 + (seed // 4) % 4, 1 + seed % 4)
    report = characterize.closedness_via_ranges(S)
    assert all(s.verdict for s in report.statements.values())
    assert report.overall.verdict


def test_closedness_needs_total_operator():
    with pytest.raises(PreconditionError):
        characterize.closedness_via_ranges(_e1_to_e2())


@pytest.mark.parametrize('seed', range(10))
def test_symmetric_adjoint_characterization(seed):
    cfg = GenConfig(seed=seed)
    n = 2 + seed % 4
    S = random_symmetric(cfg, n)
    report = characterize.symmetric_adjoint_characterization(S)
    assert report.statements['i'].verdict and _agree(report)
    general = random_operator(cfg.spawn('general'), n, n, n)
    report = characterize.symmetric_adjoint_characterization(general)
    assert not report.statements['i'].verdict and _agree(report)
    partial = restrict_to_partial(S, cfg, seed % n)
    report = characterize.symmetric_adjoint_characterization(partial)
    assert not report.statements['i'].verdict and _agree(report)


@pytest.mark.parametrize('seed', range(10))
def test_formal_adjointness_statements_agree(seed):
    cfg = GenConfig(seed=seed, field=fields[seed % 2])
    S, T = random_adjoint_pair(cfg, 1 + seed % 4, 1 + seed % 3)
    assert characterize.formal_adjointness(S, T).overall.verdict
    _, T_perturbed, _ = perturb_pairing(S, T, .1, cfg)
    report = characterize.formal_adjointness(S, T_perturbed)
    assert not report.overall.verdict and _agree(report)


def test_report_serialization():
    report = characterize.von_neumann_ranges(from_matrix([[1.]]), from_matrix([[1.]]))
    data = report.to_dict()
    assert data['criterion'] == 'von-neumann'
    assert data['overall']['verdict'] is True
    assert set(data['statements']) == {'i', 'ii'}
    assert 'diagnostics' in data
