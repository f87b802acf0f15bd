import itertools

import gin
import numpy as np
import pytest

from linrel import campaign
from linrel.core import PreconditionError
from linrel.generate import GENERATOR_ID, GenConfig, random_adjoint_pair
from linrel.problem import CHECKS, parse_problem
from linrel.relation import from_matrix
from linrel.subspace import FieldTag

gin.enter_interactive_mode()

fields = [FieldTag.REAL, FieldTag.COMPLEX]


def test_registry_covers_every_check():
    assert set(campaign.CRITERIA) == set(CHECKS)


def test_suite_ids():
    assert set(campaign.SUITES) == {
        'arens', 'arens-eq', 'arens-eq-incl', 'gen-stone', 'surjective-pair',
        'selfadjoint-range', 'stone', 'adjoint-ident', 'von-neumann', 'closedness',
        'symmetric-adjoint', 'nieminen', 'nieminen-selfadjoint', 'nieminen-skew',
        'nieminen-unitary'
    }
    for suite in campaign.SUITES.values():
        assert suite.check_id in CHECKS


@pytest.mark.parametrize('check_id', sorted(CHECKS))
def test_evaluate_every_check(check_id):
    gin.clear_config()
    S, T = random_adjoint_pair(GenConfig(seed=1), 2, 2, norm=1.)
    if check_id.startswith('arens'):
        # the inclusion variant needs S contained in T
        T = S
    report = campaign.evaluate(check_id, S, T)
    assert report.overall.verdict in (True, False)
    assert report.to_dict()['overall']['verdict'] == report.overall.verdict


def test_evaluate_needs_t_for_pair_checks():
    with pytest.raises(PreconditionError):
        campaign.evaluate('von_neumann_ranges', from_matrix([[1.]]))
    with pytest.raises(PreconditionError):
        campaign.evaluate('no_such_check', from_matrix([[1.]]))


def test_run_campaign_preconditions():
    with pytest.raises(PreconditionError):
        campaign.run_campaign('no-such-theorem', 10)
    with pytest.raises(PreconditionError):
        campaign.run_campaign('arens', 0)
    with pytest.raises(PreconditionError):
        campaign.run_campaign('arens', 1, perturb_fraction=2.)


@pytest.mark.parametrize('theorem_id,field',
                         itertools.product(sorted(campaign.SUITES), fields))
def test_suites_hold(theorem_id, field):
    gin.clear_config()
    report = campaign.run_campaign(theorem_id, 40, GenConfig(seed=11, field=field))
    assert report.ok, report.to_dict()
    assert report.passed + report.skipped == 40
    assert report.generator == GENERATOR_ID
    assert sum(report.mix.values()) == 40


@pytest.mark.parametrize('theorem_id', ['arens', 'arens-eq', 'arens-eq-incl'])
def test_arens_suites_rarely_skip(theorem_id):
    report = campaign.run_campaign(theorem_id, 60, GenConfig(seed=3))
    assert report.ok
    assert report.skipped_fraction < .05


@pytest.mark.parametrize('theorem_id', ['adjoint-ident', 'symmetric-adjoint', 'von-neumann'])
def test_equivalence_suites_see_both_outcomes(theorem_id):
    report = campaign.run_campaign(theorem_id, 500, GenConfig(seed=7), workers=4)
    assert report.ok
    assert report.true_positives >= 100
    assert report.true_negatives >= 100


def test_one_way_suites_report_converse_witnesses():
    report = campaign.run_campaign('surjective-pair', 100, GenConfig(seed=2))
    assert report.ok
    # the zero pair is mutually adjoint but not surjective
    assert report.converse_witnesses >= 1


def test_forced_perturbations_are_detected():
    report = campaign.run_campaign('nieminen', 30, GenConfig(seed=5), perturb_fraction=1.)
    assert report.ok
    assert report.mix == {'perturbed': 30}
    assert report.true_negatives + report.skipped == 30
    assert report.true_negatives > 0


def test_campaigns_are_deterministic():
    cfg = GenConfig(seed=9, field=FieldTag.COMPLEX)
    first = campaign.run_campaign('von-neumann', 30, cfg).to_dict()
    second = campaign.run_campaign('von-neumann', 30, cfg).to_dict()
    threaded = campaign.run_campaign('von-neumann', 30, cfg, workers=4).to_dict()
    assert first == second == threaded


def test_seed_changes_instances():
    a = campaign.SUITES['nieminen'].instances(GenConfig(seed=1), .25)
    b = campaign.SUITES['nieminen'].instances(GenConfig(seed=2), .25)
    assert a.S.h_dim != b.S.h_dim or not np.allclose(a.S.graph.basis, b.S.graph.basis)


def test_violations_are_dumped(tmp_path, monkeypatch):
    monkeypatch.setitem(campaign._JUDGES, 'implication',
                        lambda report, instance: ('violation', None, False))
    report = campaign.run_campaign('gen-stone', 3, GenConfig(seed=4), out_path=tmp_path)
    assert not report.ok
    assert len(report.counterexamples) == len(report.violations)
    trial = report.violations[0]
    problem = parse_problem(report.counterexamples[0])
    assert problem.checks == ('gen_stone',)
    assert problem.meta['theorem'] == 'gen-stone'
    assert problem.meta['trial'] == trial
    assert problem.meta['trial_seed'] == 4 ^ trial
    assert problem.meta['generator'] == GENERATOR_ID
    S, T = problem.relations()
    assert S.h_dim == T.k_dim


def test_campaign_grid_reaches_the_criterion(monkeypatch):
    grids = []
    evaluate = campaign.evaluate

    def recording(check_id, S, T=None, tol=None, grid=None):
        grids.append(grid)
        return evaluate(check_id, S, T, tol, grid)

    monkeypatch.setattr(campaign, 'evaluate', recording)
    report = campaign.run_campaign('nieminen', 20, GenConfig(seed=3), grid=[-.5, .5])
    assert report.ok
    assert grids == [[-.5, .5]] * 20


def test_campaign_grid_is_reported_with_counterexamples(tmp_path, monkeypatch):
    monkeypatch.setitem(campaign._JUDGES, 'resolvent',
                        lambda report, instance: ('violation', None, False))
    report = campaign.run_campaign('nieminen', 5, GenConfig(seed=1), out_path=tmp_path,
                                   grid=[-2., 1.])
    assert report.counterexamples
    problem = parse_problem(report.counterexamples[0])
    assert problem.meta['grid'] == [-2., 1.]
    assert problem.checks == ('nieminen',)


def test_campaign_rejects_zero_in_grid():
    with pytest.raises(PreconditionError):
        campaign.run_campaign('nieminen', 3, GenConfig(seed=1), grid=[0., 1.])


def test_grid_only_probing_misses_perturbations():
    gin.clear_config()
    gin.parse_config('include_critical.enabled = False')
    try:
        grid_only = campaign.run_campaign('nieminen', 200, GenConfig(seed=11),
                                          perturb_fraction=1., workers=4)
    finally:
        gin.clear_config()
    assert grid_only.violations
    report = campaign.run_campaign('nieminen', 200, GenConfig(seed=11),
                                   perturb_fraction=1., workers=4)
    assert report.ok
