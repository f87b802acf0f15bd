import json

import gin
import pytest

from linrel import cli
from linrel.core import LinrelError, PreconditionError
from linrel.generate import GenConfig
from linrel.problem import parse_problem, problem_from_dict
from linrel.subspace import FieldTag, TolerancePolicy

gin.enter_interactive_mode()


def _scalar_pair(s, t, checks):
    return problem_from_dict({
        'field': 'real',
        'h_dim': 1,
        'k_dim': 1,
        'S': {'kind': 'operator', 'matrix': [[s]], 'domain_basis': None},
        'T': {'kind': 'operator', 'matrix': [[t]], 'domain_basis': None},
        'checks': checks,
    })


def _single(S, h_dim, k_dim):
    return problem_from_dict({
        'field': 'real',
        'h_dim': h_dim,
        'k_dim': k_dim,
        'S': S,
        'checks': ['closedness_via_ranges'],
    })


def test_check_exit_codes():
    holds = cli.cmd_check(_scalar_pair(2, 2, ['von_neumann_ranges', 'formal_adjointness']))
    assert holds.status == 0
    assert 'von_neumann_ranges: true' in holds.output
    fails = cli.cmd_check(_scalar_pair(1, 2, ['nieminen']))
    assert fails.status == 1
    assert 'nieminen: false' in fails.output
    assert 'failing at t = ' in fails.output
    # S = [1] is not contained in T = [2]
    errors = cli.cmd_check(_scalar_pair(1, 2, ['arens_equality_under_inclusion']))
    assert errors.status == 2
    assert 'error' in errors.output


def test_check_machine_output():
    result = cli.cmd_check(_scalar_pair(1, 2, ['nieminen', 'oracle_mutually_adjoint']),
                           fmt='machine')
    data = json.loads(result.output)
    assert data['status'] == result.status == 1
    assert set(data['results']) == {'nieminen', 'oracle_mutually_adjoint'}
    assert data['results']['nieminen']['pairing_defect'] == pytest.approx(1.)
    assert data['problem']['checks'] == ['nieminen', 'oracle_mutually_adjoint']


def test_check_custom_grid():
    # the bound holds for |t| <= 2
    result = cli.cmd_check(_scalar_pair(1, 2, ['nieminen']), grid=[-1.5, 1.5])
    assert 'failing at t = ' in result.output
    assert '1.5' not in result.output.split('failing at t = ')[1]


def test_check_rejects_unknown_format():
    assert cli.cmd_check(_scalar_pair(1, 1, ['nieminen']), fmt='yaml').status == 2


def test_adjoint_of_total_operator():
    problem = _single({'kind': 'operator', 'matrix': [[1, 2]], 'domain_basis': None}, 2, 1)
    result = cli.cmd_adjoint(problem, fmt='machine')
    assert result.status == 0
    data = json.loads(result.output)
    assert (data['h_dim'], data['k_dim']) == (1, 2)
    assert data['graph']['dim'] == 1
    dims = {name: part['dim'] for name, part in data['parts'].items()}
    assert dims == {'dom': 1, 'ran': 1, 'ker': 0, 'mul': 0}
    (vector,) = data['graph']['basis']
    # (k, A^H k) is proportional to (1, 1, 2)
    assert vector[1] == pytest.approx(vector[0])
    assert vector[2] == pytest.approx(2 * vector[0])


def test_adjoint_of_partial_operator():
    problem = _single(
        {'kind': 'operator', 'matrix': [[0, 0], [1, 0]], 'domain_basis': [[1, 0]]}, 2, 2)
    data = json.loads(cli.cmd_adjoint(problem, fmt='machine').output)
    dims = {name: part['dim'] for name, part in data['parts'].items()}
    assert dims == {'dom': 2, 'ran': 2, 'ker': 1, 'mul': 1}
    (mul,) = data['parts']['mul']['basis']
    assert abs(mul[0]) == pytest.approx(0., abs=1e-12)
    assert abs(mul[1]) == pytest.approx(1.)


def test_adjoint_of_zero_relation_is_everything():
    problem = _single({'kind': 'relation', 'graph_spanners': []}, 2, 1)
    result = cli.cmd_adjoint(problem)
    assert result.status == 0
    assert 'graph dimension 3' in result.output
    assert 'mul S*: dimension 2' in result.output


def test_verify_theorem():
    gin.clear_config()
    result = cli.cmd_verify_theorem('von-neumann', 200, GenConfig(seed=7))
    assert result.status == 0
    assert 'violations 0' in result.output
    machine = cli.cmd_verify_theorem('von-neumann', 20, GenConfig(seed=1), fmt='machine')
    again = cli.cmd_verify_theorem('von-neumann', 20, GenConfig(seed=1), fmt='machine')
    assert machine.output == again.output
    assert json.loads(machine.output)['trials'] == 20


def test_verify_theorem_input_errors():
    assert cli.cmd_verify_theorem('no-such-theorem', 10).status == 2
    assert cli.cmd_verify_theorem('arens', 0).status == 2
    assert cli.cmd_verify_theorem('nieminen', 5, GenConfig(seed=1), grid=[0.]).status == 2


def test_verify_theorem_with_grid():
    gin.clear_config()
    result = cli.cmd_verify_theorem('nieminen', 30, GenConfig(seed=2),
                                    grid=cli.parse_grid('-0.25,4'), fmt='machine')
    assert result.status == 0
    data = json.loads(result.output)
    assert data['trials'] == 30
    assert data['violations'] == []


def test_profile_points():
    ts = cli.profile_points(.1, 10., 3)
    assert list(ts) == pytest.approx([-10., -1., -.1, .1, 1., 10.])
    with pytest.raises(PreconditionError):
        cli.profile_points(1., .5, 3)
    with pytest.raises(PreconditionError):
        cli.profile_points(0., 1., 3)
    with pytest.raises(PreconditionError):
        cli.profile_points(.1, 1., 1)


def _rows(result):
    header, *rows = result.output.strip().split('\n')
    assert header == 't,norm,bound,satisfied'
    return [row.split(',') for row in rows]


def test_norm_profile_of_zero_pair():
    result = cli.cmd_norm_profile(_scalar_pair(0, 0, ['nieminen']), .1, 10., 5)
    rows = _rows(result)
    assert result.status == 0
    assert len(rows) == 10
    for t, norm, bound, satisfied in rows:
        assert float(norm) == pytest.approx(float(bound))
        assert float(bound) == pytest.approx(1 / abs(float(t)))
        assert satisfied == 'true'


def test_norm_profile_of_adjoint_pair():
    result = cli.cmd_norm_profile(_scalar_pair(2, 2, ['nieminen']), 1e-2, 1e2, 9)
    assert result.status == 0
    assert all(satisfied == 'true' for *_, satisfied in _rows(result))


def test_norm_profile_of_mismatched_pair():
    result = cli.cmd_norm_profile(_scalar_pair(1, 2, ['nieminen']), .1, 10., 5)
    assert result.status == 1
    for t, norm, bound, satisfied in _rows(result):
        assert satisfied == ('false' if abs(float(t)) >= 3 else 'true')


def test_norm_profile_outside_resolvent_set():
    # M = [[0, 1], [1, 0]] has eigenvalues +-1
    result = cli.cmd_norm_profile(_scalar_pair(1, -1, ['nieminen']), 1., 2., 2)
    rows = {float(t): (norm, satisfied) for t, norm, _, satisfied in _rows(result)}
    assert rows[1.] == ('inf', 'false')
    assert rows[-1.] == ('inf', 'false')
    assert result.status == 1


def test_norm_profile_input_errors():
    assert cli.cmd_norm_profile(_scalar_pair(1, 1, ['nieminen']), 2., 1., 5).status == 2
    single = _single({'kind': 'operator', 'matrix': [[1]], 'domain_basis': None}, 1, 1)
    assert cli.cmd_norm_profile(single, .1, 1., 5).status == 2


def test_parse_grid():
    assert cli.parse_grid(None) is None
    assert cli.parse_grid('-1,0.5,2') == [-1., .5, 2.]
    with pytest.raises(PreconditionError):
        cli.parse_grid('1,two')


def test_configure_binds_flags():
    gin.clear_config()
    cli.configure(['default'], ['GenConfig.max_dim = 4'], tol_rank=1e-12, seed=3,
                  field='complex', tol_subspace=None)
    cfg = GenConfig()
    assert cfg.seed == 3
    assert cfg.max_dim == 4
    assert cfg.field is FieldTag.COMPLEX
    assert TolerancePolicy().rank_rel_eps == 1e-12
    gin.clear_config()


@pytest.mark.parametrize('entry', ['1e999', '9' * 400])
def test_out_of_range_problem_file_is_an_input_error(tmp_path, entry):
    text = json.dumps({
        'field': 'real',
        'h_dim': 1,
        'k_dim': 1,
        'S': {'kind': 'operator', 'matrix': [[1]], 'domain_basis': None},
        'T': {'kind': 'operator', 'matrix': [[1]], 'domain_basis': None},
        'checks': ['nieminen'],
    }).replace('[[1]]', f'[[{entry}]]', 1)
    path = tmp_path / 'pair.json'
    path.write_text(text)
    with pytest.raises(LinrelError, match='pair.json:S.matrix'):
        parse_problem(path)
