"""
Command implementations behind the `linrel` scripts. Each command returns
the rendered output and an exit status: 0 when every verdict holds, 1
when one fails and 2 on input or precondition errors.
"""
import json
import math
from typing import List, NamedTuple, Optional, Sequence

import gin
import numpy as np
from absl import logging

from .campaign import DEFAULT_PERTURB_FRACTION, evaluate, run_campaign
from .core import LinrelError, PreconditionError, add_gin_extension
from .generate import GenConfig
from .problem import Problem, encode_rows, serialize
from .relation import adjoint, parts
from .resolvent import probe
from .subspace import Subspace, TolerancePolicy

FORMATS = ('text', 'machine')

# flag name -> gin binding
BINDINGS = {
    'tol_rank': 'TolerancePolicy.rank_rel_eps',
    'tol_subspace': 'TolerancePolicy.subspace_eq_tol',
    'field': 'GenConfig.field',
    'seed': 'GenConfig.seed',
    'dim_max': 'GenConfig.max_dim',
}


class CommandResult(NamedTuple):
    output: str
    status: int


def configure(configs: Sequence[str] = (), overrides: Sequence[str] = (), **bindings):
    """Parse gin files and bindings, then apply the flag values that were
    given (None means unset)."""
    gin.parse_config_files_and_bindings(map(add_gin_extension, configs), overrides)
    for name, value in bindings.items():
        if value is not None:
            gin.bind_parameter(BINDINGS[name], value)


def parse_grid(text: Optional[str]) -> Optional[List[float]]:
    if not text:
        return None
    try:
        return [float(t) for t in text.split(',')]
    except ValueError:
        raise PreconditionError(f'grid must be comma-separated numbers, got {text!r}') from None


def _check_format(fmt: str):
    if fmt not in FORMATS:
        raise PreconditionError(f'format must be one of {FORMATS}, got {fmt!r}')


def _machine(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + '\n'


def _error(message: str) -> CommandResult:
    logging.error(message)
    return CommandResult('', 2)


def _status(verdicts) -> int:
    return 0 if all(verdicts) else 1


# check


def _verdict(value: bool) -> str:
    return 'true' if value else 'false'


def _render_check(entries: dict) -> str:
    lines = []
    for check_id, entry in entries.items():
        if 'error' in entry:
            lines.append(f'{check_id}: error: {entry["error"]}')
            continue
        overall = entry['overall']
        lines.append(f'{check_id}: {_verdict(overall["verdict"])} (margin {overall["margin"]})')
        for name, result in entry.get('conditions', {}).items():
            lines.append(f'  {name}: {_verdict(result["verdict"])}  {result["trace"]}')
        for name, result in entry.get('statements', {}).items():
            lines.append(f'  statement {name}: {_verdict(result["verdict"])}')
        if 'oracle' in entry:
            lines.append(f'  oracle: {_verdict(entry["oracle"]["verdict"])}')
            failing = [p['t'] for p in entry['probes'] + entry['critical_probes']
                       if not p['satisfied']['verdict']]
            if failing:
                lines.append(f'  failing at t = {", ".join(f"{t:g}" for t in failing)}')
    return '\n'.join(lines) + '\n'


def cmd_check(problem: Problem, fmt: str = 'text',
              grid: Optional[Sequence[float]] = None) -> CommandResult:
    """Run each requested criterion on the problem's relations."""
    try:
        _check_format(fmt)
        tol = problem.tol
        S, T = problem.relations(tol)
    except LinrelError as e:
        return _error(str(e))

    entries, failed = {}, False
    for check_id in problem.checks:
        try:
            report = evaluate(check_id, S, T, tol, grid)
        except LinrelError as e:
            logging.error('%s: %s', check_id, e)
            entries[check_id] = {'error': str(e)}
            failed = True
            continue
        entries[check_id] = report.to_dict()
    status = 2 if failed else _status(e['overall']['verdict'] for e in entries.values())

    if fmt == 'machine':
        output = _machine({'problem': serialize(problem), 'results': entries, 'status': status})
    else:
        output = _render_check(entries)
    return CommandResult(output, status)


# adjoint


def _subspace_out(space: Subspace, field) -> dict:
    return {'dim': space.dim, 'basis': encode_rows(np.asarray(space.basis).T, field)}


def cmd_adjoint(problem: Problem, fmt: str = 'text') -> CommandResult:
    """Graph basis of S* together with its domain, range, kernel and
    multivalued part."""
    try:
        _check_format(fmt)
        tol = problem.tol
        S, _ = problem.relations(tol)
        S_adj = adjoint(S)
        adjoint_parts = parts(S_adj, tol)
    except LinrelError as e:
        return _error(str(e))

    data = {
        'h_dim': S_adj.h_dim,
        'k_dim': S_adj.k_dim,
        'graph': _subspace_out(S_adj.graph, problem.field),
        'parts': {name: _subspace_out(getattr(adjoint_parts, name), problem.field)
                  for name in ('dom', 'ran', 'ker', 'mul')},
    }
    if fmt == 'machine':
        return CommandResult(_machine(data), 0)

    lines = [f'S*: relation from K (dim {S_adj.h_dim}) to H (dim {S_adj.k_dim}), '
             f'graph dimension {data["graph"]["dim"]}']
    for vector in data['graph']['basis']:
        lines.append(f'  {vector}')
    for name, space in data['parts'].items():
        lines.append(f'{name} S*: dimension {space["dim"]}')
        for vector in space['basis']:
            lines.append(f'  {vector}')
    return CommandResult('\n'.join(lines) + '\n', 0)


# verify


def _render_campaign(data: dict) -> str:
    lines = [
        f'{data["theorem"]} ({data["criterion"]}, {data["kind"]}): '
        f'{data["trials"]} trials, seed {data["seed"]}, {data["field"]} field',
        f'  passed {data["passed"]}, skipped {data["skipped"]}, '
        f'violations {len(data["violations"])}',
    ]
    if data['kind'] == 'implication':
        lines.append(f'  converse witnesses {data["converse_witnesses"]}')
    else:
        lines.append(f'  true positives {data["true_positives"]}, '
                     f'true negatives {data["true_negatives"]}')
    lines.append('  mix ' + ', '.join(f'{k}={v}' for k, v in data['mix'].items()))
    for trial, path in zip(data['violations'], data['counterexamples']):
        lines.append(f'  trial {trial}: counterexample {path}')
    return '\n'.join(lines) + '\n'


def cmd_verify_theorem(theorem_id: str, trials: int,
                       cfg: Optional[GenConfig] = None,
                       tol: Optional[TolerancePolicy] = None,
                       fmt: str = 'text',
                       workers: int = 1,
                       progress: bool = False,
                       perturb_fraction: float = DEFAULT_PERTURB_FRACTION,
                       out_path=None,
                       grid: Optional[Sequence[float]] = None) -> CommandResult:
    """Randomized verification campaign; exit status 1 on any violation."""
    try:
        _check_format(fmt)
        report = run_campaign(theorem_id, trials, cfg, tol, workers=workers,
                              progress=progress, perturb_fraction=perturb_fraction,
                              out_path=out_path, grid=grid)
    except LinrelError as e:
        return _error(str(e))
    data = report.to_dict()
    output = _machine(data) if fmt == 'machine' else _render_campaign(data)
    return CommandResult(output, 0 if report.ok else 1)


# norm profile


def profile_points(t_min: float, t_max: float, points: int) -> np.ndarray:
    if not 0 < t_min < t_max or not math.isfinite(t_max):
        raise PreconditionError(f'need 0 < t_min < t_max, got {t_min}, {t_max}')
    if points < 2:
        raise PreconditionError(f'need at least 2 points, got {points}')
    ts = np.geomspace(t_min, t_max, points)
    return np.concatenate([-ts[::-1], ts])


def cmd_norm_profile(problem: Problem, t_min: float, t_max: float,
                     points: int) -> CommandResult:
    """CSV rows `t,norm,bound,satisfied` for -t_max..-t_min and
    t_min..t_max on a log-spaced grid; the norm is `inf` outside the
    resolvent set."""
    try:
        ts = profile_points(t_min, t_max, points)
        tol = problem.tol
        S, T = problem.relations(tol)
        if T is None:
            raise PreconditionError('the norm profile needs both S and T')
    except LinrelError as e:
        return _error(str(e))

    rows = ['t,norm,bound,satisfied']
    verdicts = []
    for t in ts:
        p = probe(S, T, float(t), tol)
        norm = 'inf' if p.norm is None else repr(p.norm)
        rows.append(f'{float(t)!r},{norm},{p.bound!r},{_verdict(p.satisfied.verdict)}')
        verdicts.append(p.satisfied.verdict)
    return CommandResult('\n'.join(rows) + '\n', _status(verdicts))
