"""
JSON problem files: the input of `linrel check`, `adjoint` and `profile`
and the format of counterexample dumps.

    {"field": "real" | "complex", "h_dim": n, "k_dim": m,
     "S": REL, "T": REL | null, "checks": [ids], "tol": {...}, "meta": {...}}

    REL = {"kind": "operator", "matrix": [[x, ...], ...], "domain_basis": [[...], ...] | null}
        | {"kind": "relation", "graph_spanners": [[...], ...]}

`matrix` is given by rows; `domain_basis` and `graph_spanners` are lists of
vectors, graph vectors having the H block first. Complex scalars are
[re, im] pairs and only allowed when the field is complex. `meta` is free-form
metadata carried through unchanged.
"""
import dataclasses
import json
import math
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from .core import ProblemError
from .relation import (LinearRelation, OperatorSpec, domain_action, from_operator,
                       from_spanners, is_everywhere_defined, is_operator, to_matrix)
from .subspace import FieldTag, TolerancePolicy, orthonormal_basis

# criterion id -> number of relations it takes
CHECKS: Dict[str, int] = {
    'oracle_mutually_adjoint': 2,
    'arens_inclusion': 2,
    'arens_equality': 2,
    'arens_equality_under_inclusion': 2,
    'gen_stone': 2,
    'surjective_pair': 2,
    'selfadjoint_via_range': 1,
    'stone_surjective_symmetric': 1,
    'adjoint_identification': 2,
    'von_neumann_ranges': 2,
    'closedness_via_ranges': 1,
    'symmetric_adjoint_characterization': 1,
    'formal_adjointness': 2,
    'nieminen': 2,
    'nieminen_selfadjoint': 1,
    'nieminen_skew': 1,
    'nieminen_unitary': 1,
}

_TOL_KEYS = tuple(f.name for f in dataclasses.fields(TolerancePolicy))


@dataclasses.dataclass(frozen=True, eq=False)
class RelationSpec:
    kind: str
    matrix: Optional[np.ndarray] = None
    domain_basis: Optional[np.ndarray] = None
    graph_spanners: Optional[np.ndarray] = None

    def build(self, in_dim: int, out_dim: int,
              tol: Optional[TolerancePolicy] = None) -> LinearRelation:
        if self.kind == 'relation':
            return from_spanners(self.graph_spanners, in_dim, out_dim, tol)
        domain = None
        if self.domain_basis is not None:
            domain = orthonormal_basis(self.domain_basis, tol, ambient_dim=in_dim)
        return from_operator(OperatorSpec(self.matrix, domain), tol)


@dataclasses.dataclass(frozen=True, eq=False)
class Problem:
    field: FieldTag
    h_dim: int
    k_dim: int
    S: RelationSpec
    T: Optional[RelationSpec] = None
    checks: Tuple[str, ...] = ()
    tol_overrides: Dict[str, float] = dataclasses.field(default_factory=dict)
    meta: Dict[str, object] = dataclasses.field(default_factory=dict)

    @property
    def tol(self) -> TolerancePolicy:
        return dataclasses.replace(TolerancePolicy(), **self.tol_overrides)

    def relations(self, tol: Optional[TolerancePolicy] = None
                  ) -> Tuple[LinearRelation, Optional[LinearRelation]]:
        tol = tol if tol is not None else self.tol
        S = self.S.build(self.h_dim, self.k_dim, tol)
        T = self.T.build(self.k_dim, self.h_dim, tol) if self.T is not None else None
        return S, T


# parsing


def _reject_constant(name):
    raise ValueError(f'non-finite number {name}')


def _expect_keys(obj: dict, required, optional, loc: str):
    for key in required:
        if key not in obj:
            raise ProblemError(f'missing field "{key}"', loc)
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ProblemError(f'unknown field(s) {sorted(unknown)}', loc)


def _count(value, loc: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ProblemError(f'expected a nonnegative integer, got {value!r}', loc)
    return value


def _real(value, loc: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemError(f'expected a number, got {value!r}', loc)
    try:
        result = float(value)
    except OverflowError:
        raise ProblemError('number out of floating point range', loc) from None
    if not math.isfinite(result):
        raise ProblemError(f'non-finite number {value!r}', loc)
    return result


def _scalar(value, field: FieldTag, loc: str):
    if isinstance(value, list):
        if field is not FieldTag.COMPLEX:
            raise ProblemError('complex entry in a real problem', loc)
        if len(value) != 2:
            raise ProblemError(f'complex entries are [re, im] pairs, got {value!r}', loc)
        return complex(_real(value[0], f'{loc}[0]'), _real(value[1], f'{loc}[1]'))
    return _real(value, loc)


def _vector(values, length: int, field: FieldTag, loc: str) -> np.ndarray:
    if not isinstance(values, list):
        raise ProblemError(f'expected a list of {length} scalars', loc)
    if len(values) != length:
        raise ProblemError(f'expected {length} entries, got {len(values)}', loc)
    return np.array([_scalar(v, field, f'{loc}[{i}]') for i, v in enumerate(values)],
                    dtype=field.dtype)


def _matrix(rows, n_rows: int, n_cols: int, field: FieldTag, loc: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != n_rows:
        raise ProblemError(f'expected a list of {n_rows} rows', loc)
    matrix = np.zeros((n_rows, n_cols), dtype=field.dtype)
    for i, row in enumerate(rows):
        matrix[i] = _vector(row, n_cols, field, f'{loc}[{i}]')
    return matrix


def _vectors(vectors, length: int, field: FieldTag, loc: str) -> np.ndarray:
    """List of vectors as the columns of a length x count matrix."""
    if not isinstance(vectors, list):
        raise ProblemError('expected a list of vectors', loc)
    columns = [_vector(v, length, field, f'{loc}[{j}]') for j, v in enumerate(vectors)]
    if not columns:
        return np.zeros((length, 0), dtype=field.dtype)
    return np.stack(columns, axis=1)


def _relation_spec(obj, in_dim: int, out_dim: int, field: FieldTag,
                   loc: str) -> RelationSpec:
    if not isinstance(obj, dict):
        raise ProblemError('expected a relation object', loc)
    kind = obj.get('kind')
    if kind == 'operator':
        _expect_keys(obj, ('kind', 'matrix'), ('domain_basis',), loc)
        matrix = _matrix(obj['matrix'], out_dim, in_dim, field, f'{loc}.matrix')
        domain = obj.get('domain_basis')
        if domain is not None:
            domain = _vectors(domain, in_dim, field, f'{loc}.domain_basis')
        return RelationSpec('operator', matrix=matrix, domain_basis=domain)
    if kind == 'relation':
        _expect_keys(obj, ('kind', 'graph_spanners'), (), loc)
        spanners = _vectors(obj['graph_spanners'], in_dim + out_dim, field,
                            f'{loc}.graph_spanners')
        return RelationSpec('relation', graph_spanners=spanners)
    raise ProblemError(f'kind must be "operator" or "relation", got {kind!r}', f'{loc}.kind')


def problem_from_dict(doc, source: str = '<problem>') -> Problem:
    if not isinstance(doc, dict):
        raise ProblemError('top level must be an object', source)
    _expect_keys(doc, ('field', 'h_dim', 'k_dim', 'S', 'checks'), ('T', 'tol', 'meta'), source)
    try:
        field = FieldTag(doc['field'])
    except ValueError:
        raise ProblemError(f'field must be "real" or "complex", got {doc["field"]!r}',
                           f'{source}:field') from None
    h_dim = _count(doc['h_dim'], f'{source}:h_dim')
    k_dim = _count(doc['k_dim'], f'{source}:k_dim')
    S = _relation_spec(doc['S'], h_dim, k_dim, field, f'{source}:S')
    T = None
    if doc.get('T') is not None:
        T = _relation_spec(doc['T'], k_dim, h_dim, field, f'{source}:T')

    checks = doc['checks']
    if not isinstance(checks, list) or not checks:
        raise ProblemError('checks must be a nonempty list', f'{source}:checks')
    for i, check in enumerate(checks):
        loc = f'{source}:checks[{i}]'
        if check not in CHECKS:
            raise ProblemError(f'unknown criterion {check!r}', loc)
        if CHECKS[check] == 2 and T is None:
            raise ProblemError(f'{check} needs both S and T', loc)

    overrides = {}
    tol = doc.get('tol')
    if tol is not None:
        if not isinstance(tol, dict):
            raise ProblemError('tol must be an object', f'{source}:tol')
        _expect_keys(tol, (), _TOL_KEYS, f'{source}:tol')
        for key, value in tol.items():
            value = _real(value, f'{source}:tol.{key}')
            if not value > 0:
                raise ProblemError(f'{key} must be strictly positive', f'{source}:tol.{key}')
            overrides[key] = value
    meta = doc.get('meta') or {}
    if not isinstance(meta, dict):
        raise ProblemError('meta must be an object', f'{source}:meta')
    return Problem(field, h_dim, k_dim, S, T, tuple(checks), overrides, dict(meta))


def parse_problem_text(text: str, source: str = '<problem>') -> Problem:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise ProblemError(e.msg, f'{source}:{e.lineno}:{e.colno}') from None
    except ValueError as e:
        raise ProblemError(str(e), source) from None
    return problem_from_dict(doc, source)


def parse_problem(path) -> Problem:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ProblemError(e.strerror or str(e), str(path)) from None
    return parse_problem_text(text, str(path))


# serialization


def _scalar_out(value, field: FieldTag):
    if field is FieldTag.COMPLEX:
        value = complex(value)
        return [float(value.real), float(value.imag)]
    value = complex(value)
    return float(value.real)


def encode_rows(matrix: np.ndarray, field: FieldTag):
    return [[_scalar_out(x, field) for x in row] for row in matrix]


def _relation_out(spec: RelationSpec, field: FieldTag) -> dict:
    if spec.kind == 'relation':
        return {'kind': 'relation',
                'graph_spanners': encode_rows(spec.graph_spanners.T, field)}
    domain = None
    if spec.domain_basis is not None:
        domain = encode_rows(spec.domain_basis.T, field)
    return {'kind': 'operator', 'matrix': encode_rows(spec.matrix, field),
            'domain_basis': domain}


def serialize(problem: Problem) -> dict:
    doc = {
        'field': problem.field.value,
        'h_dim': problem.h_dim,
        'k_dim': problem.k_dim,
        'S': _relation_out(problem.S, problem.field),
        'T': _relation_out(problem.T, problem.field) if problem.T is not None else None,
        'checks': list(problem.checks),
    }
    if problem.tol_overrides:
        doc['tol'] = {k: problem.tol_overrides[k] for k in _TOL_KEYS
                      if k in problem.tol_overrides}
    if problem.meta:
        doc['meta'] = dict(problem.meta)
    return doc


def dump(problem: Problem) -> str:
    return json.dumps(serialize(problem), indent=2) + '\n'


def relation_spec(R: LinearRelation, tol: Optional[TolerancePolicy] = None) -> RelationSpec:
    """Description that rebuilds R: a matrix for operators, graph
    spanners otherwise."""
    if not is_operator(R, tol).verdict:
        return RelationSpec('relation', graph_spanners=np.array(R.graph.basis))
    if is_everywhere_defined(R, tol).verdict:
        return RelationSpec('operator', matrix=to_matrix(R, tol))
    domain, image = domain_action(R, tol)
    # zero on the orthogonal complement of the domain
    return RelationSpec('operator', matrix=image @ domain.conj().T,
                        domain_basis=np.array(domain))


def problem_from_relations(S: LinearRelation, T: Optional[LinearRelation],
                           checks, field: Optional[FieldTag] = None,
                           tol: Optional[TolerancePolicy] = None,
                           meta: Optional[dict] = None) -> Problem:
    if field is None:
        arrays = [S.graph.basis] + ([T.graph.basis] if T is not None else [])
        field = FieldTag.of(*arrays)
    overrides = {}
    if tol is not None:
        overrides = {k: getattr(tol, k) for k in _TOL_KEYS
                     if not math.isclose(getattr(tol, k), getattr(TolerancePolicy(), k))}
    return Problem(
        field=field,
        h_dim=S.h_dim,
        k_dim=S.k_dim,
        S=relation_spec(S, tol),
        T=relation_spec(T, tol) if T is not None else None,
        checks=tuple(checks),
        tol_overrides=overrides,
        meta=dict(meta or {}),
    )
