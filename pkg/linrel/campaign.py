"""
Randomized verification of the range-kernel and resolvent criteria.

Each suite draws instances from a mix of clean constructions, controlled
perturbations and partial restrictions, evaluates one criterion on them
and judges the outcome against what the criterion asserts: agreement of
all statements for equivalences, conditions implying the conclusion for
one-way criteria, and agreement with the adjointness oracle for the
resolvent criteria.
"""
import concurrent.futures
import dataclasses
from collections import Counter
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import tqdm
from absl import logging

from . import characterize, resolvent
from .core import PreconditionError
from .generate import (GENERATOR_ID, GenConfig, perturb_pairing,
                       random_adjoint_pair, random_operator, random_relation,
                       random_skew, random_subrelation, random_symmetric,
                       random_unitary, restrict_to_partial)
from .problem import CHECKS, dump, problem_from_relations
from .relation import (LinearRelation, from_matrix, is_everywhere_defined,
                       to_matrix)
from .subspace import TolerancePolicy, operator_norm

PERTURBATION = .1
DEFAULT_PERTURB_FRACTION = .25
# pairing defects this large must make the resolvent criterion fail
DEFECT_FLOOR = PERTURBATION * (1 - 1e-6)


def _oracle(S, T, tol):
    return characterize.CriterionReport.build(
        'oracle', {'mutually_adjoint': characterize.oracle_mutually_adjoint(S, T, tol)})


CRITERIA: Dict[str, Callable] = {
    'oracle_mutually_adjoint': lambda S, T, tol, grid: _oracle(S, T, tol),
    'arens_inclusion': lambda S, T, tol, grid: characterize.arens_inclusion(S, T, tol),
    'arens_equality': lambda S, T, tol, grid: characterize.arens_equality(S, T, tol),
    'arens_equality_under_inclusion':
        lambda S, T, tol, grid: characterize.arens_equality_under_inclusion(S, T, tol),
    'gen_stone': lambda S, T, tol, grid: characterize.gen_stone(S, T, tol),
    'surjective_pair': lambda S, T, tol, grid: characterize.surjective_pair(S, T, tol),
    'selfadjoint_via_range':
        lambda S, T, tol, grid: characterize.selfadjoint_via_range(S, tol),
    'stone_surjective_symmetric':
        lambda S, T, tol, grid: characterize.stone_surjective_symmetric(S, tol),
    'adjoint_identification':
        lambda S, T, tol, grid: characterize.adjoint_identification(S, T, tol),
    'von_neumann_ranges': lambda S, T, tol, grid: characterize.von_neumann_ranges(S, T, tol),
    'closedness_via_ranges':
        lambda S, T, tol, grid: characterize.closedness_via_ranges(S, tol),
    'symmetric_adjoint_characterization':
        lambda S, T, tol, grid: characterize.symmetric_adjoint_characterization(S, tol),
    'formal_adjointness': lambda S, T, tol, grid: characterize.formal_adjointness(S, T, tol),
    'nieminen': lambda S, T, tol, grid: resolvent.nieminen_criterion(S, T, grid, tol),
    'nieminen_selfadjoint': lambda S, T, tol, grid: resolvent.selfadjoint_nieminen(S, grid, tol),
    'nieminen_skew': lambda S, T, tol, grid: resolvent.skewadjoint_nieminen(S, grid, tol),
    'nieminen_unitary': lambda S, T, tol, grid: resolvent.unitary_nieminen(S, grid, tol),
}


def evaluate(check_id: str, S: LinearRelation, T: Optional[LinearRelation] = None,
             tol: Optional[TolerancePolicy] = None,
             grid: Optional[Sequence[float]] = None):
    """Run one registered criterion; returns a CriterionReport or a
    NieminenReport."""
    if check_id not in CRITERIA:
        raise PreconditionError(f'unknown criterion {check_id!r}')
    if CHECKS[check_id] == 2 and T is None:
        raise PreconditionError(f'{check_id} needs both S and T')
    return CRITERIA[check_id](S, T, tol, grid)


# instance mixes


class Instance(NamedTuple):
    label: str
    S: LinearRelation
    T: Optional[LinearRelation] = None


def _pick(cfg: GenConfig, labels: Sequence[str], perturb_fraction: float) -> str:
    rng = cfg.rng('mix')
    if 'perturbed' in labels and rng.random() < perturb_fraction:
        return 'perturbed'
    others = [label for label in labels if label != 'perturbed']
    return others[int(rng.integers(len(others)))]


def _dims(cfg: GenConfig, square: bool = False):
    rng = cfg.rng('dims')
    h = int(rng.integers(1, cfg.max_dim + 1))
    if square or rng.random() < .5:
        return h, h
    return h, int(rng.integers(1, cfg.max_dim + 1))


def _partial_dim(cfg: GenConfig, dim: int, label: str) -> int:
    """Proper domain dimension in [0, dim - 1]."""
    return int(cfg.rng('partial', label).integers(0, dim))


def _zero(rows: int, cols: int, cfg: GenConfig) -> LinearRelation:
    return from_matrix(np.zeros((rows, cols), dtype=cfg.dtype))


def _unit(matrix: np.ndarray) -> np.ndarray:
    return matrix / operator_norm(matrix)


def adjoint_pairs(cfg: GenConfig, perturb_fraction: float,
                  norm: Optional[float] = None) -> Instance:
    label = _pick(cfg, ('adjoint', 'perturbed', 'partial', 'both_partial', 'zero'),
                  perturb_fraction)
    h, k = _dims(cfg)
    S, T = random_adjoint_pair(cfg.spawn('pair'), h, k, norm)
    if label == 'perturbed':
        S, T, _ = perturb_pairing(S, T, PERTURBATION, cfg.spawn('perturbation'))
    elif label == 'partial':
        S = restrict_to_partial(S, cfg.spawn('restrict-S'), _partial_dim(cfg, h, 'S'))
    elif label == 'both_partial':
        S = restrict_to_partial(S, cfg.spawn('restrict-S'), _partial_dim(cfg, h, 'S'))
        T = restrict_to_partial(T, cfg.spawn('restrict-T'), _partial_dim(cfg, k, 'T'))
    elif label == 'zero':
        S, T = _zero(k, h, cfg), _zero(h, k, cfg)
    return Instance(label, S, T)


def normalized_adjoint_pairs(cfg: GenConfig, perturb_fraction: float) -> Instance:
    return adjoint_pairs(cfg, perturb_fraction, norm=1.)


def symmetric_operators(cfg: GenConfig, perturb_fraction: float,
                        norm: Optional[float] = None) -> Instance:
    label = _pick(cfg, ('symmetric', 'perturbed', 'partial', 'zero', 'general'),
                  perturb_fraction)
    n, _ = _dims(cfg, square=True)
    if label == 'perturbed':
        # no nonzero skew direction exists on a real line
        n = max(n, 2)
    S = random_symmetric(cfg.spawn('symmetric'), n, norm)
    if label == 'perturbed':
        direction = _unit(to_matrix(random_skew(cfg.spawn('direction'), n)))
        S = from_matrix(to_matrix(S) + PERTURBATION * direction)
    elif label == 'partial':
        S = restrict_to_partial(S, cfg.spawn('restrict-S'), _partial_dim(cfg, n, 'S'))
    elif label == 'zero':
        S = _zero(n, n, cfg)
    elif label == 'general':
        S = random_operator(cfg.spawn('general'), n, n, n, norm)
    return Instance(label, S)


def normalized_symmetric_operators(cfg: GenConfig, perturb_fraction: float) -> Instance:
    return symmetric_operators(cfg, perturb_fraction, norm=1.)


def skew_operators(cfg: GenConfig, perturb_fraction: float) -> Instance:
    label = _pick(cfg, ('skew', 'perturbed', 'zero'), perturb_fraction)
    n, _ = _dims(cfg, square=True)
    S = random_skew(cfg.spawn('skew'), n, norm=1.)
    if label == 'perturbed':
        direction = _unit(to_matrix(random_symmetric(cfg.spawn('direction'), n)))
        S = from_matrix(to_matrix(S) + PERTURBATION * direction)
    elif label == 'zero':
        S = _zero(n, n, cfg)
    return Instance(label, S)


def unitary_operators(cfg: GenConfig, perturb_fraction: float) -> Instance:
    label = _pick(cfg, ('unitary', 'perturbed', 'singular'), perturb_fraction)
    n, _ = _dims(cfg, square=True)
    U = random_unitary(cfg.spawn('unitary'), n)
    if label == 'perturbed':
        U = from_matrix((1 + PERTURBATION) * to_matrix(U))
    elif label == 'singular':
        # drop the last column: U e_n is sent to zero
        matrix = to_matrix(U).copy()
        matrix[:, -1] = 0
        U = from_matrix(matrix)
    return Instance(label, U)


def total_operators(cfg: GenConfig, perturb_fraction: float) -> Instance:
    label = _pick(cfg, ('general', 'zero', 'symmetric'), perturb_fraction)
    h, k = _dims(cfg)
    if label == 'general':
        S = random_operator(cfg.spawn('general'), h, k, h)
    elif label == 'zero':
        S = _zero(k, h, cfg)
    else:
        S = random_symmetric(cfg.spawn('symmetric'), h)
    return Instance(label, S)


def _relation_pair(cfg: GenConfig, labels: Sequence[str]) -> Instance:
    label = _pick(cfg, labels, 0.)
    h, k = _dims(cfg)
    rng = cfg.rng('graph-dims')
    T = random_relation(cfg.spawn('T'), h, k, int(rng.integers(1, h + k + 1)))
    if label == 'contained':
        S = random_subrelation(cfg.spawn('S'), T, int(rng.integers(0, T.dim)))
    elif label == 'equal':
        S = random_subrelation(cfg.spawn('S'), T, T.dim)
    elif label == 'unrelated':
        S = random_relation(cfg.spawn('S'), h, k, int(rng.integers(0, h + k + 1)))
    else:
        S = random_operator(cfg.spawn('S'), h, k, int(rng.integers(0, h + 1)))
        T = random_operator(cfg.spawn('T'), h, k, int(rng.integers(0, h + 1)))
    return Instance(label, S, T)


def relation_pairs(cfg: GenConfig, perturb_fraction: float) -> Instance:
    return _relation_pair(cfg, ('contained', 'equal', 'unrelated', 'operators'))


def nested_relation_pairs(cfg: GenConfig, perturb_fraction: float) -> Instance:
    return _relation_pair(cfg, ('contained', 'equal'))


# judging


class Outcome(NamedTuple):
    trial: int
    label: str
    status: str
    positive: Optional[bool] = None
    converse: bool = False


def _judge_equivalence(report, instance):
    verdicts = {s.verdict for s in report.statements.values()}
    if len(verdicts) > 1:
        return 'violation', None, False
    return 'pass', verdicts.pop(), False


def _judge_implication(report, instance):
    if not report.implication_holds():
        return 'violation', None, False
    converse = report.conclusion_verified.verdict and not report.overall.verdict
    return 'pass', report.overall.verdict, converse


def _judge_resolvent(report, instance):
    if report.oracle.verdict:
        return ('pass' if report.overall.verdict else 'violation'), True, False
    operands = [r for r in (instance.S, instance.T) if r is not None]
    partial = not all(is_everywhere_defined(r).verdict for r in operands)
    if partial or report.pairing_defect is None or report.pairing_defect >= DEFECT_FLOOR:
        return ('violation' if report.overall.verdict else 'pass'), False, False
    return 'skip', None, False


_JUDGES = {
    'equivalence': _judge_equivalence,
    'implication': _judge_implication,
    'resolvent': _judge_resolvent,
}


@dataclasses.dataclass(frozen=True)
class Suite:
    theorem_id: str
    check_id: str
    kind: str
    instances: Callable[[GenConfig, float], Instance]

    def run_trial(self, cfg: GenConfig, trial: int, perturb_fraction: float,
                  tol: Optional[TolerancePolicy] = None,
                  grid: Optional[Sequence[float]] = None):
        instance = self.instances(cfg.for_trial(trial), perturb_fraction)
        report = evaluate(self.check_id, instance.S, instance.T, tol, grid)
        if report.ambiguous():
            logging.warning('%s trial %d (%s): boundary-ambiguous, skipped',
                            self.theorem_id, trial, instance.label)
            return Outcome(trial, instance.label, 'skip'), instance
        status, positive, converse = _JUDGES[self.kind](report, instance)
        return Outcome(trial, instance.label, status, positive, converse), instance


SUITES: Dict[str, Suite] = {suite.theorem_id: suite for suite in [
    Suite('arens', 'arens_inclusion', 'equivalence', relation_pairs),
    Suite('arens-eq', 'arens_equality', 'equivalence', relation_pairs),
    Suite('arens-eq-incl', 'arens_equality_under_inclusion', 'equivalence',
          nested_relation_pairs),
    Suite('gen-stone', 'gen_stone', 'implication', adjoint_pairs),
    Suite('surjective-pair', 'surjective_pair', 'implication', adjoint_pairs),
    Suite('selfadjoint-range', 'selfadjoint_via_range', 'implication', symmetric_operators),
    Suite('stone', 'stone_surjective_symmetric', 'implication', symmetric_operators),
    Suite('adjoint-ident', 'adjoint_identification', 'equivalence', adjoint_pairs),
    Suite('von-neumann', 'von_neumann_ranges', 'equivalence', adjoint_pairs),
    Suite('closedness', 'closedness_via_ranges', 'equivalence', total_operators),
    Suite('symmetric-adjoint', 'symmetric_adjoint_characterization', 'equivalence',
          symmetric_operators),
    Suite('nieminen', 'nieminen', 'resolvent', normalized_adjoint_pairs),
    Suite('nieminen-selfadjoint', 'nieminen_selfadjoint', 'resolvent',
          normalized_symmetric_operators),
    Suite('nieminen-skew', 'nieminen_skew', 'resolvent', skew_operators),
    Suite('nieminen-unitary', 'nieminen_unitary', 'resolvent', unitary_operators),
]}


@dataclasses.dataclass
class CampaignReport:
    theorem_id: str
    check_id: str
    kind: str
    trials: int
    seed: int
    field: str
    generator: str = GENERATOR_ID
    passed: int = 0
    skipped: int = 0
    violations: List[int] = dataclasses.field(default_factory=list)
    true_positives: int = 0
    true_negatives: int = 0
    converse_witnesses: int = 0
    mix: Dict[str, int] = dataclasses.field(default_factory=dict)
    counterexamples: List[str] = dataclasses.field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def skipped_fraction(self) -> float:
        return self.skipped / self.trials

    def record(self, outcome: Outcome):
        if outcome.status == 'skip':
            self.skipped += 1
            return
        if outcome.status == 'violation':
            self.violations.append(outcome.trial)
            return
        self.passed += 1
        if outcome.positive is True:
            self.true_positives += 1
        elif outcome.positive is False:
            self.true_negatives += 1
        self.converse_witnesses += int(outcome.converse)

    def to_dict(self) -> dict:
        return {
            'theorem': self.theorem_id,
            'criterion': self.check_id,
            'kind': self.kind,
            'trials': self.trials,
            'seed': self.seed,
            'field': self.field,
            'generator': self.generator,
            'passed': self.passed,
            'skipped': self.skipped,
            'violations': list(self.violations),
            'true_positives': self.true_positives,
            'true_negatives': self.true_negatives,
            'converse_witnesses': self.converse_witnesses,
            'mix': dict(sorted(self.mix.items())),
            'counterexamples': list(self.counterexamples),
        }


def dump_counterexample(suite: Suite, cfg: GenConfig, outcome: Outcome,
                        instance: Instance, out_path,
                        tol: Optional[TolerancePolicy] = None,
                        grid: Optional[Sequence[float]] = None) -> Path:
    out_path = Path(out_path)
    out_path.mkdir(parents=True, exist_ok=True)
    meta = {
        'generator': GENERATOR_ID,
        'theorem': suite.theorem_id,
        'seed': cfg.seed,
        'trial': outcome.trial,
        'trial_seed': cfg.for_trial(outcome.trial).seed,
        'label': outcome.label,
    }
    if grid is not None:
        meta['grid'] = [float(t) for t in grid]
    problem = problem_from_relations(instance.S, instance.T, [suite.check_id],
                                     field=cfg.field, tol=tol, meta=meta)
    path = out_path / f'{suite.theorem_id}-seed{cfg.seed}-trial{outcome.trial}.json'
    path.write_text(dump(problem))
    logging.info('counterexample written to %s', path)
    return path


def run_campaign(theorem_id: str, trials: int,
                 cfg: Optional[GenConfig] = None,
                 tol: Optional[TolerancePolicy] = None,
                 workers: int = 1,
                 progress: bool = False,
                 perturb_fraction: float = DEFAULT_PERTURB_FRACTION,
                 out_path=None,
                 grid: Optional[Sequence[float]] = None) -> CampaignReport:
    """Run `trials` instances of one suite. Trial i uses the configuration
    seed XOR i, so results do not depend on `workers`. `grid` replaces the
    configured spectral parameters of the resolvent suites."""
    if theorem_id not in SUITES:
        raise PreconditionError(
            f'unknown theorem {theorem_id!r}, expected one of {sorted(SUITES)}')
    if trials < 1:
        raise PreconditionError(f'trials must be at least 1, got {trials}')
    if not 0 <= perturb_fraction <= 1:
        raise PreconditionError(f'perturb_fraction must lie in [0, 1], got {perturb_fraction}')
    cfg = cfg if cfg is not None else GenConfig()
    suite = SUITES[theorem_id]
    report = CampaignReport(theorem_id, suite.check_id, suite.kind, trials, cfg.seed,
                            cfg.field.value)

    def run(trial):
        return suite.run_trial(cfg, trial, perturb_fraction, tol, grid)

    logging.info('%s: %d trials, seed %d, %s field', theorem_id, trials, cfg.seed,
                 cfg.field.value)
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = executor.map(run, range(trials))
        mix = Counter()
        for outcome, instance in tqdm.tqdm(results, total=trials, desc=theorem_id,
                                           disable=not progress):
            mix[outcome.label] += 1
            report.record(outcome)
            if outcome.status == 'violation':
                logging.warning('%s trial %d (%s) violates the criterion',
                                theorem_id, outcome.trial, outcome.label)
                if out_path is not None:
                    path = dump_counterexample(suite, cfg, outcome, instance, out_path,
                                               tol, grid)
                    report.counterexamples.append(str(path))
    report.mix = dict(mix)
    return report
