import sys

from absl import flags, logging

import linrel
from linrel import cli
from linrel.campaign import DEFAULT_PERTURB_FRACTION, SUITES
from linrel.generate import GenConfig
from linrel.subspace import TolerancePolicy

FLAGS = flags.FLAGS

flags.DEFINE_string('theorem',
                    None,
                    help=f'Theorem to verify, one of {", ".join(SUITES)}',
                    required=True)
flags.DEFINE_integer('trials', 200, help='Number of random instances')
flags.DEFINE_multi_string('config',
                          default='default.gin',
                          help='Configuration to use')
flags.DEFINE_multi_string('override', default=[], help='Override gin binding')
flags.DEFINE_integer('seed', None, help='Generator seed')
flags.DEFINE_enum('field', None, ['real', 'complex'], help='Scalar field')
flags.DEFINE_integer('dim_max', None, help='Largest ambient dimension')
flags.DEFINE_float('tol_rank', None, help='Relative rank tolerance')
flags.DEFINE_float('tol_subspace', None, help='Subspace equality tolerance')
flags.DEFINE_float('perturb_fraction',
                   DEFAULT_PERTURB_FRACTION,
                   help='Fraction of perturbed instances in the mix')
flags.DEFINE_string('grid',
                    None,
                    help='Comma-separated spectral parameters for the resolvent suites')
flags.DEFINE_integer('workers', 1, help='Number of worker threads')
flags.DEFINE_bool('progress', default=False, help='Display a progress bar')
flags.DEFINE_string('out_path',
                    default='counterexamples/',
                    help='Output folder for counterexample problem files')
flags.DEFINE_enum('format', 'text', cli.FORMATS, help='Report format')


def main(argv):
    cli.configure(FLAGS.config,
                  FLAGS.override,
                  seed=FLAGS.seed,
                  field=FLAGS.field,
                  dim_max=FLAGS.dim_max,
                  tol_rank=FLAGS.tol_rank,
                  tol_subspace=FLAGS.tol_subspace)
    try:
        grid = cli.parse_grid(FLAGS.grid)
    except linrel.LinrelError as e:
        logging.error(str(e))
        sys.exit(2)

    result = cli.cmd_verify_theorem(FLAGS.theorem,
                                    FLAGS.trials,
                                    GenConfig(),
                                    TolerancePolicy(),
                                    fmt=FLAGS.format,
                                    workers=FLAGS.workers,
                                    progress=FLAGS.progress,
                                    perturb_fraction=FLAGS.perturb_fraction,
                                    out_path=FLAGS.out_path,
                                    grid=grid)
    sys.stdout.write(result.output)
    sys.exit(result.status)
