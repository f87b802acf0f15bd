import sys

from absl import flags, logging

import linrel
from linrel import cli
from linrel.problem import parse_problem

FLAGS = flags.FLAGS

flags.DEFINE_string('problem', None, help='Problem file (JSON)', required=True)
flags.DEFINE_multi_string('config',
                          default='default.gin',
                          help='Configuration to use')
flags.DEFINE_multi_string('override', default=[], help='Override gin binding')
flags.DEFINE_float('tol_rank', None, help='Relative rank tolerance')
flags.DEFINE_float('tol_subspace', None, help='Subspace equality tolerance')
flags.DEFINE_string('grid',
                    None,
                    help='Comma-separated spectral parameters for the resolvent criteria')
flags.DEFINE_enum('format', 'text', cli.FORMATS, help='Report format')


def main(argv):
    cli.configure(FLAGS.config,
                  FLAGS.override,
                  tol_rank=FLAGS.tol_rank,
                  tol_subspace=FLAGS.tol_subspace)
    try:
        grid = cli.parse_grid(FLAGS.grid)
        problem = parse_problem(FLAGS.problem)
    except linrel.LinrelError as e:
        logging.error(str(e))
        sys.exit(2)

    logging.info('checking %s: %s', FLAGS.problem, ', '.join(problem.checks))
    result = cli.cmd_check(problem, FLAGS.format, grid)
    sys.stdout.write(result.output)
    sys.exit(result.status)
