import sys

from absl import flags, logging

import linrel
from linrel import cli
from linrel.problem import parse_problem

FLAGS = flags.FLAGS

flags.DEFINE_string('problem', None, help='Problem file (JSON) with S and T', required=True)
flags.DEFINE_float('t_min', 1e-3, help='Smallest |t|')
flags.DEFINE_float('t_max', 1e3, help='Largest |t|')
flags.DEFINE_integer('points', 61, help='Log-spaced points per sign')
flags.DEFINE_multi_string('config',
                          default='default.gin',
                          help='Configuration to use')
flags.DEFINE_multi_string('override', default=[], help='Override gin binding')
flags.DEFINE_float('tol_rank', None, help='Relative rank tolerance')
flags.DEFINE_float('tol_subspace', None, help='Subspace equality tolerance')


def main(argv):
    cli.configure(FLAGS.config,
                  FLAGS.override,
                  tol_rank=FLAGS.tol_rank,
                  tol_subspace=FLAGS.tol_subspace)
    try:
        problem = parse_problem(FLAGS.problem)
    except linrel.LinrelError as e:
        logging.error(str(e))
        sys.exit(2)

    result = cli.cmd_norm_profile(problem, FLAGS.t_min, FLAGS.t_max, FLAGS.points)
    sys.stdout.write(result.output)
    sys.exit(result.status)
