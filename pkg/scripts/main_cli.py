import sys

from absl import app

AVAILABLE_SCRIPTS = ['check', 'adjoint', 'verify', 'profile']


def help():
    print(f"""usage: linrel [ {' | '.join(AVAILABLE_SCRIPTS)} ]

positional arguments:
  command     Command to launch with linrel.
""")
    exit()


def main():
    if len(sys.argv) == 1:
        help()
    elif sys.argv[1] not in AVAILABLE_SCRIPTS:
        help()

    command = sys.argv[1]

    if command == 'check':
        from scripts import check
        sys.argv[0] = check.__name__
        app.run(check.main)
    elif command == 'adjoint':
        from scripts import adjoint
        sys.argv[0] = adjoint.__name__
        app.run(adjoint.main)
    elif command == 'verify':
        from scripts import verify
        sys.argv[0] = verify.__name__
        app.run(verify.main)
    elif command == 'profile':
        from scripts import profile
        sys.argv[0] = profile.__name__
        app.run(profile.main)
    else:
        raise Exception(f'Command {command} not found')
