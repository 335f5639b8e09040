import sys

from fracfem.cli.interface import build_parser, execute
from fracfem.logging_config import configure_logging


def main(argv=None) -> int:
    configure_logging()
    parser = build_parser()

    if argv is None:
        argv = sys.argv[1:]

    if not argv:
        parser.print_help()
        return 0

    args = parser.parse_args(argv)
    code, msg = execute(args)
    if msg:
        print(msg, file=sys.stdout if code == 0 else sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
