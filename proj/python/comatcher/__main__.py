import sys

from . import run


def main():
    return run(*sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
