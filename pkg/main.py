import sys

from abelian_info.cli import run

if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
