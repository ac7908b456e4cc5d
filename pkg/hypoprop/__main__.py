"""
Runs the hypoprop command line interface as a module. Usage:

    `python -m hypoprop check --system kolmogorov`
"""

from .cli import main


if __name__ == '__main__':
    main(prog_name='hypoprop')
