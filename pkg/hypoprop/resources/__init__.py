import os
import json
import logging
from typing import List, Optional

import pystow

from ..errors import InvalidInputError
from ..matcore import SystemPair

logger = logging.getLogger(__name__)

HERE = os.path.abspath(os.path.dirname(__file__))
SYSTEMS_PATH = os.path.join(HERE, 'systems')

#: The example battery used by the verification suites
BATTERY = ['free', 'ou', 'kolmogorov', 'kramers']


def get_threads() -> int:
    """Return the number of workers for scipy.fft.

    The value is read from the ``threads`` key of the ``hypoprop``
    configuration, for instance from the ``HYPOPROP_THREADS`` environment
    variable. If it is not set, -1 is returned, which lets scipy use all
    cores.
    """
    threads = pystow.get_config('hypoprop', 'threads', dtype=int)
    if threads is None or threads < 1:
        return -1
    return threads


def get_example_names() -> List[str]:
    """Return the names of the bundled example systems."""
    return sorted(os.path.splitext(fname)[0]
                  for fname in os.listdir(SYSTEMS_PATH)
                  if fname.endswith('.json'))


def get_example_path(name: str) -> Optional[str]:
    """Return the path of a bundled example system or None."""
    path = os.path.join(SYSTEMS_PATH, '%s.json' % name)
    return path if os.path.exists(path) else None


def get_example_system(name: str) -> SystemPair:
    """Return one of the bundled example systems by name.

    Parameters
    ----------
    name :
        One of the names returned by :func:`get_example_names`, e.g.
        ``kolmogorov``.
    """
    path = get_example_path(name)
    if path is None:
        raise InvalidInputError('No example system named %s, available: %s'
                                % (name, ', '.join(get_example_names())))
    return load_system(path)


def load_system(path: str) -> SystemPair:
    """Load a system from a JSON file."""
    with open(path, 'r') as fh:
        try:
            js = json.load(fh)
        except json.JSONDecodeError as e:
            raise InvalidInputError('Could not parse %s: %s' % (path, e))
    logger.debug('Loaded system from %s' % path)
    return SystemPair.from_json(js)
