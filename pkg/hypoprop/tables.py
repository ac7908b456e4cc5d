"""Reading and writing the CSV and JSON tables produced by hypoprop.

Floats are written with 17 significant digits and rows end with '\\n', so
identical computations give byte-identical files.
"""

import csv
import json
import logging
from typing import Iterable, List, Mapping, Sequence, TextIO

import numpy as np

from .errors import InvalidInputError
from .gridprop import FREQUENCY, POSITION, GridField
from .packets import GaussianPacket

__all__ = [
    "format_value",
    "write_table",
    "dump_field",
    "load_field",
    "dump_dispersion",
    "dump_hardy",
    "dump_covariance",
    "dump_checks",
    "load_packet",
    "COVARIANCE_HEADER",
    "DISPERSION_HEADER",
    "HARDY_HEADER",
    "CHECKS_HEADER",
]

logger = logging.getLogger(__name__)

DISPERSION_HEADER = ['t', 'p', 'p_conj', 'lhs', 'bound', 'ratio']
HARDY_HEADER = ['s', 'a', 'b', 'product', 'pi_sq_ratio']
CHECKS_HEADER = ['suite', 'check', 'value', 'tolerance', 'passed']
COVARIANCE_HEADER = ['t', 'det', 'lambda_min']


def format_value(value) -> str:
    """Format a cell: floats with 17 significant digits, booleans in lower
    case, everything else with str."""
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return '%.17g' % value
    return str(value)


def write_table(fh: TextIO, header: Sequence[str],
                rows: Iterable[Sequence]) -> None:
    """Write a header and rows as CSV."""
    writer = csv.writer(fh, lineterminator='\n')
    writer.writerow(header)
    writer.writerows([format_value(v) for v in row] for row in rows)


def dump_field(F: GridField, fh: TextIO) -> None:
    """Write a field as CSV with the header x1[,x2],re,im (xi1[,xi2],re,im
    for frequency fields), rows in lexicographic sample order."""
    prefix = 'x' if F.space == POSITION else 'xi'
    header = ['%s%d' % (prefix, i + 1) for i in range(F.m)] + ['re', 'im']
    coords = F.coordinates().reshape(-1, F.m)
    values = F.values.reshape(-1)
    write_table(fh, header, ([float(c) for c in coord] +
                             [float(v.real), float(v.imag)]
                             for coord, v in zip(coords, values)))


def load_field(fh: TextIO) -> GridField:
    """Read a field written by :func:`dump_field`.

    The dimension and space come from the header, the number of samples
    per axis from the row count and L from the first coordinate.
    """
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise InvalidInputError('Empty field file')
    m = len(header) - 2
    if m not in (1, 2) or header[-2:] != ['re', 'im']:
        raise InvalidInputError('Unexpected field header %s' % header)
    space = FREQUENCY if header[0].startswith('xi') else POSITION
    try:
        data = np.array([[float(v) for v in row] for row in reader])
    except ValueError as e:
        raise InvalidInputError('Malformed field row: %s' % e)
    n = int(round(len(data) ** (1 / m)))
    if n ** m != len(data):
        raise InvalidInputError('%d rows do not form a %d-dimensional grid'
                                % (len(data), m))
    first = data[0, 0]
    L = -first if space == POSITION else n / (4 * -first)
    values = (data[:, m] + 1j * data[:, m + 1]).reshape((n,) * m)
    return GridField(values, L, n, m, space)


def dump_dispersion(reports, fh: TextIO) -> None:
    """Write dispersion reports as CSV t,p,p_conj,lhs,bound,ratio."""
    write_table(fh, DISPERSION_HEADER,
                ([r.t, r.p.p, r.p.p_conj, r.lhs, r.bound, r.ratio]
                 for r in reports))


def dump_hardy(reports, fh: TextIO) -> None:
    """Write Hardy reports as CSV s,a,b,product,pi_sq_ratio."""
    write_table(fh, HARDY_HEADER,
                ([r.s, r.a, r.b, r.product, r.pi_sq_ratio]
                 for r in reports))


def dump_covariance(covariances, fh: TextIO) -> None:
    """Write covariance matrices as CSV t,det,lambda_min,Q11,Q12,...
    with the entries in row-major order."""
    covariances = list(covariances)
    m = covariances[0].value.shape[0] if covariances else 0
    header = COVARIANCE_HEADER + ['Q%d%d' % (i + 1, j + 1)
                                  for i in range(m) for j in range(m)]
    write_table(fh, header,
                ([c.t, c.det, c.lambda_min] +
                 [float(v) for v in c.value.reshape(-1)]
                 for c in covariances))


def dump_checks(checks: List[Mapping], fh: TextIO) -> None:
    """Write verification checks as CSV
    suite,check,value,tolerance,passed."""
    write_table(fh, CHECKS_HEADER,
                ([c[key] for key in CHECKS_HEADER] for c in checks))


def load_packet(fh: TextIO) -> GaussianPacket:
    """Read a packet from its JSON representation."""
    try:
        js = json.load(fh)
    except json.JSONDecodeError as e:
        raise InvalidInputError('Could not parse packet JSON: %s' % e)
    return GaussianPacket.from_json(js)
