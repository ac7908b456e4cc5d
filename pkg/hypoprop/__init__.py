__version__ = '0.1.0'

import logging

from .api import get_system, propagate, verify
from .analysis import DispersionReport, HardyReport, LpExponent, \
    dispersive_bound, dispersive_ratio, hardy_product, sharpness_witness
from .errors import HypopropError
from .gridprop import GridField, PropagationSettings
from .matcore import CovarianceMatrix, HypoReport, SystemPair, covariance, \
    hypoelliptic
from .packets import GaussianPacket, packet_propagate
from .pandas_utils import checks_df, reports_df

__all__ = [
    'get_system',
    'propagate',
    'verify',
    'covariance',
    'hypoelliptic',
    'packet_propagate',
    'dispersive_bound',
    'dispersive_ratio',
    'sharpness_witness',
    'hardy_product',
    # Classes
    'SystemPair',
    'CovarianceMatrix',
    'HypoReport',
    'GaussianPacket',
    'GridField',
    'PropagationSettings',
    'LpExponent',
    'DispersionReport',
    'HardyReport',
    'HypopropError',
    # Meta
    '__version__',
    # Pandas utilities
    'reports_df',
    'checks_df',
]

logging.basicConfig(format=('%(levelname)s: [%(asctime)s] %(name)s'
                            ' - %(message)s'),
                    level=logging.INFO, datefmt='%Y-%m-%d %H:%M:%S')

logger = logging.getLogger('hypoprop')
