import numpy as np
import pytest

from hypoprop import checks_df, reports_df
from hypoprop.analysis import dispersion_sweep, hardy_sweep
from hypoprop.api import get_system, verify
from hypoprop.packets import GaussianPacket

pd = pytest.importorskip('pandas')


def test_reports_df():
    sys = get_system('kolmogorov')
    df = reports_df(dispersion_sweep(GaussianPacket(np.eye(2)), sys,
                                     [1.0, 2.0, 4.0], 1))
    assert list(df.columns) == ['t', 'p', 'p_conj', 'lhs', 'bound', 'ratio']
    assert len(df) == 3
    assert (df['ratio'] <= 1).all()
    df = reports_df(hardy_sweep(sys, [0.5, 1.0], 1.0))
    assert 'pi_sq_ratio' in df.columns


def test_checks_df():
    df = checks_df(verify(get_system('free'), suite='hardy'))
    assert list(df.columns) == ['suite', 'check', 'value', 'tolerance',
                                'passed']
    assert df['passed'].all()
