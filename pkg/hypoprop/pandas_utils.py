"""Utilities for Pandas."""

from typing import Iterable, List, Mapping, TYPE_CHECKING

if TYPE_CHECKING:
    import pandas

__all__ = [
    "reports_df",
    "checks_df",
]


def reports_df(reports: Iterable) -> "pandas.DataFrame":
    """
    Collect reports into a Pandas dataframe, one row per report.

    Parameters
    ----------
    reports :
        Objects with a ``to_json`` method, e.g. the
        :class:`hypoprop.analysis.DispersionReport` objects returned by
        :func:`hypoprop.analysis.dispersion_sweep` or the
        :class:`hypoprop.analysis.HardyReport` objects returned by
        :func:`hypoprop.analysis.hardy_sweep`.

    Returns
    -------
    df :
        A dataframe whose columns are the keys of the JSON dicts.
    """
    import pandas as pd
    return pd.DataFrame([report.to_json() for report in reports])


def checks_df(checks: List[Mapping]) -> "pandas.DataFrame":
    """
    Collect the checks returned by :func:`hypoprop.api.verify` into a
    dataframe with the columns suite, check, value, tolerance and passed.
    """
    import pandas as pd
    from .tables import CHECKS_HEADER
    return pd.DataFrame(list(checks), columns=CHECKS_HEADER)
