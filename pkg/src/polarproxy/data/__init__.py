"""Bundled party weight tables.

``weights_2018.csv`` covers the six 2018 presidential candidates and
``weights_2019.csv`` the twelve parties of the 2019 local elections. ``r``
is the religiosity degree and ``s`` the political-spectrum position (low is
left-wing), both on ``[0, 1]``.
"""

from importlib import resources

_FILES = {2018: "weights_2018.csv", 2019: "weights_2019.csv"}


def builtin_weights_text(year: int) -> str:
    return resources.files(__name__).joinpath(_FILES[year]).read_text("utf-8")


def builtin_weights(year: int):
    """Parsed :class:`~polarproxy.ingest.WeightTable` for 2018 or 2019.

    Raises ``KeyError`` for other years.
    """
    from ..ingest import parse_table

    return parse_table(builtin_weights_text(year), "weights",
                       name=_FILES[year])
