"""CSV ingestion and the dataset registry."""

from __future__ import annotations

import configparser
import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .series import Frequency, TimeSeries

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    path: Path
    frequency: Frequency = Frequency.MONTHLY
    seasonal_period: int = 1
    value_column: str = "value"
    date_column: str | None = "date"

    def __post_init__(self):
        object.__setattr__(self, "path", Path(self.path))
        object.__setattr__(self, "frequency", Frequency(self.frequency))


# name, frequency, length of the fourteen benchmark series
TABLE_I = (
    ("AMZN Stock", Frequency.DAILY, 504),
    ("GOOG Stock", Frequency.DAILY, 504),
    ("MSFT Stock", Frequency.DAILY, 504),
    ("Births", Frequency.DAILY, 7305),
    ("Colombia Dengue", Frequency.WEEKLY, 626),
    ("Colombia Malaria", Frequency.WEEKLY, 626),
    ("Venezuela Dengue", Frequency.WEEKLY, 660),
    ("Venezuela Malaria", Frequency.WEEKLY, 669),
    ("US EPU Index", Frequency.MONTHLY, 264),
    ("UK unemployment", Frequency.MONTHLY, 552),
    ("Canadian Gas", Frequency.MONTHLY, 542),
    ("Russia Exchange", Frequency.MONTHLY, 264),
    ("Arrivals", Frequency.QUARTERLY, 127),
    ("Tourism", Frequency.QUARTERLY, 80),
)
_EXPECTED_LEN = {name.lower(): n for name, _, n in TABLE_I}


def load_csv(spec: DatasetSpec) -> TimeSeries:
    """Read one numeric column in file order.

    A header row is required and values use a decimal point. Any blank or
    unparseable cell is an error naming its line number.
    """
    path = spec.path
    if not path.is_file():
        raise DataError(f"{spec.name}: file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{spec.name}: {path} is empty") from None
        missing = [c for c in (spec.value_column, spec.date_column) if c and c not in header]
        if missing:
            raise DataError(f"{spec.name}: column(s) {missing} not in header {header}")
        col = header.index(spec.value_column)
        values = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            cell = row[col].strip() if col < len(row) else ""
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{spec.name}: line {line_no}: value {cell!r} is not a number") from None
            if not math.isfinite(v):
                raise DataError(f"{spec.name}: line {line_no}: value {cell!r} is not finite")
            values.append(v)
    if not values:
        raise DataError(f"{spec.name}: no observations in {path}")
    expected = _EXPECTED_LEN.get(spec.name.lower())
    if expected is not None and expected != len(values):
        log.warning("%s: %d rows read, reference length is %d", spec.name, len(values), expected)
    return TimeSeries(np.array(values), spec.frequency, spec.seasonal_period)


def registry_from_ini(path) -> list[DatasetSpec]:
    """Dataset specs from an INI file, one section per dataset.

    Keys: ``path`` (relative to the INI file), ``frequency``, and optionally
    ``seasonal_period``, ``value_column``, ``date_column``.
    """
    path = Path(path)
    cp = configparser.ConfigParser()
    if not cp.read(path, encoding="utf-8"):
        raise DataError(f"registry not found: {path}")
    specs = []
    for name in cp.sections():
        sec = cp[name]
        try:
            specs.append(DatasetSpec(
                name=name,
                path=(path.parent / sec["path"]).resolve(),
                frequency=sec["frequency"],
                seasonal_period=sec.getint("seasonal_period", 1),
                value_column=sec.get("value_column", "value"),
                date_column=sec.get("date_column", "date") or None,
            ))
        except (KeyError, ValueError) as exc:
            raise DataError(f"registry {path}, section [{name}]: {exc}") from None
    return specs
