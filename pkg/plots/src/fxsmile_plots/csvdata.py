"""Parsing of the scenario curve CSVs.

Schema: header ``x_kind,x,series,value``; one row per point; the literal
token ``NaN`` marks gaps, which are kept as ``nan`` so plotted lines break
there instead of interpolating across.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HEADER = ("x_kind", "x", "series", "value")


class MissingInputError(FileNotFoundError):
    """A required scenario CSV is absent."""


class CsvFormatError(ValueError):
    """A curve CSV does not match the expected schema."""


@dataclass(frozen=True)
class Curve:
    """One named series: x values in file order and the matching values."""

    name: str
    x: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class CurveData:
    """All series of one CSV, sharing a single x-axis kind."""

    path: Path
    x_kind: str
    curves: tuple[Curve, ...]

    def curve(self, name: str) -> Curve:
        for c in self.curves:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def series_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.curves)


def load_curve_csv(path: str | Path) -> CurveData:
    """Parse a scenario curve CSV into per-series arrays.

    Raises :class:`MissingInputError` if the file does not exist and
    :class:`CsvFormatError` on schema violations.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingInputError(str(path))

    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(header) != HEADER:
            raise CsvFormatError(
                f"{path}: expected header {','.join(HEADER)}, got {header}")
        x_kind: str | None = None
        xs: dict[str, list[float]] = {}
        vals: dict[str, list[float]] = {}
        order: list[str] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise CsvFormatError(f"{path}:{lineno}: expected 4 columns")
            kind, x_text, series, value_text = row
            if x_kind is None:
                x_kind = kind
            elif kind != x_kind:
                raise CsvFormatError(
                    f"{path}:{lineno}: mixed x_kind {kind!r} and {x_kind!r}")
            try:
                x = float(x_text)
                value = float(value_text)
            except ValueError as exc:
                raise CsvFormatError(f"{path}:{lineno}: {exc}") from None
            if series not in xs:
                xs[series] = []
                vals[series] = []
                order.append(series)
            xs[series].append(x)
            vals[series].append(value)

    if x_kind is None:
        raise CsvFormatError(f"{path}: no data rows")
    curves = tuple(
        Curve(name, np.asarray(xs[name]), np.asarray(vals[name]))
        for name in order)
    return CurveData(path=path, x_kind=x_kind, curves=curves)
