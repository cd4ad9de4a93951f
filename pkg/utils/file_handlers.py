#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
File Handlers module
Handles result CSV files, plain-text config files and table comparison
"""

import csv
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigError
from models.experiment_model import format_value

logger = logging.getLogger(__name__)


@dataclass
class ResultTable:
    """
    Class holding a result CSV in memory

    Attributes:
        config (Dict[str, str]): Resolved parameters from the '# key=value' header lines
        results (Dict[str, str]): Summary values from the '# result.name=value' lines
        columns (List[str]): Column names
        rows (List[List[Any]]): Data rows, numbers parsed to float where possible
    """

    config: Dict[str, str] = field(default_factory=dict)
    results: Dict[str, str] = field(default_factory=dict)
    columns: List[str] = field(default_factory=list)
    rows: List[List[Any]] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise ConfigError(f"Column '{name}' not found, available: {self.columns}")
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows])

    def numeric_columns(self) -> List[str]:
        return [c for c in self.columns if all(isinstance(v, float) for v in self.column(c))]


def _format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % float(value)
    return str(value)


def write_csv(
    path: str,
    config: Dict[str, Any],
    columns: Sequence[str],
    rows: Sequence[Dict[str, Any]],
    results: Optional[Dict[str, Any]] = None,
) -> str:
    """
    Write a result table with its resolved configuration

    Layout: sorted '# key=value' lines, '# result.name=value' lines, the
    column row, then one line per row with %.12g numbers.

    Args:
        path: Output CSV path
        config: Resolved parameters
        columns: Column order
        rows: Row dicts keyed by column
        results: Summary values

    Returns:
        The written path
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(path, "w", newline="") as f:
        for key in sorted(config):
            f.write(f"# {key}={format_value(config[key])}\n")
        for key in sorted(results or {}):
            f.write(f"# result.{key}={_format_cell(results[key])}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row.get(c, "")) for c in columns])
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def _parse_cell(text: str) -> Any:
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path: str) -> ResultTable:
    """Read a result CSV written by write_csv"""
    if not os.path.isfile(path):
        raise ConfigError(f"Result file '{path}' not found")
    table = ResultTable()
    with open(path, newline="") as f:
        data_lines = []
        for line in f:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key.startswith("result."):
                    table.results[key[len("result."):]] = value
                else:
                    table.config[key] = value
            elif line.strip():
                data_lines.append(line)
    reader = csv.reader(data_lines)
    table.columns = next(reader, [])
    table.rows = [[_parse_cell(v) for v in row] for row in reader]
    logger.debug(f"Read {len(table.rows)} rows from {path}")
    return table


def read_config_file(path: str) -> Dict[str, str]:
    """
    Parse a plain-text config of one key=value pair per line

    Blank lines and lines starting with '#' are skipped.

    Raises:
        ConfigError: on a missing file or a malformed line
    """
    if not os.path.isfile(path):
        raise ConfigError(f"Config file '{path}' not found")
    pairs = {}
    with open(path) as f:
        for number, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{number}: expected key=value, got '{line}'")
            pairs[key.strip()] = value.strip()
    return pairs


def parse_tolerances(text: Optional[str], default: float = 1e-9) -> Tuple[float, Dict[str, float]]:
    """'0.05' or 'col=0.05,other=1e-3' into a default and per-column tolerances"""
    if not text:
        return default, {}
    per_column = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        try:
            if sep:
                per_column[key.strip()] = float(value)
            else:
                default = float(key)
        except ValueError as e:
            raise ConfigError(f"Bad tolerance '{part}'") from e
    return default, per_column


def compare_tables(
    a: ResultTable,
    b: ResultTable,
    tol: float = 1e-9,
    per_column: Optional[Dict[str, float]] = None,
    pairs: Optional[Sequence[Tuple[str, str]]] = None,
) -> List[Dict[str, Any]]:
    """
    Per-column maximum absolute deviation between two tables

    Args:
        a, b: Tables to compare; b may be a itself for column-pair checks
        tol: Default tolerance
        per_column: Tolerance overrides keyed by column of a
        pairs: Column pairs (col_a, col_b); shared numeric columns when None

    Returns:
        Report rows with column, max_dev, tol and passed

    Raises:
        ConfigError: on a shape mismatch
    """
    per_column = per_column or {}
    if len(a.rows) != len(b.rows):
        raise ConfigError(f"Row count mismatch: {len(a.rows)} vs {len(b.rows)}")
    if pairs is None:
        shared = [c for c in a.numeric_columns() if c in b.columns]
        pairs = [(c, c) for c in shared]
    report = []
    for col_a, col_b in pairs:
        x = np.asarray(a.column(col_a), dtype=float)
        y = np.asarray(b.column(col_b), dtype=float)
        both_nan = np.isnan(x) & np.isnan(y)
        dev = np.where(both_nan, 0.0, np.abs(x - y))
        max_dev = float(np.max(dev)) if len(dev) else 0.0
        if np.isnan(max_dev):
            max_dev = float("inf")
        limit = per_column.get(col_a, tol)
        report.append({
            "column": col_a if col_a == col_b else f"{col_a}:{col_b}",
            "max_dev": max_dev,
            "tol": limit,
            "passed": max_dev <= limit,
        })
    return report
