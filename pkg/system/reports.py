# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

"""
Rendering of results: exact rationals with decimal sidecars, JSON, CSV and
aligned text tables, plus the Broome posterior table.
"""

import csv
import io
import json
import os
from fractions import Fraction
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

from system.amounts import format_amount
from system.exception_handler import NegativeIndex, UsageError
from system.posterior import conditional_expectation, decide_expectation, decide_probability_of_larger, split
from system.priors import BroomePrior, broome_pmf
from system.utils import flatten, format_decimal, str_value

FORMATS: tuple[str, ...] = ('json', 'csv', 'table')

Rows = Sequence[Mapping[str, Any]]


# --------------------------------------------------------------------------------
# Values
# --------------------------------------------------------------------------------

def rational(value: Fraction) -> dict[str, str]:
    """{"exact": "num/den", "decimal": "..."}"""
    return {'exact': format_amount(value), 'decimal': format_decimal(value)}


# --------------------------------------------------------------------------------
# Serializers
# --------------------------------------------------------------------------------

def to_json(payload: Any, single_line: bool = False) -> str:
    """
    Stable JSON text: sorted keys, so identical results give identical bytes.
    """
    if single_line:
        return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(',', ':'))
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2)


def _columns(rows: Rows) -> list[str]:
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns


def to_csv(rows: Rows) -> str:
    rows = [flatten(row) for row in rows]
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=_columns(rows), lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow({key: str_value(value) for key, value in row.items()})
    return buffer.getvalue()


def to_table(rows: Rows) -> str:
    """Left-aligned text table with a dashed rule under the header."""
    rows = [flatten(row) for row in rows]
    columns = _columns(rows)
    cells = [[str_value(row.get(column)) for column in columns] for row in rows]
    widths = [max([len(column)] + [len(line[i]) for line in cells]) for i, column in enumerate(columns)]

    def render(values: Iterable[str]) -> str:
        return '  '.join(value.ljust(width) for value, width in zip(values, widths)).rstrip()

    lines = [render(columns), render('-' * width for width in widths)]
    lines.extend(render(line) for line in cells)
    return '\n'.join(lines) + '\n'


def render(payload: Union[Mapping[str, Any], Rows], fmt: str = 'json', rows: Optional[Rows] = None) -> str:
    """
    Renders a result.

    Args:
        payload: The full result, used for JSON.
        fmt (str): One of json, csv, table.
        rows (Optional[Rows]): Tabular view for csv/table; defaults to the payload itself.

    Returns:
        str: The text to emit, newline-terminated.
    """
    if fmt not in FORMATS:
        raise UsageError("Unknown output format", format=fmt, formats=', '.join(FORMATS))
    if fmt == 'json':
        return to_json(payload) + '\n'
    if rows is None:
        rows = [payload] if isinstance(payload, Mapping) else payload
    return to_csv(rows) if fmt == 'csv' else to_table(rows)


def emit(text: str, out: Optional[str] = None) -> None:
    """Writes to the given path, or to stdout."""
    if not out:
        print(text, end='')
        return
    directory = os.path.dirname(os.path.abspath(out))
    os.makedirs(directory, exist_ok=True)
    with open(out, 'w', encoding='utf-8', newline='') as out_file:
        out_file.write(text)


# --------------------------------------------------------------------------------
# Broome table
# --------------------------------------------------------------------------------

def cmd_broome_table(n_max: int) -> list[dict[str, Any]]:
    """
    Posterior rows for x = 2**n, n = 0..n_max, under Broome's prior.

    Every row from n = 1 on has E[B | A = x] / x = 11/10 exactly, while the
    other envelope is more likely to hold the smaller amount.

    Raises:
        NegativeIndex: If n_max < 0.
    """
    if n_max < 0:
        raise NegativeIndex("n_max must be nonnegative", n_max=n_max)
    prior = BroomePrior()
    rows = []
    for n in range(n_max + 1):
        x = Fraction(2 ** n)
        posterior = split(prior, x)
        expectation = conditional_expectation(prior, x)
        rows.append({
            'n': n,
            'x': format_amount(x),
            'p': format_amount(broome_pmf(n)),
            'p_decimal': format_decimal(broome_pmf(n)),
            'p_up': format_amount(posterior.p_up),
            'p_up_decimal': format_decimal(posterior.p_up),
            'p_down': format_amount(posterior.p_down),
            'p_down_decimal': format_decimal(posterior.p_down),
            'expectation': format_amount(expectation),
            'expectation_decimal': format_decimal(expectation),
            'ratio': format_amount(expectation / x),
            'ratio_decimal': format_decimal(expectation / x),
            'decide_expectation': decide_expectation(prior, x).value,
            'decide_probability_of_larger': decide_probability_of_larger(prior, x).value,
        })
    return rows
