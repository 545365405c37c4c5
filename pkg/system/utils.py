# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

from fractions import Fraction
from typing import Any, Mapping, Optional

from config import config


def format_decimal(value: Fraction | float | int, digits: Optional[int] = None) -> str:
    """
    Decimal sidecar for an exact value.

    Args:
        value (Fraction | float | int): The value to render.
        digits (Optional[int]): Significant digits (default `output.decimal_digits`).

    Returns:
        str: The value with the requested number of significant digits.
    """
    if digits is None:
        digits = int(config.get('output.decimal_digits', 15))
    return f"{float(value):.{digits}g}"


def flatten(data: Mapping[str, Any], prefix: str = '') -> dict[str, Any]:
    """
    Flattens nested dicts into dotted keys, e.g. {'schema': {'x': 1}} -> {'schema.x': 1}.

    Lists are kept as they are.
    """
    flat = {}
    for key, value in data.items():
        name = f"{prefix}.{key}" if prefix else str(key)
        if isinstance(value, Mapping):
            flat.update(flatten(value, name))
        else:
            flat[name] = value
    return flat


def str_value(value: Any) -> str:
    """Renders a cell for CSV and table output."""
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)
