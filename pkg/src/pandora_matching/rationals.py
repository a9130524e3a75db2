"""Parsing and formatting of exact rational numbers.

All quantities in this package (values, costs, probabilities, welfare) are
`fractions.Fraction` instances.  JSON documents carry them either as strings
"num/den", as integers, or as decimal numbers, which are parsed with decimal
(not binary) semantics so that "0.1" means exactly 1/10.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any


class RationalParseError(ValueError):
    """Raised when a JSON value cannot be read as an exact rational."""


def parse_rational(obj: Any) -> Fraction:
    """Read a rational from a JSON-decoded value.

    Accepts Fraction (passed through), int, "num/den" or decimal strings,
    and floats (converted via their shortest decimal repr, so only use
    decimals that are exactly what you mean).
    """
    if isinstance(obj, Fraction):
        return obj
    if isinstance(obj, bool):
        raise RationalParseError(f"not a rational: {obj!r}")
    if isinstance(obj, int):
        return Fraction(obj)
    if isinstance(obj, float):
        return Fraction(repr(obj))
    if isinstance(obj, str):
        try:
            return Fraction(obj.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise RationalParseError(f"not a rational: {obj!r}") from exc
    raise RationalParseError(f"not a rational: {obj!r}")


def format_rational(x: Fraction) -> str:
    """Render a Fraction as "num/den" (or "num" for integers)."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def rational_json(x: Fraction) -> dict:
    """JSON object carrying both the exact value and a float rendering."""
    return {"exact": format_rational(x), "float": float(x)}


def load_json(path: str) -> Any:
    """Load a JSON file, decoding numbers exactly (decimal semantics)."""
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh, parse_float=Fraction)


def loads_json(text: str) -> Any:
    return json.loads(text, parse_float=Fraction)
