"""Exact polynomial and multivector algebra."""

from .chart import Chart
from .polynomial import Polynomial, as_scalar
from .multivector import (
    ExteriorElement,
    Multivector,
    differential,
    evaluate,
    insert_differential,
    lie_derivative,
    merge_sign,
    pair,
    schouten_nijenhuis,
    sort_sign,
    wedge,
)

__all__ = [
    "Chart", "Polynomial", "as_scalar", "ExteriorElement", "Multivector",
    "differential", "evaluate", "insert_differential", "lie_derivative",
    "merge_sign", "pair", "schouten_nijenhuis", "sort_sign", "wedge",
]
