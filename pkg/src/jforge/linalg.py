"""Small exact linear algebra over Fractions (row reduction only)."""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence

Vector = List[Fraction]


def _rref(rows: Sequence[Sequence]) -> tuple:
    m = [[Fraction(v) for v in r] for r in rows]
    pivots = []
    if not m:
        return m, pivots
    ncols = len(m[0])
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][col]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(_rref(rows)[1])


def row_basis(rows: Sequence[Sequence]) -> List[Vector]:
    """Reduced basis of the row space."""
    return _rref(rows)[0]


def solve(columns: Sequence[Sequence], target: Sequence) -> Optional[Vector]:
    """Some x with sum_k x_k columns[k] = target, or None if target is not in the span."""
    if not columns:
        return [] if all(v == 0 for v in target) else None
    n = len(target)
    aug = [[Fraction(c[i]) for c in columns] + [Fraction(target[i])] for i in range(n)]
    red, pivots = _rref(aug)
    k = len(columns)
    if k in pivots:
        return None
    x = [Fraction(0)] * k
    for row, col in zip(red, pivots):
        x[col] = row[k]
    return x


def nullspace(rows: Sequence[Sequence], ncols: int) -> List[Vector]:
    """Basis of {x : rows . x = 0} for a matrix with ``ncols`` columns."""
    if not rows:
        return [[Fraction(int(i == k)) for i in range(ncols)] for k in range(ncols)]
    red, pivots = _rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    out = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(red, pivots):
            x[p] = -row[f]
        out.append(x)
    return out
