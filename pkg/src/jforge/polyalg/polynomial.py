"""Sparse exact polynomials (optionally Laurent in chosen variables)."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

from ..errors import PoleError
from .chart import Chart, VarRef

Exponent = Tuple[int, ...]


def as_scalar(value) -> Fraction:
    """Coerce ints, Fractions and decimal strings to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact coefficients")
    raise TypeError(f"cannot use {type(value).__name__} as a scalar")


def _add_exp(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


class Polynomial:
    """Immutable polynomial on a chart, stored as {exponent tuple: Fraction}."""

    __slots__ = ("chart", "_terms", "_hash")

    def __init__(self, chart: Chart, terms: Optional[Mapping[Sequence[int], object]] = None):
        clean: Dict[Exponent, Fraction] = {}
        n = chart.dim
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n:
                raise ValueError(f"exponent {exp} does not match chart dimension {n}")
            for i, e in enumerate(exp):
                if e < 0 and not chart.laurent[i]:
                    raise ValueError(f"negative exponent on non-Laurent variable {chart.names[i]}")
            c = as_scalar(c)
            if c:
                c = clean.get(exp, 0) + c
                if c:
                    clean[exp] = c
                else:
                    clean.pop(exp, None)
        self.chart = chart
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, chart: Chart, terms: Dict[Exponent, Fraction]) -> "Polynomial":
        # trusted constructor: terms already canonical
        obj = object.__new__(cls)
        obj.chart = chart
        obj._terms = terms
        obj._hash = None
        return obj

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, chart: Chart) -> "Polynomial":
        return cls._raw(chart, {})

    @classmethod
    def constant(cls, chart: Chart, value) -> "Polynomial":
        c = as_scalar(value)
        return cls._raw(chart, {(0,) * chart.dim: c} if c else {})

    @classmethod
    def one(cls, chart: Chart) -> "Polynomial":
        return cls.constant(chart, 1)

    @classmethod
    def variable(cls, chart: Chart, var: VarRef, power: int = 1) -> "Polynomial":
        i = chart.index(var)
        exp = [0] * chart.dim
        exp[i] = power
        return cls(chart, {tuple(exp): 1})

    @classmethod
    def monomial(cls, chart: Chart, exp: Sequence[int], coeff=1) -> "Polynomial":
        return cls(chart, {tuple(exp): coeff})

    # -- inspection ---------------------------------------------------

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        zero = (0,) * self.chart.dim
        return all(e == zero for e in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.chart.dim, Fraction(0))

    def degree_in(self, variables: Iterable[int]) -> int:
        """Largest total degree in the given variables (-1 for the zero polynomial)."""
        variables = tuple(variables)
        if not self._terms:
            return -1
        return max(sum(e[i] for i in variables) for e in self._terms)

    def min_degree_in(self, variables: Iterable[int]) -> int:
        variables = tuple(variables)
        if not self._terms:
            return 0
        return min(sum(e[i] for i in variables) for e in self._terms)

    def depends_on(self, variables: Iterable[int]) -> bool:
        variables = tuple(variables)
        return any(e[i] != 0 for e in self._terms for i in variables)

    def split_by(self, variables: Sequence[int]) -> Dict[Exponent, "Polynomial"]:
        """Group terms by their exponents in ``variables``.

        Returns {exponents in those variables: coefficient polynomial with
        those variables removed (set to exponent 0)}.
        """
        out: Dict[Exponent, Dict[Exponent, Fraction]] = {}
        for exp, c in self._terms.items():
            key = tuple(exp[i] for i in variables)
            rest = list(exp)
            for i in variables:
                rest[i] = 0
            out.setdefault(key, {})[tuple(rest)] = c
        return {k: Polynomial._raw(self.chart, v) for k, v in out.items()}

    # -- arithmetic ---------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self.chart.check_same(other.chart)
            return other
        return Polynomial.constant(self.chart, other)

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not other._terms:
            return self
        terms = dict(self._terms)
        for e, c in other._terms.items():
            v = terms.get(e, 0) + c
            if v:
                terms[e] = v
            else:
                terms.pop(e, None)
        return Polynomial._raw(self.chart, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.chart, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Polynomial":
        c = as_scalar(c)
        if not c:
            return Polynomial.zero(self.chart)
        return Polynomial._raw(self.chart, {e: v * c for e, v in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self.chart.check_same(other.chart)
        if not self._terms or not other._terms:
            return Polynomial.zero(self.chart)
        terms: Dict[Exponent, Fraction] = {}
        for ea, ca in self._terms.items():
            for eb, cb in other._terms.items():
                e = _add_exp(ea, eb)
                v = terms.get(e, 0) + ca * cb
                if v:
                    terms[e] = v
                else:
                    terms.pop(e, None)
        return Polynomial._raw(self.chart, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n < 0:
            # only a single (Laurent) monomial can be inverted
            if len(self._terms) != 1:
                raise ValueError("negative powers need a single monomial")
            (e, c), = self._terms.items()
            return Polynomial(self.chart, {tuple(x * n for x in e): c ** n})
        result = Polynomial.one(self.chart)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivative(self, var: VarRef) -> "Polynomial":
        i = self.chart.index(var)
        terms = {}
        for e, c in self._terms.items():
            if e[i]:
                d = list(e)
                d[i] -= 1
                terms[tuple(d)] = c * e[i]
        return Polynomial._raw(self.chart, terms)

    # -- evaluation and change of chart -------------------------------

    def __call__(self, point: Sequence):
        """Evaluate at a point; exact if the point is rational, float otherwise."""
        if len(point) != self.chart.dim:
            raise ValueError("point length does not match chart dimension")
        point = [Fraction(x) if isinstance(x, int) else x for x in point]
        total = 0
        for e, c in self._terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    if k < 0 and x == 0:
                        raise PoleError("Laurent pole at evaluation point")
                    term = term * (x ** k)
            total = total + term
        if isinstance(total, int):
            total = Fraction(total)
        return total

    def substitute(self, values: Mapping[VarRef, object]) -> "Polynomial":
        """Replace some variables by rational constants (chart unchanged)."""
        fixed = {self.chart.index(k): as_scalar(v) for k, v in values.items()}
        terms: Dict[Exponent, Fraction] = {}
        for e, c in self._terms.items():
            d = list(e)
            for i, v in fixed.items():
                if d[i]:
                    if d[i] < 0 and v == 0:
                        raise PoleError("Laurent pole in substitution")
                    c = c * v ** d[i]
                    d[i] = 0
            if c:
                key = tuple(d)
                s = terms.get(key, 0) + c
                if s:
                    terms[key] = s
                else:
                    terms.pop(key, None)
        return Polynomial._raw(self.chart, terms)

    def transfer(self, chart: Chart) -> "Polynomial":
        """Re-express on another chart, matching variables by name.

        Every variable that actually occurs must exist in the target chart.
        """
        if chart == self.chart:
            return self
        pos = []
        for i, name in enumerate(self.chart.names):
            pos.append(chart._index.get(name))
        terms = {}
        for e, c in self._terms.items():
            d = [0] * chart.dim
            for i, k in enumerate(e):
                if k:
                    j = pos[i]
                    if j is None:
                        raise ValueError(f"variable {self.chart.names[i]} missing in target chart")
                    d[j] = k
            terms[tuple(d)] = c
        return Polynomial(chart, terms)

    # -- comparison and display ---------------------------------------

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.chart == other.chart and self._terms == other._terms
        try:
            c = as_scalar(other)
        except TypeError:
            return NotImplemented
        return self._terms == ({(0,) * self.chart.dim: c} if c else {})

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, frozenset(self._terms.items())))
        return self._hash

    def sorted_terms(self):
        """Terms in canonical order (exponent vectors ascending)."""
        return sorted(self._terms.items())

    def __str__(self):
        if not self._terms:
            return "0"
        pieces = []
        for e, c in sorted(self._terms.items(), key=lambda t: (-sum(t[0]), [-x for x in t[0]])):
            mono = "*".join(
                name if k == 1 else f"{name}^{k}"
                for name, k in zip(self.chart.names, e) if k
            )
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{mag}*{mono}"
            else:
                body = str(mag)
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"Polynomial({self})"
