"""Exterior algebra over polynomial rings and the Schouten-Nijenhuis bracket.

Components are keyed by strictly increasing index tuples.  The same
sparse container backs multivector fields (indices are chart
coordinates), algebroid multisections and algebroid forms (indices are
basis sections).
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

from ..errors import ChartMismatchError, DegreeError, PoleError
from .chart import Chart, VarRef
from .polynomial import Polynomial, as_scalar

Index = Tuple[int, ...]


def merge_sign(a: Index, b: Index):
    """Sign and sorted union for e_a wedge e_b, or (0, None) on overlap."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    inversions = 0
    seen = set(a)
    for j in b:
        if j in seen:
            return 0, None
        inversions += len(a) - bisect_right(a, j)
    merged = tuple(sorted(a + b))
    return (-1 if inversions & 1 else 1), merged


def sort_sign(idx: Sequence[int]):
    """Sign of the permutation sorting ``idx`` and the sorted tuple (0 on repeats)."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign, tuple(sorted(idx))


class ExteriorElement:
    """Homogeneous element of an exterior algebra over polynomials.

    ``n_gen`` is the number of exterior generators.  Subclasses decide
    what a generator means.
    """

    __slots__ = ("chart", "n_gen", "degree", "_comps", "_hash")

    def __init__(self, chart: Chart, n_gen: int, degree: int,
                 comps: Optional[Mapping[Sequence[int], object]] = None):
        if degree < 0:
            raise DegreeError("degree must be non-negative")
        self.chart = chart
        self.n_gen = n_gen
        self.degree = degree
        self._hash = None
        clean: Dict[Index, Polynomial] = {}
        for idx, coeff in (comps or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != degree:
                raise DegreeError(f"index {idx} does not have length {degree}")
            if any(not 0 <= i < n_gen for i in idx):
                raise IndexError(f"index {idx} out of range for {n_gen} generators")
            sign, key = sort_sign(idx)
            if not sign:
                continue
            if not isinstance(coeff, Polynomial):
                coeff = Polynomial.constant(chart, coeff)
            else:
                chart.check_same(coeff.chart)
            if sign < 0:
                coeff = -coeff
            total = clean.get(key)
            total = coeff if total is None else total + coeff
            if total:
                clean[key] = total
            else:
                clean.pop(key, None)
        self._comps = clean

    def _new(self, degree: int, comps: Dict[Index, Polynomial]):
        obj = object.__new__(type(self))
        obj.chart = self.chart
        obj.n_gen = self.n_gen
        obj.degree = degree
        obj._comps = comps
        obj._hash = None
        return obj

    def _check(self, other: "ExteriorElement"):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if self.chart != other.chart or self.n_gen != other.n_gen:
            raise ChartMismatchError("operands live on different charts")

    # -- inspection ---------------------------------------------------

    @property
    def components(self) -> Dict[Index, Polynomial]:
        return dict(self._comps)

    def items(self):
        return self._comps.items()

    def component(self, idx: Sequence[int]) -> Polynomial:
        """Coefficient of e_idx for an arbitrary (possibly unsorted) index list."""
        sign, key = sort_sign(idx)
        if not sign:
            return Polynomial.zero(self.chart)
        c = self._comps.get(key)
        if c is None:
            return Polynomial.zero(self.chart)
        return c if sign > 0 else -c

    @property
    def is_zero(self) -> bool:
        return not self._comps

    def __bool__(self):
        return bool(self._comps)

    def as_polynomial(self) -> Polynomial:
        if self.degree != 0:
            raise DegreeError("only degree-0 elements are functions")
        return self._comps.get((), Polynomial.zero(self.chart))

    # -- linear structure ---------------------------------------------

    def __add__(self, other):
        if not isinstance(other, ExteriorElement):
            return NotImplemented
        self._check(other)
        if other.degree != self.degree:
            raise DegreeError("cannot add elements of different degree")
        comps = dict(self._comps)
        for k, v in other._comps.items():
            s = comps.get(k)
            s = v if s is None else s + v
            if s:
                comps[k] = s
            else:
                comps.pop(k, None)
        return self._new(self.degree, comps)

    def __neg__(self):
        return self._new(self.degree, {k: -v for k, v in self._comps.items()})

    def __sub__(self, other):
        if not isinstance(other, ExteriorElement):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        """Multiply by a scalar or a function (Polynomial)."""
        if isinstance(other, ExteriorElement):
            return NotImplemented
        if isinstance(other, Polynomial):
            self.chart.check_same(other.chart)
            comps = {}
            for k, v in self._comps.items():
                p = v * other
                if p:
                    comps[k] = p
            return self._new(self.degree, comps)
        c = as_scalar(other)
        if not c:
            return self._new(self.degree, {})
        return self._new(self.degree, {k: v.scale(c) for k, v in self._comps.items()})

    __rmul__ = __mul__

    def map_coefficients(self, fn, chart: Optional[Chart] = None):
        """Apply ``fn`` to every coefficient, optionally moving to a new chart."""
        target = chart or self.chart
        obj = type(self).__new__(type(self))
        ExteriorElement.__init__(obj, target, self.n_gen, self.degree,
                                 {k: fn(v) for k, v in self._comps.items()})
        return obj

    # -- exterior product ---------------------------------------------

    def wedge(self, other: "ExteriorElement"):
        self._check(other)
        comps: Dict[Index, Polynomial] = {}
        for a, p in self._comps.items():
            for b, q in other._comps.items():
                sign, key = merge_sign(a, b)
                if not sign:
                    continue
                term = p * q
                if sign < 0:
                    term = -term
                s = comps.get(key)
                s = term if s is None else s + term
                if s:
                    comps[key] = s
                else:
                    comps.pop(key, None)
        return self._new(self.degree + other.degree, comps)

    def contract(self, alpha: Sequence[Polynomial]):
        """Interior product with the 1-form sum_i alpha[i] e^i in the first slot."""
        if self.degree == 0:
            raise DegreeError("cannot contract a degree-0 element")
        if len(alpha) != self.n_gen:
            raise ValueError("form has the wrong number of components")
        comps: Dict[Index, Polynomial] = {}
        for idx, p in self._comps.items():
            for j, i in enumerate(idx):
                a = alpha[i]
                if a is None or not a:
                    continue
                term = p * a
                if j & 1:
                    term = -term
                key = idx[:j] + idx[j + 1:]
                s = comps.get(key)
                s = term if s is None else s + term
                if s:
                    comps[key] = s
                else:
                    comps.pop(key, None)
        return self._new(self.degree - 1, comps)

    # -- comparison ---------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, ExteriorElement):
            return NotImplemented
        if type(other) is not type(self):
            return False
        return (self.chart == other.chart and self.n_gen == other.n_gen
                and self.degree == other.degree and self._comps == other._comps)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((type(self).__name__, self.chart, self.n_gen, self.degree,
                               frozenset(self._comps.items())))
        return self._hash

    def _generator_label(self, i: int) -> str:
        return f"e{i}"

    def __str__(self):
        if not self._comps:
            return "0"
        parts = []
        for idx in sorted(self._comps):
            coeff = str(self._comps[idx])
            basis = "^".join(self._generator_label(i) for i in idx)
            if not basis:
                parts.append(coeff)
            elif coeff == "1":
                parts.append(basis)
            elif coeff == "-1":
                parts.append("-" + basis)
            else:
                parts.append(f"({coeff})*{basis}")
        return " + ".join(parts)

    def __repr__(self):
        return f"{type(self).__name__}[{self.degree}]({self})"


class Multivector(ExteriorElement):
    """Multivector field on a chart: generators are the coordinate fields."""

    __slots__ = ()

    def __init__(self, chart: Chart, degree: int,
                 comps: Optional[Mapping[Sequence[int], object]] = None):
        super().__init__(chart, chart.dim, degree, comps)

    @classmethod
    def zero(cls, chart: Chart, degree: int) -> "Multivector":
        return cls(chart, degree)

    @classmethod
    def function(cls, f: Polynomial) -> "Multivector":
        return cls(f.chart, 0, {(): f})

    @classmethod
    def coordinate(cls, chart: Chart, *variables: VarRef) -> "Multivector":
        """The constant multivector d/dv1 ^ ... ^ d/dvk."""
        idx = [chart.index(v) for v in variables]
        return cls(chart, len(idx), {tuple(idx): 1})

    @classmethod
    def vector(cls, chart: Chart, coeffs: Mapping[VarRef, object]) -> "Multivector":
        return cls(chart, 1, {(chart.index(v),): c for v, c in coeffs.items()})

    @classmethod
    def euler(cls, chart: Chart, variables: Iterable[VarRef]) -> "Multivector":
        """Sum of v d/dv over the given variables (fiberwise Liouville field)."""
        comps = {}
        for v in variables:
            i = chart.index(v)
            comps[(i,)] = Polynomial.variable(chart, i)
        return cls(chart, 1, comps)

    def _generator_label(self, i: int) -> str:
        return f"d_{self.chart.names[i]}"

    def transfer(self, chart: Chart) -> "Multivector":
        """Re-express on a chart that contains every variable used, by name."""
        if chart == self.chart:
            return self
        pos = [chart.index(n) for n in self.chart.names if n in chart._index]
        if len(pos) != self.chart.dim:
            missing = [n for n in self.chart.names if n not in chart._index]
            # directions along missing variables must not occur
            drop = {self.chart.index(n) for n in missing}
            if any(set(idx) & drop for idx in self._comps):
                raise ValueError(f"components along {missing} cannot be transferred")
        comps = {}
        for idx, p in self._comps.items():
            comps[tuple(chart.index(self.chart.names[i]) for i in idx)] = p.transfer(chart)
        return Multivector(chart, self.degree, comps)

    def substitute(self, values: Mapping[VarRef, object]) -> "Multivector":
        comps = {}
        for k, v in self._comps.items():
            p = v.substitute(values)
            if p:
                comps[k] = p
        return self._new(self.degree, comps)

    def apply(self, f: Polynomial) -> Polynomial:
        """X(f) for a vector field X."""
        if self.degree != 1:
            raise DegreeError("only vector fields act on functions")
        return insert_differential(self, f).as_polynomial()

    def values(self, point: Sequence) -> Dict[Index, object]:
        """Numeric component values at a point (exact for rational points)."""
        return {k: v(point) for k, v in self._comps.items()}


def differential(f: Polynomial):
    return [f.derivative(i) for i in range(f.chart.dim)]


def wedge(p: Multivector, q: Multivector) -> Multivector:
    """Exterior product p ^ q."""
    return p.wedge(q)


def insert_differential(p: Multivector, f: Polynomial) -> Multivector:
    """Interior product i_{df} p (contraction in the first slot)."""
    if p.degree == 0:
        raise DegreeError("insert_differential needs degree >= 1")
    p.chart.check_same(f.chart)
    return p.contract(differential(f))


def pair(p: Multivector, *fs: Polynomial) -> Polynomial:
    """Full contraction p(df1, ..., dfk)."""
    if len(fs) != p.degree:
        raise DegreeError("need exactly one function per slot")
    out = p
    for f in fs:
        out = insert_differential(out, f)
    return out.as_polynomial()


def _right_derivative(idx: Index, pos: int):
    # d/dtheta_i from the right of theta_idx, i = idx[pos]
    sign = -1 if (len(idx) - 1 - pos) & 1 else 1
    return sign, idx[:pos] + idx[pos + 1:]


def _half_bracket(p: Multivector, q: Multivector, comps: Dict[Index, Polynomial], outer: int):
    # accumulates outer * sum_i (p <- d theta_i) ^ (d_{x_i} q)
    deriv_cache: Dict[Tuple[Index, int], Polynomial] = {}
    for a, pa in p._comps.items():
        for pos, i in enumerate(a):
            s1, ar = _right_derivative(a, pos)
            for b, qb in q._comps.items():
                sign, key = merge_sign(ar, b)
                if not sign:
                    continue
                d = deriv_cache.get((b, i))
                if d is None:
                    d = qb.derivative(i)
                    deriv_cache[(b, i)] = d
                if not d:
                    continue
                term = pa * d
                if sign * s1 * outer < 0:
                    term = -term
                s = comps.get(key)
                s = term if s is None else s + term
                if s:
                    comps[key] = s
                else:
                    comps.pop(key, None)


def schouten_nijenhuis(p: Multivector, q: Multivector) -> Multivector:
    """Schouten-Nijenhuis bracket [p, q] of degree k + l - 1.

    Conventions: [X, f] = X(f), [X, Y] is the Lie bracket, graded
    antisymmetry [p, q] = -(-1)^((k-1)(l-1)) [q, p].  Two functions
    bracket to the zero function.
    """
    if not isinstance(p, Multivector) or not isinstance(q, Multivector):
        raise TypeError("schouten_nijenhuis expects multivectors")
    p.chart.check_same(q.chart)
    k, l = p.degree, q.degree
    if k == 0 and l == 0:
        return Multivector.zero(p.chart, 0)
    comps: Dict[Index, Polynomial] = {}
    _half_bracket(p, q, comps, 1)
    _half_bracket(q, p, comps, -1 if ((k - 1) * (l - 1)) % 2 == 0 else 1)
    return p._new(k + l - 1, comps)


def lie_derivative(x: Multivector, p: Multivector) -> Multivector:
    """Lie derivative of a multivector field along a vector field."""
    if x.degree != 1:
        raise DegreeError("lie_derivative needs a vector field")
    return schouten_nijenhuis(x, p)


def evaluate(p: Multivector, point: Sequence) -> Multivector:
    """Evaluate every coefficient at a rational point (result is constant)."""
    if len(point) != p.chart.dim:
        raise ValueError("point length does not match chart dimension")
    pt = [as_scalar(x) for x in point]
    comps = {}
    for k, v in p._comps.items():
        c = v(pt)
        if c:
            comps[k] = Polynomial.constant(p.chart, c)
    return p._new(p.degree, comps)
