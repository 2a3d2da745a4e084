"""Jacobi structures, hamiltonian fields, the Schouten-Jacobi bracket and classification.

All closure tests run on finite generator sets.  Jacobi brackets are
first-order bidifferential operators, so
``{f u, g v} = f g {u, v} + f v Lam(du, dg) + g u Lam(df, dv) + u v {f, g}``
reduces every closure property over fiberwise-affine functions to the
generators ``1, x^i, y^a, x^i y^a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ChartMismatchError, DegreeError, SplitError
from .polyalg import (
    Chart,
    Multivector,
    Polynomial,
    insert_differential,
    lie_derivative,
    pair,
    schouten_nijenhuis,
)


class JacobiStructure:
    """A bivector ``lam`` and a vector field ``e`` on one chart.

    Nothing is verified on construction; use :func:`check_master`.
    """

    __slots__ = ("lam", "e")

    def __init__(self, lam: Multivector, e: Optional[Multivector] = None):
        if lam.degree != 2:
            raise DegreeError("lambda must be a bivector")
        if e is None:
            e = Multivector.zero(lam.chart, 1)
        if e.degree != 1:
            raise DegreeError("E must be a vector field")
        lam.chart.check_same(e.chart)
        self.lam = lam
        self.e = e

    @classmethod
    def zero(cls, chart: Chart) -> "JacobiStructure":
        return cls(Multivector.zero(chart, 2), Multivector.zero(chart, 1))

    @property
    def chart(self) -> Chart:
        return self.lam.chart

    def as_op(self) -> "FirstOrderOp":
        return FirstOrderOp(self.lam, self.e)

    def transfer(self, chart: Chart) -> "JacobiStructure":
        return JacobiStructure(self.lam.transfer(chart), self.e.transfer(chart))

    def __eq__(self, other):
        if not isinstance(other, JacobiStructure):
            return NotImplemented
        return self.lam == other.lam and self.e == other.e

    def __hash__(self):
        return hash((self.lam, self.e))

    def __repr__(self):
        return f"JacobiStructure(lam={self.lam}, E={self.e})"


@dataclass(frozen=True)
class MasterReport:
    passed: bool
    lambda_residual: Multivector   # [Lam, Lam] + 2 E ^ Lam
    e_residual: Multivector        # [E, Lam]

    def __bool__(self):
        return self.passed


def check_master(j: JacobiStructure) -> MasterReport:
    """Test [Lam, Lam] = -2 E ^ Lam and [E, Lam] = 0 exactly."""
    r1 = schouten_nijenhuis(j.lam, j.lam) + j.e.wedge(j.lam) * 2
    r2 = schouten_nijenhuis(j.e, j.lam)
    return MasterReport(r1.is_zero and r2.is_zero, r1, r2)


def jacobi_bracket(j: JacobiStructure, f: Polynomial, g: Polynomial) -> Polynomial:
    """{f, g} = Lam(df, dg) + f E(g) - g E(f)."""
    j.chart.check_same(f.chart)
    j.chart.check_same(g.chart)
    return pair(j.lam, f, g) + f * j.e.apply(g) - g * j.e.apply(f)


def hamiltonian_vf(j: JacobiStructure, f: Polynomial) -> Multivector:
    """X_f = #(df) + f E, so that X_f(g) = Lam(df, dg) + f E(g)."""
    j.chart.check_same(f.chart)
    return insert_differential(j.lam, f) + j.e * f


# -- first-order polydifferential operators ---------------------------------


class FirstOrderOp:
    """The operator P + I ^ Q with P of degree k and Q of degree k - 1.

    For k = 0 the operator is a function and ``q`` is None.
    """

    __slots__ = ("p", "q")

    def __init__(self, p: Multivector, q: Optional[Multivector] = None):
        if p.degree == 0:
            if q is not None and not q.is_zero:
                raise DegreeError("a degree-0 operator has no Q part")
            q = None
        else:
            if q is None:
                q = Multivector.zero(p.chart, p.degree - 1)
            if q.degree != p.degree - 1:
                raise DegreeError("Q must have degree deg(P) - 1")
            p.chart.check_same(q.chart)
        self.p = p
        self.q = q

    @classmethod
    def function(cls, f: Polynomial) -> "FirstOrderOp":
        return cls(Multivector.function(f))

    @classmethod
    def identity_times(cls, f: Polynomial) -> "FirstOrderOp":
        """The operator f I of degree 1 (P = 0, Q = f)."""
        return cls(Multivector.zero(f.chart, 1), Multivector.function(f))

    @property
    def degree(self) -> int:
        return self.p.degree

    @property
    def chart(self) -> Chart:
        return self.p.chart

    @property
    def is_zero(self) -> bool:
        return self.p.is_zero and (self.q is None or self.q.is_zero)

    def __add__(self, other: "FirstOrderOp") -> "FirstOrderOp":
        if self.degree != other.degree:
            raise DegreeError("degree mismatch")
        q = None if self.q is None else self.q + other.q
        return FirstOrderOp(self.p + other.p, q)

    def __neg__(self):
        return FirstOrderOp(-self.p, None if self.q is None else -self.q)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, FirstOrderOp):
            return NotImplemented
        return self.p == other.p and self.q == other.q

    def __hash__(self):
        return hash((self.p, self.q))

    def __repr__(self):
        return f"FirstOrderOp(P={self.p}, Q={self.q})"


def schouten_jacobi(a: FirstOrderOp, b: FirstOrderOp) -> FirstOrderOp:
    """Bracket of A1 + I^A2 and B1 + I^B2 on first-order polydifferential operators.

    With a = deg A2 and b = deg B2, the P part is
    [A1,B1] + a A1^B2 - (-1)^a b A2^B1 and the Q part is
    (-1)^a [A1,B2] + [A2,B1] + (a - b) A2^B2.
    """
    a.chart.check_same(b.chart)
    k, l = a.degree, b.degree
    da, db = k - 1, l - 1
    chart = a.chart
    p = schouten_nijenhuis(a.p, b.p)
    if k + l - 1 < 0:
        return FirstOrderOp(Multivector.zero(chart, 0))
    if b.q is not None and da:
        p = p + a.p.wedge(b.q) * da
    if a.q is not None and db:
        term = a.q.wedge(b.p) * db
        p = p - term if da % 2 == 0 else p + term
    if k + l - 2 < 0:
        return FirstOrderOp(p)
    q = Multivector.zero(chart, k + l - 2)
    if b.q is not None:
        t = schouten_nijenhuis(a.p, b.q)
        q = q + t if da % 2 == 0 else q - t
    if a.q is not None:
        q = q + schouten_nijenhuis(a.q, b.p)
    if a.q is not None and b.q is not None and da != db:
        q = q + a.q.wedge(b.q) * (da - db)
    return FirstOrderOp(p, q)


# -- fiber predicates -------------------------------------------------------


def _fiber(chart: Chart) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    if not chart.has_split:
        raise SplitError("classification needs a base/fiber split")
    if chart.extra:
        names = [chart.names[i] for i in chart.extra]
        raise SplitError(f"variables {names} are in neither the base nor the fiber block")
    return chart.base, chart.fiber


def is_basic(f: Polynomial) -> bool:
    """True when f does not depend on the fiber variables."""
    return not f.depends_on(f.chart.fiber)


def is_affine_function(f: Polynomial) -> bool:
    return f.degree_in(f.chart.fiber) <= 1 and f.min_degree_in(f.chart.fiber) >= 0


def is_linear_function(f: Polynomial) -> bool:
    fib = f.chart.fiber
    return f.is_zero or (f.degree_in(fib) == 1 and f.min_degree_in(fib) == 1)


def affine_generators(chart: Chart) -> List[Polynomial]:
    """Generators 1, x^i, y^a, x^i y^a in this order."""
    base, fiber = _fiber(chart)
    one = Polynomial.one(chart)
    xs = [Polynomial.variable(chart, i) for i in base]
    ys = [Polynomial.variable(chart, a) for a in fiber]
    return [one] + xs + ys + [x * y for x in xs for y in ys]


def linear_generators(chart: Chart) -> List[Polynomial]:
    base, fiber = _fiber(chart)
    xs = [Polynomial.variable(chart, i) for i in base]
    ys = [Polynomial.variable(chart, a) for a in fiber]
    return ys + [x * y for x in xs for y in ys]


def basic_generators(chart: Chart) -> List[Polynomial]:
    base, _ = _fiber(chart)
    return [Polynomial.one(chart)] + [Polynomial.variable(chart, i) for i in base]


@dataclass(frozen=True)
class Witness:
    """Generator functions exhibiting a failed property, plus the offending value."""

    generators: Tuple[Polynomial, ...]
    value: object
    reason: str

    def labels(self) -> Tuple[str, ...]:
        return tuple(str(g) for g in self.generators)

    def __str__(self):
        return f"{self.reason}: ({', '.join(self.labels())}) -> {self.value}"


Check = Tuple[bool, Optional[Witness]]
OK: Check = (True, None)


def _pairwise(j, gens, predicate, reason) -> Check:
    for a, b in combinations(gens, 2):
        v = jacobi_bracket(j, a, b)
        if not predicate(v):
            return False, Witness((a, b), v, reason)
    return OK


def bracket_affine(j: JacobiStructure) -> Check:
    """Affine functions close under the bracket (checked on generators)."""
    return _pairwise(j, affine_generators(j.chart), is_affine_function,
                     "bracket of affine generators is not affine")


def bracket_linear(j: JacobiStructure) -> Check:
    """Linear functions close under the bracket (checked on generators)."""
    return _pairwise(j, linear_generators(j.chart), is_linear_function,
                     "bracket of linear generators is not linear")


def hamiltonians_affine(j: JacobiStructure) -> Check:
    """X_a(b) affine for all affine generators a, b.

    Pairs a < b are tested (in generator order) as X_a(b) first, then the
    reversed and diagonal pairs.
    """
    gens = affine_generators(j.chart)
    fields = [hamiltonian_vf(j, a) for a in gens]
    n = len(gens)
    order = [(i, k) for i in range(n) for k in range(i + 1, n)]
    order += [(i, k) for i in range(n) for k in range(i + 1)]
    for i, k in order:
        v = fields[i].apply(gens[k])
        if not is_affine_function(v):
            return False, Witness((gens[i], gens[k]), v,
                                  "hamiltonian field of an affine function is not affine")
    return OK


def _first_failure(*checks) -> Check:
    for c in checks:
        ok, w = c() if callable(c) else c
        if not ok:
            return False, w
    return OK


# -- homogeneity (two routes) -----------------------------------------------


def homogeneous_by_liouville(j: JacobiStructure) -> Check:
    """L_Delta Lam = -Lam and L_Delta E = -E for the fiber Liouville field."""
    chart = j.chart
    _, fiber = _fiber(chart)
    delta = Multivector.euler(chart, fiber)
    r1 = lie_derivative(delta, j.lam) + j.lam
    if not r1.is_zero:
        return False, Witness((), r1, "L_Delta Lam + Lam is not zero")
    r2 = lie_derivative(delta, j.e) + j.e
    if not r2.is_zero:
        return False, Witness((), r2, "L_Delta E + E is not zero")
    return OK


def homogeneous_by_brackets(j: JacobiStructure) -> Check:
    """Bracket linear and affine, and {l, 1} basic for linear generators l."""
    one = Polynomial.one(j.chart)

    def unit_brackets():
        for l in linear_generators(j.chart):
            v = jacobi_bracket(j, l, one)
            if not is_basic(v):
                return False, Witness((l, one), v, "bracket of a linear function with 1 is not basic")
        return OK

    return _first_failure(lambda: bracket_linear(j), lambda: bracket_affine(j), unit_brackets)


# -- the five equivalent strong-affinity conditions --------------------------


def invariant_operators(chart: Chart, functions_as: str = "multiplication") -> List[FirstOrderOp]:
    """Spanning set of vertical lifts: f d/dy^a and lifted functions, f in {1, x^i}.

    ``functions_as="multiplication"`` lifts a basic f to the degree-1
    operator f I; ``"degree0"`` keeps it as a degree-0 element.
    """
    _, fiber = _fiber(chart)
    out = []
    for f in basic_generators(chart):
        for a in fiber:
            out.append(FirstOrderOp(Multivector.coordinate(chart, a) * f))
        if functions_as == "multiplication":
            out.append(FirstOrderOp.identity_times(f))
        elif functions_as == "degree0":
            out.append(FirstOrderOp.function(f))
        else:
            raise ValueError(f"unknown lift mode {functions_as!r}")
    return out


def _op_label(d: FirstOrderOp) -> Polynomial:
    # a function that names an invariant operator in witnesses
    if d.degree == 0:
        return d.p.as_polynomial()
    if d.p.is_zero:
        return d.q.as_polynomial()
    (idx, coeff), = d.p.items()
    return coeff * Polynomial.variable(d.chart, idx[0])


def double_bracket_invariance(j: JacobiStructure, functions_as: str = "multiplication") -> Check:
    """[D1, [D2, Lam + I^E]] = 0 for all invariant operators D1, D2.

    With functions lifted as multiplication operators the identity I is
    among the D's, and [I, [I, J]] = J, so this holds only for J = 0.
    The ``"degree0"`` lift avoids that degeneracy.
    """
    ops = invariant_operators(j.chart, functions_as)
    jj = j.as_op()
    for d2 in ops:
        inner = schouten_jacobi(d2, jj)
        for d1 in ops:
            outer = schouten_jacobi(d1, inner)
            if not outer.is_zero:
                return False, Witness((_op_label(d1), _op_label(d2)), outer,
                                      "double bracket with invariant operators is not zero")
    return OK


def e_invariant_and_lambda_affine(j: JacobiStructure) -> Check:
    """E commutes with all invariant operators and Lam(da, db) is affine."""
    e_op = FirstOrderOp(j.e)
    for d in invariant_operators(j.chart):
        r = schouten_jacobi(d, e_op)
        if not r.is_zero:
            return False, Witness((_op_label(d),), r, "E is not affine-invariant")
    gens = affine_generators(j.chart)[1:]
    for a, b in combinations(gens, 2):
        v = pair(j.lam, a, b)
        if not is_affine_function(v):
            return False, Witness((a, b), v, "Lam(da, db) is not affine")
    return OK


def strongly_affine(j: JacobiStructure) -> Check:
    """Affine bracket and affine hamiltonian fields of affine functions."""
    return _first_failure(lambda: bracket_affine(j), lambda: hamiltonians_affine(j))


def basic_ideal(j: JacobiStructure) -> Check:
    """Affine, and {a, f} is basic for affine a and basic f."""
    def ideal():
        for a in affine_generators(j.chart):
            for f in basic_generators(j.chart):
                v = jacobi_bracket(j, a, f)
                if not is_basic(v):
                    return False, Witness((a, f), v, "bracket with a basic function is not basic")
        return OK
    return _first_failure(lambda: bracket_affine(j), ideal)


def e_as_section(j: JacobiStructure) -> Check:
    """Affine, and E(a) is basic and C-infinity(M)-linear in a."""
    def tensorial():
        chart = j.chart
        _, fiber = _fiber(chart)
        units = [Polynomial.one(chart)] + [Polynomial.variable(chart, a) for a in fiber]
        for u in units:
            eu = j.e.apply(u)
            if not is_basic(eu):
                return False, Witness((u,), eu, "E(a) is not basic")
            for f in basic_generators(chart)[1:]:
                r = j.e.apply(f * u) - f * eu
                if not r.is_zero:
                    return False, Witness((f, u), r, "E(f a) differs from f E(a)")
        return OK
    return _first_failure(lambda: bracket_affine(j), tensorial)


STRONG_AFFINITY_CONDITIONS = {
    "i": double_bracket_invariance,
    "ii": e_invariant_and_lambda_affine,
    "iii": strongly_affine,
    "iv": basic_ideal,
    "v": e_as_section,
}


def strong_affinity_conditions(j: JacobiStructure) -> Dict[str, bool]:
    """Evaluate each equivalent condition by its own route."""
    return {k: fn(j)[0] for k, fn in STRONG_AFFINITY_CONDITIONS.items()}


# -- classification ---------------------------------------------------------


@dataclass(frozen=True)
class ClassificationReport:
    """Flags are None when not applicable (fiber rank 0)."""

    is_poisson: bool
    is_linear: Optional[bool]
    is_affine: bool
    is_homogeneous: Optional[bool]
    is_affine_homogeneous: Optional[bool]
    is_strongly_affine: Optional[bool]
    fiber_rank: int
    witnesses: Dict[str, Witness] = field(default_factory=dict)

    FLAGS = ("is_poisson", "is_linear", "is_affine", "is_homogeneous",
             "is_affine_homogeneous", "is_strongly_affine")

    def flags(self) -> Dict[str, Optional[bool]]:
        return {f: getattr(self, f) for f in self.FLAGS}


def classify(j: JacobiStructure) -> ClassificationReport:
    """Run the classification ladder on generator functions."""
    _, fiber = _fiber(j.chart)
    witnesses: Dict[str, Witness] = {}

    def record(name, check: Check) -> bool:
        ok, w = check
        if not ok:
            witnesses[name] = w if w is not None else Witness((), None, "failed")
        return ok

    master = check_master(j)
    poisson = j.e.is_zero and master.passed
    if not poisson:
        if not j.e.is_zero:
            witnesses["is_poisson"] = Witness((), j.e, "E is not zero")
        else:
            witnesses["is_poisson"] = Witness((), master.lambda_residual, "[Lam, Lam] is not zero")

    if not fiber:
        # rank 0: every function is basic, hence affine
        return ClassificationReport(poisson, None, True, None, None, None, 0, witnesses)

    affine = record("is_affine", bracket_affine(j))
    linear = record("is_linear", bracket_linear(j))
    homogeneous = record("is_homogeneous", homogeneous_by_brackets(j))
    aff_hom = record("is_affine_homogeneous", e_invariant_and_lambda_affine(j))
    strong = record("is_strongly_affine", strongly_affine(j))
    return ClassificationReport(poisson, linear, affine, homogeneous, aff_hom, strong,
                                len(fiber), witnesses)
