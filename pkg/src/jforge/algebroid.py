"""Lie algebroids on trivial bundles with polynomial structure functions.

A basis e_0..e_{r-1} of sections is fixed; the bracket is
``[[e_a, e_b]] = sum_g c^g_ab e_g`` (stored for a < b) and the anchor
sends e_a to ``sum_l rho^l_a d/dx^l``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Dict, Mapping, Optional, Sequence, Tuple

from .errors import PreconditionError, VerificationError
from .jacobi import JacobiStructure
from .polyalg import Chart, ExteriorElement, Multivector, Polynomial, schouten_nijenhuis
from .polyalg.chart import VarRef


class Multisection(ExteriorElement):
    """Section of the k-th exterior power of the algebroid bundle."""

    __slots__ = ()

    def __init__(self, chart: Chart, rank: int, degree: int, comps=None):
        super().__init__(chart, rank, degree, comps)

    @classmethod
    def zero(cls, chart: Chart, rank: int, degree: int) -> "Multisection":
        return cls(chart, rank, degree)

    @classmethod
    def basis(cls, chart: Chart, rank: int, *idx: int) -> "Multisection":
        return cls(chart, rank, len(idx), {tuple(idx): 1})

    @classmethod
    def function(cls, f: Polynomial, rank: int) -> "Multisection":
        return cls(f.chart, rank, 0, {(): f})

    @property
    def rank(self) -> int:
        return self.n_gen


class AlgebroidForm(ExteriorElement):
    """Section of the k-th exterior power of the dual bundle."""

    __slots__ = ()

    def __init__(self, chart: Chart, rank: int, degree: int, comps=None):
        super().__init__(chart, rank, degree, comps)

    def _generator_label(self, i: int) -> str:
        return f"eps{i}"

    @classmethod
    def function(cls, f: Polynomial, rank: int) -> "AlgebroidForm":
        return cls(f.chart, rank, 0, {(): f})

    @property
    def rank(self) -> int:
        return self.n_gen


class AlgebroidData:
    """Structure functions and anchor of a Lie algebroid on a trivial bundle.

    ``brackets`` maps (a, b) to {g: coefficient}; pairs with a > b are
    folded in with a sign.  ``anchor`` maps (a, l) to rho^l_a, with l a
    variable of ``chart``.  ``unit`` marks basis index 0 as the
    distinguished section.
    """

    __slots__ = ("chart", "rank", "_c", "_rho", "unit", "_axioms")

    def __init__(self, chart: Chart, rank: int,
                 brackets: Optional[Mapping[Tuple[int, int], Mapping[int, object]]] = None,
                 anchor: Optional[Mapping[Tuple[int, VarRef], object]] = None,
                 unit: bool = False):
        if rank < 1:
            raise ValueError("rank must be at least 1")
        self.chart = chart
        self.rank = rank
        self.unit = bool(unit)
        self._axioms = None
        c: Dict[Tuple[int, int], Dict[int, Polynomial]] = {}
        for (a, b), targets in (brackets or {}).items():
            if not (0 <= a < rank and 0 <= b < rank):
                raise IndexError(f"bracket index {(a, b)} out of range")
            if a == b:
                if any(_poly(chart, v) for v in targets.values()):
                    raise ValueError("[[e_a, e_a]] must vanish")
                continue
            sign = 1 if a < b else -1
            key = (min(a, b), max(a, b))
            slot = c.setdefault(key, {})
            for g, v in targets.items():
                if not 0 <= g < rank:
                    raise IndexError(f"bracket target {g} out of range")
                p = _poly(chart, v)
                total = slot.get(g, Polynomial.zero(chart)) + (p if sign > 0 else -p)
                if total:
                    slot[g] = total
                else:
                    slot.pop(g, None)
            if not slot:
                del c[key]
        self._c = c
        rho: Dict[int, Dict[int, Polynomial]] = {}
        for (a, l), v in (anchor or {}).items():
            if not 0 <= a < rank:
                raise IndexError(f"anchor index {a} out of range")
            li = chart.index(l)
            p = _poly(chart, v)
            if p:
                rho.setdefault(a, {})[li] = rho.get(a, {}).get(li, Polynomial.zero(chart)) + p
        self._rho = {a: {l: p for l, p in d.items() if p} for a, d in rho.items()}

    # -- accessors ----------------------------------------------------

    @property
    def base_dim(self) -> int:
        return self.chart.dim

    def c(self, a: int, b: int, g: int) -> Polynomial:
        if a == b:
            return Polynomial.zero(self.chart)
        key = (min(a, b), max(a, b))
        p = self._c.get(key, {}).get(g)
        if p is None:
            return Polynomial.zero(self.chart)
        return p if a < b else -p

    def rho(self, a: int, l: int) -> Polynomial:
        return self._rho.get(a, {}).get(l, Polynomial.zero(self.chart))

    def structure_items(self):
        """Nonzero (a, b, g, c^g_ab) with a < b, sorted."""
        for (a, b) in sorted(self._c):
            for g in sorted(self._c[(a, b)]):
                yield a, b, g, self._c[(a, b)][g]

    def anchor_items(self):
        for a in sorted(self._rho):
            for l in sorted(self._rho[a]):
                yield a, l, self._rho[a][l]

    def anchor_field(self, a: int) -> Multivector:
        return Multivector(self.chart, 1, {(l,): p for l, p in self._rho.get(a, {}).items()})

    def anchor_of(self, x: Multisection) -> Multivector:
        out = Multivector.zero(self.chart, 1)
        for (a,), f in x.items():
            out = out + self.anchor_field(a) * f
        return out

    def basis_bracket(self, a: int, b: int) -> Multisection:
        return Multisection(self.chart, self.rank, 1,
                            {(g,): self.c(a, b, g) for g in range(self.rank)})

    def bracket_table(self) -> Dict[Tuple[int, int], Dict[int, Polynomial]]:
        return {k: dict(v) for k, v in self._c.items()}

    def anchor_table(self) -> Dict[Tuple[int, int], Polynomial]:
        return {(a, l): p for a, l, p in self.anchor_items()}

    def with_unit(self, unit: bool = True) -> "AlgebroidData":
        return AlgebroidData(self.chart, self.rank, self.bracket_table(), self.anchor_table(), unit)

    def __eq__(self, other):
        if not isinstance(other, AlgebroidData):
            return NotImplemented
        return (self.chart == other.chart and self.rank == other.rank
                and self.unit == other.unit and self._c == other._c and self._rho == other._rho)

    def __hash__(self):
        return hash((self.chart, self.rank, self.unit,
                     tuple(self.structure_items()), tuple(self.anchor_items())))

    def __repr__(self):
        br = ", ".join(f"c^{g}_{a}{b}={p}" for a, b, g, p in self.structure_items())
        an = ", ".join(f"rho^{self.chart.names[l]}_{a}={p}" for a, l, p in self.anchor_items())
        return f"AlgebroidData(rank={self.rank}, base={list(self.chart.names)}, [{br}], [{an}], unit={self.unit})"


def _poly(chart: Chart, v) -> Polynomial:
    if isinstance(v, Polynomial):
        chart.check_same(v.chart)
        return v
    return Polynomial.constant(chart, v)


# -- brackets on sections ---------------------------------------------------


def _bracket_basis_with(a: AlgebroidData, alpha: int, x: Multisection) -> Multisection:
    """[[e_alpha, X]] for a multisection X, by the derivation rule."""
    rank = a.rank
    out: Dict[Tuple[int, ...], Polynomial] = {}

    def add(key, p):
        s = out.get(key)
        s = p if s is None else s + p
        if s:
            out[key] = s
        else:
            out.pop(key, None)

    anchor = a.anchor_field(alpha)
    for idx, f in x.items():
        df = anchor.apply(f) if anchor else Polynomial.zero(a.chart)
        if df:
            add(idx, df)
        # e_alpha acts on each factor e_{idx[j]}
        for j, i in enumerate(idx):
            for g in range(rank):
                cg = a.c(alpha, i, g)
                if not cg:
                    continue
                new = idx[:j] + (g,) + idx[j + 1:]
                if len(set(new)) != len(new):
                    continue
                sign = 1
                # sort the replaced factor into place
                lst = list(new)
                for p in range(len(lst)):
                    for q in range(p + 1, len(lst)):
                        if lst[p] > lst[q]:
                            sign = -sign
                term = f * cg
                add(tuple(sorted(lst)), term if sign > 0 else -term)
    return Multisection(a.chart, rank, x.degree, out)


def _bracket_function_with(a: AlgebroidData, g: Polynomial, x: Multisection) -> Multisection:
    """[[g, X]] for a function g: minus the contraction of X with d g."""
    if x.degree == 0:
        return Multisection.zero(a.chart, a.rank, 0)
    dg = [a.anchor_field(b).apply(g) if a.anchor_field(b) else Polynomial.zero(a.chart)
          for b in range(a.rank)]
    return -x.contract(dg)


def algebroid_bracket(a: AlgebroidData, p: Multisection, q: Multisection) -> Multisection:
    """Schouten bracket [[P, Q]] of multisections, degree p + q - 1.

    Built from [[X, f]] = rho(X) f, the bracket on basis sections,
    graded antisymmetry and the graded Leibniz rule in the second slot.
    """
    chart, rank = a.chart, a.rank
    k, l = p.degree, q.degree
    if k == 0 and l == 0:
        return Multisection.zero(chart, rank, 0)
    if l == 0:
        # [[P, g]] = -(-1)^(k-1) [[g, P]]
        r = _bracket_function_with(a, q.as_polynomial(), p)
        return -r if (k - 1) % 2 == 0 else r
    out = Multisection.zero(chart, rank, k + l - 1)
    for idx, h in q.items():
        out = out + _bracket_with_monomial(a, p, h, idx)
    return out


def _bracket_with_monomial(a: AlgebroidData, p: Multisection, h: Polynomial, idx) -> Multisection:
    # [[P, h e_{i1} ^ ... ^ e_{il}]] by the graded Leibniz rule
    chart, rank = a.chart, a.rank
    k = p.degree
    factors = [Multisection.function(h, rank)] + [Multisection.basis(chart, rank, i) for i in idx]
    out = Multisection.zero(chart, rank, k + len(idx) - 1)
    left = Multisection.function(Polynomial.one(chart), rank)
    for pos, fac in enumerate(factors):
        right = Multisection.function(Polynomial.one(chart), rank)
        for later in factors[pos + 1:]:
            right = right.wedge(later)
        if fac.degree == 0:
            if k == 0:
                left = left.wedge(fac)
                continue
            br = algebroid_bracket(a, p, fac)
        else:
            # [[P, e_i]] = -[[e_i, P]]
            br = -_bracket_basis_with(a, _single_index(fac), p)
        sign = -1 if ((k - 1) * left.degree) % 2 else 1
        term = left.wedge(br).wedge(right)
        out = out + (term if sign > 0 else -term)
        left = left.wedge(fac)
    return out


def _single_index(x: Multisection) -> int:
    (idx, _), = x.items()
    return idx[0]


def section_bracket(a: AlgebroidData, x: Multisection, y: Multisection) -> Multisection:
    """[[X, Y]] for two sections (degree 1)."""
    return algebroid_bracket(a, x, y)


# -- axioms -----------------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    passed: bool
    jacobi_failures: Tuple[Tuple[Tuple[int, int, int], Multisection], ...] = ()
    anchor_failures: Tuple[Tuple[Tuple[int, int], Multivector], ...] = ()

    def __bool__(self):
        return self.passed

    @property
    def witness(self):
        if self.jacobi_failures:
            return self.jacobi_failures[0]
        if self.anchor_failures:
            return self.anchor_failures[0]
        return None


def check_axioms(a: AlgebroidData) -> AxiomReport:
    """Jacobi identity on basis triples and the anchor homomorphism property."""
    if a._axioms is not None:
        return a._axioms
    chart, rank = a.chart, a.rank
    basis = [Multisection.basis(chart, rank, i) for i in range(rank)]
    jac = []
    for i, j, k in combinations(range(rank), 3):
        total = Multisection.zero(chart, rank, 1)
        for p, q, r in ((i, j, k), (j, k, i), (k, i, j)):
            total = total + algebroid_bracket(a, basis[p], a.basis_bracket(q, r))
        if not total.is_zero:
            jac.append(((i, j, k), total))
    anc = []
    for i, j in combinations(range(rank), 2):
        lhs = a.anchor_of(a.basis_bracket(i, j))
        rhs = schouten_nijenhuis(a.anchor_field(i), a.anchor_field(j))
        r = lhs - rhs
        if not r.is_zero:
            anc.append(((i, j), r))
    report = AxiomReport(not jac and not anc, tuple(jac), tuple(anc))
    a._axioms = report
    return report


def require_axioms(a: AlgebroidData):
    report = check_axioms(a)
    if not report:
        raise PreconditionError("algebroid axioms fail", report.witness)
    return report


# -- exterior derivative ----------------------------------------------------


def _form_value(mu: AlgebroidForm, idx: Sequence[int]) -> Polynomial:
    return mu.component(idx)


def exterior_derivative(a: AlgebroidData, mu: AlgebroidForm) -> AlgebroidForm:
    """Algebroid differential by the invariant formula on basis sections.

    (d mu)(e_b0..e_bk) = sum_i (-1)^i rho_bi(mu(..^i..))
                        + sum_{i<j} (-1)^{i+j} mu([[e_bi, e_bj]], ..^i..^j..)
    """
    require_axioms(a)
    chart, rank, k = a.chart, a.rank, mu.degree
    comps = {}
    anchors = [a.anchor_field(b) for b in range(rank)]
    for idx in combinations(range(rank), k + 1):
        total = Polynomial.zero(chart)
        for i, b in enumerate(idx):
            rest = idx[:i] + idx[i + 1:]
            v = _form_value(mu, rest)
            if v and anchors[b]:
                t = anchors[b].apply(v)
                total = total - t if i % 2 else total + t
        for i, j in combinations(range(len(idx)), 2):
            rest = tuple(x for n, x in enumerate(idx) if n not in (i, j))
            for g in range(rank):
                cg = a.c(idx[i], idx[j], g)
                if not cg:
                    continue
                t = cg * _form_value(mu, (g,) + rest)
                total = total - t if (i + j) % 2 else total + t
        if total:
            comps[idx] = total
    return AlgebroidForm(chart, rank, k + 1, comps)


def evaluate_form(mu: AlgebroidForm, x: Sequence[Multisection]) -> Polynomial:
    """mu(X1, ..., Xk) for sections X1..Xk."""
    if len(x) != mu.degree:
        raise ValueError("need one section per slot")
    total = Polynomial.zero(mu.chart)
    for idx, coeff in mu.items():
        for perm in permutations(range(len(idx))):
            sign = 1
            for p in range(len(perm)):
                for q in range(p + 1, len(perm)):
                    if perm[p] > perm[q]:
                        sign = -sign
            term = coeff
            for slot, which in enumerate(perm):
                term = term * x[slot].component((idx[which],))
            total = total + term if sign > 0 else total - term
    return total


# -- dual linear Poisson structure -------------------------------------------


def dual_chart(a: AlgebroidData, fiber_names: Optional[Sequence[str]] = None) -> Chart:
    names = list(fiber_names) if fiber_names is not None else [f"xi{i}" for i in range(a.rank)]
    if len(names) != a.rank:
        raise ValueError("one fiber name per basis section is needed")
    return Chart.bundle(a.chart.names, names)


def linear_poisson(a: AlgebroidData, fiber_names: Optional[Sequence[str]] = None) -> JacobiStructure:
    """Linear Poisson bivector on the dual bundle with {xi_a, xi_b} = c^g_ab xi_g, {xi_a, f} = rho_a(f)."""
    require_axioms(a)
    chart = dual_chart(a, fiber_names)
    m = a.base_dim
    xi = [Polynomial.variable(chart, m + g) for g in range(a.rank)]
    comps: Dict[Tuple[int, int], Polynomial] = {}
    for al, be, g, p in a.structure_items():
        key = (m + al, m + be)
        comps[key] = comps.get(key, Polynomial.zero(chart)) + p.transfer(chart) * xi[g]
    for al, l, p in a.anchor_items():
        # Lam(d xi_a, d x^l) = rho^l_a, stored on the sorted pair (l, m + a)
        key = (l, m + al)
        comps[key] = comps.get(key, Polynomial.zero(chart)) - p.transfer(chart)
    return JacobiStructure(Multivector(chart, 2, comps), Multivector.zero(chart, 1))


# -- lifts ------------------------------------------------------------------


def total_chart(a: AlgebroidData, fiber_names: Optional[Sequence[str]] = None) -> Chart:
    names = list(fiber_names) if fiber_names is not None else [f"y{i}" for i in range(a.rank)]
    if len(names) != a.rank:
        raise ValueError("one fiber name per basis section is needed")
    return Chart.bundle(a.chart.names, names)


def _function_complete_lift(a: AlgebroidData, f: Polynomial, chart: Chart) -> Polynomial:
    # f^c = sum_b rho_b(f) y^b
    m = a.base_dim
    out = Polynomial.zero(chart)
    for b in range(a.rank):
        fld = a.anchor_field(b)
        if fld:
            out = out + fld.apply(f).transfer(chart) * Polynomial.variable(chart, m + b)
    return out


def _basis_complete_lift(a: AlgebroidData, alpha: int, chart: Chart) -> Multivector:
    # e_a^c = rho^l_a d/dx^l - sum_{b,g} c^g_ab y^b d/dy^g
    m = a.base_dim
    comps: Dict[Tuple[int], Polynomial] = {}
    for l, p in a._rho.get(alpha, {}).items():
        comps[(l,)] = p.transfer(chart)
    for b in range(a.rank):
        for g in range(a.rank):
            cg = a.c(alpha, b, g)
            if cg:
                key = (m + g,)
                term = cg.transfer(chart) * Polynomial.variable(chart, m + b)
                comps[key] = comps.get(key, Polynomial.zero(chart)) - term
    return Multivector(chart, 1, comps)


def lift(a: AlgebroidData, x: Multisection, mode: str = "complete",
         fiber_names: Optional[Sequence[str]] = None) -> Multivector:
    """Complete or vertical lift of a multisection to the total space (x; y)."""
    require_axioms(a)
    if x.rank != a.rank or x.chart != a.chart:
        raise ValueError("multisection does not belong to this algebroid")
    chart = total_chart(a, fiber_names)
    m = a.base_dim
    if mode == "vertical":
        comps = {tuple(m + i for i in idx): f.transfer(chart) for idx, f in x.items()}
        return Multivector(chart, x.degree, comps)
    if mode != "complete":
        raise ValueError(f"unknown lift mode {mode!r}")
    out = Multivector.zero(chart, x.degree)
    vert = [Multivector.coordinate(chart, m + i) for i in range(a.rank)]
    comp = [_basis_complete_lift(a, i, chart) for i in range(a.rank)]
    for idx, f in x.items():
        fv = f.transfer(chart)
        # (f e_I)^c = f^c e_I^v + f sum_j e_i1^v ^ .. ^ e_ij^c ^ .. ^ e_ik^v
        fc = _function_complete_lift(a, f, chart)
        if fc:
            ev = Multivector.function(Polynomial.one(chart))
            for i in idx:
                ev = ev.wedge(vert[i])
            out = out + ev * fc
        for j in range(len(idx)):
            term = Multivector.function(fv)
            for n, i in enumerate(idx):
                term = term.wedge(comp[i] if n == j else vert[i])
            out = out + term
    return out


def lift_function(a: AlgebroidData, f: Polynomial, mode: str = "complete",
                  fiber_names: Optional[Sequence[str]] = None) -> Polynomial:
    chart = total_chart(a, fiber_names)
    if mode == "vertical":
        return f.transfer(chart)
    return _function_complete_lift(a, f, chart)


def fiber_linear_function(a: AlgebroidData, mu: AlgebroidForm,
                          fiber_names: Optional[Sequence[str]] = None) -> Polynomial:
    """iota_mu = sum_a mu_a y^a on the total space."""
    chart = total_chart(a, fiber_names)
    out = Polynomial.zero(chart)
    for (i,), p in mu.items():
        out = out + p.transfer(chart) * Polynomial.variable(chart, a.base_dim + i)
    return out


def tangent_algebroid(chart: Chart) -> AlgebroidData:
    """A = TM on the chart: basis d/dx^l, zero brackets, identity anchor."""
    if chart.dim == 0:
        raise ValueError("the tangent bundle of a point has rank 0")
    return AlgebroidData(chart, chart.dim, {}, {(l, l): 1 for l in range(chart.dim)})


def multisection_from_multivector(x: Multivector) -> Multisection:
    """View a multivector field as a multisection of TM."""
    return Multisection(x.chart, x.chart.dim, x.degree, x.components)


def multivector_from_multisection(x: Multisection) -> Multivector:
    return Multivector(x.chart, x.degree, x.components)


# -- special algebroids -----------------------------------------------------


class SpecialKind(enum.Enum):
    SPECIAL = "special"
    ALMOST_SPECIAL = "almost_special"
    NEITHER = "neither"


@dataclass(frozen=True)
class SpecialResult:
    kind: SpecialKind
    x0bar: Optional[AlgebroidForm] = None
    reason: str = ""


def detect_special(a: AlgebroidData) -> SpecialResult:
    """Decide whether the distinguished section spans an ideal (or is central).

    Almost special means [[e_0, X]] = -x0bar(X) e_0 with x0bar a section of
    the dual; the components are x0bar(e_b) = -c^0_0b.
    """
    if not a.unit:
        raise PreconditionError("algebroid has no distinguished index 0")
    require_axioms(a)
    if a._rho.get(0):
        return SpecialResult(SpecialKind.NEITHER, None, "the anchor of e_0 is nonzero")
    for b in range(1, a.rank):
        for g in range(1, a.rank):
            if a.c(0, b, g):
                return SpecialResult(SpecialKind.NEITHER, None,
                                     f"[[e_0, e_{b}]] leaves the span of e_0")
    x0 = AlgebroidForm(a.chart, a.rank, 1, {(b,): -a.c(0, b, 0) for b in range(1, a.rank)})
    dx0 = exterior_derivative(a, x0)
    if not dx0.is_zero:
        raise VerificationError("extracted 1-form is not closed")
    if x0.is_zero:
        return SpecialResult(SpecialKind.SPECIAL, x0, "e_0 is central")
    return SpecialResult(SpecialKind.ALMOST_SPECIAL, x0, "e_0 spans an ideal")
