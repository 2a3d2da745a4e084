"""Affine Jacobi structures and Lie algebroids on the affine dual, in both directions.

Conventions on a chart (x^1..x^m; y^1..y^n):

* the affine dual has basis e_0 = 1 (the unit) and e_a <-> y^a;
* ``{u_a, u_b} = sum_g c^g_ab u_g`` with u_0 = 1 and u_a = y^a;
* ``rho^l_a = {u_a, x^l} - x^l {u_a, 1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Mapping, Optional, Sequence, Tuple

from .algebroid import (
    AlgebroidData,
    AlgebroidForm,
    Multisection,
    SpecialKind,
    algebroid_bracket,
    check_axioms,
    detect_special,
    exterior_derivative,
    lift,
    linear_poisson,
    multisection_from_multivector,
    require_axioms,
    tangent_algebroid,
)
from .errors import PreconditionError, SplitError, VerificationError
from .jacobi import (
    FirstOrderOp,
    JacobiStructure,
    Witness,
    bracket_affine,
    check_master,
    is_linear_function,
    jacobi_bracket,
    strongly_affine,
)
from .polyalg import Chart, Multivector, Polynomial, insert_differential, pair


def _verify(j: JacobiStructure, what: str):
    if not check_master(j):
        raise VerificationError(f"{what}: output fails the master equations")


def _split_affine(f: Polynomial, fiber: Sequence[int], base_chart: Chart):
    """Write an affine function as (f0, [f_1..f_n]) with basic coefficients on ``base_chart``."""
    parts = f.split_by(fiber)
    n = len(fiber)
    zero = (0,) * n
    coeffs = [Polynomial.zero(base_chart) for _ in range(n)]
    f0 = Polynomial.zero(base_chart)
    for key, p in parts.items():
        if key == zero:
            f0 = p.transfer(base_chart)
        elif sum(key) == 1 and min(key) >= 0:
            coeffs[key.index(1)] = p.transfer(base_chart)
        else:
            raise PreconditionError("function is not affine in the fiber", f)
    return f0, coeffs


def _require_affine(j: JacobiStructure):
    ok, w = bracket_affine(j)
    if not ok:
        raise PreconditionError("Jacobi structure is not affine", w)


def _fiber_rank(j: JacobiStructure) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    if not j.chart.has_split:
        raise SplitError("chart has no base/fiber split")
    base, fiber = j.chart.base, j.chart.fiber
    if not fiber:
        raise PreconditionError("fiber rank 0: use poissonize_rank0 for the line-bundle case")
    return base, fiber


# -- Jacobi <-> algebroid on the affine dual ---------------------------------


def jacobi_from_algebroid(a: AlgebroidData, fiber_names: Optional[Sequence[str]] = None,
                          verify: bool = True) -> JacobiStructure:
    """The affine Jacobi structure whose bracket on affine functions is the algebroid bracket."""
    require_axioms(a)
    if not a.unit:
        raise PreconditionError("algebroid has no distinguished section")
    n = a.rank - 1
    if n < 1:
        raise PreconditionError("rank 1 affine dual: route through poissonize_rank0")
    names = list(fiber_names) if fiber_names is not None else [f"y{i}" for i in range(1, n + 1)]
    if len(names) != n:
        raise ValueError("need one fiber name per non-unit section")
    chart = Chart.bundle(a.chart.names, names)
    m = a.base_dim
    y = [None] + [Polynomial.variable(chart, m + i) for i in range(n)]

    def c(al, be, g):
        return a.c(al, be, g).transfer(chart)

    def ev(al, be):
        # iota of [[e_al, e_be]] as an affine function
        out = c(al, be, 0)
        for g in range(1, n + 1):
            cg = c(al, be, g)
            if cg:
                out = out + cg * y[g]
        return out

    comps: Dict[Tuple[int, int], Polynomial] = {}
    for al, be in combinations(range(1, n + 1), 2):
        v = ev(al, be) - y[al] * ev(0, be) + y[be] * ev(0, al)
        if v:
            comps[(m + al - 1, m + be - 1)] = v
    for al in range(1, n + 1):
        for l in range(m):
            # Lam(dy^a, dx^l) = rho^l_a - y^a rho^l_0, stored on (l, y^a)
            v = a.rho(al, l).transfer(chart) - y[al] * a.rho(0, l).transfer(chart)
            if v:
                comps[(l, m + al - 1)] = -v
    lam = Multivector(chart, 2, comps)
    ecomps = {}
    for be in range(1, n + 1):
        v = ev(0, be)
        if v:
            ecomps[(m + be - 1,)] = v
    for l in range(m):
        v = a.rho(0, l).transfer(chart)
        if v:
            ecomps[(l,)] = v
    j = JacobiStructure(lam, Multivector(chart, 1, ecomps))
    if verify:
        _verify(j, "jacobi_from_algebroid")
    return j


def algebroid_from_jacobi(j: JacobiStructure, verify: bool = True) -> AlgebroidData:
    """Algebroid on the affine dual read off from brackets of 1, y^1..y^n and x^l."""
    base, fiber = _fiber_rank(j)
    _require_affine(j)
    master = check_master(j)
    if not master:
        raise PreconditionError("not a Jacobi structure", master.lambda_residual)
    chart = j.chart
    base_chart = Chart([chart.names[i] for i in base])
    n = len(fiber)
    u = [Polynomial.one(chart)] + [Polynomial.variable(chart, a) for a in fiber]
    brackets: Dict[Tuple[int, int], Dict[int, Polynomial]] = {}
    for al, be in combinations(range(n + 1), 2):
        f0, fs = _split_affine(jacobi_bracket(j, u[al], u[be]), fiber, base_chart)
        targets = {0: f0}
        targets.update({g + 1: p for g, p in enumerate(fs)})
        brackets[(al, be)] = targets
    anchor = {}
    one = u[0]
    for al in range(n + 1):
        for li, l in enumerate(base):
            xl = Polynomial.variable(chart, l)
            r = jacobi_bracket(j, u[al], xl) - xl * jacobi_bracket(j, u[al], one)
            if r.depends_on(fiber):
                raise VerificationError("anchor component is not basic")
            anchor[(al, li)] = r.transfer(base_chart)
    a = AlgebroidData(base_chart, n + 1, brackets, anchor, unit=True)
    if verify and not check_axioms(a):
        raise VerificationError("extracted algebroid fails its axioms")
    return a


# -- strongly-affine triples ------------------------------------------------


class TripleData:
    """A Lie algebroid ``lie_star`` (rank n) with a 1-form x0 and a 2-form p0.

    In the vector-space case the base chart is empty and lie_star is a Lie
    algebra on the dual g*; x0 lies in g and p0 in the second exterior
    power of g.
    """

    __slots__ = ("lie_star", "x0", "p0")

    def __init__(self, lie_star: AlgebroidData, x0=None, p0=None):
        chart, n = lie_star.chart, lie_star.rank
        if x0 is None:
            x0 = AlgebroidForm(chart, n, 1)
        elif not isinstance(x0, AlgebroidForm):
            x0 = AlgebroidForm(chart, n, 1, {(i,): v for i, v in enumerate(x0)})
        if p0 is None:
            p0 = AlgebroidForm(chart, n, 2)
        elif not isinstance(p0, AlgebroidForm):
            p0 = AlgebroidForm(chart, n, 2, dict(p0))
        if x0.degree != 1 or p0.degree != 2 or x0.rank != n or p0.rank != n:
            raise ValueError("x0 must be a 1-form and p0 a 2-form of lie_star")
        self.lie_star = lie_star
        self.x0 = x0
        self.p0 = p0

    @classmethod
    def constant(cls, n: int, structure: Optional[Mapping[Tuple[int, int], Mapping[int, object]]] = None,
                 x0: Optional[Sequence] = None, p0: Optional[Mapping[Tuple[int, int], object]] = None):
        """Vector-space triple from structure constants, a vector and a bivector."""
        alg = AlgebroidData(Chart([]), n, structure or {})
        return cls(alg, x0, p0)

    @property
    def n(self) -> int:
        return self.lie_star.rank

    def __eq__(self, other):
        if not isinstance(other, TripleData):
            return NotImplemented
        return self.lie_star == other.lie_star and self.x0 == other.x0 and self.p0 == other.p0

    def __hash__(self):
        return hash((self.lie_star, self.x0, self.p0))

    def __repr__(self):
        return f"TripleData({self.lie_star}, x0={self.x0}, p0={self.p0})"


def triple_residuals(t: TripleData):
    """(d X0, d P0 + X0 ^ P0) in the complex of lie_star."""
    require_axioms(t.lie_star)
    d_x0 = exterior_derivative(t.lie_star, t.x0)
    d_p0 = exterior_derivative(t.lie_star, t.p0) + t.x0.wedge(t.p0)
    return d_x0, d_p0


def _triple_chart(t: TripleData, fiber_names: Optional[Sequence[str]]) -> Chart:
    n, base = t.n, t.lie_star.chart.names
    if fiber_names is None:
        stem = "y" if base else "x"
        fiber_names = [f"{stem}{i}" for i in range(1, n + 1)]
    return Chart.bundle(base, fiber_names)


def jacobi_from_triple(t: TripleData, fiber_names: Optional[Sequence[str]] = None,
                       verify: bool = True) -> JacobiStructure:
    """Lam = Lam_lin - P0^v + Delta ^ X0^v and E = -X0^v on the total space of g = A."""
    d_x0, d_p0 = triple_residuals(t)
    if not d_x0.is_zero:
        raise PreconditionError("X0 is not a cocycle", d_x0)
    if not d_p0.is_zero:
        raise PreconditionError("d P0 + X0 ^ P0 does not vanish", d_p0)
    chart = _triple_chart(t, fiber_names)
    m = t.lie_star.base_dim
    fiber = chart.fiber
    lin = linear_poisson(t.lie_star, [chart.names[i] for i in fiber]).lam.transfer(chart)
    p0v = Multivector(chart, 2, {(m + a, m + b): p.transfer(chart) for (a, b), p in t.p0.items()})
    x0v = Multivector(chart, 1, {(m + a,): p.transfer(chart) for (a,), p in t.x0.items()})
    delta = Multivector.euler(chart, fiber)
    j = JacobiStructure(lin - p0v + delta.wedge(x0v), -x0v)
    if verify:
        _verify(j, "jacobi_from_triple")
    return j


def extract_triple(j: JacobiStructure) -> TripleData:
    """Inverse of :func:`jacobi_from_triple` on strongly-affine structures."""
    base, fiber = _fiber_rank(j)
    ok, w = strongly_affine(j)
    if not ok:
        raise PreconditionError("Jacobi structure is not strongly affine", w)
    a = algebroid_from_jacobi(j)
    special = detect_special(a)
    if special.kind is SpecialKind.NEITHER:
        raise VerificationError("algebroid of a strongly-affine structure is not almost special")
    n = a.rank - 1
    chart = a.chart
    brackets = {}
    for al, be in combinations(range(1, n + 1), 2):
        targets = {g - 1: a.c(al, be, g) for g in range(1, n + 1) if a.c(al, be, g)}
        if targets:
            brackets[(al - 1, be - 1)] = targets
    anchor = {(al - 1, l): a.rho(al, l) for al in range(1, n + 1) for l in range(a.base_dim)}
    lie_star = AlgebroidData(chart, n, brackets, anchor)
    x0 = AlgebroidForm(chart, n, 1, {(be - 1,): -a.c(0, be, 0) for be in range(1, n + 1)})
    p0 = AlgebroidForm(chart, n, 2, {(al - 1, be - 1): -a.c(al, be, 0)
                                     for al, be in combinations(range(1, n + 1), 2)})
    t = TripleData(lie_star, x0, p0)
    if not check_axioms(lie_star):
        raise VerificationError("extracted lie_star fails its axioms")
    d_x0, d_p0 = triple_residuals(t)
    if not (d_x0.is_zero and d_p0.is_zero):
        raise VerificationError("extracted triple fails the cocycle conditions")
    return t


# -- Poissonization ---------------------------------------------------------


def hull_chart(chart: Chart, iota: str = "iota") -> Chart:
    """Chart (x; iota, y) of the vector hull."""
    base, fiber = chart.require_split()
    if iota in chart.names:
        raise ValueError(f"name {iota!r} is already used")
    bnames = [chart.names[i] for i in base]
    fnames = [iota] + [chart.names[i] for i in fiber]
    return Chart.bundle(bnames, fnames)


def homogenize(f: Polynomial, hull: Chart, iota: str = "iota") -> Polynomial:
    """Affine f0 + f_a y^a  ->  linear f0 iota + f_a y^a on the hull."""
    fiber = f.chart.fiber
    parts = f.split_by(fiber)
    out = Polynomial.zero(hull)
    zero = (0,) * len(fiber)
    iv = Polynomial.variable(hull, iota)
    for key, p in parts.items():
        q = p.transfer(hull)
        if key == zero:
            out = out + q * iv
        elif sum(key) == 1 and min(key) >= 0:
            out = out + q * Polynomial.variable(hull, f.chart.names[fiber[key.index(1)]])
        else:
            raise PreconditionError("function is not affine in the fiber", f)
    return out


def poissonize(j: JacobiStructure, iota: str = "iota", verify: bool = True) -> JacobiStructure:
    """Linear Poisson structure on the hull whose brackets homogenize the affine brackets."""
    base, fiber = _fiber_rank(j)
    _require_affine(j)
    chart = j.chart
    hull = hull_chart(chart, iota)
    m = len(base)
    gens = [(Polynomial.one(chart), m)] + [(Polynomial.variable(chart, a), m + 1 + k)
                                           for k, a in enumerate(fiber)]
    comps: Dict[Tuple[int, int], Polynomial] = {}
    one = gens[0][0]
    for (u, i), (v, k) in combinations(gens, 2):
        h = homogenize(jacobi_bracket(j, u, v), hull, iota)
        if h:
            comps[(i, k)] = h
    for u, i in gens:
        for li, l in enumerate(base):
            xl = Polynomial.variable(chart, l)
            r = jacobi_bracket(j, u, xl) - xl * jacobi_bracket(j, u, one)
            if r:
                comps[(li, i)] = -r.transfer(hull)
    out = JacobiStructure(Multivector(hull, 2, comps))
    if verify:
        _verify(out, "poissonize")
    return out


def restrict_to_slice(p: Multivector, var: str, value=1, chart: Optional[Chart] = None) -> Multivector:
    """Restrict a multivector tangent to {var = value} onto the remaining variables."""
    src = p.chart
    vi = src.index(var)
    sub = p.substitute({vi: value})
    for idx, c in sub.items():
        if vi in idx:
            raise VerificationError(f"multivector is not tangent to the slice {var} = {value}")
    if chart is None:
        keep = [n for k, n in enumerate(src.names) if k != vi]
        chart = src.subchart(keep)
    return sub.transfer(chart)


def hull_jacobi_pair(pbar: JacobiStructure, iota: str = "iota") -> JacobiStructure:
    """(Lam_bar - Delta ^ E_hat, E_hat) with E_hat the hamiltonian field of iota."""
    hull = pbar.chart
    e_hat = insert_differential(pbar.lam, Polynomial.variable(hull, iota))
    delta = Multivector.euler(hull, hull.fiber)
    return JacobiStructure(pbar.lam - delta.wedge(e_hat), e_hat)


def poissonize_rank0(j: JacobiStructure, t: str = "t", verify: bool = True) -> JacobiStructure:
    """Lam_bar = t^-1 Lam + d/dt ^ E on the chart extended by a Laurent variable t."""
    chart = j.chart
    if chart.has_split and chart.fiber:
        raise PreconditionError("chart has a fiber block; use poissonize")
    if t in chart.names:
        raise ValueError(f"name {t!r} is already used")
    laurent = [n for n, f in zip(chart.names, chart.laurent) if f] + [t]
    ext = Chart(list(chart.names) + [t], laurent, base=list(chart.names), fiber=[t])
    tinv = Polynomial.variable(ext, t, -1)
    lam = j.lam.transfer(ext) * tinv + Multivector.coordinate(ext, t).wedge(j.e.transfer(ext))
    out = JacobiStructure(lam)
    if verify:
        _verify(out, "poissonize_rank0")
    return out


# -- linear k-vectors on the hull <-> first-order operators ----------------


def _linear_candidates(chart: Chart):
    base, fiber = chart.require_split()
    xs = [Polynomial.variable(chart, i) for i in base]
    vs = [Polynomial.variable(chart, a) for a in fiber]
    return vs + [x * v for x in xs for v in vs]


def check_linear(pbar: Multivector) -> Tuple[bool, Optional[Witness]]:
    """Every full contraction with linear functions is linear (generator test)."""
    cands = _linear_candidates(pbar.chart)
    if pbar.degree == 0:
        f = pbar.as_polynomial()
        if is_linear_function(f):
            return True, None
        return False, Witness((), f, "function is not linear")
    for combo in combinations(cands, pbar.degree):
        v = pair(pbar, *combo)
        if not is_linear_function(v):
            return False, Witness(combo, v, "contraction with linear functions is not linear")
    return True, None


def linear_kvector_to_affine_op(pbar: Multivector, iota: Optional[str] = None) -> FirstOrderOp:
    """P = Pbar - Delta ^ i(d iota) Pbar and Q = i(d iota) Pbar, restricted to iota = 1."""
    hull = pbar.chart
    base, fiber = hull.require_split()
    if not fiber:
        raise SplitError("hull chart needs a fiber block")
    if iota is None:
        iota = hull.names[fiber[0]]
    ok, w = check_linear(pbar)
    if not ok:
        raise PreconditionError("multivector is not linear", w)
    slice_chart = hull.subchart([n for n in hull.names if n != iota])
    if pbar.degree == 0:
        return FirstOrderOp(restrict_to_slice(pbar, iota, 1, slice_chart))
    q = insert_differential(pbar, Polynomial.variable(hull, iota))
    delta = Multivector.euler(hull, fiber)
    p = pbar - delta.wedge(q)
    return FirstOrderOp(restrict_to_slice(p, iota, 1, slice_chart),
                        restrict_to_slice(q, iota, 1, slice_chart))


# -- tangent Jacobi lifts ---------------------------------------------------


def tangent_jacobi_lift_algebroid(a: AlgebroidData, lam: Multisection, e: Multisection,
                                  fiber_names: Optional[Sequence[str]] = None,
                                  verify: bool = True) -> JacobiStructure:
    """Lam_A = Lam^c - Lam^v - Delta ^ (E^c - E^v), E_A = E^c on the total space of A."""
    require_axioms(a)
    if lam.degree != 2 or e.degree != 1:
        raise ValueError("need a 2-section and a section")
    r1 = algebroid_bracket(a, lam, lam) + lam.wedge(e) * 2
    r2 = algebroid_bracket(a, lam, e)
    if not r1.is_zero:
        raise PreconditionError("[[Lam, Lam]] + 2 Lam ^ E does not vanish", r1)
    if not r2.is_zero:
        raise PreconditionError("[[Lam, E]] does not vanish", r2)
    lc = lift(a, lam, "complete", fiber_names)
    lv = lift(a, lam, "vertical", fiber_names)
    ec = lift(a, e, "complete", fiber_names)
    evv = lift(a, e, "vertical", fiber_names)
    chart = lc.chart
    delta = Multivector.euler(chart, chart.fiber)
    out = JacobiStructure(lc - lv - delta.wedge(ec - evv), ec)
    if verify:
        _verify(out, "tangent_jacobi_lift")
    return out


def tangent_jacobi_lift(j: JacobiStructure, target: Optional[AlgebroidData] = None,
                        fiber_names: Optional[Sequence[str]] = None,
                        verify: bool = True) -> JacobiStructure:
    """Tangent lift to TM (default) or to a supplied algebroid whose basis is the coordinate frame.

    With ``target=None`` the lifted chart is (x; x_dot) with fiber names
    ``<name>_dot``.
    """
    chart = j.chart
    if chart.has_split and chart.fiber:
        raise PreconditionError("expected a structure on a base chart")
    base_chart = Chart(chart.names)
    jj = j.transfer(base_chart)
    a = target if target is not None else tangent_algebroid(base_chart)
    if fiber_names is None and target is None:
        fiber_names = [f"{n}_dot" for n in base_chart.names]
    if a.rank != base_chart.dim:
        raise ValueError("the supplied algebroid must have the coordinate frame as basis")
    lam = Multisection(a.chart, a.rank, 2, {k: v.transfer(a.chart) for k, v in jj.lam.items()})
    e = Multisection(a.chart, a.rank, 1, {k: v.transfer(a.chart) for k, v in jj.e.items()})
    return tangent_jacobi_lift_algebroid(a, lam, e, fiber_names, verify)
