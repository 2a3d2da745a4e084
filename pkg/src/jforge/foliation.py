"""Characteristic foliation of strongly-affine Jacobi structures on vector spaces.

Covers cocycle checks for triples, point classification by rank, the affine
generators a -> -X_a, exact affine flows, orbit sampling, exponential
coordinates on nilpotent groups and the contact / l.c.s. forms on leaves.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from . import linalg
from .correspond import (
    TripleData,
    algebroid_from_jacobi,
    jacobi_from_triple,
    triple_residuals,
)
from .errors import PreconditionError, VerificationError
from .jacobi import JacobiStructure, hamiltonian_vf
from .polyalg import Polynomial

REL_TOL = 1e-10


# -- cocycles ---------------------------------------------------------------


@dataclass
class CocycleReport:
    passed: bool
    d_x0: object
    d_p0: object

    def __bool__(self):
        return self.passed


def cocycle_check(t: TripleData) -> CocycleReport:
    """d X0 = 0 and d P0 + X0 ^ P0 = 0 in the complex of lie_star."""
    d_x0, d_p0 = triple_residuals(t)
    return CocycleReport(d_x0.is_zero and d_p0.is_zero, d_x0, d_p0)


def _require_cocycles(t: TripleData):
    rep = cocycle_check(t)
    if not rep:
        raise PreconditionError("triple fails the cocycle conditions",
                                rep.d_x0 if not rep.d_x0.is_zero else rep.d_p0)


def _require_vector_space(t: TripleData):
    if t.lie_star.base_dim:
        raise PreconditionError("foliation tools need a triple over a vector space (empty base)")


# -- pointwise rank ---------------------------------------------------------


class PointKind(enum.Enum):
    CONTACT = "Contact"
    LCS = "LCS"
    ZERO_DIM = "ZeroDim"


@dataclass(frozen=True)
class CharRank:
    rank: int
    parity: str
    e_in_image: bool


def _is_exact(point) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in point)


def _point_matrices(j: JacobiStructure, point):
    """Rows of #Lam (matrix M with M[i][k] = Lam(dx^i, dx^k)) and E at the point."""
    n = j.chart.dim
    if len(point) != n:
        raise ValueError("point length does not match chart dimension")
    exact = _is_exact(point)
    pt = [Fraction(v) for v in point] if exact else [float(v) for v in point]
    zero = Fraction(0) if exact else 0.0
    m = [[zero] * n for _ in range(n)]
    for (i, k), v in j.lam.items():
        val = v(pt)
        m[i][k] = val
        m[k][i] = -val
    e = [zero] * n
    for (i,), v in j.e.items():
        e[i] = v(pt)
    return m, e, exact


def char_rank(j: JacobiStructure, point, tol: float = REL_TOL) -> CharRank:
    """dim(Im #Lam + span E) at the point, exact for rational points."""
    m, e, exact = _point_matrices(j, point)
    if exact:
        r_lam, r_all = linalg.rank(m), linalg.rank(m + [e])
    else:
        a = np.asarray(m + [e], dtype=float)
        scale = float(np.max(np.abs(a))) if a.size else 0.0
        if scale == 0:
            r_lam = r_all = 0
        else:
            # a common scale keeps the two rank decisions comparable
            s_lam = np.linalg.svd(a[:-1], compute_uv=False)
            s_all = np.linalg.svd(a, compute_uv=False)
            top = max(s_all[0], 1e-300)
            r_lam = int(np.sum(s_lam > tol * top))
            r_all = int(np.sum(s_all > tol * top))
    return CharRank(r_all, "odd" if r_all % 2 else "even", r_lam == r_all)


def classify_point(j: JacobiStructure, point, tol: float = REL_TOL) -> PointKind:
    cr = char_rank(j, point, tol)
    if cr.rank == 0:
        return PointKind.ZERO_DIM
    if cr.e_in_image:
        return PointKind.LCS
    return PointKind.CONTACT


# -- affine generators ------------------------------------------------------


def _mat_mul(a, b):
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(len(b[0]))]
            for i in range(len(a))]


@dataclass(frozen=True)
class AffineField:
    """The vector field Y -> L Y + b."""

    L: Tuple[Tuple, ...]
    b: Tuple

    @property
    def dim(self) -> int:
        return len(self.b)

    def __call__(self, y):
        return [sum((self.L[i][k] * y[k] for k in range(self.dim)), 0 * self.b[i]) + self.b[i]
                for i in range(self.dim)]

    def bracket(self, other: "AffineField") -> "AffineField":
        """Lie bracket of vector fields: (L2 L1 - L1 L2) Y + L2 b1 - L1 b2."""
        n = self.dim
        l1, l2 = self.L, other.L
        l2l1, l1l2 = _mat_mul(l2, l1), _mat_mul(l1, l2)
        L = tuple(tuple(l2l1[i][k] - l1l2[i][k] for k in range(n)) for i in range(n))
        b = tuple(sum((l2[i][k] * self.b[k] - l1[i][k] * other.b[k] for k in range(n)), Fraction(0))
                  for i in range(n))
        return AffineField(L, b)

    def __neg__(self):
        return AffineField(tuple(tuple(-v for v in r) for r in self.L), tuple(-v for v in self.b))

    def __add__(self, other: "AffineField"):
        return AffineField(tuple(tuple(a + c for a, c in zip(r, s)) for r, s in zip(self.L, other.L)),
                           tuple(a + c for a, c in zip(self.b, other.b)))

    def scale(self, c):
        return AffineField(tuple(tuple(c * v for v in r) for r in self.L), tuple(c * v for v in self.b))

    @property
    def is_zero(self) -> bool:
        return not any(self.b) and not any(any(r) for r in self.L)

    def homogeneous_matrix(self) -> np.ndarray:
        n = self.dim
        a = np.zeros((n + 1, n + 1))
        a[:n, :n] = np.asarray(self.L, dtype=float).reshape(n, n)
        a[:n, n] = np.asarray(self.b, dtype=float)
        return a


def affine_function(j: JacobiStructure, a: Tuple[Sequence, object]) -> Polynomial:
    """The affine function alpha(Y) + lambda for a = (alpha, lambda)."""
    alpha, lam = a
    chart = j.chart
    f = Polynomial.constant(chart, lam)
    for i, c in enumerate(alpha):
        if c:
            f = f + Polynomial.variable(chart, i) * c
    return f


def _field_from_vector(vf, n: int) -> AffineField:
    L = [[Fraction(0)] * n for _ in range(n)]
    b = [Fraction(0)] * n
    for (i,), p in vf.items():
        for exp, c in p.items():
            s = sum(exp)
            if s == 0:
                b[i] = c
            elif s == 1:
                L[i][exp.index(1)] = c
            else:
                raise VerificationError("generator is not an affine vector field")
    return AffineField(tuple(tuple(r) for r in L), tuple(b))


def infinitesimal_generator(t: TripleData, a: Tuple[Sequence, object],
                            j: Optional[JacobiStructure] = None) -> AffineField:
    """-X_a for the affine function a = (alpha, lambda) under jacobi_from_triple(t)."""
    _require_vector_space(t)
    _require_cocycles(t)
    if j is None:
        j = jacobi_from_triple(t)
    vf = -hamiltonian_vf(j, affine_function(j, a))
    return _field_from_vector(vf, t.n)


def basis_elements(n: int) -> List[Tuple[Tuple[int, ...], int]]:
    """Basis e^1..e^n, then the constant 1, of g+ = g* x R."""
    out = [(tuple(1 if k == i else 0 for k in range(n)), 0) for i in range(n)]
    out.append(((0,) * n, 1))
    return out


def generators(t: TripleData) -> List[AffineField]:
    j = jacobi_from_triple(t)
    return [infinitesimal_generator(t, a, j) for a in basis_elements(t.n)]


def plus_bracket(t: TripleData, a, b) -> Tuple[Tuple[Fraction, ...], Fraction]:
    """[a, b]+ on g+ read off the algebroid of jacobi_from_triple(t)."""
    alg = algebroid_from_jacobi(jacobi_from_triple(t))
    n = t.n
    # algebroid index 0 is the unit, index k >= 1 is e^k
    ca = [Fraction(a[1])] + [Fraction(v) for v in a[0]]
    cb = [Fraction(b[1])] + [Fraction(v) for v in b[0]]
    out = [Fraction(0)] * (n + 1)
    for p in range(n + 1):
        for q in range(n + 1):
            if p == q or not ca[p] or not cb[q]:
                continue
            for g in range(n + 1):
                c = alg.c(p, q, g)
                if c:
                    out[g] += ca[p] * cb[q] * c.constant_term()
    return tuple(out[1:]), out[0]


def antihomomorphism_residuals(t: TripleData) -> List[Tuple[int, int, AffineField]]:
    """[gen(a), gen(b)] + gen([a, b]+) on basis pairs; empty when exact."""
    basis = basis_elements(t.n)
    j = jacobi_from_triple(t)
    gens = [infinitesimal_generator(t, a, j) for a in basis]
    bad = []
    for p, q in combinations(range(len(basis)), 2):
        lhs = gens[p].bracket(gens[q])
        rhs = -infinitesimal_generator(t, plus_bracket(t, basis[p], basis[q]), j)
        diff = lhs + (-rhs)
        if not diff.is_zero:
            bad.append((p, q, diff))
    return bad


# -- flows ------------------------------------------------------------------


def _nilpotent(L) -> bool:
    n = len(L)
    if n == 0:
        return True
    m = [list(r) for r in L]
    p = m
    for _ in range(n - 1):
        p = _mat_mul(p, m)
    return not any(any(r) for r in p)


def affine_flow(f: AffineField, time, x0, mode: str = "auto"):
    """Exact time-``time`` flow of Y' = L Y + b from x0.

    Uses a terminating Taylor series when L is nilpotent and all inputs are
    rational ("exact" or "auto"), otherwise the matrix exponential of the
    homogeneous matrix [[L, b], [0, 0]].
    """
    n = f.dim
    exact_inputs = (_is_exact(list(x0) + [time]) and
                    all(isinstance(v, (int, Fraction)) for r in f.L for v in r) and
                    all(isinstance(v, (int, Fraction)) for v in f.b))
    if mode not in ("auto", "exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    use_exact = mode == "exact" or (mode == "auto" and exact_inputs and _nilpotent(f.L))
    if use_exact:
        if not exact_inputs or not _nilpotent(f.L):
            raise PreconditionError("exact flow needs rational data and a nilpotent linear part")
        t = Fraction(time)
        a = [[Fraction(v) for v in r] + [Fraction(bv)] for r, bv in zip(f.L, f.b)]
        a.append([Fraction(0)] * (n + 1))
        vec = [Fraction(v) for v in x0] + [Fraction(1)]
        out = list(vec)
        term = list(vec)
        for k in range(1, n + 2):
            term = [sum((a[i][c] * term[c] for c in range(n + 1)), Fraction(0)) * t / k
                    for i in range(n + 1)]
            if not any(term):
                break
            out = [o + v for o, v in zip(out, term)]
        return out[:n]
    h = scipy.linalg.expm(f.homogeneous_matrix() * float(time))
    vec = np.append(np.asarray(x0, dtype=float), 1.0)
    return list((h @ vec)[:n])


# -- orbits -----------------------------------------------------------------


@dataclass
class OrbitSample:
    base: Tuple
    points: List[Tuple[Tuple[Tuple[int, float], ...], Tuple[float, ...]]]
    casimir_log: List[float] = field(default_factory=list)
    base_rank: Optional[CharRank] = None
    base_kind: Optional[PointKind] = None
    rank_consistent: bool = True

    @property
    def consistent(self) -> bool:
        return self.rank_consistent

    @property
    def max_casimir_drift(self) -> float:
        return max(self.casimir_log, default=0.0)


def orbit_sample(t: TripleData, x0, word_length: int = 1, step_budget: int = 100,
                 seed: Optional[int] = None, casimirs: Sequence[Polynomial] = (),
                 max_time: float = 1.0, tol: float = 1e-7) -> OrbitSample:
    """Compose random flows of the basis generators starting at x0.

    One point is recorded after every ``word_length`` flows, until
    ``step_budget`` flows have been applied.  Each recorded point is checked
    for rank and classification against x0; each Casimir's absolute drift is
    logged.
    """
    _require_vector_space(t)
    _require_cocycles(t)
    if word_length < 1 or step_budget < 0:
        raise ValueError("word_length must be positive and step_budget non-negative")
    rng = random.Random(seed)
    j = jacobi_from_triple(t)
    gens = generators(t)
    # one homogeneous matrix per generator; time scaling happens per step
    mats = [g.homogeneous_matrix() for g in gens]
    base = tuple(float(v) for v in x0)
    base_rank = char_rank(j, x0) if _is_exact(x0) else char_rank(j, base, tol)
    base_kind = classify_point(j, x0) if _is_exact(x0) else classify_point(j, base, tol)
    cas0 = [c([Fraction(v) for v in x0]) if _is_exact(x0) else c(list(base)) for c in casimirs]
    sample = OrbitSample(base, [], [], base_rank, base_kind, True)
    y = np.append(np.asarray(base, dtype=float), 1.0)
    word: List[Tuple[int, float]] = []
    for _ in range(step_budget):
        k = rng.randrange(len(gens))
        s = rng.uniform(-max_time, max_time)
        if not gens[k].is_zero:
            y = scipy.linalg.expm(mats[k] * s) @ y
        word.append((k, s))
        if len(word) == word_length:
            p = tuple(float(v) for v in y[:-1])
            sample.points.append((tuple(word), p))
            word = []
            if char_rank(j, p, tol) != base_rank or classify_point(j, p, tol) is not base_kind:
                sample.rank_consistent = False
            for c, v0 in zip(casimirs, cas0):
                sample.casimir_log.append(abs(float(c(list(p))) - float(v0)))
    return sample


# -- exponential coordinates and the group law ------------------------------


def structure_tensor(t: TripleData) -> np.ndarray:
    """C[a, b, g] = c^g_ab of lie_star as floats (vector-space triples only)."""
    _require_vector_space(t)
    n = t.n
    c = np.zeros((n, n, n))
    for a, b, g, p in t.lie_star.structure_items():
        v = float(p.constant_term())
        c[a, b, g] = v
        c[b, a, g] = -v
    return c


def _exact_structure(t: TripleData):
    n = t.n
    c = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for a, b, g, p in t.lie_star.structure_items():
        v = p.constant_term()
        c[a][b][g] = v
        c[b][a][g] = -v
    return c


def nilpotency_class(t: TripleData) -> Optional[int]:
    """Exact nilpotency class of lie_star (0 for rank 0), None if not nilpotent."""
    _require_vector_space(t)
    n = t.n
    if n == 0:
        return 0
    c = _exact_structure(t)
    current = [[Fraction(int(i == k)) for k in range(n)] for i in range(n)]
    klass = 0
    while current:
        klass += 1
        nxt = []
        for i in range(n):
            for v in current:
                nxt.append([sum((v[b] * c[i][b][g] for b in range(n)), Fraction(0)) for g in range(n)])
        nxt = linalg.row_basis(nxt)
        if len(nxt) == len(current):
            return None
        current = nxt
    return klass


def bch(x, y, bracket: Callable, order: int = 5):
    """Baker-Campbell-Hausdorff series log(exp x exp y) truncated after ``order`` brackets."""
    if order < 1 or order > 5:
        raise ValueError("order must be between 1 and 5")
    br = bracket
    z = x + y
    if order >= 2:
        z = z + br(x, y) / 2
    if order >= 3:
        z = z + (br(x, br(x, y)) + br(y, br(y, x))) / 12
    if order >= 4:
        z = z - br(y, br(x, br(x, y))) / 24
    if order >= 5:
        z = z - (br(y, br(y, br(y, br(y, x)))) + br(x, br(x, br(x, br(x, y))))) / 720
        z = z + (br(x, br(y, br(y, br(y, x)))) + br(y, br(x, br(x, br(x, y))))) / 360
        z = z + (br(y, br(x, br(y, br(x, y)))) + br(x, br(y, br(x, br(y, x))))) / 120
    return z


@dataclass(frozen=True)
class GroupElement:
    xi: Tuple[float, ...]
    t: float = 0.0


class NilpotentGroup:
    """Exponential coordinates on the simply connected group of a nilpotent lie_star."""

    def __init__(self, t: TripleData):
        klass = nilpotency_class(t)
        if klass is None:
            raise PreconditionError("lie_star is not nilpotent; group mode is unavailable")
        if klass > 5:
            raise PreconditionError(f"nilpotency class {klass} exceeds the implemented BCH order")
        self.klass = max(klass, 1)
        self.c = structure_tensor(t)

    def bracket(self, x, y):
        return np.einsum("a,b,abg->g", x, y, self.c)

    def mul(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return bch(x, y, self.bracket, self.klass)

    def inverse(self, x):
        return -np.asarray(x, dtype=float)


def sigma0_eval(t: TripleData, xi) -> object:
    """sigma0(exp xi) = xi(X0)."""
    _require_vector_space(t)
    total = 0
    for (i,), p in t.x0.items():
        total = total + p.constant_term() * xi[i]
    if all(isinstance(v, (int, Fraction)) for v in xi):
        return Fraction(total)
    return float(total)


Cochain = Callable[[np.ndarray, np.ndarray], float]


def group_law(t: TripleData, phi0: Optional[Cochain], g1: GroupElement, g2: GroupElement,
              group: Optional[NilpotentGroup] = None) -> GroupElement:
    """(g1 g2, t1 + e^sigma0(g1) t2 - phi0(g1, g2))."""
    if phi0 is None:
        raise PreconditionError("group law needs the 2-cochain phi0")
    group = group or NilpotentGroup(t)
    xi = group.mul(g1.xi, g2.xi)
    s = float(sigma0_eval(t, [float(v) for v in g1.xi]))
    tt = g1.t + math.exp(s) * g2.t - float(phi0(np.asarray(g1.xi, float), np.asarray(g2.xi, float)))
    return GroupElement(tuple(float(v) for v in xi), tt)


def associativity_residual(t: TripleData, phi0: Cochain, g1: GroupElement, g2: GroupElement,
                           g3: GroupElement, group: Optional[NilpotentGroup] = None) -> float:
    group = group or NilpotentGroup(t)
    left = group_law(t, phi0, group_law(t, phi0, g1, g2, group), g3, group)
    right = group_law(t, phi0, g1, group_law(t, phi0, g2, g3, group), group)
    d = np.abs(np.asarray(left.xi) - np.asarray(right.xi))
    return float(max(d.max(initial=0.0), abs(left.t - right.t)))


def group_cocycle_residual(t: TripleData, phi0: Cochain, g1, g2, g3,
                           group: Optional[NilpotentGroup] = None) -> float:
    """(d phi0)(g1, g2, g3) for the representation t -> t e^sigma0(g)."""
    group = group or NilpotentGroup(t)
    g1, g2, g3 = (np.asarray(g, dtype=float) for g in (g1, g2, g3))
    s = float(sigma0_eval(t, list(g1)))
    v = (math.exp(s) * phi0(g2, g3) - phi0(group.mul(g1, g2), g3)
         + phi0(g1, group.mul(g2, g3)) - phi0(g1, g2))
    return float(abs(v))


def phi_from_group_cocycle(phi0: Cochain, n: int, h: float = 1e-3) -> np.ndarray:
    """Mixed second derivative at 0 of phi0(exp t xi, exp s eta) - phi0(exp s eta, exp t xi).

    Central differences on basis vectors; entry [a, b] approximates the
    2-cochain on (e^a, e^b).
    """
    out = np.zeros((n, n))
    eye = np.eye(n)
    for a in range(n):
        for b in range(n):
            def f(tt, ss):
                x, y = tt * eye[a], ss * eye[b]
                return phi0(x, y) - phi0(y, x)
            out[a, b] = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h)
    return out


def p0_matrix(t: TripleData) -> np.ndarray:
    n = t.n
    out = np.zeros((n, n))
    for (a, b), p in t.p0.items():
        v = float(p.constant_term())
        out[a, b] = v
        out[b, a] = -v
    return out


# -- leaf geometry ----------------------------------------------------------


@dataclass
class LeafGeometry:
    kind: PointKind
    eta: Dict[str, object] = field(default_factory=dict)
    big_omega: Dict[Tuple[int, int], object] = field(default_factory=dict)
    omega: Dict[int, object] = field(default_factory=dict)
    expected: Dict[str, object] = field(default_factory=dict)
    consistent: bool = True


def _sharp_columns(m, n):
    # column k of #Lam: the vector #(dx^k) with components M[k][i]
    return [[m[k][i] for i in range(n)] for k in range(n)]


def _close(a, b, exact: bool, tol: float = 1e-9) -> bool:
    return a == b if exact else abs(float(a) - float(b)) <= tol * max(1.0, abs(float(b)))


def leaf_geometry(t: TripleData, y, tol: float = REL_TOL) -> LeafGeometry:
    """Contact form or l.c.s. pair on the leaf through y, on the generator frame.

    The forms are computed intrinsically from (Lam, E) at y: a contact form
    kills Im #Lam and takes E to 1; an l.c.s. pair has
    Omega(#a, #b) = Lam(a, b) and omega(V) = Omega(V, E).  The values on the
    frame alpha_Y = -X_alpha(Y), X0^v = -E(Y) are then compared with the
    closed forms -alpha(Y), -1, [alpha, beta]_*(Y) - P0(alpha, beta) and
    -alpha(X0).
    """
    _require_vector_space(t)
    _require_cocycles(t)
    j = jacobi_from_triple(t)
    n = t.n
    kind = classify_point(j, y, tol)
    geo = LeafGeometry(kind)
    if kind is PointKind.ZERO_DIM:
        return geo
    m, e, exact = _point_matrices(j, y)
    pt = [Fraction(v) for v in y] if exact else [float(v) for v in y]
    gens = generators(t)
    frame = [g(pt) for g in gens[:n]]
    cols = _sharp_columns(m, n)
    x0 = [t.x0.component((i,)).constant_term() for i in range(n)]
    c = _exact_structure(t)
    p0 = [[t.p0.component((a, b)).constant_term() if a != b else Fraction(0) for b in range(n)]
          for a in range(n)]

    def solve(columns, target):
        if exact:
            return linalg.solve(columns, target)
        a = np.asarray(columns, dtype=float).T
        sol, *_ = np.linalg.lstsq(a, np.asarray(target, dtype=float), rcond=None)
        return list(sol)

    if kind is PointKind.CONTACT:
        for i, v in enumerate(frame + [[-x for x in e]]):
            sol = solve(cols + [e], v)
            if sol is None:
                raise VerificationError("frame vector is not tangent to the leaf")
            label = f"alpha{i}" if i < n else "X0v"
            geo.eta[label] = sol[-1]
            geo.expected[label] = -pt[i] if i < n else -1
            if not _close(geo.eta[label], geo.expected[label], exact):
                geo.consistent = False
        return geo

    kappa = [solve(cols, v) for v in frame]
    theta = solve(cols, e)
    if theta is None or any(k is None for k in kappa):
        raise VerificationError("frame vector is not in the image of #Lam")

    def lam_pair(u, w):
        zero = Fraction(0) if exact else 0.0
        return sum((u[i] * m[i][k] * w[k] for i in range(n) for k in range(n)), zero)

    for a, b in combinations(range(n), 2):
        val = lam_pair(kappa[a], kappa[b])
        geo.big_omega[(a, b)] = val
        br = sum((c[a][b][g] * pt[g] for g in range(n)), Fraction(0) if exact else 0.0)
        geo.expected[f"Omega{a}{b}"] = br - p0[a][b]
        if not _close(val, geo.expected[f"Omega{a}{b}"], exact):
            geo.consistent = False
    for a in range(n):
        val = lam_pair(kappa[a], theta)
        geo.omega[a] = val
        geo.expected[f"omega{a}"] = -x0[a]
        if not _close(val, -x0[a], exact):
            geo.consistent = False
    return geo
