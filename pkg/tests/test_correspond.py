from itertools import combinations

import pytest

from jforge.algebroid import AlgebroidData, linear_poisson
from jforge.correspond import (
    TripleData,
    algebroid_from_jacobi,
    check_linear,
    extract_triple,
    homogenize,
    hull_jacobi_pair,
    jacobi_from_algebroid,
    jacobi_from_triple,
    linear_kvector_to_affine_op,
    poissonize,
    poissonize_rank0,
    restrict_to_slice,
    tangent_jacobi_lift,
)
from jforge.errors import PreconditionError
from jforge.jacobi import (
    JacobiStructure,
    affine_generators,
    check_master,
    classify,
    jacobi_bracket,
    schouten_jacobi,
)
from jforge.polyalg import Chart, Multivector, Polynomial, lie_derivative, pair, schouten_nijenhuis

from instances import (
    make_rng,
    rand_affine_jacobi,
    rand_algebroid,
    rand_jacobi_r2,
    rand_poly,
    rand_triple,
)

POINT = Chart([])
SO3 = {(0, 1): {2: 1}, (1, 2): {0: 1}, (0, 2): {1: -1}}


def var(chart, name, power=1):
    return Polynomial.variable(chart, name, power)


def d(chart, *names):
    return Multivector.coordinate(chart, *names)


def cubic():
    ch = Chart(["x1", "x2", "x3"], base=[], fiber=["x1", "x2", "x3"])
    x1, x3 = var(ch, "x1"), var(ch, "x3")
    lam = d(ch, "x2", "x3") * (x1 * x3) - d(ch, "x1", "x2") * (x1 * x1)
    return JacobiStructure(lam, d(ch, "x2") * x1)


def lie_poisson_so3():
    ch = Chart(["x1", "x2", "x3"], base=[], fiber=["x1", "x2", "x3"])
    x1, x2, x3 = (var(ch, n) for n in ch.names)
    lam = d(ch, "x1", "x2") * x3 + d(ch, "x2", "x3") * x1 + d(ch, "x3", "x1") * x2
    return JacobiStructure(lam)


# -- algebroid -> Jacobi ---------------------------------------------------------


def test_zero_algebroid_gives_zero_structure():
    j = jacobi_from_algebroid(AlgebroidData(Chart(["x"]), 3, unit=True))
    assert j.lam.is_zero and j.e.is_zero


def test_central_unit_bracket_gives_constant_bivector():
    j = jacobi_from_algebroid(AlgebroidData(POINT, 3, {(1, 2): {0: 1}}, unit=True))
    assert j.lam == d(j.chart, "y1", "y2")
    assert j.e.is_zero


def test_unit_acting_by_scaling_gives_euler_field():
    j = jacobi_from_algebroid(AlgebroidData(POINT, 2, {(0, 1): {1: 1}}, unit=True))
    assert j.lam.is_zero
    assert j.e == d(j.chart, "y1") * var(j.chart, "y1")


def test_jacobi_from_algebroid_errors():
    with pytest.raises(PreconditionError):
        jacobi_from_algebroid(AlgebroidData(POINT, 1, unit=True))
    with pytest.raises(PreconditionError):
        jacobi_from_algebroid(AlgebroidData(POINT, 3))


def test_jacobi_from_algebroid_brackets_match_algebroid():
    rng = make_rng(1)
    for _ in range(10):
        a = rand_algebroid(rng, rng.randint(0, 2), rng.randint(2, 4))
        j = jacobi_from_algebroid(a)
        ch, m = j.chart, a.base_dim
        assert check_master(j) and classify(j).is_affine
        u = [Polynomial.one(ch)] + [var(ch, m + i) for i in range(a.rank - 1)]
        for p, q in combinations(range(a.rank), 2):
            target = Polynomial.zero(ch)
            for g in range(a.rank):
                target = target + a.c(p, q, g).transfer(ch) * u[g]
            assert jacobi_bracket(j, u[p], u[q]) == target


# -- Jacobi -> algebroid ------------------------------------------------------------


def test_zero_structure_gives_abelian_algebroid():
    ch = Chart(["y1", "y2"], base=[], fiber=["y1", "y2"])
    a = algebroid_from_jacobi(JacobiStructure.zero(ch))
    assert a == AlgebroidData(POINT, 3, unit=True)


def test_cubic_structure_algebroid():
    a = algebroid_from_jacobi(cubic())
    assert a.rank == 4
    items = [(al, be, g, p.constant_term()) for al, be, g, p in a.structure_items()]
    assert items == [(0, 2, 1, 1)]
    assert not list(a.anchor_items())


def test_inverse_of_central_example():
    a = AlgebroidData(POINT, 3, {(1, 2): {0: 1}}, unit=True)
    assert algebroid_from_jacobi(jacobi_from_algebroid(a)) == a


def test_algebroid_from_non_affine_structure_fails_with_witness():
    ch = Chart(["x", "y"], base=["x"], fiber=["y"])
    j = JacobiStructure(d(ch, "x", "y") * (var(ch, "y") * var(ch, "y")))
    with pytest.raises(PreconditionError) as err:
        algebroid_from_jacobi(j)
    assert err.value.witness is not None


def test_round_trips():
    rng = make_rng(2)
    for _ in range(25):
        a = rand_algebroid(rng, rng.randint(0, 2), rng.randint(2, 4))
        assert algebroid_from_jacobi(jacobi_from_algebroid(a)) == a
        j = rand_affine_jacobi(rng)
        assert jacobi_from_algebroid(algebroid_from_jacobi(j)) == j


# -- triples ---------------------------------------------------------------------------


def test_zero_triple():
    j = jacobi_from_triple(TripleData.constant(2))
    assert j.lam.is_zero and j.e.is_zero
    t = extract_triple(j)
    assert t.x0.is_zero and t.p0.is_zero and not list(t.lie_star.structure_items())


def test_abelian_triple_with_bivector():
    t = TripleData.constant(2, p0={(0, 1): 1})
    j = jacobi_from_triple(t)
    assert j.lam == -d(j.chart, "x1", "x2")
    assert j.e.is_zero
    assert extract_triple(j) == t


def test_one_dimensional_triple_with_cocycle():
    t = TripleData.constant(1, x0=[1])
    j = jacobi_from_triple(t)
    assert j.lam.is_zero
    assert j.e == -d(j.chart, "x1")
    assert extract_triple(j) == t


def test_extract_triple_from_lie_poisson():
    t = extract_triple(lie_poisson_so3())
    assert t.lie_star == AlgebroidData(POINT, 3, SO3)
    assert t.x0.is_zero and t.p0.is_zero


def test_triple_cocycle_violation():
    t = TripleData.constant(3, SO3, x0=[0, 0, 1])
    with pytest.raises(PreconditionError):
        jacobi_from_triple(t)


def test_extract_triple_rejects_cubic_structure():
    with pytest.raises(PreconditionError):
        extract_triple(cubic())


def test_triple_round_trip_and_strong_affinity():
    rng = make_rng(3)
    for _ in range(20):
        t = rand_triple(rng, rng.randint(1, 4))
        j = jacobi_from_triple(t)
        assert classify(j).is_strongly_affine
        assert extract_triple(j) == t


# -- Poissonization ---------------------------------------------------------------


def test_poissonize_zero():
    ch = Chart(["y1"], base=[], fiber=["y1"])
    assert poissonize(JacobiStructure.zero(ch)).lam.is_zero


def test_poissonize_cubic_structure():
    pbar = poissonize(cubic(), "iota")
    ch = pbar.chart
    assert ch.names == ("iota", "x1", "x2", "x3")
    assert pbar.lam == d(ch, "iota", "x2") * var(ch, "x1")
    assert pbar.e.is_zero


def _check_poissonize(j):
    pbar = poissonize(j)
    hull = pbar.chart
    a = algebroid_from_jacobi(j)
    fiber_names = [hull.names[i] for i in hull.fiber]
    assert pbar == linear_poisson(a, fiber_names)
    delta = Multivector.euler(hull, hull.fiber)
    assert lie_derivative(delta, pbar.lam) == -pbar.lam
    gens = affine_generators(j.chart)
    for f, g in combinations(gens, 2):
        lifted = jacobi_bracket(pbar, homogenize(f, hull), homogenize(g, hull))
        assert restrict_to_slice(Multivector.function(lifted), "iota").as_polynomial().transfer(j.chart) \
            == jacobi_bracket(j, f, g)
    pair = hull_jacobi_pair(pbar)
    assert restrict_to_slice(pair.lam, "iota").transfer(j.chart) == j.lam
    assert restrict_to_slice(pair.e, "iota").transfer(j.chart) == j.e


def test_poissonize_commuting_square_and_restriction():
    rng = make_rng(4)
    _check_poissonize(cubic())
    for _ in range(15):
        _check_poissonize(rand_affine_jacobi(rng))


def test_poissonize_rejects_non_affine():
    ch = Chart(["x", "y"], base=["x"], fiber=["y"])
    with pytest.raises(PreconditionError):
        poissonize(JacobiStructure(d(ch, "x", "y") * (var(ch, "y") * var(ch, "y"))))


# -- rank zero ----------------------------------------------------------------------


def test_rank0_examples():
    line = Chart(["x"])
    assert poissonize_rank0(JacobiStructure.zero(line)).lam.is_zero
    pbar = poissonize_rank0(JacobiStructure(Multivector.zero(line, 2), d(line, "x")))
    assert pbar.lam == d(pbar.chart, "t", "x")
    plane = Chart(["x1", "x2"])
    pbar = poissonize_rank0(JacobiStructure(d(plane, "x1", "x2")))
    ch = pbar.chart
    assert pbar.lam == d(ch, "x1", "x2") * var(ch, "t", -1)
    assert check_master(pbar)


def test_rank0_homogeneity_identity():
    rng = make_rng(5)
    for _ in range(10):
        j = rand_jacobi_r2(rng)
        pbar = poissonize_rank0(j)
        ch = pbar.chart
        t = var(ch, "t")
        assert check_master(pbar)
        for _ in range(3):
            f, g = rand_poly(rng, j.chart, [0, 1]), rand_poly(rng, j.chart, [0, 1])
            lhs = jacobi_bracket(pbar, t * f.transfer(ch), t * g.transfer(ch))
            assert lhs == t * jacobi_bracket(j, f, g).transfer(ch)


def test_rank0_rejects_fiber():
    ch = Chart(["y"], base=[], fiber=["y"])
    with pytest.raises(PreconditionError):
        poissonize_rank0(JacobiStructure.zero(ch))


# -- linear k-vectors and first-order operators -------------------------------------------


def test_linear_kvector_zero_and_liouville():
    hull = Chart(["iota", "y1"], base=[], fiber=["iota", "y1"])
    op = linear_kvector_to_affine_op(Multivector.zero(hull, 2), "iota")
    assert op.p.is_zero and op.q.is_zero
    delta = Multivector.euler(hull, hull.fiber)
    op = linear_kvector_to_affine_op(delta, "iota")
    assert op.p.is_zero
    assert op.q.as_polynomial() == 1


def test_linear_kvector_inverts_poissonize():
    rng = make_rng(6)
    for j in [cubic()] + [rand_affine_jacobi(rng) for _ in range(8)]:
        op = linear_kvector_to_affine_op(poissonize(j).lam, "iota")
        assert op.p.transfer(j.chart) == j.lam
        assert op.q.transfer(j.chart) == j.e


def test_linear_kvector_rejects_nonlinear():
    hull = Chart(["iota", "y1"], base=[], fiber=["iota", "y1"])
    p = d(hull, "iota", "y1") * (var(hull, "y1") * var(hull, "y1"))
    assert not check_linear(p)[0]
    with pytest.raises(PreconditionError):
        linear_kvector_to_affine_op(p, "iota")


def _rand_linear_kvector(rng, hull, k):
    base, fiber = hull.base, hull.fiber
    comps = {}
    for idx in combinations(range(hull.dim), k):
        # fiber degree of the coefficient is (#fiber slots) + 1 - k
        fdeg = sum(1 for i in idx if i in fiber) + 1 - k
        if fdeg < 0 or rng.random() < 0.4:
            continue
        coeff = rand_poly(rng, hull, list(base), 1, 2)
        for _ in range(fdeg):
            coeff = coeff * var(hull, rng.choice(fiber))
        if coeff:
            comps[idx] = coeff
    return Multivector(hull, k, comps)


def _as_op(pbar):
    return linear_kvector_to_affine_op(pbar, "iota")


def test_linear_kvector_bracket_compatibility():
    rng = make_rng(7)
    hull = Chart(["x", "iota", "y1", "y2"], base=["x"], fiber=["iota", "y1", "y2"])
    checked = 0
    for _ in range(25):
        k, l = rng.randint(1, 3), rng.randint(1, 3)
        p1, p2 = _rand_linear_kvector(rng, hull, k), _rand_linear_kvector(rng, hull, l)
        assert check_linear(p1)[0] and check_linear(p2)[0]
        br = schouten_nijenhuis(p1, p2)
        assert check_linear(br)[0]
        lhs = schouten_jacobi(_as_op(p1), _as_op(p2))
        rhs = _as_op(br)
        assert lhs == rhs
        checked += not br.is_zero
    assert checked > 5


def test_linear_kvector_contraction_identity():
    rng = make_rng(8)
    hull = Chart(["x", "iota", "y1"], base=["x"], fiber=["iota", "y1"])
    slice_chart = hull.subchart(["x", "y1"])
    gens = affine_generators(slice_chart)
    for _ in range(10):
        pbar = _rand_linear_kvector(rng, hull, 2)
        op = _as_op(pbar)
        for a, b in combinations(gens, 2):
            ha, hb = homogenize(a, hull), homogenize(b, hull)
            expected = restrict_to_slice(Multivector.function(pair(pbar, ha, hb)), "iota",
                                         1, slice_chart).as_polynomial()
            # (P + I ^ Q)(a, b) = P(da, db) + a Q(b) - b Q(a)
            got = jacobi_bracket(JacobiStructure(op.p, op.q), a, b)
            assert got == expected


# -- tangent lifts ------------------------------------------------------------------------


def test_tangent_lift_examples():
    line = Chart(["x"])
    z = tangent_jacobi_lift(JacobiStructure.zero(line))
    assert z.lam.is_zero and z.e.is_zero
    out = tangent_jacobi_lift(JacobiStructure(Multivector.zero(line, 2), d(line, "x")))
    ch = out.chart
    assert out.lam == d(ch, "x", "x_dot") * var(ch, "x_dot")
    assert out.e == d(ch, "x")
    assert check_master(out)


def test_tangent_lift_of_lie_poisson():
    lp = lie_poisson_so3()
    base = Chart(lp.chart.names)
    out = tangent_jacobi_lift(lp.transfer(base))
    assert out.e.is_zero
    assert check_master(out)
    assert classify(out).is_affine


def test_tangent_lift_random_plane_structures():
    rng = make_rng(9)
    for _ in range(10):
        out = tangent_jacobi_lift(rand_jacobi_r2(rng))
        assert check_master(out)
        assert classify(out).is_affine


def test_tangent_lift_precondition():
    ch = Chart(["a", "b", "c"])
    bad = JacobiStructure(d(ch, "a", "b"), d(ch, "c"))
    assert not check_master(bad)
    with pytest.raises(PreconditionError):
        tangent_jacobi_lift(bad)
