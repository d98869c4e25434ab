import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from speclab.errors import BoundaryConditionViolated, DegreeOverflow, NotConvex
from speclab.geometry import build_polygon, regular_polygon, square
from speclab.identity import (
    DISK,
    MAX_DEGREE,
    PolynomialField,
    bubble,
    default_extras,
    disk_counterexample,
    identity_residual,
    identity_table,
    identity_terms,
    integrate,
    quadrature_nodes,
    side_functionals,
    triangle_rule,
)

X, Y = PolynomialField.x(), PolynomialField.y()
TRIPLES = list(itertools.product((1, 2), repeat=3))


def sym_square_value():
    x, y = sympy.symbols("x y")
    u = x * (sympy.pi - x) * y * (sympy.pi - y)
    lhs = sympy.integrate(sympy.diff(u, x, y) ** 2, (x, 0, sympy.pi), (y, 0, sympy.pi))
    rhs = sympy.integrate(sympy.diff(u, y, y) * sympy.diff(u, x, x), (x, 0, sympy.pi), (y, 0, sympy.pi))
    return sympy.simplify(lhs), sympy.simplify(rhs)


def sym_disk_residual():
    r, t = sympy.symbols("r t", nonnegative=True)
    x, y = sympy.symbols("x y")
    u = (1 - x**2 - y**2) * x
    lhs = sympy.diff(u, x, y) * sympy.diff(u, x, y)
    rhs = sympy.diff(u, y, y) * sympy.diff(u, x, x)
    polar = lambda f: sympy.integrate(  # noqa: E731
        (f.subs({x: r * sympy.cos(t), y: r * sympy.sin(t)}) * r), (r, 0, 1), (t, 0, 2 * sympy.pi)
    )
    return sympy.simplify(polar(lhs) - polar(rhs)), sympy.simplify(polar(lhs)), sympy.simplify(polar(rhs))


def test_symbolic_oracles():
    lhs, rhs = sym_square_value()
    assert sympy.simplify(lhs - sympy.pi**6 / 9) == 0
    assert sympy.simplify(rhs - sympy.pi**6 / 9) == 0
    res, lhs, rhs = sym_disk_residual()
    assert (res, lhs, rhs) == (-2 * sympy.pi, sympy.pi, 3 * sympy.pi)


def test_square_example():
    p = math.pi
    u = X * (p - X) * Y * (p - Y)
    t = identity_terms(u, 2, 1, 2, square())
    assert t.lhs == pytest.approx(p**6 / 9, rel=1e-13)
    assert t.rhs == pytest.approx(p**6 / 9, rel=1e-13)
    assert abs(t.residual) < 1e-10 * (abs(t.lhs) + abs(t.rhs))


def test_disk_counterexample():
    t = identity_terms(disk_counterexample(), 2, 1, 2, DISK)
    assert t.lhs == pytest.approx(math.pi, rel=1e-13)
    assert t.rhs == pytest.approx(3 * math.pi, rel=1e-13)
    assert identity_residual(disk_counterexample(), 2, 1, 2, DISK) == pytest.approx(-2 * math.pi, rel=1e-8)


@pytest.mark.parametrize("j", [1, 2])
def test_equal_indices_give_zero(j, pentagon):
    u = bubble(pentagon.with_labels("DDDDD"), 1 + X * Y)
    assert identity_residual(u, j, j, j, pentagon) == 0.0


CONVEX = {
    "triangle": build_polygon([(0, 0), (1, 0), (0, 1)], "DDD"),
    "square": square(),
    "pentagon": regular_polygon(5),
    "hexagon": regular_polygon(6),
}


@pytest.mark.parametrize("name", sorted(CONVEX))
def test_identity_holds_on_convex_polygons(name):
    domain = CONVEX[name]
    rows = identity_table(domain)
    assert len(rows) == 8 * 5
    assert {r[3] for r in rows} == set(range(5))
    for j, k, m, eid, lhs, rhs, res in rows:
        assert abs(res) < 1e-9 * (abs(lhs) + abs(rhs)), (j, k, m, eid)


@pytest.mark.parametrize("name", sorted(CONVEX))
def test_residual_symmetric_in_j_and_m(name):
    domain = CONVEX[name]
    u = bubble(domain, default_extras()[3])
    for j, k, m in TRIPLES:
        a = identity_residual(u, j, k, m, domain)
        b = identity_residual(u, m, k, j, domain)
        assert a == pytest.approx(b, abs=1e-12 * (1 + abs(a)))


coeff = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 5), st.integers(0, 5)), coeff, max_size=12))
def test_partials_commute(coeffs):
    p = PolynomialField(coeffs)
    assert p.partial(0, 1) == p.partial(1, 0)
    assert p.partial(0, 0, 1) == p.partial(1, 0, 0)


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)), coeff, max_size=8), st.floats(-2, 2), st.floats(-2, 2))
def test_partial_matches_sympy(coeffs, x0, y0):
    x, y = sympy.symbols("x y")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * x**i * y**j for (i, j), c in coeffs.items())
    p = PolynomialField(coeffs)
    for axes in [(0,), (1,), (0, 1), (1, 1), (0, 0)]:
        sym = sympy.diff(expr, *[(x, y)[a] for a in axes]) if expr != 0 else sympy.Integer(0)
        want = float(sym.subs({x: x0, y: y0}))
        assert float(p.partial(*axes)(x0, y0)) == pytest.approx(want, rel=1e-12, abs=1e-9)


@pytest.mark.parametrize("degree", range(0, 13))
def test_triangle_rule_exact(degree):
    pts, w = triangle_rule(degree)
    assert w.sum() == pytest.approx(0.5, rel=1e-15)
    for a in range(degree + 1):
        b = degree - a
        exact = math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)
        assert np.dot(w, pts[:, 0] ** a * pts[:, 1] ** b) == pytest.approx(exact, rel=1e-12)


@pytest.mark.parametrize("degree", [0, 2, 4, 8, 12])
def test_disk_rule_exact(degree):
    for a in range(0, degree + 1, 2):
        b = degree - a
        if b % 2:
            continue
        # int over the unit disk of x^a y^b
        exact = 2 * math.gamma((a + 1) / 2) * math.gamma((b + 1) / 2) / ((a + b + 2) * math.gamma((a + b + 2) / 2))
        assert integrate(X**a * Y**b, DISK) == pytest.approx(exact, rel=1e-12)


def test_polygon_area_and_moments(pentagon):
    assert integrate(PolynomialField.constant(1), pentagon) == pytest.approx(pentagon.area(), rel=1e-14)
    pts, w = quadrature_nodes(square(1.0), 6)
    assert np.dot(w, pts[:, 0] ** 3 * pts[:, 1] ** 3) == pytest.approx(1 / 16, rel=1e-14)


def test_side_functionals_vanish_on_sides(pentagon):
    p = pentagon.points()
    for i, ell in enumerate(side_functionals(pentagon)):
        a, b = p[i], p[(i + 1) % len(p)]
        assert abs(ell(*a)) < 1e-14 and abs(ell(*b)) < 1e-14
        assert ell(0.0, 0.0) > 0


def test_bubble_degree_and_errors(l_shape):
    hexagon = regular_polygon(6)
    assert bubble(hexagon).degree == 6
    assert bubble(hexagon, X * X).degree == 8
    with pytest.raises(DegreeOverflow):
        bubble(hexagon, X ** (MAX_DEGREE - 5))
    with pytest.raises(NotConvex):
        bubble(l_shape)


def test_boundary_violation():
    with pytest.raises(BoundaryConditionViolated):
        identity_residual(X * Y + 1, 1, 2, 2, square())


def test_exact_rational_coefficients():
    p = PolynomialField({(2, 1): 0.1})
    assert p.coeffs[(2, 1)] == Fraction(0.1)
    assert p.partial(0, 0, 1).coeffs == {(0, 0): 2 * Fraction(0.1)}
