import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hrvem.quadrature import (
    QuadratureError,
    map_to_tetrahedron,
    map_to_triangle,
    tetrahedron_rule,
    triangle_rule,
)


def tri_monomial_exact(a, b):
    # integral over {x,y>=0, x+y<=1} of x^a y^b = a! b! / (a+b+2)!
    return math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)


def tet_monomial_exact(a, b, c):
    return (
        math.factorial(a)
        * math.factorial(b)
        * math.factorial(c)
        / math.factorial(a + b + c + 3)
    )


@pytest.mark.parametrize("degree", [0, 1, 2, 3, 4, 5, 6, 8, 10])
def test_triangle_rule_monomial_exactness(degree):
    rule = triangle_rule(degree)
    assert_allclose(rule.weights.sum(), 0.5, rtol=1e-14)
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            val = np.sum(rule.weights * rule.points[:, 0] ** a * rule.points[:, 1] ** b)
            exact = tri_monomial_exact(a, b)
            assert abs(val - exact) <= 1e-13 * max(1.0, abs(exact)), (a, b, degree)


@pytest.mark.parametrize("degree", [0, 1, 2, 3, 4, 5, 6, 8])
def test_tetrahedron_rule_monomial_exactness(degree):
    rule = tetrahedron_rule(degree)
    assert_allclose(rule.weights.sum(), 1.0 / 6.0, rtol=1e-14)
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            for c in range(degree + 1 - a - b):
                val = np.sum(
                    rule.weights
                    * rule.points[:, 0] ** a
                    * rule.points[:, 1] ** b
                    * rule.points[:, 2] ** c
                )
                exact = tet_monomial_exact(a, b, c)
                assert abs(val - exact) <= 1e-13 * max(1.0, abs(exact)), (a, b, c)


def test_unsupported_degree_raises():
    with pytest.raises(QuadratureError):
        triangle_rule(21)
    with pytest.raises(QuadratureError):
        tetrahedron_rule(-1)
    with pytest.raises(QuadratureError):
        tetrahedron_rule(25)


def test_map_to_triangle_area_and_centroid():
    rule = triangle_rule(2)
    verts = np.array([[0.0, 0.0, 1.0], [2.0, 0.0, 1.0], [0.0, 3.0, 1.0]])
    pts, wts = map_to_triangle(rule, verts)
    assert_allclose(wts.sum(), 3.0, rtol=1e-14)  # area = 0.5*2*3
    centroid = (wts[:, None] * pts).sum(axis=0) / wts.sum()
    assert_allclose(centroid, verts.mean(axis=0), atol=1e-14)


def test_map_to_tetrahedron_signed_volume():
    rule = tetrahedron_rule(2)
    verts = np.array(
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    )
    _, wts = map_to_tetrahedron(rule, verts)
    assert_allclose(wts.sum(), 1.0 / 6.0, rtol=1e-14)
    # swapping two vertices flips the sign
    _, wts_flip = map_to_tetrahedron(rule, verts[[0, 2, 1, 3]])
    assert_allclose(wts_flip.sum(), -1.0 / 6.0, rtol=1e-14)


def test_mapped_rule_integrates_quadratic_exactly():
    rule = tetrahedron_rule(4)
    rng = np.random.default_rng(3)
    verts = rng.normal(size=(4, 3))
    pts, wts = map_to_tetrahedron(rule, verts)
    # x^4 monomial against the analytic value obtained from a reference map
    val = np.sum(wts * pts[:, 0] ** 4)
    # oracle: dense Monte-Carlo-free evaluation via degree-8 rule
    pts8, wts8 = map_to_tetrahedron(tetrahedron_rule(8), verts)
    oracle = np.sum(wts8 * pts8[:, 0] ** 4)
    assert_allclose(val, oracle, rtol=1e-12)
