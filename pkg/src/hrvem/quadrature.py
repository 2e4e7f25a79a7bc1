"""Quadrature rules on the reference triangle and tetrahedron.

Rules are collapsed (Duffy-type) Gauss-Jacobi grids: the simplex is mapped
to a unit square/cube and the Jacobian factors are absorbed into Jacobi
weight functions, so a rule requested for total degree ``d`` integrates
every polynomial of degree <= d exactly (up to round-off).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

MAX_DEGREE = 20


class QuadratureError(ValueError):
    """Requested rule outside the supported degree range."""


@dataclass(frozen=True)
class QuadratureRule:
    """Points and weights on a reference simplex.

    ``points`` has shape (Q, 2) on the triangle {x,y >= 0, x+y <= 1} or
    (Q, 3) on the tetrahedron {x,y,z >= 0, x+y+z <= 1}; weights sum to the
    reference measure (1/2 resp. 1/6).
    """

    domain: str
    degree: int
    points: np.ndarray
    weights: np.ndarray

    @property
    def n_points(self) -> int:
        return len(self.weights)


def _gauss01(n):
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _gauss_jacobi01(n, alpha):
    # nodes/weights for integral_0^1 (1-t)^alpha p(t) dt
    x, w = roots_jacobi(n, alpha, 0.0)
    return 0.5 * (x + 1.0), w * 0.5 ** (alpha + 1.0)


def _check_degree(degree):
    if degree < 0 or degree > MAX_DEGREE:
        raise QuadratureError(f"unsupported quadrature degree {degree} (max {MAX_DEGREE})")


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> QuadratureRule:
    """Rule exact for 2D polynomials of total degree <= ``degree``."""
    _check_degree(degree)
    n = max(1, (degree + 2) // 2)  # ceil((d+1)/2)
    xi, wxi = _gauss_jacobi01(n, 1.0)  # absorbs the (1-xi) Jacobian
    eta, weta = _gauss01(n)
    XI, ETA = np.meshgrid(xi, eta, indexing="ij")
    x = XI.ravel()
    y = (ETA * (1.0 - XI)).ravel()
    w = np.outer(wxi, weta).ravel()
    pts = np.column_stack([x, y])
    return QuadratureRule("triangle", degree, pts, w)


@lru_cache(maxsize=None)
def tetrahedron_rule(degree: int) -> QuadratureRule:
    """Rule exact for 3D polynomials of total degree <= ``degree``."""
    _check_degree(degree)
    n = max(1, (degree + 2) // 2)
    xi, wxi = _gauss_jacobi01(n, 2.0)  # absorbs (1-xi)^2
    eta, weta = _gauss_jacobi01(n, 1.0)  # absorbs (1-eta)
    zeta, wzeta = _gauss01(n)
    XI, ETA, ZETA = np.meshgrid(xi, eta, zeta, indexing="ij")
    x = XI.ravel()
    y = (ETA * (1.0 - XI)).ravel()
    z = (ZETA * (1.0 - XI) * (1.0 - ETA)).ravel()
    w = np.einsum("i,j,k->ijk", wxi, weta, wzeta).ravel()
    pts = np.column_stack([x, y, z])
    return QuadratureRule("tetrahedron", degree, pts, w)


def map_to_triangle(rule: QuadratureRule, verts: np.ndarray, normal=None):
    """Map a reference-triangle rule onto a 3D triangle (3, 3).

    Returns (points (Q, 3), weights (Q,)); weights sum to the triangle area.
    With ``normal`` given, the area is *signed* with respect to it, which
    keeps fan decompositions of non-convex polygons exact.
    """
    v0, v1, v2 = verts
    e1, e2 = v1 - v0, v2 - v0
    pts = v0 + np.outer(rule.points[:, 0], e1) + np.outer(rule.points[:, 1], e2)
    cr = np.cross(e1, e2)  # |cr| = 2 * area
    scale = np.linalg.norm(cr) if normal is None else float(cr @ normal)
    return pts, rule.weights * scale


def map_to_tetrahedron(rule: QuadratureRule, verts: np.ndarray):
    """Map a reference-tet rule onto a tet (4, 3) given by its vertices.

    Weights sum to the *signed* volume det(v1-v0, v2-v0, v3-v0)/6, so a
    signed decomposition of a non-convex cell stays exact.
    """
    v0 = verts[0]
    E = verts[1:] - v0  # rows
    pts = v0 + rule.points @ E
    det = np.linalg.det(E)
    return pts, rule.weights * det
