"""Per-element operators of the mixed stress-displacement scheme.

Each face carries six traction degrees of freedom (see ``_kernels`` for
the basis). For a cell E the computable objects are:

* the divergence of a discrete stress, a rigid-motion field
  alpha + omega x (x - x_E) recovered from face tractions alone;
* the projection onto constant symmetric tensors, evaluated through the
  integration-by-parts identity (never through the auxiliary field that
  defines the virtual space);
* the local saddle-point matrices: the stabilized energy A_E, the
  divergence coupling B_E, and the load/boundary right-hand sides;
* the face-wise interpolation of a smooth stress field.

Local dof ordering: faces in cell-storage order, within a face
(t1, t2, rotation, n, n*x1_local, n*x2_local). A cell whose face sign is
-1 uses the negated basis so tractions are single-valued across faces.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .materials import unkelvin
from .mesh import PolyhedralMesh

KELVIN_BASIS = _kernels.KELVIN_BASIS


@dataclass(frozen=True)
class RigidMotion:
    """Field alpha + omega x (x - center)."""

    alpha: np.ndarray
    omega: np.ndarray
    center: np.ndarray

    def __call__(self, x):
        rel = np.asarray(x) - self.center
        return self.alpha + np.cross(np.broadcast_to(self.omega, rel.shape), rel)

    def coeffs(self):
        return np.concatenate([self.alpha, self.omega])


class FaceIntegralCache:
    """Face quadrature integrals (G, F, Mom, P about x_f), shared by cells."""

    def __init__(self, mesh: PolyhedralMesh, degree: int = 4):
        self.mesh = mesh
        self.degree = degree
        self._data = {}

    def get(self, f):
        out = self._data.get(f)
        if out is None:
            fr = self.mesh.frame(f)
            pts, wts = self.mesh.face_quadrature(f, self.degree)
            out = _kernels.face_integrals(pts, wts, fr.t1, fr.t2, fr.normal, fr.x_f)
            self._data[f] = out
        return out


class CellOps:
    """All computable per-cell operators, built from face integrals.

    The expensive quadrature work is one kernel call per face (cached
    across cells); everything else is small dense linear algebra.
    """

    def __init__(self, mesh: PolyhedralMesh, cell: int, cache: FaceIntegralCache | None = None):
        if cache is None:
            cache = FaceIntegralCache(mesh)
        self.mesh = mesh
        self.cell = cell
        self.cache = cache
        self.faces, self.signs = mesh.cell(cell)
        self.geo = mesh.cell_geometry(cell)
        self.x_E = self.geo.barycenter
        self.n_dofs = 6 * len(self.faces)

        # shift the cached per-face integrals from x_f to x_E
        self.G = []
        self.F = []
        self.Mom = []
        self.P = []
        for f in self.faces:
            G, F, Mom0, P0 = cache.get(f)
            shift = mesh.frame(f).x_f - self.x_E
            Mom = Mom0 + np.cross(shift, F)
            P = P0 + F @ np.einsum("kab,b->ak", KELVIN_BASIS, shift)
            self.G.append(G)
            self.F.append(F)
            self.Mom.append(Mom)
            self.P.append(P)

        # second moments int r x r^T over E (degree-2 exact)
        pts, wts = mesh.cell_quadrature(cell, degree=2)
        rel = pts - self.x_E
        self.Q2 = np.einsum("q,qa,qb->ab", wts, rel, rel)
        self.inertia = np.trace(self.Q2) * np.eye(3) - self.Q2

        # divergence reconstruction maps: alpha = Alpha c, omega = Omega c
        vol = self.geo.volume
        self.Alpha = np.zeros((3, self.n_dofs))
        rhs = np.zeros((3, self.n_dofs))
        for k, s in enumerate(self.signs):
            cols = slice(6 * k, 6 * k + 6)
            self.Alpha[:, cols] = s * self.F[k].T / vol
            rhs[:, cols] = s * self.Mom[k].T
        self.Omega = np.linalg.solve(self.inertia, rhs)

        # projection onto constant symmetric tensors, Kelvin components:
        # Pi c = (1/|E|) [ sum_f s int_f psi.(pi_k r) - pi_k : (skew(omega) Q2) ]
        self.PiMat = np.zeros((6, self.n_dofs))
        for k, s in enumerate(self.signs):
            cols = slice(6 * k, 6 * k + 6)
            self.PiMat[:, cols] = s * self.P[k].T
        SQ = np.einsum("jab,bc->jac", _skew_batch(self.Omega.T), self.Q2)
        volterm = np.einsum("kab,jab->kj", KELVIN_BASIS, SQ)
        self.PiMat = (self.PiMat - volterm) / vol

    # -- operator applications ------------------------------------------

    def reconstruct_divergence(self, c) -> RigidMotion:
        """Divergence of the stress with local dof vector ``c``."""
        c = np.asarray(c)
        return RigidMotion(self.Alpha @ c, self.Omega @ c, self.x_E)

    def project_pi(self, c):
        """Constant symmetric tensor projection of the stress, as 3x3."""
        return unkelvin(self.PiMat @ np.asarray(c))

    def constant_stress_dofs(self, S):
        """Local dof vector representing the constant stress field S."""
        S = np.asarray(S)
        out = np.zeros(self.n_dofs)
        for k, (f, s) in enumerate(zip(self.faces, self.signs)):
            fr = self.mesh.frame(f)
            v = S @ fr.normal
            out[6 * k + 0] = v @ fr.t1
            out[6 * k + 1] = v @ fr.t2
            out[6 * k + 3] = v @ fr.normal
        return out

    def local_stiffness(self, material, stab="element"):
        """Stabilized energy matrix A_E (symmetric positive definite)."""
        vol = self.geo.volume
        D = material.compliance_kelvin
        A = vol * self.PiMat.T @ D @ self.PiMat

        kappa = material.kappa()
        h_E = self.geo.diameter
        frames = [self.mesh.frame(f) for f in self.faces]
        if stab == "element":
            w = np.array([kappa * h_E for _ in frames])
        elif stab == "face":
            w = np.array([kappa * fr.h_f for fr in frames])
        else:
            raise ValueError(f"unknown stabilization variant {stab!r}")

        # traction of the projected tensor on each face: T_j n_g
        T = unkelvin(self.PiMat.T)  # (n_dofs, 3, 3)
        normals = np.array([fr.normal for fr in frames])
        areas = np.array([fr.area for fr in frames])
        TN = np.einsum("jab,gb->jga", T, normals)  # (n_dofs, n_faces, 3)

        S = np.einsum("g,jga,kga->jk", w * areas, TN, TN)
        for k in range(len(self.faces)):
            rows = slice(6 * k, 6 * k + 6)
            S[rows, rows] += w[k] * self.G[k]
            cross = w[k] * self.F[k] @ TN[:, k, :].T  # (6, n_dofs)
            S[rows, :] -= cross
            S[:, rows] -= cross.T
        A += S
        return 0.5 * (A + A.T)

    def local_mixed(self, degree=2):
        """Coupling B_E[j, k] = int_E div(phi_j) . r_k, by cell quadrature."""
        pts, wts = self.mesh.cell_quadrature(self.cell, degree=degree)
        rel = pts - self.x_E
        # div fields per dof at quadrature points: alpha_j + omega_j x r
        div_vals = self.Alpha.T[:, None, :] + np.cross(
            self.Omega.T[:, None, :], rel[None, :, :]
        )  # (n_dofs, Q, 3)
        R = _rigid_motion_values(rel)  # (Q, 6, 3)
        return np.einsum("q,jqa,qka->jk", wts, div_vals, R)

    def local_mixed_boundary(self):
        """Same pairing through the boundary identity sum_f int_f psi . r_k."""
        B = np.zeros((self.n_dofs, 6))
        for k, s in enumerate(self.signs):
            rows = slice(6 * k, 6 * k + 6)
            B[rows, :3] = s * self.F[k]
            B[rows, 3:] = s * self.Mom[k]
        return B

    def local_load(self, f, degree=4):
        """Load vector g_E[k] = int_E f . r_k with the requested degree."""
        pts, wts = self.mesh.cell_quadrature(self.cell, degree=degree)
        vals = np.asarray(f(pts))
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"body force returned non-finite values on cell {self.cell}")
        R = _rigid_motion_values(pts - self.x_E)
        return np.einsum("q,qa,qka->k", wts, vals, R)

    def interpolation_matrix(self, k):
        """6x6 face system M[i, j] = int_f psi_i . phi*_j for local face k."""
        return np.hstack([self.F[k], self.Mom[k]])

    def interpolate_stress(self, tau, degree=4):
        """Face-wise interpolation of a smooth stress field.

        ``tau`` maps points (Q, 3) to tensors (Q, 3, 3). Returns dof
        coefficients (n_faces, 6) with respect to the canonical normals.
        """
        out = np.empty((len(self.faces), 6))
        for k, f in enumerate(self.faces):
            fr = self.mesh.frame(f)
            pts, wts = self.mesh.face_quadrature(f, degree)
            tn = np.einsum("qab,b->qa", np.asarray(tau(pts)), fr.normal)
            rel = pts - self.x_E
            b = np.concatenate(
                [
                    np.einsum("q,qa->a", wts, tn),
                    np.einsum("q,qa->a", wts, np.cross(rel, tn)),
                ]
            )
            M = self.interpolation_matrix(k)
            out[k] = np.linalg.solve(M, b)
        return out


def _skew_batch(W):
    """Skew matrices of a batch of 3-vectors (n, 3) -> (n, 3, 3)."""
    W = np.asarray(W)
    out = np.zeros(W.shape[:-1] + (3, 3))
    out[..., 0, 1] = -W[..., 2]
    out[..., 0, 2] = W[..., 1]
    out[..., 1, 0] = W[..., 2]
    out[..., 1, 2] = -W[..., 0]
    out[..., 2, 0] = -W[..., 1]
    out[..., 2, 1] = W[..., 0]
    return out


def _rigid_motion_values(rel):
    """The six rigid-motion generators at relative points (Q, 3) -> (Q, 6, 3)."""
    Q = len(rel)
    R = np.zeros((Q, 6, 3))
    R[:, 0, 0] = R[:, 1, 1] = R[:, 2, 2] = 1.0
    for m in range(3):
        e = np.zeros(3)
        e[m] = 1.0
        R[:, 3 + m, :] = np.cross(e, rel)
    return R


def local_boundary_term(mesh, f, g, degree=4):
    """Stress-row boundary data int_f psi_i . g for a boundary face.

    Returned with respect to the canonical normal; the assembler applies
    the face sign so the pairing uses the domain-outward traction.
    """
    fr = mesh.frame(f)
    pts, wts = mesh.face_quadrature(f, degree)
    psi = _kernels.face_basis_values(pts, fr.t1, fr.t2, fr.normal, fr.x_f)
    vals = np.asarray(g(pts))
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"boundary datum returned non-finite values on face {f}")
    return np.einsum("q,qia,qa->i", wts, psi, vals)


def project_rigid_motion(mesh, cell, u, degree=4) -> RigidMotion:
    """L2 projection of a vector field onto the rigid motions of a cell.

    Independent of the face-dof machinery: uses cell quadrature only. The
    Gram matrix is block-diagonal because int_E (x - x_E) dV = 0.
    """
    geo = mesh.cell_geometry(cell)
    pts, wts = mesh.cell_quadrature(cell, degree=degree)
    rel = pts - geo.barycenter
    vals = np.asarray(u(pts))
    alpha = np.einsum("q,qa->a", wts, vals) / geo.volume
    rhs = np.einsum("q,qa->a", wts, np.cross(rel, vals))
    Q2 = np.einsum("q,qa,qb->ab", wts, rel, rel)
    inertia = np.trace(Q2) * np.eye(3) - Q2
    omega = np.linalg.solve(inertia, rhs)
    return RigidMotion(alpha, omega, geo.barycenter)
