"""Pure-numpy implementation of the per-face integral kernels.

The six traction basis fields on a face with frame (t1, t2, n) and
barycenter x_f are

    psi1 = t1,  psi2 = t2,  psi3 = n x (x - x_f),
    psi4 = n,   psi5 = ((x - x_f).t1) n,  psi6 = ((x - x_f).t2) n.

``face_integrals`` accumulates, for a quadrature rule on the face, the
Gram matrix G[i,j] = int psi_i.psi_j, the first moments F[i] = int psi_i,
the angular moments Mom[i] = int (x - x_f) x psi_i, and the pairings
P[i,k] = int psi_i . (pi_k (x - x_f)) against the six orthonormal
symmetric-tensor basis elements pi_k (Kelvin ordering 11,22,33,23,13,12).
"""

import numpy as np

_SQ2 = np.sqrt(2.0)

# orthonormal basis of symmetric 3x3 tensors, Kelvin slot order
KELVIN_BASIS = np.zeros((6, 3, 3))
KELVIN_BASIS[0, 0, 0] = 1.0
KELVIN_BASIS[1, 1, 1] = 1.0
KELVIN_BASIS[2, 2, 2] = 1.0
KELVIN_BASIS[3, 1, 2] = KELVIN_BASIS[3, 2, 1] = 1.0 / _SQ2
KELVIN_BASIS[4, 0, 2] = KELVIN_BASIS[4, 2, 0] = 1.0 / _SQ2
KELVIN_BASIS[5, 0, 1] = KELVIN_BASIS[5, 1, 0] = 1.0 / _SQ2


def face_basis_values(pts, t1, t2, nrm, x_f):
    """Evaluate the six traction basis fields at ``pts`` -> (Q, 6, 3)."""
    rel = pts - x_f
    psi = np.empty((len(pts), 6, 3))
    psi[:, 0] = t1
    psi[:, 1] = t2
    psi[:, 2] = np.cross(nrm, rel)
    psi[:, 3] = nrm
    psi[:, 4] = (rel @ t1)[:, None] * nrm
    psi[:, 5] = (rel @ t2)[:, None] * nrm
    return psi


def face_integrals(pts, wts, t1, t2, nrm, x_f):
    """Quadrature sums (G, F, Mom, P) for one face; moments about x_f."""
    psi = face_basis_values(pts, t1, t2, nrm, x_f)
    rel = pts - x_f
    G = np.einsum("q,qia,qja->ij", wts, psi, psi)
    F = np.einsum("q,qia->ia", wts, psi)
    Mom = np.einsum("q,qia->ia", wts, np.cross(rel[:, None, :], psi))
    pir = np.einsum("kab,qb->qka", KELVIN_BASIS, rel)
    P = np.einsum("q,qia,qka->ik", wts, psi, pir)
    return G, F, Mom, P


def face_traction(pts, coeffs, t1, t2, nrm, x_f):
    """Traction field sum_i coeffs[i] psi_i evaluated at ``pts`` -> (Q, 3)."""
    psi = face_basis_values(pts, t1, t2, nrm, x_f)
    return np.einsum("i,qia->qa", coeffs, psi)
