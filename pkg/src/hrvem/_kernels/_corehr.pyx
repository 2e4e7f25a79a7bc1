# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-face integral kernels; mirrors _pykern exactly.

Single pass over the quadrature points, no (Q, 6, 3) temporaries.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def face_integrals(double[:, ::1] pts, double[::1] wts,
                   double[::1] t1, double[::1] t2, double[::1] nrm,
                   double[::1] x_f):
    cdef Py_ssize_t Q = pts.shape[0]
    cdef cnp.ndarray[double, ndim=2] G_ = np.zeros((6, 6))
    cdef cnp.ndarray[double, ndim=2] F_ = np.zeros((6, 3))
    cdef cnp.ndarray[double, ndim=2] Mom_ = np.zeros((6, 3))
    cdef cnp.ndarray[double, ndim=2] P_ = np.zeros((6, 6))
    cdef double[:, ::1] G = G_, F = F_, Mom = Mom_, P = P_

    cdef double sq2 = sqrt(2.0)
    cdef double psi[6][3]
    cdef double pir[6][3]
    cdef double rx, ry, rz, xi, eta, w
    cdef Py_ssize_t q, i, j, k, a

    for q in range(Q):
        rx = pts[q, 0] - x_f[0]
        ry = pts[q, 1] - x_f[1]
        rz = pts[q, 2] - x_f[2]
        xi = rx * t1[0] + ry * t1[1] + rz * t1[2]
        eta = rx * t2[0] + ry * t2[1] + rz * t2[2]
        w = wts[q]

        for a in range(3):
            psi[0][a] = t1[a]
            psi[1][a] = t2[a]
            psi[3][a] = nrm[a]
            psi[4][a] = xi * nrm[a]
            psi[5][a] = eta * nrm[a]
        psi[2][0] = nrm[1] * rz - nrm[2] * ry
        psi[2][1] = nrm[2] * rx - nrm[0] * rz
        psi[2][2] = nrm[0] * ry - nrm[1] * rx

        # pi_k (x - x_f) for the Kelvin basis (11,22,33,23,13,12)
        pir[0][0] = rx; pir[0][1] = 0.0; pir[0][2] = 0.0
        pir[1][0] = 0.0; pir[1][1] = ry; pir[1][2] = 0.0
        pir[2][0] = 0.0; pir[2][1] = 0.0; pir[2][2] = rz
        pir[3][0] = 0.0; pir[3][1] = rz / sq2; pir[3][2] = ry / sq2
        pir[4][0] = rz / sq2; pir[4][1] = 0.0; pir[4][2] = rx / sq2
        pir[5][0] = ry / sq2; pir[5][1] = rx / sq2; pir[5][2] = 0.0

        for i in range(6):
            F[i, 0] += w * psi[i][0]
            F[i, 1] += w * psi[i][1]
            F[i, 2] += w * psi[i][2]
            Mom[i, 0] += w * (ry * psi[i][2] - rz * psi[i][1])
            Mom[i, 1] += w * (rz * psi[i][0] - rx * psi[i][2])
            Mom[i, 2] += w * (rx * psi[i][1] - ry * psi[i][0])
            for j in range(6):
                G[i, j] += w * (psi[i][0] * psi[j][0]
                                + psi[i][1] * psi[j][1]
                                + psi[i][2] * psi[j][2])
            for k in range(6):
                P[i, k] += w * (psi[i][0] * pir[k][0]
                                + psi[i][1] * pir[k][1]
                                + psi[i][2] * pir[k][2])
    return G_, F_, Mom_, P_


def face_traction(double[:, ::1] pts, double[::1] coeffs,
                  double[::1] t1, double[::1] t2, double[::1] nrm,
                  double[::1] x_f):
    cdef Py_ssize_t Q = pts.shape[0]
    cdef cnp.ndarray[double, ndim=2] out_ = np.zeros((Q, 3))
    cdef double[:, ::1] out = out_
    cdef double rx, ry, rz, xi, eta, cn
    cdef Py_ssize_t q, a

    for q in range(Q):
        rx = pts[q, 0] - x_f[0]
        ry = pts[q, 1] - x_f[1]
        rz = pts[q, 2] - x_f[2]
        xi = rx * t1[0] + ry * t1[1] + rz * t1[2]
        eta = rx * t2[0] + ry * t2[1] + rz * t2[2]
        cn = coeffs[3] + coeffs[4] * xi + coeffs[5] * eta
        for a in range(3):
            out[q, a] = coeffs[0] * t1[a] + coeffs[1] * t2[a] + cn * nrm[a]
        out[q, 0] += coeffs[2] * (nrm[1] * rz - nrm[2] * ry)
        out[q, 1] += coeffs[2] * (nrm[2] * rx - nrm[0] * rz)
        out[q, 2] += coeffs[2] * (nrm[0] * ry - nrm[1] * rx)
    return out_
