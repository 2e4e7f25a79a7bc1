"""Isotropic elasticity in Kelvin (orthonormal symmetric-tensor) notation.

Symmetric 3x3 tensors are stored as 6-vectors in slot order
(11, 22, 33, 23, 13, 12) with sqrt(2)-scaled off-diagonal entries, so the
Frobenius inner product of tensors equals the Euclidean dot product of
their Kelvin vectors. The stiffness map is C eps = 2 mu eps + lambda tr(eps) I
and the compliance D = C^-1.
"""

from dataclasses import dataclass

import numpy as np

SQ2 = np.sqrt(2.0)

# slot -> (i, j) of the upper triangle
_SLOTS = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)]


def kelvin(T):
    """Kelvin 6-vector of a symmetric 3x3 tensor (or batch (..., 3, 3))."""
    T = np.asarray(T)
    out = np.empty(T.shape[:-2] + (6,))
    for s, (i, j) in enumerate(_SLOTS):
        out[..., s] = T[..., i, j] * (1.0 if i == j else SQ2)
    return out


def unkelvin(v):
    """Symmetric 3x3 tensor (or batch) from a Kelvin 6-vector."""
    v = np.asarray(v)
    out = np.empty(v.shape[:-1] + (3, 3))
    for s, (i, j) in enumerate(_SLOTS):
        val = v[..., s] * (1.0 if i == j else 1.0 / SQ2)
        out[..., i, j] = val
        out[..., j, i] = val
    return out


class MaterialError(ValueError):
    """Material parameters violate positive-definiteness."""


@dataclass(frozen=True)
class IsotropicMaterial:
    """Lame pair (lam, mu); requires mu > 0 and 3 lam + 2 mu > 0."""

    lam: float
    mu: float

    def __post_init__(self):
        if not self.mu > 0 or not 3.0 * self.lam + 2.0 * self.mu > 0:
            raise MaterialError(
                f"need mu > 0 and 3*lam + 2*mu > 0, got lam={self.lam}, mu={self.mu}"
            )

    @property
    def stiffness_kelvin(self):
        """6x6 Kelvin matrix of C."""
        C = 2.0 * self.mu * np.eye(6)
        C[:3, :3] += self.lam
        return C

    @property
    def compliance_kelvin(self):
        """6x6 Kelvin matrix of D = C^-1 (closed form)."""
        D = np.eye(6) / (2.0 * self.mu)
        D[:3, :3] -= self.lam / (2.0 * self.mu * (3.0 * self.lam + 2.0 * self.mu))
        return D

    def apply_C(self, eps):
        """Stress of a strain tensor: 2 mu eps + lam tr(eps) I."""
        eps = np.asarray(eps)
        tr = np.trace(eps, axis1=-2, axis2=-1)
        return 2.0 * self.mu * eps + self.lam * tr[..., None, None] * np.eye(3)

    def apply_D(self, sig):
        """Strain of a stress tensor: (1/2mu)(sig - lam/(3lam+2mu) tr(sig) I)."""
        sig = np.asarray(sig)
        tr = np.trace(sig, axis1=-2, axis2=-1)
        coef = self.lam / (3.0 * self.lam + 2.0 * self.mu)
        return (sig - coef * tr[..., None, None] * np.eye(3)) / (2.0 * self.mu)

    def kappa(self, mode: str = "trace") -> float:
        """Stabilization constant from the compliance matrix.

        'trace' is half the trace of the Kelvin matrix of D; 'spectral' is
        its largest eigenvalue.
        """
        D = self.compliance_kelvin
        if mode == "trace":
            return 0.5 * float(np.trace(D))
        if mode == "spectral":
            return float(np.linalg.eigvalsh(D).max())
        raise ValueError(f"unknown kappa mode {mode!r}")


@dataclass(frozen=True)
class AnisotropicMaterial:
    """General symmetric positive-definite stiffness given as a Kelvin matrix.

    Accepted through run configuration for completeness; the bundled tests
    exercise only the isotropic law.
    """

    C: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        if C.shape != (6, 6) or not np.allclose(C, C.T, atol=1e-12):
            raise MaterialError("stiffness must be a symmetric 6x6 Kelvin matrix")
        if np.linalg.eigvalsh(C).min() <= 0:
            raise MaterialError("stiffness must be positive definite")
        object.__setattr__(self, "C", C)

    @classmethod
    def from_upper_triangle(cls, entries):
        """Build from the 21 upper-triangle entries, row-major."""
        entries = np.asarray(entries, dtype=float)
        if entries.shape != (21,):
            raise MaterialError("expected 21 upper-triangle entries")
        C = np.zeros((6, 6))
        C[np.triu_indices(6)] = entries
        C = C + np.triu(C, 1).T
        return cls(C)

    @property
    def stiffness_kelvin(self):
        return self.C

    @property
    def compliance_kelvin(self):
        return np.linalg.inv(self.C)

    def apply_C(self, eps):
        return unkelvin(kelvin(eps) @ self.C.T)

    def apply_D(self, sig):
        return unkelvin(kelvin(sig) @ self.compliance_kelvin.T)

    def kappa(self, mode: str = "trace") -> float:
        D = self.compliance_kelvin
        if mode == "trace":
            return 0.5 * float(np.trace(D))
        if mode == "spectral":
            return float(np.linalg.eigvalsh(D).max())
        raise ValueError(f"unknown kappa mode {mode!r}")


def material_table(material, n_cells):
    """Normalize a material spec to a per-cell lookup.

    ``material`` may be a single material (shared by every cell), a list of
    per-cell materials, or a dict {cell index: material}.
    """
    if isinstance(material, dict):
        table = [material[c] for c in range(n_cells)]
    elif isinstance(material, (list, tuple)):
        if len(material) != n_cells:
            raise MaterialError(f"expected {n_cells} materials, got {len(material)}")
        table = list(material)
    else:
        table = [material] * n_cells
    return table
