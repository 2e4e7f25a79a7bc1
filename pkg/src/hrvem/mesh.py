"""Polyhedral mesh data structures, generators, and geometric queries.

A mesh stores vertices, planar polygonal faces (one counterclockwise loop
per face, defining the canonical normal), and cells as signed face lists:
sign +1 means the canonical normal points out of the cell. Interior faces
are shared by exactly two cells with opposite signs, which is what makes a
single per-face traction globally single-valued.

All geometry is computed once at construction; the mesh is immutable
afterwards and safe to query concurrently.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .quadrature import map_to_tetrahedron, map_to_triangle, tetrahedron_rule, triangle_rule

PLANARITY_TOL = 1e-8


class MeshError(Exception):
    """Invalid mesh topology or geometry."""


class MeshParseError(MeshError):
    """Malformed mesh file."""


class MeshTopologyError(MeshError):
    """Face/cell incidence violates the mesh invariants."""


class MeshGeometryError(MeshError):
    """Degenerate or non-planar geometry."""


@dataclass(frozen=True)
class FaceFrame:
    """Orthonormal frame of a planar face: right-handed (t1, t2, normal)."""

    x_f: np.ndarray
    normal: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    area: float
    h_f: float

    def to_local(self, x):
        """Local in-plane coordinates ((x-x_f).t1, (x-x_f).t2)."""
        rel = np.asarray(x) - self.x_f
        return np.stack([rel @ self.t1, rel @ self.t2], axis=-1)


@dataclass(frozen=True)
class CellGeometry:
    volume: float
    barycenter: np.ndarray
    diameter: float
    n_faces: int


def compute_face_frame(verts, planarity_tol=PLANARITY_TOL):
    """Frame of the planar polygon ``verts`` (k, 3), loop order = CCW.

    The tangent t1 is n x a where a is the coordinate axis least aligned
    with the normal (ties broken in x, y, z order), so frames are
    deterministic and stable under small rotations.
    """
    verts = np.asarray(verts, dtype=float)
    if len(verts) < 3:
        raise MeshGeometryError(f"face needs >= 3 vertices, got {len(verts)}")
    c = verts.mean(axis=0)
    rel = verts - c
    nxt = np.roll(rel, -1, axis=0)
    nvec = 0.5 * np.cross(rel, nxt).sum(axis=0)
    area = np.linalg.norm(nvec)
    h_f = pdist(verts).max()
    if area <= 1e-14 * h_f**2:
        raise MeshGeometryError("degenerate face (zero area)")
    n = nvec / area

    # area barycenter via the signed fan about the vertex mean
    tri_a = 0.5 * np.cross(rel, nxt) @ n
    tri_c = c + (rel + nxt) / 3.0
    x_f = (tri_a[:, None] * tri_c).sum(axis=0) / tri_a.sum()

    defect = np.abs((verts - x_f) @ n).max()
    if defect > planarity_tol * h_f:
        raise MeshGeometryError(
            f"face planarity defect {defect:.3e} exceeds {planarity_tol:.1e} * h_f"
        )

    axis = np.argmin(np.abs(n))
    a = np.zeros(3)
    a[axis] = 1.0
    t1 = np.cross(n, a)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return FaceFrame(x_f=x_f, normal=n, t1=t1, t2=t2, area=float(area), h_f=float(h_f))


class PolyhedralMesh:
    """Immutable polyhedral decomposition with per-face orientation signs.

    Parameters
    ----------
    vertices : (Nv, 3) array
    faces : sequence of vertex-index loops (CCW w.r.t. the canonical normal)
    cells : sequence of (face_indices, signs) pairs, signs in {+1, -1}
    """

    def __init__(self, vertices, faces, cells, planarity_tol=PLANARITY_TOL):
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshTopologyError("vertices must be an (N, 3) array")
        self.faces = [np.asarray(f, dtype=np.intp) for f in faces]
        self.cell_faces = []
        self.cell_signs = []
        for fids, sgns in cells:
            self.cell_faces.append(np.asarray(fids, dtype=np.intp))
            self.cell_signs.append(np.asarray(sgns, dtype=np.intp))
        self._validate_topology()
        self.frames = [
            compute_face_frame(self.vertices[f], planarity_tol) for f in self.faces
        ]
        self._cell_geometry = [self._compute_cell_geometry(c) for c in range(self.n_cells)]
        self._check_closed_surfaces()
        self._face_quad_cache = {}

    # -- basic queries -------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def n_cells(self):
        return len(self.cell_faces)

    def face_vertices(self, f):
        return self.vertices[self.faces[f]]

    def frame(self, f) -> FaceFrame:
        return self.frames[f]

    def cell_geometry(self, c) -> CellGeometry:
        return self._cell_geometry[c]

    def cell(self, c):
        """(face_indices, signs) of cell ``c``."""
        return self.cell_faces[c], self.cell_signs[c]

    def face_cells(self, f):
        """List of (cell, sign) incident to face ``f``."""
        return self._face_cells[f]

    def cell_vertex_ids(self, c):
        return np.unique(np.concatenate([self.faces[f] for f in self.cell_faces[c]]))

    @property
    def boundary_faces(self):
        return self._boundary_faces

    def mean_diameter(self):
        """Mesh size: arithmetic mean of the cell diameters."""
        return float(np.mean([g.diameter for g in self._cell_geometry]))

    # -- construction helpers -------------------------------------------

    def _validate_topology(self):
        nf = self.n_faces
        for i, f in enumerate(self.faces):
            if len(f) < 3:
                raise MeshTopologyError(f"face {i} has fewer than 3 vertices")
            if len(np.unique(f)) != len(f):
                raise MeshTopologyError(f"face {i} repeats a vertex")
            if f.min() < 0 or f.max() >= self.n_vertices:
                raise MeshParseError(f"face {i} references a vertex out of range")
        face_cells = [[] for _ in range(nf)]
        for c, (fids, sgns) in enumerate(zip(self.cell_faces, self.cell_signs)):
            if len(fids) < 4:
                raise MeshTopologyError(f"cell {c} has fewer than 4 faces")
            if len(fids) != len(sgns) or not np.all(np.abs(sgns) == 1):
                raise MeshTopologyError(f"cell {c} has malformed face signs")
            if len(np.unique(fids)) != len(fids):
                raise MeshTopologyError(f"cell {c} repeats a face")
            if fids.min() < 0 or fids.max() >= nf:
                raise MeshParseError(f"cell {c} references a face out of range")
            for f, s in zip(fids, sgns):
                face_cells[f].append((c, int(s)))
        boundary = []
        for f, inc in enumerate(face_cells):
            if len(inc) == 1:
                boundary.append(f)
            elif len(inc) == 2:
                if inc[0][1] * inc[1][1] != -1:
                    raise MeshTopologyError(
                        f"interior face {f} must appear with opposite signs"
                    )
            else:
                raise MeshTopologyError(f"face {f} is shared by {len(inc)} cells")
        self._face_cells = face_cells
        self._boundary_faces = frozenset(boundary)

    def _cell_tets(self, c, apex):
        """Signed fan decomposition: tets (apex, x_f, v_i, v_{i+1})."""
        tets = []
        for f, s in zip(self.cell_faces[c], self.cell_signs[c]):
            verts = self.face_vertices(f)
            x_f = self.frames[f].x_f
            nxt = np.roll(verts, -1, axis=0)
            for v0, v1 in zip(verts, nxt):
                tets.append((np.array([apex, x_f, v0, v1]), int(s)))
        return tets

    def _compute_cell_geometry(self, c):
        vids = self.cell_vertex_ids(c)
        pts = self.vertices[vids]
        apex = pts.mean(axis=0)
        vol = 0.0
        moment = np.zeros(3)
        for tet, s in self._cell_tets(c, apex):
            v = s * np.linalg.det(tet[1:] - tet[0]) / 6.0
            vol += v
            moment += v * tet.mean(axis=0)
        if not vol > 0.0:
            raise MeshGeometryError(f"cell {c} has non-positive volume {vol:.3e}")
        diameter = pdist(pts).max()
        return CellGeometry(
            volume=float(vol),
            barycenter=moment / vol,
            diameter=float(diameter),
            n_faces=len(self.cell_faces[c]),
        )

    def _check_closed_surfaces(self):
        for c in range(self.n_cells):
            flux = np.zeros(3)
            total = 0.0
            for f, s in zip(self.cell_faces[c], self.cell_signs[c]):
                fr = self.frames[f]
                flux += s * fr.area * fr.normal
                total += fr.area
            if np.linalg.norm(flux) > 1e-10 * total:
                raise MeshTopologyError(
                    f"cell {c} surface is not closed (flux defect {np.linalg.norm(flux):.3e})"
                )

    # -- quadrature ------------------------------------------------------

    def face_quadrature(self, f, degree=4):
        """Points/weights on face ``f``; weights sum to the face area."""
        key = (f, degree)
        cached = self._face_quad_cache.get(key)
        if cached is not None:
            return cached
        rule = triangle_rule(degree)
        verts = self.face_vertices(f)
        frame = self.frames[f]
        if len(verts) == 3:
            tris = [verts]
        else:
            nxt = np.roll(verts, -1, axis=0)
            tris = [np.array([frame.x_f, v0, v1]) for v0, v1 in zip(verts, nxt)]
        pts = []
        wts = []
        for tri in tris:
            p, w = map_to_triangle(rule, tri, frame.normal)
            pts.append(p)
            wts.append(w)
        out = np.concatenate(pts), np.concatenate(wts)
        self._face_quad_cache[key] = out
        return out

    def cell_quadrature(self, c, degree=4):
        """Signed tet-decomposition rule on cell ``c``, apexed at x_E.

        Weights sum to the cell volume even for cells that are not
        star-shaped with respect to the barycenter.
        """
        rule = tetrahedron_rule(degree)
        apex = self._cell_geometry[c].barycenter
        pts = []
        wts = []
        for tet, s in self._cell_tets(c, apex):
            p, w = map_to_tetrahedron(rule, tet)
            pts.append(p)
            wts.append(s * w)
        return np.concatenate(pts), np.concatenate(wts)


def integrate_polygon(verts, g, degree=4):
    """Integrate ``g`` (vectorized (Q, 3) -> values) over a planar polygon."""
    frame = compute_face_frame(verts)
    rule = triangle_rule(degree)
    verts = np.asarray(verts, dtype=float)
    nxt = np.roll(verts, -1, axis=0)
    total = 0.0
    for v0, v1 in zip(verts, nxt):
        p, w = map_to_triangle(rule, np.array([frame.x_f, v0, v1]), frame.normal)
        total += np.tensordot(w, np.asarray(g(p)), axes=(0, 0))
    return total


def integrate_face(mesh, f, g, degree=4):
    """Integrate ``g`` (vectorized (Q, 3) -> values) over face ``f``."""
    pts, wts = mesh.face_quadrature(f, degree)
    return np.tensordot(wts, np.asarray(g(pts)), axes=(0, 0))


def integrate_cell(mesh, c, g, degree=4):
    """Integrate ``g`` (vectorized (Q, 3) -> values) over cell ``c``."""
    pts, wts = mesh.cell_quadrature(c, degree)
    return np.tensordot(wts, np.asarray(g(pts)), axes=(0, 0))


# -- generators ----------------------------------------------------------


def generate_cube_mesh(n: int) -> PolyhedralMesh:
    """Structured n x n x n cube mesh of the unit cube."""
    if n < 1:
        raise ValueError("n must be >= 1")
    coords = np.linspace(0.0, 1.0, n + 1)
    vid = lambda i, j, k: (i * (n + 1) + j) * (n + 1) + k
    vertices = np.array(
        [[coords[i], coords[j], coords[k]]
         for i in range(n + 1) for j in range(n + 1) for k in range(n + 1)]
    )

    faces = []
    fx = {}  # canonical normal +x, loop CCW seen from +x
    for i in range(n + 1):
        for j in range(n):
            for k in range(n):
                fx[(i, j, k)] = len(faces)
                faces.append([vid(i, j, k), vid(i, j + 1, k), vid(i, j + 1, k + 1), vid(i, j, k + 1)])
    fy = {}
    for j in range(n + 1):
        for i in range(n):
            for k in range(n):
                fy[(i, j, k)] = len(faces)
                faces.append([vid(i, j, k), vid(i, j, k + 1), vid(i + 1, j, k + 1), vid(i + 1, j, k)])
    fz = {}
    for k in range(n + 1):
        for i in range(n):
            for j in range(n):
                fz[(i, j, k)] = len(faces)
                faces.append([vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k), vid(i, j + 1, k)])

    cells = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                fids = [fx[(i, j, k)], fx[(i + 1, j, k)],
                        fy[(i, j, k)], fy[(i, j + 1, k)],
                        fz[(i, j, k)], fz[(i, j, k + 1)]]
                sgns = [-1, 1, -1, 1, -1, 1]
                cells.append((fids, sgns))
    return PolyhedralMesh(vertices, faces, cells)


_KUHN_PERMS = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]


def generate_tet_mesh(n: int) -> PolyhedralMesh:
    """Conforming tetrahedral mesh: 6-tet Kuhn split of each grid cube."""
    if n < 1:
        raise ValueError("n must be >= 1")
    coords = np.linspace(0.0, 1.0, n + 1)
    vid = lambda i, j, k: (i * (n + 1) + j) * (n + 1) + k
    vertices = np.array(
        [[coords[i], coords[j], coords[k]]
         for i in range(n + 1) for j in range(n + 1) for k in range(n + 1)]
    )

    tets = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for perm in _KUHN_PERMS:
                    idx = np.array([i, j, k])
                    vids = [vid(*idx)]
                    for axis in perm:
                        idx = idx + np.eye(3, dtype=int)[axis]
                        vids.append(vid(*idx))
                    tets.append(vids)

    faces = []
    face_of = {}
    cells = []
    for tet in tets:
        tet_pts = vertices[tet]
        centroid = tet_pts.mean(axis=0)
        fids = []
        sgns = []
        for omit in range(4):
            tri = [tet[m] for m in range(4) if m != omit]
            key = tuple(sorted(tri))
            f = face_of.get(key)
            if f is None:
                f = len(faces)
                face_of[key] = f
                faces.append(tri)
            fids.append(f)
            # orient by the stored loop: sign +1 iff canonical normal leaves the cell
            a, b, c = vertices[faces[f][0]], vertices[faces[f][1]], vertices[faces[f][2]]
            nrm = np.cross(b - a, c - a)
            sgns.append(1 if nrm @ ((a + b + c) / 3.0 - centroid) > 0 else -1)
        cells.append((fids, sgns))
    return PolyhedralMesh(vertices, faces, cells)


# -- quality report -------------------------------------------------------


@dataclass
class QualityReport:
    gamma: float
    min_face_to_cell: float  # min over cells of min_f h_f / h_E
    min_edge_to_face: float  # min over faces of min_e |e| / h_f
    max_planarity_defect: float  # relative to h_f
    non_star_cells: list
    warnings: list

    def __str__(self):
        lines = [
            f"mesh quality (gamma = {self.gamma}):",
            f"  min h_f/h_E               = {self.min_face_to_cell:.4f}",
            f"  min |e|/h_f               = {self.min_edge_to_face:.4f}",
            f"  max planarity defect/h_f  = {self.max_planarity_defect:.2e}",
            f"  cells failing star test   = {len(self.non_star_cells)}",
        ]
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        if not self.warnings:
            lines.append("  no warnings")
        return "\n".join(lines)


def mesh_quality_report(mesh: PolyhedralMesh, gamma: float = 0.1) -> QualityReport:
    """Shape-regularity metrics; violations warn, they never block a solve."""
    min_ftc = np.inf
    min_etf = np.inf
    max_def = 0.0
    warnings = []
    for f in range(mesh.n_faces):
        fr = mesh.frames[f]
        verts = mesh.face_vertices(f)
        edges = np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)
        ratio = edges.min() / fr.h_f
        min_etf = min(min_etf, ratio)
        max_def = max(max_def, np.abs((verts - fr.x_f) @ fr.normal).max() / fr.h_f)
    non_star = []
    for c in range(mesh.n_cells):
        geo = mesh.cell_geometry(c)
        h_fs = np.array([mesh.frames[f].h_f for f in mesh.cell_faces[c]])
        min_ftc = min(min_ftc, h_fs.min() / geo.diameter)
        # star-shapedness heuristic: x_E must see every face fan triangle
        # from the inside (positive signed tet volume)
        seen = True
        for tet, s in mesh._cell_tets(c, geo.barycenter):
            if s * np.linalg.det(tet[1:] - tet[0]) < -1e-12 * geo.diameter**3:
                seen = False
                break
        if not seen:
            non_star.append(c)
    if min_ftc < gamma:
        warnings.append(f"face/cell size ratio {min_ftc:.3f} below gamma = {gamma}")
    if min_etf < gamma:
        warnings.append(f"edge/face size ratio {min_etf:.3f} below gamma = {gamma}")
    if non_star:
        warnings.append(
            f"{len(non_star)} cells not star-shaped w.r.t. barycenter (heuristic)"
        )
    return QualityReport(
        gamma=gamma,
        min_face_to_cell=float(min_ftc),
        min_edge_to_face=float(min_etf),
        max_planarity_defect=float(max_def),
        non_star_cells=non_star,
        warnings=warnings,
    )
