"""Mesh file I/O: poly-text read/write and VTK legacy output.

poly-text layout (UTF-8, whitespace separated):

    vertices N
    x y z                 (N lines)
    faces M
    k v1 ... vk           (M lines, 0-based, CCW w.r.t. the canonical normal)
    cells P
    m e1 ... em           (P lines, entries +-(face index + 1); the sign
                           says whether the canonical normal leaves the cell)

VTK output uses legacy POLYHEDRON cells and is write-only.
"""

import numpy as np

from .mesh import MeshParseError, PolyhedralMesh


def _tokens(path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.split("#", 1)[0].strip()
            if stripped:
                yield lineno, stripped.split()


def load_poly(path) -> PolyhedralMesh:
    """Read a poly-text mesh file."""
    stream = _tokens(path)

    def next_line(expect=None):
        try:
            lineno, toks = next(stream)
        except StopIteration:
            raise MeshParseError(f"{path}: unexpected end of file") from None
        if expect is not None and toks[0].lower() != expect:
            raise MeshParseError(f"{path}:{lineno}: expected '{expect}', got '{toks[0]}'")
        return lineno, toks

    try:
        _, toks = next_line("vertices")
        n_verts = int(toks[1])
        vertices = []
        for _ in range(n_verts):
            lineno, toks = next_line()
            if len(toks) != 3:
                raise MeshParseError(f"{path}:{lineno}: vertex line needs 3 coordinates")
            vertices.append([float(t) for t in toks])

        _, toks = next_line("faces")
        n_faces = int(toks[1])
        faces = []
        for _ in range(n_faces):
            lineno, toks = next_line()
            k = int(toks[0])
            if len(toks) != k + 1:
                raise MeshParseError(f"{path}:{lineno}: face line count mismatch")
            faces.append([int(t) for t in toks[1:]])

        _, toks = next_line("cells")
        n_cells = int(toks[1])
        cells = []
        for _ in range(n_cells):
            lineno, toks = next_line()
            m = int(toks[0])
            if len(toks) != m + 1:
                raise MeshParseError(f"{path}:{lineno}: cell line count mismatch")
            entries = [int(t) for t in toks[1:]]
            if any(e == 0 for e in entries):
                raise MeshParseError(f"{path}:{lineno}: cell entries are 1-based, 0 is invalid")
            fids = [abs(e) - 1 for e in entries]
            sgns = [1 if e > 0 else -1 for e in entries]
            cells.append((fids, sgns))
    except (ValueError, IndexError) as exc:
        raise MeshParseError(f"{path}: {exc}") from exc

    return PolyhedralMesh(np.array(vertices, dtype=float), faces, cells)


def save_poly(mesh: PolyhedralMesh, path):
    """Write a mesh in poly-text format."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"vertices {mesh.n_vertices}\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        fh.write(f"faces {mesh.n_faces}\n")
        for f in mesh.faces:
            fh.write(f"{len(f)} " + " ".join(str(int(v)) for v in f) + "\n")
        fh.write(f"cells {mesh.n_cells}\n")
        for fids, sgns in zip(mesh.cell_faces, mesh.cell_signs):
            entries = " ".join(str(int(s) * (int(f) + 1)) for f, s in zip(fids, sgns))
            fh.write(f"{len(fids)} {entries}\n")


def load_mesh(path, fmt="poly-text") -> PolyhedralMesh:
    """Load a mesh; only the poly-text format is readable (VTK is write-only)."""
    if fmt == "poly-text":
        return load_poly(path)
    if fmt == "vtk-legacy":
        raise MeshParseError("vtk-legacy is a write-only format; use poly-text input")
    raise MeshParseError(f"unknown mesh format {fmt!r}")


def write_vtk(mesh: PolyhedralMesh, path, cell_vectors=None, cell_tensors=None):
    """Write the mesh as legacy VTK POLYHEDRON cells for visualization.

    ``cell_vectors`` / ``cell_tensors`` are optional {name: (N_E, 3) or
    (N_E, 3, 3) array} dicts attached as CELL_DATA.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write("hrvem polyhedral mesh\n")
        fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {mesh.n_vertices} double\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]:.16g} {v[1]:.16g} {v[2]:.16g}\n")

        streams = []
        for c in range(mesh.n_cells):
            fids, _ = mesh.cell(c)
            stream = [len(fids)]
            for f in fids:
                loop = mesh.faces[f]
                stream.append(len(loop))
                stream.extend(int(v) for v in loop)
            streams.append(stream)
        total = sum(len(s) + 1 for s in streams)
        fh.write(f"CELLS {mesh.n_cells} {total}\n")
        for s in streams:
            fh.write(f"{len(s)} " + " ".join(str(x) for x in s) + "\n")
        fh.write(f"CELL_TYPES {mesh.n_cells}\n")
        fh.write("\n".join(["42"] * mesh.n_cells) + "\n")

        if cell_vectors or cell_tensors:
            fh.write(f"CELL_DATA {mesh.n_cells}\n")
        if cell_vectors:
            for name, data in cell_vectors.items():
                fh.write(f"VECTORS {name} double\n")
                for row in np.asarray(data):
                    fh.write(f"{row[0]:.9g} {row[1]:.9g} {row[2]:.9g}\n")
        if cell_tensors:
            for name, data in cell_tensors.items():
                fh.write(f"TENSORS {name} double\n")
                for t in np.asarray(data):
                    for row in t:
                        fh.write(f"{row[0]:.9g} {row[1]:.9g} {row[2]:.9g}\n")
                    fh.write("\n")
