import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hrvem.mesh import (
    MeshGeometryError,
    MeshTopologyError,
    PolyhedralMesh,
    compute_face_frame,
    generate_cube_mesh,
    generate_tet_mesh,
    integrate_cell,
    integrate_face,
    integrate_polygon,
    mesh_quality_report,
)
from hrvem.mesh_io import MeshParseError, load_mesh, load_poly, save_poly, write_vtk

SQ3 = math.sqrt(3.0)


def unit_cube_mesh():
    return generate_cube_mesh(1)


def single_tet_mesh():
    verts = np.array(
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    )
    faces = [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]
    cells = [([0, 1, 2, 3], [1, 1, 1, 1])]
    return PolyhedralMesh(verts, faces, cells)


# -- frames ---------------------------------------------------------------


def test_face_frame_unit_square():
    verts = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    fr = compute_face_frame(verts)
    assert_allclose(fr.normal, [0, 0, 1], atol=1e-15)
    assert_allclose(fr.area, 1.0, rtol=1e-15)
    assert_allclose(fr.x_f, [0.5, 0.5, 0.0], atol=1e-15)
    assert_allclose(fr.h_f, math.sqrt(2.0), rtol=1e-15)
    # right-handed orthonormal frame
    assert_allclose(np.cross(fr.t1, fr.t2), fr.normal, atol=1e-14)
    assert_allclose(fr.to_local(fr.x_f), [0.0, 0.0], atol=1e-15)


def test_face_frame_reversed_loop_flips_normal():
    verts = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    fr = compute_face_frame(verts[::-1])
    assert_allclose(fr.normal, [0, 0, -1], atol=1e-15)


def test_face_frame_hexagon_area_matches_shoelace():
    # regular hexagon, circumradius 1; oracle: shoelace on the fan triangulation
    ang = np.linspace(0, 2 * np.pi, 7)[:-1]
    verts = np.column_stack([np.cos(ang), np.sin(ang), np.zeros(6)])
    shoelace = 0.0
    for i in range(6):
        a, b = verts[i], verts[(i + 1) % 6]
        shoelace += 0.5 * (a[0] * b[1] - b[0] * a[1])
    fr = compute_face_frame(verts)
    assert_allclose(fr.area, shoelace, rtol=1e-12)
    assert_allclose(fr.area, 3.0 * SQ3 / 2.0, rtol=1e-12)


def test_face_frame_nonconvex_polygon():
    verts = np.array(
        [[0, 0, 0], [2, 0, 0], [2, 1, 0], [1, 0.2, 0], [0, 1, 0]], dtype=float
    )
    fr = compute_face_frame(verts)
    assert fr.area > 0
    assert_allclose(fr.normal, [0, 0, 1], atol=1e-14)
    # barycenter of the non-convex polygon against a dense triangulation oracle
    area = integrate_polygon(verts, lambda X: np.ones(len(X)), degree=1)
    cx = integrate_polygon(verts, lambda X: X[:, 0], degree=1) / area
    cy = integrate_polygon(verts, lambda X: X[:, 1], degree=1) / area
    assert_allclose(fr.x_f[:2], [cx, cy], rtol=1e-12)


def test_degenerate_face_raises():
    verts = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], dtype=float)
    with pytest.raises(MeshGeometryError):
        compute_face_frame(verts)


def test_t1_rule_deterministic():
    rng = np.random.default_rng(7)
    for _ in range(50):
        # random planar triangle
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        verts2d = rng.normal(size=(3, 2))
        verts = verts2d @ q[:, :2].T
        try:
            fr1 = compute_face_frame(verts)
        except MeshGeometryError:
            continue
        fr2 = compute_face_frame(verts)
        assert_allclose(fr1.t1, fr2.t1, atol=0)
        axis = np.argmin(np.abs(fr1.normal))
        a = np.zeros(3)
        a[axis] = 1.0
        expect = np.cross(fr1.normal, a)
        assert_allclose(fr1.t1, expect / np.linalg.norm(expect), atol=1e-14)


# -- generators and cell geometry ----------------------------------------


def test_cube_mesh_counts_and_geometry():
    mesh = generate_cube_mesh(1)
    assert mesh.n_cells == 1 and mesh.n_faces == 6 and mesh.n_vertices == 8
    geo = mesh.cell_geometry(0)
    assert_allclose(geo.volume, 1.0, rtol=1e-14)
    assert_allclose(geo.barycenter, [0.5, 0.5, 0.5], atol=1e-14)
    assert_allclose(geo.diameter, SQ3, rtol=1e-14)
    assert geo.n_faces == 6

    mesh2 = generate_cube_mesh(2)
    assert mesh2.n_cells == 8 and mesh2.n_faces == 36
    assert len(mesh2.boundary_faces) == 24

    mesh4 = generate_cube_mesh(4)
    total = sum(mesh4.cell_geometry(c).volume for c in range(mesh4.n_cells))
    assert_allclose(total, 1.0, atol=1e-13)


def test_tet_mesh_counts_and_volume():
    mesh = generate_tet_mesh(1)
    assert mesh.n_cells == 6
    assert_allclose(
        sum(mesh.cell_geometry(c).volume for c in range(mesh.n_cells)), 1.0, atol=1e-13
    )
    mesh2 = generate_tet_mesh(2)
    assert mesh2.n_cells == 48  # 6 n^3
    for c in range(mesh2.n_cells):
        assert mesh2.cell_geometry(c).n_faces == 4
    assert_allclose(
        sum(mesh2.cell_geometry(c).volume for c in range(mesh2.n_cells)), 1.0, atol=1e-13
    )


def test_reference_tet_geometry():
    mesh = single_tet_mesh()
    geo = mesh.cell_geometry(0)
    assert_allclose(geo.volume, 1.0 / 6.0, rtol=1e-14)
    assert_allclose(geo.barycenter, [0.25, 0.25, 0.25], atol=1e-14)


def test_voronoi_style_cell_volume_against_monte_carlo():
    # clipped-cell volume against a brute-force Monte-Carlo oracle
    mesh = generate_cube_mesh(2)
    rng = np.random.default_rng(42)
    samples = rng.uniform(0, 1, size=(1_000_000, 3))
    inside = np.all((samples >= 0) & (samples <= 0.5), axis=1).mean()
    # cell 0 is [0, .5]^3
    geo = mesh.cell_geometry(0)
    assert abs(geo.volume - inside) < 0.01 * max(geo.volume, inside) + 1e-3


def test_closed_surface_invariant_all_generators():
    for mesh in (generate_cube_mesh(2), generate_tet_mesh(2)):
        for c in range(mesh.n_cells):
            flux = np.zeros(3)
            fids, sgns = mesh.cell(c)
            for f, s in zip(fids, sgns):
                fr = mesh.frame(f)
                flux += s * fr.area * fr.normal
            assert np.linalg.norm(flux) < 1e-13


# -- quadrature over faces and cells --------------------------------------


def test_integrate_face_constants_and_monomials():
    mesh = unit_cube_mesh()
    # face z=0 is a unit square
    f = next(f for f in range(6) if abs(mesh.frame(f).normal[2]) > 0.9)
    val = integrate_face(mesh, f, lambda X: np.ones(len(X)), degree=1)
    assert_allclose(val, 1.0, rtol=1e-14)

    # local-coordinate monomials on a centered unit square
    verts = np.array([[-0.5, -0.5, 0], [0.5, -0.5, 0], [0.5, 0.5, 0], [-0.5, 0.5, 0]])
    fr = compute_face_frame(verts)
    x2 = integrate_polygon(verts, lambda X: fr.to_local(X)[:, 0] ** 2, degree=4)
    assert abs(x2 - 1.0 / 12.0) < 1e-14
    xy = integrate_polygon(
        verts, lambda X: fr.to_local(X)[:, 0] * fr.to_local(X)[:, 1], degree=4
    )
    assert abs(xy) < 1e-14


def test_integrate_cell_moments():
    mesh = unit_cube_mesh()
    one = integrate_cell(mesh, 0, lambda X: np.ones(len(X)), degree=1)
    assert_allclose(one, 1.0, rtol=1e-14)
    # second moment about the barycenter: (1/12) I
    xE = mesh.cell_geometry(0).barycenter

    def outer(X):
        rel = X - xE
        return rel[:, :, None] * rel[:, None, :]

    M = integrate_cell(mesh, 0, outer, degree=2)
    assert_allclose(M, np.eye(3) / 12.0, atol=1e-14)
    # quartic monomial
    x4 = integrate_cell(mesh, 0, lambda X: X[:, 0] ** 4, degree=4)
    assert abs(x4 - 0.2) < 1e-13


def test_divergence_theorem_on_random_polynomial():
    # volume integral of div(p) vs. signed surface flux, p polynomial deg <= 4
    rng = np.random.default_rng(5)
    coeff = rng.normal(size=(3, 3))

    def p(X):
        out = np.zeros_like(X)
        for i in range(3):
            out[:, i] = (
                coeff[i, 0] * X[:, 0] ** 3
                + coeff[i, 1] * X[:, 1] ** 2 * X[:, 0]
                + coeff[i, 2] * X[:, 2]
            )
        return out

    def divp(X):
        return (
            3 * coeff[0, 0] * X[:, 0] ** 2
            + coeff[0, 1] * X[:, 1] ** 2
            + 2 * coeff[1, 1] * X[:, 1] * X[:, 0]
            + coeff[2, 2] * np.ones(len(X))
        )

    for mesh in (generate_cube_mesh(2), generate_tet_mesh(1)):
        for c in range(mesh.n_cells):
            vol = integrate_cell(mesh, c, divp, degree=4)
            flux = 0.0
            fids, sgns = mesh.cell(c)
            for f, s in zip(fids, sgns):
                nrm = mesh.frame(f).normal
                flux += s * integrate_face(mesh, f, lambda X: p(X) @ nrm, degree=4)
            assert abs(vol - flux) < 1e-12 * max(1.0, abs(vol))


def test_geometry_rotation_invariance():
    rng = np.random.default_rng(11)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    base = generate_tet_mesh(1)
    rot = PolyhedralMesh(
        base.vertices @ q.T,
        [list(f) for f in base.faces],
        list(zip(base.cell_faces, base.cell_signs)),
    )
    for c in range(base.n_cells):
        g0, g1 = base.cell_geometry(c), rot.cell_geometry(c)
        assert_allclose(g1.volume, g0.volume, rtol=1e-12)
        assert_allclose(g1.diameter, g0.diameter, rtol=1e-12)
        assert_allclose(g1.barycenter, q @ g0.barycenter, atol=1e-12)
    for f in range(base.n_faces):
        assert_allclose(rot.frame(f).area, base.frame(f).area, rtol=1e-12)


# -- topology validation ---------------------------------------------------


def test_face_shared_by_three_cells_raises():
    verts = np.array(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, -1]], dtype=float
    )
    faces = [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3], [0, 1, 4], [0, 4, 2], [1, 4, 2]]
    cells = [
        ([0, 1, 2, 3], [1, 1, 1, 1]),
        ([0, 4, 5, 6], [-1, 1, 1, -1]),
        ([0, 1, 2, 3], [-1, -1, -1, -1]),
    ]
    with pytest.raises(MeshTopologyError, match="shared by 3"):
        PolyhedralMesh(verts, faces, cells)


def test_interior_face_same_sign_raises():
    base = generate_cube_mesh(2)
    cells = list(zip([list(f) for f in base.cell_faces], [list(s) for s in base.cell_signs]))
    # flip one interior face sign in one cell only
    interior = next(f for f in range(base.n_faces) if f not in base.boundary_faces)
    for fids, sgns in cells:
        if interior in fids:
            sgns[fids.index(interior)] *= -1
            break
    with pytest.raises(MeshTopologyError):
        PolyhedralMesh(base.vertices, [list(f) for f in base.faces], cells)


# -- io --------------------------------------------------------------------


def test_poly_roundtrip(tmp_path):
    mesh = generate_cube_mesh(2)
    path = tmp_path / "mesh.poly"
    save_poly(mesh, path)
    back = load_poly(path)
    assert back.n_cells == mesh.n_cells and back.n_faces == mesh.n_faces
    assert_allclose(back.vertices, mesh.vertices, atol=1e-15)
    total = sum(back.cell_geometry(c).volume for c in range(back.n_cells))
    assert_allclose(total, 1.0, atol=1e-13)


def test_load_single_cube_from_text(tmp_path):
    text = """vertices 8
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
faces 6
4 0 3 2 1
4 4 5 6 7
4 0 1 5 4
4 1 2 6 5
4 2 3 7 6
4 3 0 4 7
cells 1
6 1 2 3 4 5 6
"""
    path = tmp_path / "cube.poly"
    path.write_text(text)
    mesh = load_mesh(path)
    assert mesh.n_cells == 1
    assert mesh.cell_geometry(0).n_faces == 6
    assert_allclose(mesh.cell_geometry(0).volume, 1.0, rtol=1e-14)
    assert len(mesh.boundary_faces) == 6


def test_load_malformed_file_raises(tmp_path):
    path = tmp_path / "bad.poly"
    path.write_text("vertices 2\n0 0 0\n")
    with pytest.raises(MeshParseError):
        load_mesh(path)
    path.write_text("nonsense 3\n")
    with pytest.raises(MeshParseError):
        load_mesh(path)


def test_vtk_output_format(tmp_path):
    mesh = generate_cube_mesh(1)
    path = tmp_path / "mesh.vtk"
    write_vtk(
        mesh,
        path,
        cell_vectors={"displacement": np.ones((1, 3))},
        cell_tensors={"stress": np.eye(3)[None]},
    )
    text = path.read_text()
    assert "DATASET UNSTRUCTURED_GRID" in text
    assert "CELL_TYPES 1" in text
    assert text.split("CELL_TYPES 1\n")[1].startswith("42")
    assert "VECTORS displacement double" in text
    assert "TENSORS stress double" in text


def test_vtk_is_write_only():
    with pytest.raises(MeshParseError):
        load_mesh("whatever.vtk", fmt="vtk-legacy")


# -- quality ----------------------------------------------------------------


def test_quality_report_structured_cube():
    mesh = generate_cube_mesh(2)
    report = mesh_quality_report(mesh, gamma=0.1)
    assert report.min_face_to_cell >= 1.0 / SQ3 - 1e-12
    assert not report.warnings
    assert not report.non_star_cells


def test_quality_report_sliver_face_warns():
    # one flat box: its large faces have a 100:1 edge aspect
    verts = np.array(
        [
            [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
            [0, 0, 0.01], [1, 0, 0.01], [1, 1, 0.01], [0, 1, 0.01],
        ],
        dtype=float,
    )
    faces = [
        [0, 3, 2, 1], [4, 5, 6, 7], [0, 1, 5, 4],
        [1, 2, 6, 5], [2, 3, 7, 6], [3, 0, 4, 7],
    ]
    cells = [([0, 1, 2, 3, 4, 5], [1] * 6)]
    mesh = PolyhedralMesh(verts, faces, cells)
    report = mesh_quality_report(mesh, gamma=0.1)
    assert report.warnings  # A2/A3 violated, but only a warning
