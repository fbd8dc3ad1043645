"""Indexed mesh construction: welding, adjacency, degeneracy handling."""

import numpy as np
import pytest

from archmark.mesh import index_mesh, surface_area, vertex_normals
from archmark.stl import TriangleSoup

from shapes import grid_surface, icosphere, soup_from_triangles


def two_triangle_square():
    tri = np.array([
        [[0, 0, 0], [1, 0, 0], [1, 1, 0]],
        [[0, 0, 0], [1, 1, 0], [0, 1, 0]],
    ], dtype=np.float64)
    return soup_from_triangles(tri)


class TestIndexing:
    def test_exact_weld(self):
        mesh = index_mesh(two_triangle_square())
        assert mesh.n_vertices == 4
        assert mesh.n_faces == 2
        assert mesh.n_merged_vertices == 2

    def test_adjacency_is_mutual(self):
        mesh = index_mesh(icosphere(radius=5.0, subdivisions=2))
        for f in range(mesh.n_faces):
            for k in range(3):
                g = mesh.adjacency[f, k]
                assert g >= 0                      # closed surface
                back = mesh.adjacency_slot[f, k]
                assert mesh.adjacency[g, back] == f

    def test_closed_surface_has_no_boundary(self):
        mesh = index_mesh(icosphere(radius=5.0, subdivisions=1))
        assert not mesh.boundary_edge.any()
        assert mesh.n_faces == 20 * 4

    def test_open_grid_boundary_edges(self):
        xs = np.linspace(0, 2, 3)
        mesh = index_mesh(grid_surface(xs, xs, lambda x, y: 0 * x))
        assert mesh.boundary_edge.any()
        # Each boundary slot has no neighbour and vice versa.
        assert np.array_equal(mesh.boundary_edge, mesh.adjacency < 0)

    def test_snap_welds_nearby_vertices(self):
        tri = two_triangle_square().triangles.copy()
        tri[1, 0] += 1e-4                        # break the exact weld
        soup = soup_from_triangles(tri)
        assert index_mesh(soup).n_vertices == 5
        assert index_mesh(soup, snap=1e-3).n_vertices == 4

    def test_face_centroids_and_areas(self):
        mesh = index_mesh(two_triangle_square())
        assert np.allclose(mesh.face_areas, [0.5, 0.5])
        assert np.allclose(mesh.face_centroids[0], [2 / 3, 1 / 3, 0])


class TestDegenerateInput:
    def test_degenerate_faces_dropped(self):
        good = two_triangle_square().triangles
        bad = np.array([
            [[0, 0, 0], [0, 0, 0], [1, 1, 0]],       # repeated corner
            [[0, 0, 0], [1, 0, 0], [2, 0, 0]],       # collinear
        ], dtype=np.float64)
        soup = soup_from_triangles(np.concatenate([good, bad]))
        mesh = index_mesh(soup)
        assert mesh.n_faces == 2
        assert mesh.n_degenerate_faces == 2

    def test_all_degenerate_rejected(self):
        tri = np.zeros((3, 3, 3))
        with pytest.raises(ValueError):
            index_mesh(soup_from_triangles(tri))

    def test_empty_soup_rejected(self):
        soup = TriangleSoup(triangles=np.zeros((0, 3, 3)),
                            stored_normals=np.zeros((0, 3)))
        with pytest.raises(ValueError):
            index_mesh(soup)

    def test_nonmanifold_edge_counted(self):
        # Three faces share the edge (0,0,0)-(1,0,0).
        tri = np.array([
            [[0, 0, 0], [1, 0, 0], [0.5, 1, 0]],
            [[0, 0, 0], [0.5, -1, 0], [1, 0, 0]],
            [[0, 0, 0], [1, 0, 0], [0.5, 0, 1]],
        ], dtype=np.float64)
        mesh = index_mesh(soup_from_triangles(tri))
        assert mesh.n_nonmanifold_edges >= 1
        assert mesh.n_faces == 3

    def test_flipped_stored_normals_counted(self):
        soup = two_triangle_square()
        flipped = TriangleSoup(triangles=soup.triangles,
                               stored_normals=-soup.stored_normals)
        assert index_mesh(flipped).n_normal_mismatches == 2
        assert index_mesh(soup).n_normal_mismatches == 0


class TestDerivedQuantities:
    def test_normals_recomputed_from_winding(self):
        soup = two_triangle_square()
        flipped = TriangleSoup(triangles=soup.triangles,
                               stored_normals=-soup.stored_normals)
        mesh = index_mesh(flipped)
        assert np.allclose(mesh.face_normals, [[0, 0, 1], [0, 0, 1]])

    def test_surface_area_whole_and_subset(self):
        mesh = index_mesh(two_triangle_square())
        assert surface_area(mesh) == pytest.approx(1.0)
        assert surface_area(mesh, np.array([0])) == pytest.approx(0.5)
        mask = np.array([False, True])
        assert surface_area(mesh, mask) == pytest.approx(0.5)

    def test_sphere_area_near_analytic(self):
        mesh = index_mesh(icosphere(radius=10.0, subdivisions=3))
        assert surface_area(mesh) == pytest.approx(4 * np.pi * 100,
                                                   rel=0.01)

    def test_vertex_normals_flat_grid(self):
        xs = np.linspace(0, 3, 4)
        mesh = index_mesh(grid_surface(xs, xs, lambda x, y: 0 * x))
        normals = vertex_normals(mesh)
        assert np.allclose(normals, [0, 0, 1])

    def test_vertex_normals_sphere_point_outward(self):
        mesh = index_mesh(icosphere(radius=10.0, subdivisions=2))
        normals = vertex_normals(mesh)
        radial = mesh.vertices / np.linalg.norm(mesh.vertices, axis=1,
                                                keepdims=True)
        assert (np.einsum("ij,ij->i", normals, radial) > 0.99).all()

    def test_vertex_neighbors_sorted_and_symmetric(self):
        mesh = index_mesh(icosphere(radius=5.0, subdivisions=1))
        for v in range(mesh.n_vertices):
            ring = mesh.vertex_neighbors(v)
            assert np.array_equal(ring, np.sort(ring))
            for u in ring:
                assert v in mesh.vertex_neighbors(int(u))
