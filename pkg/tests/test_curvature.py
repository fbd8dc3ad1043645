"""Discrete per-edge curvature: signs, magnitudes, symmetry."""

import numpy as np

from archmark.curvature import cost_map, edge_curvatures
from archmark.mesh import index_mesh

from shapes import crease_edges, icosphere, vee_surface


class TestAnalyticShapes:
    def test_valley_matches_inverse_distance(self):
        soup, d = vee_surface(concave=True)
        mesh = index_mesh(soup)
        curv = edge_curvatures(mesh)
        hits = crease_edges(mesh)
        assert hits
        for f, k in hits:
            assert curv.signed[f, k] < 0
            assert abs(curv.signed[f, k] - (-1.0 / d)) < 0.01 / d

    def test_roof_is_convex_positive(self):
        soup, d = vee_surface(concave=False)
        mesh = index_mesh(soup)
        curv = edge_curvatures(mesh)
        for f, k in crease_edges(mesh):
            assert curv.signed[f, k] > 0
            assert abs(curv.signed[f, k] - 1.0 / d) < 0.01 / d

    def test_coplanar_edges_are_flat(self):
        soup, _ = vee_surface(concave=True)
        mesh = index_mesh(soup)
        curv = edge_curvatures(mesh)
        crease = set(crease_edges(mesh))
        for f in range(mesh.n_faces):
            for k in range(3):
                if mesh.adjacency[f, k] < 0 or (f, k) in crease:
                    continue
                assert abs(curv.signed[f, k]) < 1e-9


class TestStructure:
    def test_symmetric_across_the_edge(self):
        mesh = index_mesh(icosphere(radius=7.0, subdivisions=2))
        curv = edge_curvatures(mesh)
        for f in range(mesh.n_faces):
            for k in range(3):
                g = mesh.adjacency[f, k]
                if g < 0:
                    continue
                back = mesh.adjacency_slot[f, k]
                # Bitwise: the edge is evaluated once and written twice.
                assert curv.signed[f, k] == curv.signed[g, back]

    def test_boundary_slots_are_nan(self):
        soup, _ = vee_surface(concave=True)
        mesh = index_mesh(soup)
        curv = edge_curvatures(mesh)
        assert np.isnan(curv.signed[mesh.boundary_edge]).all()
        assert not np.isnan(curv.signed[~mesh.boundary_edge]).any()


class TestCostMap:
    def test_convex_crossings_are_free(self):
        mesh = index_mesh(icosphere(radius=7.0, subdivisions=2))
        costs = cost_map(edge_curvatures(mesh))
        assert costs.shape == (mesh.n_faces, 3)
        assert (costs == 0.0).all()

    def test_concave_crossings_pay(self):
        soup, d = vee_surface(concave=True)
        mesh = index_mesh(soup)
        curv = edge_curvatures(mesh)
        costs = cost_map(curv)
        for f, k in crease_edges(mesh):
            assert costs[f, k] == -curv.signed[f, k]

    def test_boundary_slots_cost_nothing(self):
        soup, _ = vee_surface(concave=True)
        mesh = index_mesh(soup)
        costs = cost_map(edge_curvatures(mesh))
        assert (costs[mesh.boundary_edge] == 0.0).all()
