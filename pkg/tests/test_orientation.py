"""Model orientation: PCA frame, sign disambiguation, vertical leveling."""

import numpy as np
import pytest

from archmark.errors import OrientationError
from archmark.mesh import index_mesh
from archmark.orientation import (Frame, orient, pca_axes, refine_vertical)
from archmark.synth import build_jaw_spec, generate_synthetic_jaw

from shapes import grid_surface, random_rotation, transform_soup


def angle_deg(u, v):
    c = float(np.clip(np.dot(u, v) / (np.linalg.norm(u)
                                      * np.linalg.norm(v)), -1, 1))
    return np.degrees(np.arccos(c))


def oriented_jaw(seed=11, jaw_kind="deciduous_lower"):
    soup, gt = generate_synthetic_jaw(build_jaw_spec(jaw_kind, seed=seed))
    return index_mesh(soup), gt


class TestPca:
    def test_axes_recover_anisotropy(self):
        rng = np.random.default_rng(0)
        cloud = rng.normal(size=(4000, 3)) * [9.0, 3.0, 1.0]
        res = pca_axes(cloud)
        assert res.eigenvalues[0] > res.eigenvalues[1] \
            > res.eigenvalues[2]
        assert min(angle_deg(res.axes[0], [1, 0, 0]),
                   angle_deg(res.axes[0], [-1, 0, 0])) < 3.0
        assert min(angle_deg(res.axes[2], [0, 0, 1]),
                   angle_deg(res.axes[2], [0, 0, -1])) < 3.0


class TestOrient:
    def test_canonical_jaw_recovers_axes(self):
        mesh, gt = oriented_jaw()
        frame = orient(mesh)
        assert angle_deg(frame.up, gt.frame.up) < 3.0
        assert angle_deg(frame.right, gt.frame.right) < 3.0
        assert angle_deg(frame.forwards, gt.frame.forwards) < 3.0

    def test_rotation_is_proper(self):
        mesh, _ = oriented_jaw()
        frame = orient(mesh)
        assert np.linalg.det(frame.rotation) == pytest.approx(1.0,
                                                              abs=1e-9)

    def test_flat_plane_is_rank_deficient(self):
        xs = np.linspace(0, 10, 8)
        mesh = index_mesh(grid_surface(xs, xs, lambda x, y: 0 * x))
        with pytest.raises(OrientationError):
            orient(mesh)

    def test_upside_down_input_flips_up(self):
        soup, gt = generate_synthetic_jaw(
            build_jaw_spec("deciduous_lower", seed=11))
        rot = np.diag([1.0, -1.0, -1.0])          # roll 180 degrees
        frame = orient(index_mesh(transform_soup(soup, rot, np.zeros(3))))
        # The occlusal surface now faces world -z; "up" must follow it.
        assert angle_deg(frame.up, [0, 0, -1]) < 3.0


class TestRefineVertical:
    def test_levels_pitched_scan(self):
        soup, gt = generate_synthetic_jaw(
            build_jaw_spec("adult_lower", seed=5))
        pitch = np.radians(2.5)
        rot = np.array([[1, 0, 0],
                        [0, np.cos(pitch), -np.sin(pitch)],
                        [0, np.sin(pitch), np.cos(pitch)]])
        mesh = index_mesh(transform_soup(soup, rot, np.zeros(3)))
        coarse = orient(mesh)
        refined = refine_vertical(mesh, coarse)
        true_up = rot @ gt.frame.up
        assert angle_deg(refined.up, true_up) \
            < angle_deg(coarse.up, true_up) + 0.2
        assert angle_deg(refined.up, true_up) < 0.5

    def test_narrow_mesh_skipped(self):
        xs = np.linspace(0, 10, 12)
        ys = np.array([0.0, 0.4])                # occupies too few bins
        soup = grid_surface(xs, ys, lambda x, y: 0.02 * x * y + 0.1 * x)
        mesh = index_mesh(soup)
        frame = Frame(right=np.array([1.0, 0.0, 0.0]),
                      forwards=np.array([0.0, 1.0, 0.0]),
                      up=np.array([0.0, 0.0, 1.0]),
                      origin=np.zeros(3))
        refined = refine_vertical(mesh, frame)
        assert np.array_equal(refined.up, frame.up)


class TestFrameHelpers:
    def test_local_heights_horizontal_lift(self):
        rng = np.random.default_rng(7)
        rot = random_rotation(rng)
        origin = rng.uniform(-5, 5, 3)
        frame = Frame(right=rot[:, 0], forwards=rot[:, 1], up=rot[:, 2],
                      origin=origin)
        pts = rng.uniform(-10, 10, (50, 3))
        local = frame.local(pts)
        assert np.allclose(local, (pts - origin) @ rot)
        assert np.allclose(frame.heights(pts), local[:, 2])
        assert np.allclose(frame.horizontal(pts), local[:, :2])
        for xy in rng.uniform(-4, 4, (6, 2)):
            lifted = frame.lift(xy)
            assert abs(lifted @ frame.up) < 1e-9
            assert np.allclose(frame.horizontal(lifted + origin), xy,
                               atol=1e-9)
