"""Peak detection and the occlusal height band filter."""

import numpy as np

from archmark.mesh import index_mesh
from archmark.orientation import Frame
from archmark.peaks import Peak, filter_by_height, find_peaks

from shapes import grid_surface, soup_from_triangles

FLAT_FRAME = Frame(right=np.array([1.0, 0.0, 0.0]),
                   forwards=np.array([0.0, 1.0, 0.0]),
                   up=np.array([0.0, 0.0, 1.0]),
                   origin=np.zeros(3))


def fan_mesh(centre_z: float, rim_z: float = 0.0):
    """Hexagonal fan: one centre vertex ringed by six rim vertices."""
    angles = np.linspace(0, 2 * np.pi, 7)[:-1]
    rim = np.stack([3 * np.cos(angles), 3 * np.sin(angles),
                    np.full(6, rim_z)], axis=1)
    centre = np.array([0.0, 0.0, centre_z])
    tris = np.array([[centre, rim[i], rim[(i + 1) % 6]]
                     for i in range(6)])
    return index_mesh(soup_from_triangles(tris))


class TestFindPeaks:
    def test_single_summit(self):
        mesh = fan_mesh(centre_z=2.0)
        found = find_peaks(mesh, FLAT_FRAME)
        assert len(found) == 1
        assert np.allclose(found[0].position, [0, 0, 2])
        assert found[0].height == 2.0

    def test_ties_disqualify(self):
        # Centre level with the rim: nothing is strictly higher.
        assert find_peaks(fan_mesh(centre_z=0.0), FLAT_FRAME) == []

    def test_flat_grid_has_no_peaks(self):
        xs = np.linspace(0, 4, 5)
        mesh = index_mesh(grid_surface(xs, xs, lambda x, y: 0 * x))
        assert find_peaks(mesh, FLAT_FRAME) == []

    def test_sine_field_summits(self):
        # sin(pi x/10) sin(pi y/10) on [0, 20]^2 peaks at (5, 5) and
        # (15, 15) only; the zero-level rim ties away its own vertices.
        xs = np.linspace(0.0, 20.0, 81)
        mesh = index_mesh(grid_surface(
            xs, xs,
            lambda x, y: np.sin(np.pi * x / 10) * np.sin(np.pi * y / 10)))
        found = find_peaks(mesh, FLAT_FRAME)
        tops = [p for p in found if p.height > 0.5]
        assert len(tops) == 2
        spots = sorted((round(p.position[0]), round(p.position[1]))
                       for p in tops)
        assert spots == [(5, 5), (15, 15)]

    def test_heights_follow_the_frame(self):
        mesh = fan_mesh(centre_z=2.0)
        tilted = Frame(right=np.array([0.0, 0.0, -1.0]),
                       forwards=np.array([0.0, 1.0, 0.0]),
                       up=np.array([1.0, 0.0, 0.0]),
                       origin=np.zeros(3))
        # With "up" along +x the rim vertex at x=3 is the summit.
        found = find_peaks(mesh, tilted)
        assert len(found) == 1
        assert found[0].position[0] == 3.0

    def test_ordered_by_vertex_index(self):
        xs = np.linspace(0.0, 20.0, 81)
        mesh = index_mesh(grid_surface(
            xs, xs,
            lambda x, y: np.cos(np.pi * x / 5) * np.cos(np.pi * y / 5)))
        found = find_peaks(mesh, FLAT_FRAME)
        idx = [p.vertex for p in found]
        assert idx == sorted(idx)


class TestHeightFilter:
    def _peak(self, h):
        return Peak(vertex=0, position=np.array([0.0, 0.0, h]), height=h)

    def test_band_is_strict(self):
        peaks = [self._peak(h) for h in (10.0, 4.001, 4.0, 3.999)]
        kept = filter_by_height(peaks, threshold=6.0)
        # 6 mm or more below the top is out; the boundary case drops.
        assert [p.height for p in kept] == [10.0, 4.001]

    def test_empty_in_empty_out(self):
        assert filter_by_height([], threshold=6.0) == []

    def test_single_peak_survives(self):
        peaks = [self._peak(2.0)]
        assert filter_by_height(peaks, threshold=6.0) == peaks
