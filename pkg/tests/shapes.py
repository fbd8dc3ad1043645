"""Geometry builders shared by the tests.

Everything here returns a :class:`TriangleSoup` so fixtures flow through
``index_mesh`` exactly like parsed STL data.  Shared vertices are produced
by bitwise-identical arithmetic (commutative sums), so exact deduplication
reconstructs the intended connectivity.
"""

from __future__ import annotations

import numpy as np

from archmark.stl import TriangleSoup


def soup_from_triangles(triangles: np.ndarray, name: str = "fixture"
                        ) -> TriangleSoup:
    """Wrap an (n, 3, 3) corner array, deriving normals from winding."""
    triangles = np.asarray(triangles, dtype=np.float64)
    e1 = triangles[:, 1] - triangles[:, 0]
    e2 = triangles[:, 2] - triangles[:, 0]
    normals = np.cross(e1, e2)
    norm = np.linalg.norm(normals, axis=1, keepdims=True)
    normals = normals / np.where(norm > 0, norm, 1.0)
    return TriangleSoup(triangles=triangles, stored_normals=normals,
                        name=name)


def grid_surface(xs: np.ndarray, ys: np.ndarray, z_fn,
                 name: str = "grid") -> TriangleSoup:
    """Triangulated height field with upward-facing winding.

    Each grid cell splits into (v00, v10, v11) and (v00, v11, v01); with
    ascending axes the winding keeps normals pointing up.
    """
    X, Y = np.meshgrid(np.asarray(xs, dtype=np.float64),
                       np.asarray(ys, dtype=np.float64), indexing="ij")
    Z = np.asarray(z_fn(X, Y), dtype=np.float64)
    verts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    nx, ny = X.shape
    vid = np.arange(nx * ny).reshape(nx, ny)
    v00 = vid[:-1, :-1].ravel()
    v10 = vid[1:, :-1].ravel()
    v11 = vid[1:, 1:].ravel()
    v01 = vid[:-1, 1:].ravel()
    tri_idx = np.concatenate([
        np.stack([v00, v10, v11], axis=1),
        np.stack([v00, v11, v01], axis=1)])
    return soup_from_triangles(verts[tri_idx], name=name)


def gaussian_bump(cx: float, cy: float, height: float, radius: float):
    """Height-field term: a radially symmetric bump."""
    def term(x, y):
        r2 = (x - cx) ** 2 + (y - cy) ** 2
        return height * np.exp(-r2 / (2.0 * radius * radius))
    return term


def summed_field(*terms):
    def z_fn(x, y):
        total = np.zeros(np.broadcast(x, y).shape)
        for term in terms:
            total = total + term(x, y)
        return total
    return z_fn


def icosphere(radius: float = 10.0, subdivisions: int = 4) -> TriangleSoup:
    """Geodesic sphere from an icosahedron, ``4**subdivisions * 20`` faces.

    Midpoints are computed per face but bitwise agree across shared edges
    ((a + b) / 2 commutes), so exact vertex merging closes the surface.
    """
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    base = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=np.float64)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])

    def project(p):
        return p / np.linalg.norm(p, axis=-1, keepdims=True) * radius

    tris = project(base)[faces]
    for _ in range(subdivisions):
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        ab = project((a + b) / 2.0)
        bc = project((b + c) / 2.0)
        ca = project((c + a) / 2.0)
        tris = np.concatenate([
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
            np.stack([ab, bc, ca], axis=1)])
    return soup_from_triangles(tris, name="icosphere")


def vee_surface(half_width: float = 3.0, length: float = 12.0,
                n_rows: int = 8, concave: bool = True,
                name: str = "vee") -> tuple[TriangleSoup, float]:
    """Two 45-degree planes meeting at a right angle along the y axis.

    ``concave=True`` is a valley (z = |x|), ``False`` a roof (z = -|x|).
    Returns the soup and the analytic centroid spacing ``d`` of each
    crease-crossing face pair: sqrt(4 a**2 + h**2) / 3 for strip width
    ``a`` and row height ``h``.
    """
    xs = np.array([-half_width, 0.0, half_width])
    ys = np.linspace(0.0, length, n_rows + 1)
    sign = 1.0 if concave else -1.0
    soup = grid_surface(xs, ys, lambda x, y: sign * np.abs(x), name=name)
    h = length / n_rows
    d = float(np.sqrt(4.0 * half_width ** 2 + h ** 2) / 3.0)
    return soup, d


def crease_edges(mesh, axis: int = 0, coordinate: float = 0.0,
                 tol: float = 1e-9) -> list[tuple[int, int]]:
    """(face, slot) pairs whose shared edge lies on ``axis == coordinate``."""
    hits = []
    for f in range(mesh.n_faces):
        for k in range(3):
            g = mesh.adjacency[f, k]
            if g < 0:
                continue
            va = mesh.vertices[mesh.faces[f, k]]
            vb = mesh.vertices[mesh.faces[f, (k + 1) % 3]]
            if abs(va[axis] - coordinate) < tol \
                    and abs(vb[axis] - coordinate) < tol:
                hits.append((f, k))
    return hits


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random proper rotation matrix (QR sign-fixed)."""
    m = rng.normal(size=(3, 3))
    q, r = np.linalg.qr(m)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q


def transform_soup(soup: TriangleSoup, rotation: np.ndarray,
                   translation: np.ndarray) -> TriangleSoup:
    """Apply a rigid motion to every corner (normals rotate with it)."""
    tri = soup.triangles @ rotation.T + translation
    normals = soup.stored_normals @ rotation.T
    return TriangleSoup(triangles=tri, stored_normals=normals,
                        name=soup.name)
