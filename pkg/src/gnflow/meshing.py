"""Triangulations of the pipe cross-section.

Built-in shapes are the unit disk (concentric-ring triangulation, outer
boundary edges curved quadratically onto the circle) and axis-aligned
rectangles.  Meshes can also be read from / written to a plain-text format
(see ``read_mesh``/``write_mesh``) and exported as legacy VTK.

All node coordinates must satisfy sup|x| <= 1: the cross-section is scaled
so the outermost point sits on the unit circle of the bend plane.
"""

from __future__ import annotations

import numpy as np


class MeshError(ValueError):
    pass


class Mesh:
    """Conforming triangulation with quadratic geometry nodes.

    Attributes
    ----------
    vertices : (nv, 2) float
    cells : (nc, 3) int, counter-clockwise vertex triples
    edges : (ne, 2) int, sorted vertex pairs
    cell_edges : (nc, 3) int, edge opposite each local vertex
    boundary_edges : (nbe,) int
    boundary_vertices : (nbv,) int
    nodes : (nv + ne, 2) float, vertices followed by edge nodes
    cell_nodes : (nc, 6) int, P2 connectivity (3 vertices, 3 edge nodes)
    boundary_nodes : int array over the P2 node set
    shape : str, one of "disk", "rectangle", "external"
    """

    def __init__(self, vertices, cells, shape="external", curve_boundary=False):
        vertices = np.asarray(vertices, dtype=float)
        cells = np.asarray(cells, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshError("vertices must be (nv, 2)")
        if cells.ndim != 2 or cells.shape[1] != 3:
            raise MeshError("cells must be (nc, 3)")
        r = np.hypot(vertices[:, 0], vertices[:, 1])
        if r.max() > 1.0 + 1e-12:
            raise MeshError(f"mesh exceeds the unit ball: sup|x| = {r.max():.6g}")

        # enforce counter-clockwise orientation
        v = vertices
        e1 = v[cells[:, 1]] - v[cells[:, 0]]
        e2 = v[cells[:, 2]] - v[cells[:, 0]]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        flip = det < 0
        cells[flip] = cells[flip][:, [0, 2, 1]]
        det = np.abs(det)
        if det.min() <= 0:
            raise MeshError("degenerate cell with zero area")

        self.vertices = vertices
        self.cells = cells
        self.shape = shape
        self._build_edges()
        self._check_quality()
        self._build_p2_nodes(curve_boundary)

    # -- construction helpers -------------------------------------------

    def _build_edges(self):
        c = self.cells
        # local edge i is opposite local vertex i
        pairs = np.concatenate([c[:, [1, 2]], c[:, [2, 0]], c[:, [0, 1]]])
        pairs_sorted = np.sort(pairs, axis=1)
        edges, inv, counts = np.unique(
            pairs_sorted, axis=0, return_inverse=True, return_counts=True)
        self.edges = edges
        self.cell_edges = inv.reshape(3, -1).T.copy()
        if counts.max() > 2:
            raise MeshError("non-manifold edge (shared by >2 cells)")
        self.boundary_edges = np.flatnonzero(counts == 1)
        self.boundary_vertices = np.unique(edges[self.boundary_edges])

    def _check_quality(self, limit=1e3):
        v, c = self.vertices, self.cells
        a = np.linalg.norm(v[c[:, 1]] - v[c[:, 2]], axis=1)
        b = np.linalg.norm(v[c[:, 2]] - v[c[:, 0]], axis=1)
        d = np.linalg.norm(v[c[:, 0]] - v[c[:, 1]], axis=1)
        s = 0.5 * (a + b + d)
        area = np.sqrt(np.maximum(s * (s - a) * (s - b) * (s - d), 0.0))
        if area.min() <= 0:
            raise MeshError("degenerate cell with zero area")
        # longest edge over inradius diameter
        ratio = np.maximum(a, np.maximum(b, d)) * s / (2.0 * area)
        if ratio.max() > limit:
            raise MeshError(f"cell aspect ratio {ratio.max():.3g} beyond {limit:g}")

    def _build_p2_nodes(self, curve_boundary):
        mid = 0.5 * (self.vertices[self.edges[:, 0]] + self.vertices[self.edges[:, 1]])
        if curve_boundary:
            # project boundary edge nodes radially onto the unit circle
            be = self.boundary_edges
            r = np.linalg.norm(mid[be], axis=1)
            mid[be] = mid[be] / r[:, None]
        self.nodes = np.vstack([self.vertices, mid])
        nv = len(self.vertices)
        self.cell_nodes = np.hstack([self.cells, nv + self.cell_edges])
        self.boundary_nodes = np.concatenate(
            [self.boundary_vertices, nv + self.boundary_edges])

    # -- basic queries ---------------------------------------------------

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_cells(self):
        return len(self.cells)

    @property
    def num_nodes(self):
        return len(self.nodes)

    def edge_length_stats(self):
        v = self.vertices[self.edges]
        lengths = np.linalg.norm(v[:, 0] - v[:, 1], axis=1)
        return lengths.min(), lengths.mean(), lengths.max()


def disk_mesh(n_rings):
    """Spider-web triangulation of the unit disk with ``n_rings`` concentric
    rings (6k vertices on ring k); boundary edges are curved onto the circle.

    ``n_rings`` is rounded up to an even count so the four cardinal points
    lie on the outer ring and the extrema of 1 + delta*x2 are mesh nodes.
    """
    n = max(2, int(n_rings))
    if n % 2:
        n += 1
    verts = [(0.0, 0.0)]
    ring_start = [0]
    for k in range(1, n + 1):
        ring_start.append(len(verts))
        rad = k / n
        ang = 2.0 * np.pi * np.arange(6 * k) / (6 * k)
        verts.extend(zip(rad * np.cos(ang), rad * np.sin(ang)))
    verts = np.asarray(verts)

    cells = []
    # center fan
    first = ring_start[1]
    for j in range(6):
        cells.append((0, first + j, first + (j + 1) % 6))
    # bands: merge ring k-1 (inner, 6(k-1) nodes) with ring k (outer, 6k nodes)
    for k in range(2, n + 1):
        ni, no = 6 * (k - 1), 6 * k
        si, so = ring_start[k - 1], ring_start[k]
        ai = 2.0 * np.pi * np.arange(ni) / ni
        ao = 2.0 * np.pi * np.arange(no) / no
        i = j = 0
        while i < ni or j < no:
            inner_next = ai[(i + 1) % ni] if i + 1 < ni else 2.0 * np.pi
            outer_next = ao[(j + 1) % no] if j + 1 < no else 2.0 * np.pi
            if j < no and (i >= ni or outer_next <= inner_next):
                cells.append((si + i % ni, so + j, so + (j + 1) % no))
                j += 1
            else:
                cells.append((si + i, so + j % no, si + (i + 1) % ni))
                i += 1
    return Mesh(verts, np.asarray(cells), shape="disk", curve_boundary=True)


def rectangle_mesh(a, b, nx, ny):
    """Structured triangulation of [-a/2, a/2] x [-b/2, b/2]."""
    if np.hypot(a / 2.0, b / 2.0) > 1.0 + 1e-12:
        raise MeshError("rectangle corner outside the unit ball")
    nx, ny = max(1, int(nx)), max(1, int(ny))
    x = np.linspace(-a / 2.0, a / 2.0, nx + 1)
    y = np.linspace(-b / 2.0, b / 2.0, ny + 1)
    xx, yy = np.meshgrid(x, y, indexing="ij")
    verts = np.stack([xx.ravel(), yy.ravel()], axis=1)

    def vid(i, j):
        return i * (ny + 1) + j

    cells = []
    for i in range(nx):
        for j in range(ny):
            q = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1))
            if (i + j) % 2 == 0:
                cells.append((q[0], q[1], q[2]))
                cells.append((q[0], q[2], q[3]))
            else:
                cells.append((q[0], q[1], q[3]))
                cells.append((q[1], q[2], q[3]))
    return Mesh(verts, np.asarray(cells), shape="rectangle")


# -- plain-text mesh format ----------------------------------------------
#
#   line 1:  "gnf-mesh 1"
#   line 2:  nv nc nb
#   nv lines: "x1 x2"
#   nc lines: "i j k"          (0-based vertex indices)
#   nb lines: "i"              (boundary vertex indices)

def write_mesh(mesh, path):
    with open(path, "w") as f:
        f.write("gnf-mesh 1\n")
        f.write(f"{mesh.num_vertices} {mesh.num_cells} {len(mesh.boundary_vertices)}\n")
        for x, y in mesh.vertices:
            f.write(f"{x:.17g} {y:.17g}\n")
        for i, j, k in mesh.cells:
            f.write(f"{i} {j} {k}\n")
        for i in mesh.boundary_vertices:
            f.write(f"{i}\n")


def read_mesh(path):
    with open(path) as f:
        header = f.readline().split()
        if not header or header[0] != "gnf-mesh":
            raise MeshError(f"{path}: not a gnf-mesh file")
        nv, nc, nb = (int(t) for t in f.readline().split())
        verts = np.array([[float(t) for t in f.readline().split()] for _ in range(nv)])
        cells = np.array([[int(t) for t in f.readline().split()] for _ in range(nc)])
        listed = np.array([int(f.readline()) for _ in range(nb)], dtype=np.int64)
    mesh = Mesh(verts, cells, shape="external")
    derived = set(mesh.boundary_vertices.tolist())
    if derived != set(listed.tolist()):
        raise MeshError(f"{path}: boundary vertex list disagrees with cell topology")
    return mesh


_VTK_ORDER = [0, 1, 2, 5, 3, 4]  # local P2 nodes -> VTK quadratic triangle order


def write_vtk(path, mesh, point_vectors=None, point_scalars=None, title="gnflow fields"):
    """Legacy-VTK export (quadratic triangles, point data on all P2 nodes).

    point_vectors / point_scalars: dicts name -> array of shape (num_nodes, 3)
    or (num_nodes,).
    """
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(title + "\n")
        f.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {mesh.num_nodes} double\n")
        for x, y in mesh.nodes:
            f.write(f"{x:.17g} {y:.17g} 0\n")
        nc = mesh.num_cells
        f.write(f"CELLS {nc} {7 * nc}\n")
        for row in mesh.cell_nodes:
            f.write("6 " + " ".join(str(row[i]) for i in _VTK_ORDER) + "\n")
        f.write(f"CELL_TYPES {nc}\n")
        f.write("22\n" * nc)
        if point_vectors or point_scalars:
            f.write(f"POINT_DATA {mesh.num_nodes}\n")
        for name, vec in (point_vectors or {}).items():
            f.write(f"VECTORS {name} double\n")
            for row in np.asarray(vec):
                f.write(" ".join(f"{v:.17g}" for v in row) + "\n")
        for name, sca in (point_scalars or {}).items():
            f.write(f"SCALARS {name} double\nLOOKUP_TABLE default\n")
            for v in np.asarray(sca):
                f.write(f"{v:.17g}\n")
