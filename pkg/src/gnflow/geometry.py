"""Discretized cross-section: quadrature geometry, FE spaces, weighted norms.

A :class:`CrossSection` bundles a triangulation with everything needed to
evaluate integrals on it: per-cell/per-point Jacobians of the (isoparametric
quadratic) geometry map, physical P2/P1 basis gradients, quadrature weights,
the curvature weight B = 1 + delta*x2 and the geometric constants

    area = |domain|,   m = sup 1/B,   n = sup B,   b_l1 = integral of B.

Velocity fields live in the vector P2 space (coefficients shaped
``(num_nodes, 3)``, boundary rows zero); pressures in P1 with zero mean.
"""

from __future__ import annotations

import numpy as np

from .meshing import Mesh, disk_mesh, rectangle_mesh, read_mesh
from .quadrature import triangle_rule, p2_shape, p1_shape


class CrossSection:
    """Quadrature-ready cross-section at a fixed curvature ratio delta."""

    def __init__(self, mesh: Mesh, delta: float):
        if not 0.0 <= delta < 1.0:
            raise ValueError("curvature ratio must satisfy 0 <= delta < 1")
        self.mesh = mesh
        self.delta = float(delta)
        self._precompute_geometry()
        self._apply_delta()

    def _precompute_geometry(self):
        mesh = self.mesh
        pts, w = triangle_rule()
        n2, dn2 = p2_shape(pts)
        n1, dn1 = p1_shape(pts)
        self.qp_ref = pts
        self.n2 = n2            # (nq, 6)
        self.n1 = n1            # (nq, 3)
        xg = mesh.nodes[mesh.cell_nodes]            # (nc, 6, 2)
        jac = np.einsum("cix,qia->cqxa", xg, dn2)   # (nc, nq, 2, 2)
        det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
        if det.min() <= 0:
            raise ValueError("geometry map not invertible (tangled cell)")
        inv = np.empty_like(jac)                    # inv[a, x] = d xi_a / d x_x
        inv[..., 0, 0] = jac[..., 1, 1]
        inv[..., 0, 1] = -jac[..., 0, 1]
        inv[..., 1, 0] = -jac[..., 1, 0]
        inv[..., 1, 1] = jac[..., 0, 0]
        inv /= det[..., None, None]
        self.w = w[None, :] * det                   # (nc, nq) physical weights
        self.xq = np.einsum("qi,cix->cqx", n2, xg)  # (nc, nq, 2)
        self.grad2 = np.einsum("qia,cqax->cqix", dn2, inv)  # (nc, nq, 6, 2)
        self.grad1 = np.einsum("ia,cqax->cqix", dn1, inv)   # (nc, nq, 3, 2)

        self.num_nodes = mesh.num_nodes
        self.num_vertices = mesh.num_vertices
        self.num_cells = mesh.num_cells
        self.cell_nodes = mesh.cell_nodes
        self.cell_vertices = mesh.cells
        interior = np.ones(mesh.num_nodes, dtype=bool)
        interior[mesh.boundary_nodes] = False
        self.interior_mask = interior
        self.interior_nodes = np.flatnonzero(interior)
        self.area = float(self.w.sum())
        self._op_cache = {}

    def _apply_delta(self):
        d = self.delta
        self.b = 1.0 + d * self.xq[..., 1]          # (nc, nq)
        # extrema of the affine weight over the closed domain sit at geometry
        # nodes (quadrature points only refine interior samples)
        x2_nodes = self.mesh.nodes[:, 1]
        b_nodes = 1.0 + d * x2_nodes
        b_all = min(b_nodes.min(), self.b.min())
        b_top = max(b_nodes.max(), self.b.max())
        if b_all <= 0:
            raise ValueError("weight 1 + delta*x2 not positive on the domain")
        self.m = 1.0 / b_all
        self.n = b_top
        self.b_l1 = float((self.w * self.b).sum())

    def with_delta(self, delta: float) -> "CrossSection":
        """Cheap variant sharing all geometry arrays, new curvature ratio."""
        if not 0.0 <= delta < 1.0:
            raise ValueError("curvature ratio must satisfy 0 <= delta < 1")
        other = object.__new__(CrossSection)
        other.__dict__.update(self.__dict__)
        other.delta = float(delta)
        other._op_cache = {}
        other._apply_delta()
        return other

    # -- field evaluation at quadrature points ---------------------------

    def p2_values(self, coeffs):
        """P2 field values at quadrature points.

        coeffs: (num_nodes,) or (num_nodes, k) -> (nc, nq) or (nc, nq, k).
        """
        uc = np.asarray(coeffs)[self.cell_nodes]
        if uc.ndim == 2:
            return np.einsum("qi,ci->cq", self.n2, uc)
        return np.einsum("qi,cik->cqk", self.n2, uc)

    def p2_gradients(self, coeffs):
        """Physical gradients of a P2 field: (nc, nq, 2) or (nc, nq, k, 2)."""
        uc = np.asarray(coeffs)[self.cell_nodes]
        if uc.ndim == 2:
            return np.einsum("cqix,ci->cqx", self.grad2, uc)
        return np.einsum("cqix,cik->cqkx", self.grad2, uc)

    def p1_values(self, coeffs):
        uc = np.asarray(coeffs)[self.cell_vertices]
        return np.einsum("qi,ci->cq", self.n1, uc)

    # -- integrals and norms ----------------------------------------------

    def integrate(self, values):
        """Integral of per-quadrature-point values (nc, nq)."""
        return float((self.w * values).sum())

    def lq_norm(self, values, q, weighted=True):
        """L^q norm of point values; ``weighted`` applies the B weight.

        values: scalar (nc, nq) taken as |f|, or (nc, nq, k) reduced with the
        Euclidean norm over the trailing axis.
        """
        v = np.asarray(values)
        mag2 = v * v if v.ndim == 2 else (v * v).sum(axis=-1)
        w = self.w * self.b if weighted else self.w
        return float((w * mag2 ** (q / 2.0)).sum()) ** (1.0 / q)

    def tensor_lq_norm(self, comps, q, weighted=True, plane_only=False):
        """L^q norm of a symmetric-tensor field given by 6 components
        (d11, d22, d33, d12, d13, d23); off-diagonals count twice in the
        Frobenius norm.  ``plane_only`` restricts to the 2x2 block."""
        c = np.asarray(comps)
        if plane_only:
            mag2 = c[..., 0] ** 2 + c[..., 1] ** 2 + 2 * c[..., 3] ** 2
        else:
            mag2 = (c[..., 0] ** 2 + c[..., 1] ** 2 + c[..., 2] ** 2
                    + 2 * (c[..., 3] ** 2 + c[..., 4] ** 2 + c[..., 5] ** 2))
        w = self.w * self.b if weighted else self.w
        return float((w * mag2 ** (q / 2.0)).sum()) ** (1.0 / q)

    def weighted_norm(self, coeffs, q, space="p2"):
        """B-weighted L^q norm of an FE field given by coefficients."""
        vals = self.p2_values(coeffs) if space == "p2" else self.p1_values(coeffs)
        return self.lq_norm(vals, q, weighted=True)

    def poincare_residual(self, coeffs, q):
        """||d f / d x1||_{q,B} - ||f||_{q,B} for a boundary-vanishing field;
        non-negative up to quadrature error."""
        g = self.p2_gradients(coeffs)
        dx1 = g[..., 0] if g.ndim == 3 else g[..., :, 0]
        return self.lq_norm(dx1, q) - self.lq_norm(self.p2_values(coeffs), q)

    # -- random discrete fields ------------------------------------------

    def random_velocity(self, rng, scale=1.0):
        """i.i.d. uniform[-1,1] coefficients on interior nodes, zero on the
        boundary; three components."""
        u = rng.uniform(-1.0, 1.0, size=(self.num_nodes, 3)) * scale
        u[~self.interior_mask] = 0.0
        return u

    def random_scalar(self, rng, scale=1.0):
        u = rng.uniform(-1.0, 1.0, size=self.num_nodes) * scale
        u[~self.interior_mask] = 0.0
        return u


def build_cross_section(shape="disk", h=0.05, delta=0.0, rect=(1.0, 1.0),
                        mesh_file=None):
    """Build the discretized cross-section.

    shape: "disk" (unit disk, ``round(1/h)`` rings), "rectangle"
    (dimensions ``rect``, grid pitch ~h) or "file" (plain-text mesh at
    ``mesh_file``).
    """
    if shape == "disk":
        mesh = disk_mesh(max(2, round(1.0 / h)))
    elif shape == "rectangle":
        a, b = rect
        mesh = rectangle_mesh(a, b, max(1, round(a / h)), max(1, round(b / h)))
    elif shape == "file":
        if mesh_file is None:
            raise ValueError("shape='file' requires mesh_file")
        mesh = read_mesh(mesh_file)
    else:
        raise ValueError(f"unknown shape {shape!r}")
    return CrossSection(mesh, delta)
