"""Sparse assembly of the mixed Galerkin systems.

Two system kinds share the machinery:

* ``"toroidal"``: curved-pipe operators, B-weighted viscous/pressure terms,
  skew-symmetrized convection with the curvature (Coriolis-type) terms,
  axial load (G, phi3), constraint div(B u) = 0;
* ``"flat"``: plain operators, loads (G/B, phi3) + delta (sigma(w3), phi2),
  constraint div w = 0.

Unknown layout: interior velocity dofs (node-major, 3 components), then the
P1 pressure (all vertices, zero mean enforced through a scalar multiplier),
then the multiplier.  The convective form is skew-symmetrized, so setting the
test function to the solution cancels it identically at the discrete level.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import tensors

WGT = tensors.COMP_WEIGHTS


class Assembler:
    def __init__(self, cs, kind="toroidal"):
        if kind not in ("toroidal", "flat"):
            raise ValueError(kind)
        self.cs = cs
        self.kind = kind
        self.curved = kind == "toroidal"
        self.bw = cs.b if self.curved else np.ones_like(cs.b)
        self.delta = cs.delta if self.curved else 0.0
        self._build_dof_maps()
        self._build_ds_basis()
        self._build_linear_blocks()

    # -- dof bookkeeping --------------------------------------------------

    def _build_dof_maps(self):
        cs = self.cs
        nn = cs.num_nodes
        vel_red = -np.ones((nn, 3), dtype=np.int64)
        ni = len(cs.interior_nodes)
        vel_red[cs.interior_nodes] = (3 * np.arange(ni)[:, None]
                                      + np.arange(3)[None, :])
        self.vel_red = vel_red
        self.n_u = 3 * ni
        self.n_p = cs.num_vertices
        self.n_dof = self.n_u + self.n_p + 1
        # local dof a = 3*i + k over cell nodes
        cell_dofs = vel_red[cs.cell_nodes]            # (nc, 6, 3)
        self.cell_dofs = cell_dofs.reshape(cs.num_cells, 18)
        rows = np.repeat(self.cell_dofs, 18, axis=1).ravel()
        cols = np.tile(self.cell_dofs, (1, 18)).ravel()
        keep = (rows >= 0) & (cols >= 0)
        self._uu_rows, self._uu_cols, self._uu_keep = rows[keep], cols[keep], keep
        prow = np.repeat(self.cell_dofs, 3, axis=1).ravel()
        pcol = np.tile(self.n_u + cs.cell_vertices, (1, 18)).ravel()
        keepp = prow >= 0
        self._up_rows, self._up_cols, self._up_keep = prow[keepp], pcol[keepp], keepp

    def _build_ds_basis(self):
        """Symmetric-gradient components of every local velocity basis
        function: (nc, nq, 18, 6) with a = 3*node + component."""
        cs = self.cs
        nc, nq = cs.b.shape
        g = cs.grad2                       # (nc, nq, 6, 2)
        nv = np.broadcast_to(cs.n2[None, :, :], (nc, nq, 6))
        r = self.delta / cs.b if self.curved else np.zeros_like(cs.b)
        ds = np.zeros((nc, nq, 6, 3, 6))
        ds[..., 0, 0] = g[..., 0]
        ds[..., 0, 3] = 0.5 * g[..., 1]
        ds[..., 1, 1] = g[..., 1]
        ds[..., 1, 3] = 0.5 * g[..., 0]
        ds[..., 1, 2] = r[..., None] * nv
        ds[..., 2, 4] = 0.5 * g[..., 0]
        ds[..., 2, 5] = 0.5 * (g[..., 1] - r[..., None] * nv)
        self.ds_basis = ds.reshape(nc, nq, 18, 6)

    def _build_linear_blocks(self):
        """Pressure coupling (constant in the iteration) and the zero-mean
        constraint vector."""
        cs = self.cs
        w = cs.w
        # div-expression of basis (i,k): (nc, nq, 6, 3)
        dive = np.zeros(cs.b.shape + (6, 3))
        bq = self.bw
        dive[..., 0] = bq[..., None] * cs.grad2[..., 0]
        dive[..., 1] = bq[..., None] * cs.grad2[..., 1]
        if self.curved:
            dive[..., 1] += self.delta * cs.n2[None, :, :]
        # G_p[(i,k), j] = -int M_j * divexpr_(i,k)
        gp = -np.einsum("cq,cqik,qj->cikj", w, dive, cs.n1)
        self._gp_data = gp.reshape(cs.num_cells, 18, 3)
        mv = np.einsum("cq,qj->cj", w, cs.n1)
        mean_vec = np.zeros(self.n_p)
        np.add.at(mean_vec, cs.cell_vertices.ravel(), mv.ravel())
        self.mean_vec = mean_vec
        data = self._gp_data.reshape(-1)[self._up_keep]
        self._gp_mat = sp.coo_matrix(
            (data, (self._up_rows, self._up_cols)),
            shape=(self.n_dof, self.n_dof)).tocsr()
        mu_col = sp.coo_matrix(
            (self.mean_vec, (self.n_u + np.arange(self.n_p),
                             np.full(self.n_p, self.n_dof - 1))),
            shape=(self.n_dof, self.n_dof)).tocsr()
        # symmetric saddle structure: [[., Gp, .], [Gp^T, ., M], [., M^T, .]]
        self._linear_mat = (self._gp_mat + self._gp_mat.T
                            + mu_col + mu_col.T).tocsr()

    # -- per-iterate field data -------------------------------------------

    def fields(self, u):
        cs = self.cs
        uval = cs.p2_values(u)
        du = cs.p2_gradients(u)
        eta = np.einsum("cqam,ca->cqm", self.ds_basis,
                        u[cs.cell_nodes].reshape(cs.num_cells, 18))
        return uval, du, eta

    def stress_load(self, params):
        """Reference load used for the relative stopping test (the axial
        pressure-drop forcing only; sigma forcing enters the residual)."""
        cs = self.cs
        g_rhs = params.g / cs.b if not self.curved else params.g * np.ones_like(cs.b)
        load = np.zeros((cs.num_nodes, 3))
        contrib = np.einsum("cq,qi->ci", cs.w * g_rhs, cs.n2)
        np.add.at(load[:, 2], cs.cell_nodes.ravel(), contrib.ravel())
        return load

    # -- residual -----------------------------------------------------------

    def residual(self, u, pcoef, mu, params, sigma=None):
        """Assembled nonlinear residual over the reduced unknowns."""
        cs = self.cs
        p, re = params.p, params.re
        uval, du, eta = self.fields(u)
        s2 = tensors.dot(eta, eta)
        nu = tensors.viscosity(s2, p, params.gamma_dot)
        tau = nu[..., None] * eta

        w = cs.w
        wb = w * self.bw
        r_loc = np.einsum("cq,cqm,cqam->ca", wb, tau * WGT, self.ds_basis)

        if re != 0.0:
            upl = uval[..., :2]
            adv = np.einsum("cqkx,cqx->cqk", du, upl)         # (u.grad u)_k
            ug = np.einsum("cqix,cqx->cqi", cs.grad2, upl)    # u.grad N_i
            t1 = 0.5 * np.einsum("cq,qi,cqk->cik", wb, cs.n2, adv)
            t2 = -0.5 * np.einsum("cq,cqi,cqk->cik", wb, ug, uval)
            conv = t1 + t2
            if self.curved and self.delta != 0.0:
                wd = w * self.delta
                u3 = uval[..., 2]
                conv[..., 2] += np.einsum("cq,qi->ci", wd * u3 * uval[..., 1], cs.n2)
                conv[..., 1] -= np.einsum("cq,qi->ci", wd * u3 * u3, cs.n2)
            r_loc = r_loc + re * conv.reshape(cs.num_cells, 18)

        # loads
        if self.curved:
            load3 = np.einsum("cq,qi->ci", w * params.g, cs.n2)
            r_loc[:, 2::3] -= load3
        else:
            load3 = np.einsum("cq,qi->ci", w * params.g / cs.b, cs.n2)
            r_loc[:, 2::3] -= load3
            if sigma is not None and cs.delta != 0.0:
                sig = sigma(uval[..., 2])
                load2 = cs.delta * np.einsum("cq,qi->ci", w * sig, cs.n2)
                r_loc[:, 1::3] -= load2

        # pressure gradient on momentum rows
        r_loc += np.einsum("cikj,cj->cik", self._gp_data.reshape(
            cs.num_cells, 6, 3, 3), pcoef[cs.cell_vertices]).reshape(cs.num_cells, 18)

        res = np.zeros(self.n_dof)
        dofs = self.cell_dofs.ravel()
        keep = dofs >= 0
        np.add.at(res, dofs[keep], r_loc.ravel()[keep])

        # continuity rows: Gp^T u  (= -int M_j divexpr(u))
        dive = du[..., 0, 0] + du[..., 1, 1]
        if self.curved:
            dive = self.bw * dive + self.delta * uval[..., 1]
        rp = -np.einsum("cq,cqj->cj", w * dive, np.broadcast_to(
            cs.n1[None], cs.b.shape + (3,)))
        np.add.at(res, self.n_u + cs.cell_vertices.ravel(), rp.ravel())
        res[self.n_u:self.n_u + self.n_p] += mu * self.mean_vec
        res[-1] = self.mean_vec @ pcoef
        return res

    # -- jacobian -----------------------------------------------------------

    def jacobian(self, u, params, scheme="newton"):
        """Linearized operator at u: ``picard`` freezes the viscosity and the
        convecting field; ``newton`` is the full derivative (the lagged sigma
        forcing never enters)."""
        cs = self.cs
        p, re = params.p, params.re
        uval, du, eta = self.fields(u)
        s2 = tensors.dot(eta, eta)
        g2 = params.gamma_dot ** 2
        base = 1.0 + g2 * s2
        nu = 2.0 * base ** ((p - 2.0) / 2.0)
        wb = cs.w * self.bw

        dsw = self.ds_basis * WGT
        a_uu = np.einsum("cq,cqam,cqbm->cab", wb * nu, dsw, self.ds_basis,
                         optimize=True)
        if scheme == "newton" and p != 2.0:
            cj = 2.0 * (p - 2.0) * g2 * base ** ((p - 4.0) / 2.0)
            e_a = np.einsum("cqam,cqm->cqa", dsw, eta)
            a_uu += np.einsum("cq,cqa,cqb->cab", wb * cj, e_a, e_a,
                              optimize=True)

        if re != 0.0:
            nsh = cs.n2
            upl = uval[..., :2]
            ug = np.einsum("cqix,cqx->cqi", cs.grad2, upl)
            # convected-direction (Picard) part, diagonal over components
            pij = 0.5 * (np.einsum("cq,qi,cqj->cij", wb, nsh, ug)
                         - np.einsum("cq,cqi,qj->cij", wb, ug, nsh))
            block = np.zeros((cs.num_cells, 6, 3, 6, 3))
            for k in range(3):
                block[:, :, k, :, k] += re * pij
            if self.curved and self.delta != 0.0:
                wd = cs.w * self.delta * uval[..., 2]
                nn_ij = np.einsum("cq,qi,qj->cij", wd, nsh, nsh)
                block[:, :, 2, :, 1] += re * nn_ij
                block[:, :, 1, :, 2] -= re * nn_ij
            if scheme == "newton":
                # convecting-direction part
                t1 = 0.5 * np.einsum("cq,qi,qj,cqkx->cikjx", wb, nsh, nsh, du,
                                     optimize=True)
                t2 = -0.5 * np.einsum("cq,qj,cqix,cqk->cikjx", wb, nsh,
                                      cs.grad2, uval, optimize=True)
                block[..., :2] += re * (t1 + t2)
                if self.curved and self.delta != 0.0:
                    wd2 = cs.w * self.delta
                    m32 = np.einsum("cq,qi,qj->cij", wd2 * uval[..., 1], nsh, nsh)
                    m22 = np.einsum("cq,qi,qj->cij", wd2 * uval[..., 2], nsh, nsh)
                    block[:, :, 2, :, 2] += re * m32
                    block[:, :, 1, :, 2] -= re * m22
            a_uu += block.reshape(cs.num_cells, 18, 18)

        data = a_uu.reshape(-1)[self._uu_keep]
        mat = sp.coo_matrix((data, (self._uu_rows, self._uu_cols)),
                            shape=(self.n_dof, self.n_dof)).tocsr()
        return mat + self._linear_mat

    # -- helpers -------------------------------------------------------------

    def pack(self, u, pcoef, mu=0.0):
        x = np.empty(self.n_dof)
        x[:self.n_u] = u[self.cs.interior_nodes].ravel()
        x[self.n_u:self.n_u + self.n_p] = pcoef
        x[-1] = mu
        return x

    def unpack(self, x):
        cs = self.cs
        u = np.zeros((cs.num_nodes, 3))
        u[cs.interior_nodes] = x[:self.n_u].reshape(-1, 3)
        return u, x[self.n_u:self.n_u + self.n_p].copy(), float(x[-1])


class AxialAssembler:
    """Scalar reduced problem for the unidirectional axial flow:

        toroidal: int B nu g*(u) . g*(phi) = (G, phi),
                  g*(u) = (d1 u, d2 u - (delta/B) u),
        flat:     int   nu grad u . grad phi = (G/B, phi),

    with nu = (1 + |g|^2 / 2)^((p-2)/2).
    """

    def __init__(self, cs, kind="toroidal"):
        self.cs = cs
        self.curved = kind == "toroidal"
        ni = len(cs.interior_nodes)
        red = -np.ones(cs.num_nodes, dtype=np.int64)
        red[cs.interior_nodes] = np.arange(ni)
        self.red = red
        self.n_dof = ni
        cd = red[cs.cell_nodes]
        rows = np.repeat(cd, 6, axis=1).ravel()
        cols = np.tile(cd, (1, 6)).ravel()
        keep = (rows >= 0) & (cols >= 0)
        self._rows, self._cols, self._keep = rows[keep], cols[keep], keep
        self.cell_dofs = cd

    def star_grad_basis(self):
        cs = self.cs
        g = cs.grad2.copy()
        if self.curved and cs.delta != 0.0:
            g = g.copy()
            g[..., 1] -= (cs.delta / cs.b)[..., None] * cs.n2[None, :, :]
        return g

    def field_grad(self, u):
        cs = self.cs
        g = cs.p2_gradients(u)
        if self.curved and cs.delta != 0.0:
            g = g.copy()
            g[..., 1] -= cs.delta / cs.b * cs.p2_values(u)
        return g

    def load(self, params):
        cs = self.cs
        f = params.g * np.ones_like(cs.b) if self.curved else params.g / cs.b
        lv = np.einsum("cq,qi->ci", cs.w * f, cs.n2)
        load = np.zeros(self.n_dof)
        cd = self.cell_dofs.ravel()
        keep = cd >= 0
        np.add.at(load, cd[keep], lv.ravel()[keep])
        return load

    def residual(self, u, params):
        cs = self.cs
        g = self.field_grad(u)
        s2 = (g ** 2).sum(-1)
        nu = (1.0 + 0.5 * s2) ** ((params.p - 2.0) / 2.0)
        wgt = cs.w * (cs.b if self.curved else 1.0) * nu
        gb = self.star_grad_basis()
        rv = np.einsum("cq,cqx,cqix->ci", wgt, g, gb)
        res = -self.load(params)
        cd = self.cell_dofs.ravel()
        keep = cd >= 0
        np.add.at(res, cd[keep], rv.ravel()[keep])
        return res

    def jacobian(self, u, params, scheme="newton"):
        cs = self.cs
        g = self.field_grad(u)
        s2 = (g ** 2).sum(-1)
        base = 1.0 + 0.5 * s2
        nu = base ** ((params.p - 2.0) / 2.0)
        w0 = cs.w * (cs.b if self.curved else 1.0)
        gb = self.star_grad_basis()
        a = np.einsum("cq,cqix,cqjx->cij", w0 * nu, gb, gb, optimize=True)
        if scheme == "newton" and params.p != 2.0:
            cj = 0.5 * (params.p - 2.0) * base ** ((params.p - 4.0) / 2.0)
            e = np.einsum("cqix,cqx->cqi", gb, g)
            a += np.einsum("cq,cqi,cqj->cij", w0 * cj, e, e, optimize=True)
        data = a.reshape(-1)[self._keep]
        return sp.coo_matrix((data, (self._rows, self._cols)),
                             shape=(self.n_dof, self.n_dof)).tocsr()

    def pack(self, u):
        return u[self.cs.interior_nodes].copy()

    def unpack(self, x):
        u = np.zeros(self.cs.num_nodes)
        u[self.cs.interior_nodes] = x
        return u
