"""Analytic trial fields: bivariate polynomials, bump-cutoff velocity fields
and exactly weighted-divergence-free stream-function fields.

These provide smooth, differentiable-in-closed-form inputs for the operator
identity checks, where finite-element fields would either lack the needed
regularity (stream functions) or hide the continuum identity behind
interpolation error.
"""

from __future__ import annotations

import numpy as np


class Poly2:
    """Bivariate polynomial sum c[i, j] * x1^i * x2^j."""

    def __init__(self, coeffs):
        self.c = np.atleast_2d(np.asarray(coeffs, dtype=float))

    @classmethod
    def random(cls, rng, degree=2, scale=1.0):
        n = degree + 1
        c = rng.uniform(-scale, scale, size=(n, n))
        for i in range(n):
            for j in range(n):
                if i + j > degree:
                    c[i, j] = 0.0
        return cls(c)

    def __call__(self, x1, x2):
        res = np.zeros(np.broadcast(x1, x2).shape)
        for i in range(self.c.shape[0]):
            for j in range(self.c.shape[1]):
                if self.c[i, j] != 0.0:
                    res = res + self.c[i, j] * x1 ** i * x2 ** j
        return res

    def dx1(self):
        c = self.c
        if c.shape[0] == 1:
            return Poly2(np.zeros((1, 1)))
        return Poly2(c[1:, :] * np.arange(1, c.shape[0])[:, None])

    def dx2(self):
        c = self.c
        if c.shape[1] == 1:
            return Poly2(np.zeros((1, 1)))
        return Poly2(c[:, 1:] * np.arange(1, c.shape[1])[None, :])

    def __mul__(self, other):
        if isinstance(other, Poly2):
            a, b = self.c, other.c
            out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
            for i in range(a.shape[0]):
                for j in range(a.shape[1]):
                    if a[i, j] != 0.0:
                        out[i:i + b.shape[0], j:j + b.shape[1]] += a[i, j] * b
            return Poly2(out)
        return Poly2(self.c * other)

    __rmul__ = __mul__

    def __add__(self, other):
        a, b = self.c, other.c
        out = np.zeros((max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1])))
        out[:a.shape[0], :a.shape[1]] += a
        out[:b.shape[0], :b.shape[1]] += b
        return Poly2(out)


def bump_poly(cs):
    """Polynomial vanishing on the boundary of the built-in shapes:
    1 - x1^2 - x2^2 on the disk, the product of edge factors on rectangles."""
    shape = cs.mesh.shape
    if shape == "disk":
        c = np.zeros((3, 3))
        c[0, 0] = 1.0
        c[2, 0] = -1.0
        c[0, 2] = -1.0
        return Poly2(c)
    if shape == "rectangle":
        v = cs.mesh.vertices
        a2 = v[:, 0].max() ** 2
        b2 = v[:, 1].max() ** 2
        return Poly2([[a2, 0.0, -1.0]]) * Poly2([[b2], [0.0], [-1.0]])
    raise ValueError("bump polynomial available for disk/rectangle shapes only")


def poly_velocity_qp(cs, polys):
    """Evaluate three scalar polynomials as a velocity field at quadrature
    points: returns (U, dU) with shapes (nc, nq, 3) and (nc, nq, 3, 2)."""
    x1, x2 = cs.xq[..., 0], cs.xq[..., 1]
    u = np.stack([p(x1, x2) for p in polys], axis=-1)
    du = np.stack([np.stack([p.dx1()(x1, x2), p.dx2()(x1, x2)], axis=-1)
                   for p in polys], axis=-2)
    return u, du


def random_bump_velocity_qp(cs, rng, degree=2):
    """Smooth random velocity vanishing on the boundary (bump * polynomial),
    evaluated at quadrature points."""
    b = bump_poly(cs)
    polys = [Poly2.random(rng, degree) * b for _ in range(3)]
    return poly_velocity_qp(cs, polys)


def stream_velocity_qp(cs, rng, degree=2):
    """Exactly weighted-divergence-free velocity at quadrature points:

        u1 = (1/B) d(psi)/dx2,  u2 = -(1/B) d(psi)/dx1,  psi = chi * bump^2,

    so div(B u) = 0 identically; u3 is a random bump field.  Both u and its
    gradient vanish on the boundary of the in-plane part.
    """
    b = bump_poly(cs)
    psi = Poly2.random(rng, degree) * b * b
    u3p = Poly2.random(rng, degree) * b
    x1, x2 = cs.xq[..., 0], cs.xq[..., 1]
    bw = cs.b
    d = cs.delta

    p1, p2 = psi.dx1(), psi.dx2()
    p11, p12, p22 = p1.dx1(), p1.dx2(), p2.dx2()
    v1 = p2(x1, x2) / bw
    v2 = -p1(x1, x2) / bw
    u = np.stack([v1, v2, u3p(x1, x2)], axis=-1)

    du = np.empty(u.shape + (2,))
    du[..., 0, 0] = p12(x1, x2) / bw
    du[..., 0, 1] = p22(x1, x2) / bw - d * p2(x1, x2) / bw ** 2
    du[..., 1, 0] = -p11(x1, x2) / bw
    du[..., 1, 1] = -p12(x1, x2) / bw + d * p1(x1, x2) / bw ** 2
    du[..., 2, 0] = u3p.dx1()(x1, x2)
    du[..., 2, 1] = u3p.dx2()(x1, x2)
    return u, du


def random_sym_tensor_poly(rng, degree=2, scale=1.0):
    """Six random polynomials as the components (S11, S22, S33, S12, S13, S23)
    of a smooth symmetric tensor field."""
    return [Poly2.random(rng, degree, scale) for _ in range(6)]


def sym_tensor_qp(cs, comps):
    """Evaluate polynomial tensor components at quadrature points:
    (nc, nq, 6)."""
    x1, x2 = cs.xq[..., 0], cs.xq[..., 1]
    return np.stack([p(x1, x2) for p in comps], axis=-1)


def div_b_tensor_qp(cs, comps):
    """Rows of div(B S) for a polynomial symmetric tensor S, at quadrature
    points: (nc, nq, 3) with row_i = d(B S_1i)/dx1 + d(B S_2i)/dx2."""
    x1, x2 = cs.xq[..., 0], cs.xq[..., 1]
    d = cs.delta
    bw = cs.b
    s11, s22, _, s12, s13, s23 = comps
    rows = []
    for c1, c2 in ((s11, s12), (s12, s22), (s13, s23)):
        val = (bw * (c1.dx1()(x1, x2) + c2.dx2()(x1, x2))
               + d * c2(x1, x2))
        rows.append(val)
    return np.stack(rows, axis=-1)
