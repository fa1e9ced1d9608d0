"""Curved-pipe differential operators at quadrature points, and the identity
/ estimate checks built on them.

Velocity inputs are either P2 coefficient arrays (``(num_nodes, 3)``) or
precomputed quadrature data ``(U, dU)`` with shapes ``(nc, nq, 3)`` and
``(nc, nq, 3, 2)``; everything downstream works on the latter, so analytic
(non-FE) fields plug into the same checks.

Tensor values use the 6-component convention of :mod:`gnflow.tensors`.
"""

from __future__ import annotations

import numpy as np

from . import tensors
from .constants import korn_curved_constant, DEFAULT_KORN_C1


def qp_data(cs, u):
    """Normalize a velocity input to (U, dU) quadrature data."""
    if isinstance(u, tuple):
        return u
    u = np.asarray(u)
    return cs.p2_values(u), cs.p2_gradients(u)


def grad_star_qp(cs, u):
    """Full (non-symmetric) curved gradient, (nc, nq, 3, 3).

    Rows 1-2 are the in-plane gradient (third column zero); row 3 is
    (d1 u3, d2 u3 - (delta/B) u3, (delta/B) u2).
    """
    uval, du = qp_data(cs, u)
    nc, nq = cs.b.shape
    g = np.zeros((nc, nq, 3, 3))
    g[..., :, :2] = du
    r = cs.delta / cs.b
    g[..., 2, 1] -= r * uval[..., 2]
    g[..., 2, 2] = r * uval[..., 1]
    return g


def d_star_qp(cs, u):
    """Symmetric part of the curved gradient in 6-component form
    (d11, d22, d33, d12, d13, d23), shape (nc, nq, 6)."""
    uval, du = qp_data(cs, u)
    r = cs.delta / cs.b
    d = np.empty(cs.b.shape + (6,))
    d[..., 0] = du[..., 0, 0]
    d[..., 1] = du[..., 1, 1]
    d[..., 2] = r * uval[..., 1]
    d[..., 3] = 0.5 * (du[..., 0, 1] + du[..., 1, 0])
    d[..., 4] = 0.5 * du[..., 2, 0]
    d[..., 5] = 0.5 * (du[..., 2, 1] - r * uval[..., 2])
    return d


def d_flat_qp(cs, u):
    """Flat symmetric gradient (all three components, no curvature terms)."""
    _, du = qp_data(cs, u)
    d = np.zeros(cs.b.shape + (6,))
    d[..., 0] = du[..., 0, 0]
    d[..., 1] = du[..., 1, 1]
    d[..., 3] = 0.5 * (du[..., 0, 1] + du[..., 1, 0])
    d[..., 4] = 0.5 * du[..., 2, 0]
    d[..., 5] = 0.5 * du[..., 2, 1]
    return d


def weighted_divergence_qp(cs, u):
    """(1/B) div(B u) = d1 u1 + d2 u2 + (delta/B) u2 at quadrature points."""
    uval, du = qp_data(cs, u)
    return du[..., 0, 0] + du[..., 1, 1] + cs.delta / cs.b * uval[..., 1]


def solution_norms(cs, u, p):
    """Norm table of a velocity field: curved/flat symmetric-gradient norms,
    axial-gradient norms and secondary-flow norms used by the bound checks."""
    uval, du = qp_data(cs, u)
    ds = d_star_qp(cs, (uval, du))
    df = d_flat_qp(cs, (uval, du))
    grad3 = du[..., 2, :]
    return {
        "dstar_2B": cs.tensor_lq_norm(ds, 2.0),
        "dstar_pB": cs.tensor_lq_norm(ds, p),
        "du_2B": cs.tensor_lq_norm(ds, 2.0, plane_only=True),
        "du_pB": cs.tensor_lq_norm(ds, p, plane_only=True),
        "du_2": cs.tensor_lq_norm(ds, 2.0, weighted=False, plane_only=True),
        "grad_u3_2B": cs.lq_norm(grad3, 2.0),
        "grad_u3_pB": cs.lq_norm(grad3, p),
        "u2_pB": cs.lq_norm(uval[..., 1], p),
        "dflat_2": cs.tensor_lq_norm(df, 2.0, weighted=False),
        "dflat_p": cs.tensor_lq_norm(df, p, weighted=False),
        "grad_w3_2": cs.lq_norm(grad3, 2.0, weighted=False),
        "grad_w3_p": cs.lq_norm(grad3, p, weighted=False),
        "dw_2": cs.tensor_lq_norm(df, 2.0, weighted=False, plane_only=True),
        "dw_p": cs.tensor_lq_norm(df, p, weighted=False, plane_only=True),
    }


# -- trilinear convective forms -------------------------------------------

def trilinear_a_star(cs, u, v, w, weighted_first=False, weighted_last=False):
    """Curved trilinear form (u . grad* v, w):

        a*(u, v, w) = (u . grad v, w) + (delta/B u3 v2, w3) - (delta/B u3 v3, w2),

    with the first (convecting) or last argument multiplied by B on request.
    The curvature terms carry the convecting field's axial component u3 (the
    covariant convective derivative; with v = u this is the momentum-equation
    operator, and the cancellation a*(Bu, v, v) = 0 for div(Bu) = 0 holds).
    """
    uval, _ = qp_data(cs, u)
    vval, dv = qp_data(cs, v)
    wval, _ = qp_data(cs, w)
    bu = cs.b if weighted_first else 1.0
    bw = cs.b if weighted_last else 1.0
    adv = np.einsum("...kx,...x->...k", dv, uval[..., :2])
    core = (adv * wval).sum(axis=-1)
    r = cs.delta / cs.b
    extra = r * uval[..., 2] * (vval[..., 1] * wval[..., 2] - vval[..., 2] * wval[..., 1])
    return cs.integrate(bu * bw * (core + extra))


def trilinear_a_flat(cs, u, v, w):
    """Flat trilinear form (u . grad v, w)."""
    uval, _ = qp_data(cs, u)
    _, dv = qp_data(cs, v)
    wval, _ = qp_data(cs, w)
    adv = np.einsum("...kx,...x->...k", dv, uval[..., :2])
    return cs.integrate((adv * wval).sum(axis=-1))


def a_star_skew(cs, u, v, w):
    """Skew-symmetrized discrete convective form

        a*_skew(u, v, w) = [a*(Bu, v, w) - a*(Bu, w, v)] / 2,

    identically antisymmetric in (v, w), hence a*_skew(u, v, v) = 0 even when
    the divergence constraint only holds weakly."""
    return 0.5 * (trilinear_a_star(cs, u, v, w, weighted_first=True)
                  - trilinear_a_star(cs, u, w, v, weighted_first=True))


# -- exact identities ------------------------------------------------------

def korn_identity_residual(cs, u):
    """(lhs - rhs, lhs) of the weighted Korn identity

        ||grad* u||_{2,B}^2 = 2 ||D* u||_{2,B}^2 - ||(1/B) div(B u)||_{2,B}^2

    for a boundary-vanishing field; residual is quadrature-level."""
    data = qp_data(cs, u)
    g = grad_star_qp(cs, data)
    ds = d_star_qp(cs, data)
    divb = weighted_divergence_qp(cs, data)
    lhs = cs.integrate(cs.b * (g ** 2).sum(axis=(-1, -2)))
    rhs = 2.0 * cs.tensor_lq_norm(ds, 2.0) ** 2 - cs.lq_norm(divb, 2.0) ** 2
    return lhs - rhs, lhs


def d_star_expansion_residual(cs, u):
    """Residual of the term-by-term expansion

        2||D*u||_{2,B}^2 = 2||Du||_{2,B}^2 + 2||(delta/B) u2||_{2,B}^2
                           + ||d1 u3||_{2,B}^2 + ||d2 u3 - (delta/B) u3||_{2,B}^2,

    which is pointwise exact."""
    uval, du = qp_data(cs, u)
    ds = d_star_qp(cs, (uval, du))
    r = cs.delta / cs.b
    lhs = 2.0 * cs.tensor_lq_norm(ds, 2.0) ** 2
    rhs = (2.0 * cs.tensor_lq_norm(ds, 2.0, plane_only=True) ** 2
           + 2.0 * cs.lq_norm(r * uval[..., 1], 2.0) ** 2
           + cs.lq_norm(du[..., 2, 0], 2.0) ** 2
           + cs.lq_norm(du[..., 2, 1] - r * uval[..., 2], 2.0) ** 2)
    return lhs - rhs, lhs


def divergence_duality_residual(cs, s_comps, phi):
    """Residual of the weak characterization of the curved tensor divergence,

        (S, B D* phi) = -(div* S, B phi)
                      = -(div(B S), phi) - delta (S23, phi3) + delta (S33, phi2)

    for a smooth symmetric tensor polynomial ``s_comps`` (see
    :mod:`gnflow.polyfields`) and a boundary-vanishing velocity ``phi``.
    Returns (mismatch, scale)."""
    from .polyfields import sym_tensor_qp, div_b_tensor_qp

    sval = sym_tensor_qp(cs, s_comps)
    phival, dphi = qp_data(cs, phi)
    ds_phi = d_star_qp(cs, (phival, dphi))
    lhs = cs.integrate(cs.b * tensors.dot(sval, ds_phi))
    divb = div_b_tensor_qp(cs, s_comps)
    rhs = -(cs.integrate((divb * phival).sum(axis=-1))
            + cs.delta * cs.integrate(sval[..., 5] * phival[..., 2])
            - cs.delta * cs.integrate(sval[..., 2] * phival[..., 1]))
    scale = max(cs.lq_norm(np.sqrt(np.maximum(tensors.dot(sval, sval), 0.0)), 2.0)
                * cs.lq_norm(phival, 2.0), 1e-300)
    return lhs - rhs, scale


def korn_inequality_check(cs, u, p, korn_c1=DEFAULT_KORN_C1):
    """Both sides of the curved L^p Korn inequality
    C_K ||grad* u||_{p,B} <= ||D* u||_{p,B}; returns (lhs, rhs, C_K)."""
    data = qp_data(cs, u)
    g = grad_star_qp(cs, data)
    ds = d_star_qp(cs, data)
    ck = korn_curved_constant(p, cs.delta, cs.m, cs.n, korn_c1)
    gp = cs.integrate(cs.b * ((g ** 2).sum(axis=(-1, -2))) ** (p / 2.0)) ** (1.0 / p)
    return ck * gp, cs.tensor_lq_norm(ds, p), ck


# -- weighted stress estimates on tensor fields ----------------------------

def _f_weighted(cs, lam, p):
    # (||B^(1/p)||_p + lam)^(p-2) with ||B^(1/p)||_p = b_l1^(1/p)
    return (cs.b_l1 ** (1.0 / p) + lam) ** (p - 2.0)


def _f_flat(cs, lam, p):
    return (cs.area ** (1.0 / p) + lam) ** (p - 2.0)


def check_weighted_stress_estimates(cs, f, g, p):
    """Integral continuity / coercivity / monotonicity estimates for the
    stress on tensor fields given per-point (nc, nq, 6); p >= 2:

        ||(1+|f|^2)^((p-2)/2) g||_{p',B} <= F_B(||f||_{p,B}) ||g||_{p,B}
        ||T(f)-T(g)||_{p',B} <= 2(p-1) F_B(||f||_{p,B}+||g||_{p,B}) ||f-g||_{p,B}
        (T(f), B f) >= 2||f||_{2,B}^2,   (T(f), B f) >= 2||f||_{p,B}^p
        (T(f)-T(g), B(f-g)) >= 2||f-g||_{2,B}^2
        (T(f)-T(g), B(f-g)) >= ||f-g||_{p,B}^p / (2^(p-1)(p-1))

    F_B(lam) = (||B^(1/p)||_p + lam)^(p-2).  The continuity constant carries
    the leading 2 of the stress law, as in the pointwise suite.
    Returns dict name -> (lhs, rhs) with the convention lhs <= rhs.
    """
    if p < 2.0:
        raise ValueError("p >= 2 required")
    pp = p / (p - 1.0)
    model = tensors.PowerLawModel(p)
    tf, tg = tensors.stress(f, model), tensors.stress(g, model)
    nf, ng = cs.tensor_lq_norm(f, p), cs.tensor_lq_norm(g, p)
    kern = (1.0 + tensors.dot(f, f)) ** ((p - 2.0) / 2.0)
    kg = kern[..., None] * g
    mono = cs.integrate(cs.b * tensors.dot(tf - tg, f - g))
    dn2 = cs.tensor_lq_norm(f - g, 2.0)
    dnp = cs.tensor_lq_norm(f - g, p)
    return {
        "continuity-kernel": (cs.tensor_lq_norm(kg, pp), _f_weighted(cs, nf, p) * ng),
        "continuity-stress": (cs.tensor_lq_norm(tf - tg, pp),
                              2.0 * (p - 1.0) * _f_weighted(cs, nf + ng, p) * dnp),
        "coercivity-2": (2.0 * cs.tensor_lq_norm(f, 2.0) ** 2,
                         cs.integrate(cs.b * tensors.dot(tf, f))),
        "coercivity-p": (2.0 * nf ** p, cs.integrate(cs.b * tensors.dot(tf, f))),
        "monotonicity-2": (2.0 * dn2 ** 2, mono),
        "monotonicity-p": (dnp ** p / (2.0 ** (p - 1.0) * (p - 1.0)), mono),
    }


def check_thinning_stress_estimates(cs, f, g, p):
    """Thinning (3/2 <= p < 2) integral estimates; the kernel continuity
    requires |g| <= |f| pointwise (caller's generator must enforce it):

        ||(1+|f|^2)^((p-2)/2) g||_{p',B} <= ||g||_{p,B}^(p-1)   if |g| <= |f|
        ||T(f)-T(g)||_{p',B} <= 2 C_p ||f-g||_{p,B}^(p-1)
        (T(f), B f) >= 2||f||_{p,B}^2 / (||B||_1 + ||f||_{p,B}^p)^((2-p)/p)
        (T(f)-T(g), B(f-g)) >=
            2(p-1)||f-g||_{p,B}^2 / (||B||_1 + ||f||^p + ||g||^p)^((2-p)/p)
    """
    if not 1.0 < p < 2.0:
        raise ValueError("1 < p < 2 required")
    if not np.all(tensors.dot(g, g) <= tensors.dot(f, f) * (1.0 + 1e-12) + 1e-300):
        raise ValueError("kernel continuity needs |g| <= |f| pointwise")
    pp = p / (p - 1.0)
    model = tensors.PowerLawModel(p)
    tf, tg = tensors.stress(f, model), tensors.stress(g, model)
    nf, ng = cs.tensor_lq_norm(f, p), cs.tensor_lq_norm(g, p)
    kern = (1.0 + tensors.dot(f, f)) ** ((p - 2.0) / 2.0)
    kg = kern[..., None] * g
    c_p = 1.0 + 2.0 ** ((2.0 - p) / 2.0)
    mono = cs.integrate(cs.b * tensors.dot(tf - tg, f - g))
    dnp = cs.tensor_lq_norm(f - g, p)
    return {
        "continuity-kernel": (cs.tensor_lq_norm(kg, pp), ng ** (p - 1.0)),
        "continuity-stress": (cs.tensor_lq_norm(tf - tg, pp), 2.0 * c_p * dnp ** (p - 1.0)),
        "coercivity": (2.0 * nf ** 2 / (cs.b_l1 + nf ** p) ** ((2.0 - p) / p),
                       cs.integrate(cs.b * tensors.dot(tf, f))),
        "monotonicity": (2.0 * (p - 1.0) * dnp ** 2
                         / (cs.b_l1 + nf ** p + ng ** p) ** ((2.0 - p) / p), mono),
    }


def check_divergence_difference(cs, f, p):
    """Norm gap between curved and flat divergences of the stress of a tensor
    field f (per-point values; no derivatives enter):

      p >= 2:      ||div* T(f) - div T(f)||_p' <=
                       4 delta m F_1(||f||_p)(||f||_p + ||f33||_p + ||f23||_p)
      3/2<=p<2:    ... <= 4 delta m (||f||_p^(p-1) + ||f33||_p^(p-1)
                                     + ||f23||_p^(p-1))

    where f under the norms on the right is the in-plane 2x2 block.
    Returns (lhs, rhs)."""
    pp = p / (p - 1.0)
    model = tensors.PowerLawModel(p)
    tf = tensors.stress(f, model)
    r = cs.delta / cs.b
    gap = np.stack([r * tf[..., 3],
                    r * (tf[..., 1] - tf[..., 2]),
                    2.0 * r * tf[..., 5]], axis=-1)
    lhs = cs.lq_norm(gap, pp, weighted=False)
    n_plane = cs.tensor_lq_norm(f, p, weighted=False, plane_only=True)
    n33 = cs.lq_norm(np.abs(f[..., 2]), p, weighted=False)
    n23 = cs.lq_norm(np.abs(f[..., 5]), p, weighted=False)
    if p >= 2.0:
        nf = cs.tensor_lq_norm(f, p, weighted=False)
        rhs = 4.0 * cs.delta * cs.m * _f_flat(cs, nf, p) * (n_plane + n33 + n23)
    else:
        rhs = 4.0 * cs.delta * cs.m * (n_plane ** (p - 1.0) + n33 ** (p - 1.0)
                                       + n23 ** (p - 1.0))
    return lhs, rhs


def pointwise_dstar_dominates(cs, u):
    """min over quadrature points of |D*u|^2 - |Du|^2 (>= 0 always: the
    curved tensor extends the in-plane block by extra squared entries)."""
    ds = d_star_qp(cs, qp_data(cs, u))
    full = tensors.dot(ds, ds)
    plane = ds[..., 0] ** 2 + ds[..., 1] ** 2 + 2.0 * ds[..., 3] ** 2
    return float((full - plane).min())
