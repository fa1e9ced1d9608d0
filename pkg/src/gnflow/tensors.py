"""Power-law extra-stress tensor on symmetric 3x3 arguments.

Symmetric tensors are stored as 6 components ``(d11, d22, d33, d12, d13,
d23)``; the scalar product counts off-diagonal entries twice so it agrees
with the full 3x3 Frobenius product.  The stress is

    stress(d) = 2 * (1 + gdot^2 |d|^2)^((p-2)/2) * d,

shear-thinning for p < 2, Newtonian for p = 2, shear-thickening for p > 2.
All functions broadcast over leading axes, so batches of tensors are checked
in one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: multiplicity of each stored component in the full 3x3 tensor
COMP_WEIGHTS = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])

_SLACK_FLOOR = 1e-12


@dataclass(frozen=True)
class PowerLawModel:
    """Constitutive exponent and characteristic shear rate."""

    p: float
    gamma_dot: float = 1.0

    def __post_init__(self):
        if not self.p > 1.0:
            raise ValueError("power-law exponent must satisfy p > 1")
        if not self.gamma_dot > 0.0:
            raise ValueError("characteristic shear rate must be positive")

    @property
    def regime(self) -> str:
        if self.p < 2.0:
            return "thinning"
        if self.p == 2.0:
            return "newtonian"
        return "thickening"


def dot(a, b):
    """Frobenius product of symmetric tensors in 6-component form."""
    return np.einsum("...m,...m,m->...", np.asarray(a), np.asarray(b), COMP_WEIGHTS)


def norm(a):
    return np.sqrt(dot(a, a))


def from_matrix(mat):
    """6-component form of a symmetric 3x3 matrix (symmetry enforced)."""
    mat = np.asarray(mat, dtype=float)
    if not np.allclose(mat, np.swapaxes(mat, -1, -2)):
        raise ValueError("matrix is not symmetric")
    return np.stack([mat[..., 0, 0], mat[..., 1, 1], mat[..., 2, 2],
                     mat[..., 0, 1], mat[..., 0, 2], mat[..., 1, 2]], axis=-1)


def to_matrix(c):
    c = np.asarray(c)
    mat = np.empty(c.shape[:-1] + (3, 3))
    mat[..., 0, 0] = c[..., 0]
    mat[..., 1, 1] = c[..., 1]
    mat[..., 2, 2] = c[..., 2]
    mat[..., 0, 1] = mat[..., 1, 0] = c[..., 3]
    mat[..., 0, 2] = mat[..., 2, 0] = c[..., 4]
    mat[..., 1, 2] = mat[..., 2, 1] = c[..., 5]
    return mat


def viscosity(norm_sq, p, gamma_dot=1.0):
    """Generalized viscosity 2(1 + gdot^2 s)^((p-2)/2) as a function of the
    squared tensor norm ``s``."""
    return 2.0 * (1.0 + gamma_dot ** 2 * np.asarray(norm_sq)) ** ((p - 2.0) / 2.0)


def stress(eta, model: PowerLawModel):
    """Extra stress of a symmetric tensor (6-component form)."""
    eta = np.asarray(eta, dtype=float)
    s = dot(eta, eta)
    return viscosity(s, model.p, model.gamma_dot)[..., None] * eta


def stress_jacobian(eta, xi, model: PowerLawModel):
    """Directional derivative of the stress at ``eta`` in direction ``xi``:

        2(1+g^2|eta|^2)^((p-2)/2) xi
        + 2(p-2) g^2 (1+g^2|eta|^2)^((p-4)/2) (eta:xi) eta.

    Linear in xi and symmetric: J[eta](xi):zeta = J[eta](zeta):xi.
    """
    eta = np.asarray(eta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    p, g = model.p, model.gamma_dot
    s = dot(eta, eta)
    base = 1.0 + g ** 2 * s
    lead = 2.0 * base ** ((p - 2.0) / 2.0)
    coef = 2.0 * (p - 2.0) * g ** 2 * base ** ((p - 4.0) / 2.0) * dot(eta, xi)
    return lead[..., None] * xi + coef[..., None] * eta


def _relative_slack(lhs, rhs):
    """Slack of the inequality lhs >= rhs, relative to the larger magnitude."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1.0e-300)
    return (lhs - rhs) / scale


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of the pointwise stress inequalities on a tensor batch.

    ``slacks`` maps inequality name -> worst relative slack over the batch;
    ``holds`` flags slack >= -1e-12.
    """

    p: float
    slacks: dict
    holds: dict

    @property
    def all_hold(self) -> bool:
        return all(self.holds.values())

    def violations(self) -> list:
        return [k for k, ok in self.holds.items() if not ok]


def _report(p, pairs):
    slacks = {k: float(np.min(_relative_slack(lhs, rhs))) for k, (lhs, rhs) in pairs.items()}
    holds = {k: s >= -_SLACK_FLOOR for k, s in slacks.items()}
    return PropertyReport(p=p, slacks=slacks, holds=holds)


def check_thickening_properties(eta, zeta, p):
    """Continuity, coercivity and monotonicity of the stress for p >= 2:

        |T(e)-T(z)| <= 2(p-1)(1+|e|^2+|z|^2)^((p-2)/2) |e-z|
        T(e):e >= 2|e|^2            T(e):e >= 2|e|^p
        (T(e)-T(z)):(e-z) >= |e-z|^2
        (T(e)-T(z)):(e-z) >= |e-z|^p / (2^(p-1)(p-1))

    Checked with the unit shear-rate scale.  The continuity constant carries
    the leading 2 of the stress law: (p-1) alone bounds the kernel
    (1+|.|^2)^((p-2)/2)(.) and is already violated at p = 2, where the sharp
    factor is exactly 2(p-1) = 2.
    """
    if p < 2.0:
        raise ValueError("thickening checks require p >= 2")
    model = PowerLawModel(p)
    eta = np.asarray(eta, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    te, tz = stress(eta, model), stress(zeta, model)
    diff = eta - zeta
    nd = norm(diff)
    ne2, nz2 = dot(eta, eta), dot(zeta, zeta)
    mono = dot(te - tz, diff)
    pairs = {
        "continuity": (2.0 * (p - 1.0) * (1.0 + ne2 + nz2) ** ((p - 2.0) / 2.0) * nd,
                       norm(te - tz)),
        "coercivity_2": (dot(te, eta), 2.0 * ne2),
        "coercivity_p": (dot(te, eta), 2.0 * ne2 ** (p / 2.0)),
        "monotonicity_2": (mono, nd ** 2),
        "monotonicity_p": (mono, nd ** p / (2.0 ** (p - 1.0) * (p - 1.0))),
    }
    return _report(p, pairs)


def check_thinning_properties(eta, zeta, p):
    """Continuity, coercivity and monotonicity of the stress for 1 < p < 2:

        |T(e)-T(z)| <= 2 C_p |e-z|^(p-1),   C_p = 1 + 2^((2-p)/2)
        T(e):e >= 2(1+|e|^2)^((p-2)/2) |e|^2
        (T(e)-T(z)):(e-z) >= 2(p-1)(1+|e|^2+|z|^2)^((p-2)/2) |e-z|^2

    As in the thickening case, C_p bounds the kernel without the leading 2
    of the stress law; the factor 2 restores the bound for the stress itself
    (and is the form the weighted L^{p'} continuity estimate relies on).
    """
    if not 1.0 < p < 2.0:
        raise ValueError("thinning checks require 1 < p < 2")
    model = PowerLawModel(p)
    eta = np.asarray(eta, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    te, tz = stress(eta, model), stress(zeta, model)
    diff = eta - zeta
    nd = norm(diff)
    ne2, nz2 = dot(eta, eta), dot(zeta, zeta)
    c_p = 1.0 + 2.0 ** ((2.0 - p) / 2.0)
    pairs = {
        "continuity": (2.0 * c_p * nd ** (p - 1.0), norm(te - tz)),
        "coercivity": (dot(te, eta), 2.0 * (1.0 + ne2) ** ((p - 2.0) / 2.0) * ne2),
        "monotonicity": (dot(te - tz, diff),
                         2.0 * (p - 1.0) * (1.0 + ne2 + nz2) ** ((p - 2.0) / 2.0) * nd ** 2),
    }
    return _report(p, pairs)


def check_properties(eta, zeta, p):
    """Dispatch to the thickening (p >= 2) or thinning (p < 2) suite."""
    if p >= 2.0:
        return check_thickening_properties(eta, zeta, p)
    return check_thinning_properties(eta, zeta, p)


def jacobian_fd_orders(rng, p, n_pairs=100, steps=(1e-2, 1e-3, 1e-4)):
    """Observed order of the central finite-difference error of
    :func:`stress_jacobian` over the given steps; returns (slope, errors)."""
    model = PowerLawModel(p)
    eta = rng.uniform(-1.0, 1.0, size=(n_pairs, 6))
    xi = rng.uniform(-1.0, 1.0, size=(n_pairs, 6))
    xi /= norm(xi)[..., None]
    errs = []
    exact = stress_jacobian(eta, xi, model)
    for h in steps:
        fd = (stress(eta + h * xi, model) - stress(eta - h * xi, model)) / (2.0 * h)
        errs.append(float(np.mean(norm(fd - exact))))
    slope = np.polyfit(np.log(steps), np.log(errs), 1)[0]
    return float(slope), errs
