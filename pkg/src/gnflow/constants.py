"""Explicit constants of the a-priori theory and the bound checks built on them.

Everything here is a closed-form function of the flow parameters
(p, Re, delta, G) and the cross-section data (area, m = sup 1/B,
n = sup B, b_l1 = integral of B); nothing requires a solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: classical Korn constant of the domain, ||D u||_p >= C_K1 ||grad u||_p on
#: W^{1,p}_0; exact (= 1/sqrt(2)) for p = 2 on any domain, used as a
#: conservative default for p != 2 on convex domains.
DEFAULT_KORN_C1 = 1.0 / np.sqrt(2.0)


def conjugate(q):
    return q / (q - 1.0)


def sobolev_constant(q, r, area):
    """Embedding constant S_{q,r} with ||u||_r <= S_{q,r} ||grad u||_q on
    boundary-vanishing fields, in its three parameter branches."""
    if q >= 2.0 and r >= q:
        return max(q, r / 2.0) / (2.0 * np.sqrt(2.0)) * area ** (0.5 + 1.0 / r - 1.0 / q)
    if 1.0 < q < 2.0:
        q_star = 2.0 * q / (2.0 - q)
        if 1.0 < r <= q:
            return q_star / (4.0 * np.sqrt(2.0)) * area ** (0.5 + 1.0 / r - 1.0 / q)
        if q < r <= q_star:
            return max(q, r / 2.0) / (2.0 * np.sqrt(2.0)) * area ** (0.5 + 1.0 / r - 1.0 / q)
    raise ValueError(f"(q, r) = ({q}, {r}) outside the admissible embedding ranges")


def sigma_constants(q, alpha, area):
    """Growth constants (D_{q,alpha}, E_{q,alpha}) controlling a forcing
    sigma with |sigma(s)| <= c0 |s|^alpha:

        |(sigma(u), v)|  <= c0 D ||grad u||_q^alpha ||grad v||_q
        ||sigma(u)||_q'  <= c0 E ||grad u||_2^alpha      (q >= 2)
        ||sigma(u)||_q'  <= c0 E ||grad u||_q^alpha      (3/2 <= q < 2)
    """
    if q >= 2.0:
        if alpha < 0.0:
            raise ValueError("alpha must be >= 0")
        qp = conjugate(q)
        d = (max(q / (2.0 * np.sqrt(2.0)), alpha * q / (4.0 * np.sqrt(2.0))) ** (alpha + 1.0)
             * area ** (1.0 / qp + (alpha + 1.0) / 2.0 - alpha / q))
        e = max(1.0 / np.sqrt(2.0), alpha / (2.0 * np.sqrt(2.0))) ** alpha * area ** (1.0 / qp)
        return d, e
    if 1.5 <= q < 2.0:
        qp = conjugate(q)
        q_star = 2.0 * q / (2.0 - q)
        if not 0.0 <= alpha <= q_star - 1.0:
            raise ValueError(f"alpha = {alpha} outside [0, q*-1] = [0, {q_star - 1.0}]")
        if not 1.0 / qp < alpha <= q_star / qp:
            raise ValueError(
                f"alpha = {alpha} outside (1/q', q*/q'] = ({1.0 / qp}, {q_star / qp}]")
        d = sobolev_constant(q, q_star, area) ** (alpha + 1.0)
        e = sobolev_constant(q, alpha * qp, area) ** alpha
        return d, e
    raise ValueError("q must be >= 3/2")


def sigma_alpha_window(p):
    """Admissible growth-exponent window (lo, hi) for the shear-thinning
    sigma-forced system, 1/p' < alpha < p*/(2 p')."""
    if not 1.5 <= p < 2.0:
        raise ValueError("window applies to 3/2 <= p < 2")
    pp = conjugate(p)
    p_star = 2.0 * p / (2.0 - p)
    return 1.0 / pp, p_star / (2.0 * pp)


@dataclass(frozen=True)
class KappaTable:
    """A-priori bound and uniqueness-threshold constants for the curved-pipe
    system at given (p, G, delta, domain).  ``regime`` is "thickening" for
    p >= 2 (where kappa4..kappa6 are unset) or "thinning" for 3/2 <= p < 2.
    ``re_unique``: weak solutions are unique for Re below it.
    ``conditional_on_korn``: True for entries that inherit the configured
    classical Korn constant.
    """

    p: float
    regime: str
    kappa1: float
    kappa2: float
    kappa3: float
    re_unique: float
    kappa4: float | None = None
    kappa5: float | None = None
    kappa6: float | None = None
    korn_c1: float = DEFAULT_KORN_C1
    korn_ck: float | None = None
    conditional_on_korn: bool = False

    def as_dict(self):
        out = {"p": self.p, "regime": self.regime, "kappa1": self.kappa1,
               "kappa2": self.kappa2, "kappa3": self.kappa3,
               "re_unique": self.re_unique}
        if self.regime == "thinning":
            out.update(kappa4=self.kappa4, kappa5=self.kappa5, kappa6=self.kappa6,
                       korn_c1=self.korn_c1, korn_ck=self.korn_ck)
        return out


def korn_curved_constant(p, delta, m, n, korn_c1=DEFAULT_KORN_C1):
    """Korn constant C_K for the curved operators,
    C_K ||grad* u||_{p,B} <= ||D* u||_{p,B}."""
    return korn_c1 * (n * m) ** (-1.0 / p) / (2.0 * (1.0 + delta * m))


def kappa_constants(params, cs, korn_c1=DEFAULT_KORN_C1):
    """Constant table for the a-priori estimates and uniqueness thresholds.

    params needs attributes p, g, delta; cs needs area, m, n, b_l1.
    """
    p = params.p
    g = abs(params.g)
    area, m, n, b_l1 = cs.area, cs.m, cs.n, cs.b_l1
    if p >= 2.0:
        kappa1 = np.sqrt(m / 2.0) * g * area
        kappa2 = m ** 1.5 * area / 2.0 * kappa1 ** 2
        kappa3 = n * m ** 1.5 * area ** 0.75
        re_unique = 2.0 / (kappa1 * kappa3) if kappa1 > 0 else np.inf
        return KappaTable(p=p, regime="thickening", kappa1=kappa1, kappa2=kappa2,
                          kappa3=kappa3, re_unique=re_unique)
    if p < 1.5:
        raise ValueError("constants are defined for p >= 3/2")
    pp = conjugate(p)
    kappa1 = m ** (1.0 / p) / 2.0 * g * area ** (1.0 / pp)
    bracket = b_l1 / (p - 1.0) + kappa1 ** pp
    kappa2 = kappa1 * bracket ** ((2.0 - p) / p)
    kappa3 = pp * b_l1 + (2.0 ** ((2.0 - p) / 2.0) * kappa1) ** pp
    kappa4 = 2.0 ** (2.0 - p) * (1.0 + params.delta * m) * kappa2
    s_p2pp = sobolev_constant(p, 2.0 * pp, area)
    c_k = korn_curved_constant(p, params.delta, m, n, korn_c1)
    kappa5 = (m ** (3.0 / p) / korn_c1 * s_p2pp ** 3 * kappa4 ** 2
              * bracket ** ((2.0 - p) / p))
    kappa6 = n * m ** (3.0 / p) / c_k ** 3 * s_p2pp ** 2
    re_unique = (1.0 / (2.0 * kappa1 * kappa6) * bracket ** (-2.0 * (2.0 - p) / p)
                 if kappa1 > 0 else np.inf)
    return KappaTable(p=p, regime="thinning", kappa1=kappa1, kappa2=kappa2,
                      kappa3=kappa3, kappa4=kappa4, kappa5=kappa5, kappa6=kappa6,
                      re_unique=re_unique, korn_c1=korn_c1, korn_ck=c_k,
                      conditional_on_korn=True)


@dataclass(frozen=True)
class DeanTable:
    """Bound constants for the flat sigma-forced approximation system."""

    p: float
    regime: str
    c1: float
    c2: float
    c3: float | None = None
    c4: float | None = None
    conditional_on_korn: bool = False

    def as_dict(self):
        out = {"p": self.p, "regime": self.regime, "c1": self.c1, "c2": self.c2}
        if self.regime == "thinning":
            out.update(c3=self.c3, c4=self.c4)
        return out


def dean_constants(params, cs, sigma, korn_c1=DEFAULT_KORN_C1):
    """Constants c1..c4 bounding solutions of the flat approximation system
    with forcing (G/B, delta*sigma(w3)); sigma needs attributes c0, alpha."""
    p = params.p
    g = abs(params.g)
    area, m = cs.area, cs.m
    if p >= 2.0:
        c1 = m * area * g / np.sqrt(2.0)
        d, _ = sigma_constants(2.0, sigma.alpha, area)
        c2 = d * c1 ** sigma.alpha / np.sqrt(2.0)
        return DeanTable(p=p, regime="thickening", c1=c1, c2=c2)
    pp = conjugate(p)
    lo, hi = sigma_alpha_window(p)
    if not lo < sigma.alpha < hi:
        raise ValueError(
            f"sigma growth exponent {sigma.alpha} outside the admissible "
            f"thinning window ({lo:.6g}, {hi:.6g}) for p = {p}")
    c1 = m * area ** (1.0 / pp) * g
    d, _ = sigma_constants(p, sigma.alpha, area)
    c2 = d / (2.0 * korn_c1)
    ex = (2.0 - p) * (sigma.alpha + 1.0) / p
    c3 = (c1 + sigma.c0 * c1 ** sigma.alpha * c2) * (1.0 + area) ** ex
    gap = 1.0 - (2.0 - p) * (sigma.alpha + 1.0)
    c4 = c3 * (1.0 / gap + c3 ** (1.0 / gap)) ** ex
    return DeanTable(p=p, regime="thinning", c1=c1, c2=c2, c3=c3, c4=c4,
                     conditional_on_korn=True)


@dataclass(frozen=True)
class BoundCheck:
    """One evaluated inequality: lhs <= rhs, margin = rhs - lhs."""

    claim: str
    statement: str
    lhs: float
    rhs: float
    conditional_on_korn: bool = False

    @property
    def passed(self) -> bool:
        # bound checks never fail from constant pessimism, only a genuine
        # violation beyond roundoff slack fails
        scale = max(abs(self.lhs), abs(self.rhs), 1.0)
        return self.lhs <= self.rhs + 1e-10 * scale

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def apriori_checks(params, cs, norms, korn_c1=DEFAULT_KORN_C1):
    """Evaluate the a-priori solution bounds for the full system.

    norms: dict with keys dstar_2B, dstar_pB, grad_u3_2B, grad_u3_pB,
    du_2B, du_pB (B-weighted norms of the solution).
    Returns (KappaTable, [BoundCheck, ...]).
    """
    kt = kappa_constants(params, cs, korn_c1)
    p, d_re = params.p, params.delta * params.re
    checks = []
    if kt.regime == "thickening":
        checks.append(BoundCheck(
            "apriori/thick/dstar-2B", "||D*u||_{2,B} <= kappa1",
            norms["dstar_2B"], kt.kappa1))
        checks.append(BoundCheck(
            "apriori/thick/dstar-pB", "||D*u||_{p,B} <= kappa1^(2/p)",
            norms["dstar_pB"], kt.kappa1 ** (2.0 / p)))
        checks.append(BoundCheck(
            "apriori/thick/grad-u3-2B", "||grad u3||_{2,B} <= sqrt(2) kappa1",
            norms["grad_u3_2B"], np.sqrt(2.0) * kt.kappa1))
        checks.append(BoundCheck(
            "apriori/thick/du-2B", "||Du||_{2,B} <= kappa2 delta Re",
            norms["du_2B"], kt.kappa2 * d_re))
        checks.append(BoundCheck(
            "apriori/thick/du-pB", "||Du||_{p,B} <= (kappa2 delta Re)^(2/p)",
            norms["du_pB"], (kt.kappa2 * d_re) ** (2.0 / p)))
    else:
        checks.append(BoundCheck(
            "apriori/thin/dstar-pB", "||D*u||_{p,B} <= kappa2",
            norms["dstar_pB"], kt.kappa2))
        checks.append(BoundCheck(
            "apriori/thin/dstar-pB-pow", "||D*u||_{p,B}^p <= kappa3",
            norms["dstar_pB"] ** p, kt.kappa3))
        checks.append(BoundCheck(
            "apriori/thin/grad-u3-pB", "||grad u3||_{p,B} <= kappa4",
            norms["grad_u3_pB"], kt.kappa4))
        checks.append(BoundCheck(
            "apriori/thin/du-pB", "||Du||_{p,B} <= kappa5 delta Re",
            norms["du_pB"], kt.kappa5 * d_re, conditional_on_korn=True))
    return kt, checks


def dean_checks(params, cs, sigma, norms, korn_c1=DEFAULT_KORN_C1):
    """Evaluate the solution bounds for the flat sigma-forced system.

    norms: dict with keys grad_w3_2, grad_w3_p, dw_2, dw_p (flat, unweighted).
    Returns (DeanTable, [BoundCheck, ...]).
    """
    dt = dean_constants(params, cs, sigma, korn_c1)
    p = params.p
    checks = []
    if dt.regime == "thickening":
        checks.append(BoundCheck(
            "sigma-system/thick/grad-w3-2", "||grad w3||_2 <= c1",
            norms["grad_w3_2"], dt.c1))
        checks.append(BoundCheck(
            "sigma-system/thick/grad-w3-p", "||grad w3||_p^p <= 2^((p-2)/2) c1^2",
            norms["grad_w3_p"] ** p, 2.0 ** ((p - 2.0) / 2.0) * dt.c1 ** 2))
        checks.append(BoundCheck(
            "sigma-system/thick/dw-2", "||Dw||_2 <= c0 c2 delta",
            norms["dw_2"], sigma.c0 * dt.c2 * params.delta))
        checks.append(BoundCheck(
            "sigma-system/thick/dw-p", "||Dw||_p^p <= (c0 c2 delta)^2",
            norms["dw_p"] ** p, (sigma.c0 * dt.c2 * params.delta) ** 2))
    else:
        ex = (2.0 - p) / p
        exa = (2.0 - p) * (sigma.alpha + 1.0) / p
        checks.append(BoundCheck(
            "sigma-system/thin/grad-w3-p",
            "||grad w3||_p <= c1 (|S| + c4^p)^((2-p)/p)",
            norms["grad_w3_p"], dt.c1 * (cs.area + dt.c4 ** p) ** ex,
            conditional_on_korn=True))
        checks.append(BoundCheck(
            "sigma-system/thin/dw-p",
            "||Dw||_p <= c0 c1^a c2 (|S| + c4^p)^((2-p)(a+1)/p) delta",
            norms["dw_p"],
            sigma.c0 * dt.c1 ** sigma.alpha * dt.c2
            * (cs.area + dt.c4 ** p) ** exa * params.delta,
            conditional_on_korn=True))
    return dt, checks
