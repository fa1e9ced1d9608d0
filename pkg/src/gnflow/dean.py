"""Flat sigma-forced approximation system and the curvature-ratio studies.

The approximation problem keeps the straight-pipe operators and moves every
curvature effect into the forcing

    -div(T(Dw)) + Re w.grad w + grad pi = (G/B) a3 + delta sigma(w3) a2,
    div w = 0,  w = 0 on the boundary,

with a configurable scalar forcing sigma obeying |sigma(s)| <= c0 |s|^alpha.
The classical secondary-flow closure is sigma(s) = Re s^2; shear-thinning
runs need the growth exponent inside the admissible window (see
``SigmaSpec.dean_default``), where the solution bounds and the
delta-approximation rates are guaranteed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .assembly import Assembler
from .constants import dean_checks, sigma_alpha_window, DEFAULT_KORN_C1
from .operators import d_flat_qp, qp_data, solution_norms
from .solver import (FlowParams, SolverOptions, SolveReport, _mixed_solve,
                     _report_for_solution, solve_full)


@dataclass(frozen=True)
class SigmaSpec:
    """Scalar forcing with power-law growth control.

    evaluator: vectorized s -> sigma(s); c0, alpha: the growth envelope
    |sigma(s)| <= c0 |s|^alpha.  ``validate_growth`` samples the envelope on
    [-10, 10] (advisory: a failure raises, catching mistyped envelopes).
    """

    evaluator: Callable
    c0: float
    alpha: float
    name: str = "custom"

    def __post_init__(self):
        if self.c0 <= 0:
            raise ValueError("growth constant c0 must be positive")
        if self.alpha < 0:
            raise ValueError("growth exponent alpha must be >= 0")

    def __call__(self, s):
        return self.evaluator(s)

    def validate_growth(self, n_samples=10_000, span=10.0):
        s = np.linspace(-span, span, n_samples)
        bound = self.c0 * np.abs(s) ** self.alpha
        bad = np.abs(self.evaluator(s)) > bound * (1.0 + 1e-9) + 1e-12
        if bad.any():
            worst = s[np.argmax(np.abs(self.evaluator(s)) - bound)]
            raise ValueError(
                f"sigma {self.name!r} violates |sigma| <= c0 |s|^alpha "
                f"near s = {worst:.4g}")
        return True

    @classmethod
    def dean(cls, re):
        """Classical secondary-flow forcing sigma(s) = Re s^2."""
        re = float(re)
        return cls(evaluator=lambda s: re * np.asarray(s) ** 2,
                   c0=max(re, 1e-300), alpha=2.0, name="dean")

    @classmethod
    def power(cls, c0, alpha, name=None):
        """Odd power forcing sigma(s) = c0 sign(s) |s|^alpha."""
        c0, alpha = float(c0), float(alpha)

        def ev(s):
            s = np.asarray(s, dtype=float)
            return c0 * np.sign(s) * np.abs(s) ** alpha

        return cls(evaluator=ev, c0=max(c0, 1e-300), alpha=alpha,
                   name=name or f"power-{alpha:g}")

    @classmethod
    def dean_default(cls, params):
        """The default forcing for a given run: Re s^2 for p >= 2; for
        shear-thinning runs the quadratic growth exponent is inadmissible,
        so the same-family odd power with alpha at the midpoint of the
        admissible window is used."""
        if params.p >= 2.0:
            return cls.dean(params.re)
        lo, hi = sigma_alpha_window(params.p)
        return cls.power(params.re, 0.5 * (lo + hi), name="dean-thinning")


def solve_dean(params: FlowParams, cs, sigma: SigmaSpec,
               opts: SolverOptions | None = None):
    """Galerkin solve of the flat approximation system; the sigma forcing is
    lagged (fixed point), everything else iterates as in the full solver.

    Returns (w, pressure, report); the report carries the sigma-system bound
    checks with the module constants.
    """
    opts = opts or SolverOptions()
    if params.p < 2.0:
        lo, hi = sigma_alpha_window(params.p)
        if not lo < sigma.alpha < hi:
            raise ValueError(
                f"thinning run needs growth exponent in ({lo:.4g}, {hi:.4g}); "
                f"sigma {sigma.name!r} has alpha = {sigma.alpha}")
    t0 = time.perf_counter()
    asm = Assembler(cs, "flat")
    x, info, msg = _mixed_solve(asm, params, cs, opts, "flat", sigma=sigma)
    w, pcoef, _ = asm.unpack(x)
    rep = _dean_report(params, cs, sigma, opts, w, pcoef, info, t0, msg)
    return w, pcoef, rep


def _dean_report(params, cs, sigma, opts, w, pcoef, info, t0, msg):
    ok, iters, hist, _ = info
    rep = SolveReport(converged=ok, iterations=iters,
                      residuals=[float(h) for h in hist],
                      wall_time=time.perf_counter() - t0, message=msg)
    norms = solution_norms(cs, w, params.p)
    pp = params.p / (params.p - 1.0)
    norms["pressure_pprime"] = cs.lq_norm(cs.p1_values(pcoef), pp, weighted=False)
    rep.norms = norms
    dt, checks = dean_checks(params, cs, sigma, norms, opts.korn_c1)
    rep.kappa = dt.as_dict()
    rep.bounds = checks
    rep.flags = {
        "unidirectional": norms["dw_2"] <= 1e-8,
        "all_bounds_pass": all(c.passed for c in checks),
        "sigma": sigma.name,
    }
    return rep


def _fit_slope(deltas, values):
    """Log-log least-squares slope, ignoring zero values."""
    d = np.asarray(deltas, dtype=float)
    v = np.asarray(values, dtype=float)
    mask = v > 0
    if mask.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(d[mask]), np.log(v[mask]), 1)[0])


@dataclass
class DeltaApproxStudy:
    """Observed approximation rates of the full system by the flat one."""

    params: FlowParams
    sigma_name: str
    re_cap: float
    deltas: list = field(default_factory=list)
    diff_d2: list = field(default_factory=list)
    diff_dp: list = field(default_factory=list)
    norm_du_2b: list = field(default_factory=list)
    norm_dw_2: list = field(default_factory=list)
    slope_d2: float = float("nan")
    slope_dp: float = float("nan")
    order_d2_expected: float = float("nan")
    order_dp_expected: float = float("nan")
    monotone: bool = True
    complete: bool = True
    failures: list = field(default_factory=list)

    def rows(self):
        for i, d in enumerate(self.deltas):
            yield {
                "p": self.params.p, "re": self.params.re, "delta": d,
                "de": np.sqrt(d) * self.params.re,
                "norm_Du_2B": self.norm_du_2b[i], "norm_Dw_2": self.norm_dw_2[i],
                "diff_D2": self.diff_d2[i], "diff_Dp": self.diff_dp[i],
                "slope_D2": self.slope_d2, "slope_Dp": self.slope_dp,
            }


def delta_approx_study(params, cs, sigma, deltas, opts=None):
    """Solve the curved system and the flat approximation on one mesh per
    curvature ratio, and fit the decay rate of ||D(u - w)||.

    Guaranteed orders (lower bounds on the observed slope): delta^(p'/2) in
    the 2-norm and delta^(p'/p) in the p-norm for p >= 2; delta^(p-1) in the
    p-norm for 3/2 <= p < 2.  The small-Reynolds hypothesis is surrogated by
    half the uniqueness threshold, reported as ``re_cap``.
    """
    opts = opts or SolverOptions()
    deltas = sorted(deltas, reverse=True)
    if not deltas or deltas[0] > 0.3 or min(deltas) <= 0:
        raise ValueError("curvature ratios must lie in (0, 0.3], decreasing")
    from .constants import kappa_constants
    kt = kappa_constants(params.replace(delta=max(deltas)), cs)
    re_cap = 0.5 * kt.re_unique
    if params.re > re_cap:
        raise ValueError(
            f"Re = {params.re:g} above the small-Reynolds surrogate {re_cap:g}")
    p = params.p
    pp = p / (p - 1.0)
    study = DeltaApproxStudy(
        params=params, sigma_name=sigma.name, re_cap=re_cap,
        order_d2_expected=pp / 2.0 if p >= 2 else float("nan"),
        order_dp_expected=pp / p if p >= 2 else p - 1.0)
    for d in deltas:
        csd = cs.with_delta(d)
        pd = params.replace(delta=d)
        u, _, rep_u = solve_full(pd, csd, opts)
        w, _, rep_w = solve_dean(pd, csd, sigma, opts)
        if not (rep_u.converged and rep_w.converged):
            study.complete = False
            study.failures.append(d)
            break
        diff = u - w
        dcomp = d_flat_qp(csd, diff)
        study.deltas.append(d)
        study.diff_d2.append(csd.tensor_lq_norm(dcomp, 2.0, weighted=False))
        study.diff_dp.append(csd.tensor_lq_norm(dcomp, p, weighted=False))
        study.norm_du_2b.append(rep_u.norms["du_2B"])
        study.norm_dw_2.append(rep_w.norms["dw_2"])
    study.slope_d2 = _fit_slope(study.deltas, study.diff_d2)
    study.slope_dp = _fit_slope(study.deltas, study.diff_dp)
    if len(study.diff_dp) >= 2 and study.diff_dp[0] < study.diff_dp[1]:
        study.monotone = False
    return study


@dataclass
class DeanScalingStudy:
    """Secondary-flow magnitude against the curvature ratio and the bound
    ||Du||_{2,B} <= kappa2 delta Re."""

    p: float
    rows: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)   # re -> slope of log||Du|| vs log delta
    all_bounds_hold: bool = True
    complete: bool = True


def dean_scaling_study(params, cs, res, deltas, opts=None):
    """Sweep (Re, delta), recording the secondary-flow norm, its ratio to the
    guaranteed bound, and per-Re log-log slopes in delta."""
    opts = opts or SolverOptions()
    from .constants import kappa_constants
    study = DeanScalingStudy(p=params.p)
    for re in res:
        logs = []
        for d in deltas:
            csd = cs.with_delta(d)
            pd = params.replace(re=re, delta=d)
            kt = kappa_constants(pd, csd)
            u, _, rep = solve_full(pd, csd, opts)
            if not rep.converged:
                study.complete = False
                continue
            du = rep.norms["du_2B"]
            kap = kt.kappa2 if kt.regime == "thickening" else kt.kappa5
            bound = kap * d * re
            ratio = du / bound if bound > 0 else 0.0
            if bound > 0 and du > bound * (1 + 1e-10):
                study.all_bounds_hold = False
            study.rows.append({
                "p": params.p, "re": re, "delta": d, "de": np.sqrt(d) * re,
                "norm_Du_2B": du, "bound": bound, "bound_ratio": ratio,
            })
            if d > 0 and du > 0:
                logs.append((d, du))
        if len(logs) >= 2:
            dd, vv = zip(*logs)
            study.slopes[re] = _fit_slope(dd, vv)
    return study
